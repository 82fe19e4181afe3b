//! `--matrix` specifications.

use std::path::PathBuf;

use interfere_core::matrix::{
    balanced_beamsplitter, fourier_matrix, haar_random_unitary, permutation_matrix, random_unit_disk_matrix,
    validate_unitary, DEFAULT_UNITARY_TOL,
};
use interfere_core::{Budget, ComplexMatrix, UnitaryMatrix};

use crate::error::{CliError, CliResult, Flag};

const FLAG: &str = "--matrix";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatrixSpec {
    File(PathBuf),
    Fourier(usize),
    Beamsplitter,
    /// 0-based output mode for each input mode.
    Permutation(Vec<usize>),
    Haar(usize, Option<u64>),
    /// Entries uniform in the unit disk; not unitary.
    Random(usize, Option<u64>),
}

fn parse_dim(text: &str, what: &str) -> CliResult<usize> {
    match text.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(CliError::input(format!("{FLAG}: {what} needs a positive mode count, got `{text}`"))),
    }
}

fn parse_sized(rest: &str, what: &str) -> CliResult<(usize, Option<u64>)> {
    let (n, seed) = match rest.split_once(':') {
        Some((n, seed)) => {
            let seed = seed
                .parse::<u64>()
                .map_err(|_| CliError::input(format!("{FLAG}: `{seed}` is not a valid {what} seed")))?;
            (n, Some(seed))
        }
        None => (rest, None),
    };
    Ok((parse_dim(n, what)?, seed))
}

impl MatrixSpec {
    pub fn parse(text: &str) -> CliResult<Self> {
        let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
        match kind {
            "beamsplitter" if rest.is_empty() => Ok(MatrixSpec::Beamsplitter),
            "fourier" => Ok(MatrixSpec::Fourier(parse_dim(rest, "fourier")?)),
            "haar" => parse_sized(rest, "haar").map(|(n, s)| MatrixSpec::Haar(n, s)),
            "random" => parse_sized(rest, "random").map(|(n, s)| MatrixSpec::Random(n, s)),
            "permutation" => {
                let targets = rest
                    .split(',')
                    .map(|t| match t.trim().parse::<usize>() {
                        Ok(v) if v >= 1 => Ok(v - 1),
                        _ => Err(CliError::input(format!("{FLAG}: permutation target `{t}` is not a 1-based mode"))),
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                Ok(MatrixSpec::Permutation(targets))
            }
            "file" if !rest.is_empty() => Ok(MatrixSpec::File(PathBuf::from(rest))),
            _ if text.ends_with(".json") => Ok(MatrixSpec::File(PathBuf::from(text))),
            _ => Err(CliError::input(format!(
                "{FLAG}: unrecognized matrix `{text}`; expected file:PATH, fourier:N, beamsplitter, \
                 permutation:T1,T2,..., haar:N[:SEED] or random:N[:SEED]"
            ))),
        }
    }

    /// The matrix as specified, without any unitarity check.
    pub fn load_raw(&self, default_seed: u64) -> CliResult<ComplexMatrix> {
        Ok(match self {
            MatrixSpec::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::input(format!("{FLAG}: cannot read {}: {e}", path.display())))?;
                ComplexMatrix::from_json(&text).flag(FLAG)?
            }
            MatrixSpec::Fourier(n) => fourier_matrix(*n).into_inner(),
            MatrixSpec::Beamsplitter => balanced_beamsplitter().into_inner(),
            MatrixSpec::Permutation(targets) => permutation_matrix(targets).flag(FLAG)?.into_inner(),
            MatrixSpec::Haar(n, seed) => haar_random_unitary(*n, seed.unwrap_or(default_seed)).into_inner(),
            MatrixSpec::Random(n, seed) => random_unit_disk_matrix(*n, seed.unwrap_or(default_seed)),
        })
    }

    /// The matrix after the unitarity gate and the mode cap.
    pub fn load_unitary(&self, default_seed: u64) -> CliResult<UnitaryMatrix> {
        let cap = Budget::default().max_modes;
        let declared = match self {
            MatrixSpec::Fourier(n) | MatrixSpec::Haar(n, _) => *n,
            MatrixSpec::Permutation(targets) => targets.len(),
            _ => 0,
        };
        if declared > cap {
            return Err(CliError::budget(format!("{FLAG}: {declared} modes exceed the limit of {cap}")));
        }
        let unitary = match self {
            MatrixSpec::Fourier(n) => fourier_matrix(*n),
            MatrixSpec::Beamsplitter => balanced_beamsplitter(),
            MatrixSpec::Haar(n, seed) => haar_random_unitary(*n, seed.unwrap_or(default_seed)),
            MatrixSpec::Permutation(targets) => permutation_matrix(targets).flag(FLAG)?,
            _ => validate_unitary(self.load_raw(default_seed)?, DEFAULT_UNITARY_TOL).flag(FLAG)?,
        };
        if unitary.dim() > cap {
            return Err(CliError::budget(format!("{FLAG}: {} modes exceed the limit of {cap}", unitary.dim())));
        }
        Ok(unitary)
    }
}
