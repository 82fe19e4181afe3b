//! Runs identity checks over every pattern within the particle budget.

use interfere_core::combinat::{enumerate_subsets, subvectors};
use interfere_core::identities::{
    check_classical_convolution_with, check_corollary1, check_lemma2_with, check_muir, check_single_mode_bunching_with,
    check_sum_difference_system_with, check_theorem1_with, check_theorem2, check_three_particle_with,
    check_two_particle_with, IdentityReport,
};
use interfere_core::parallel::try_map_ordered;
use interfere_core::transition::{conserving_pairs, TransitionTable};
use interfere_core::{Budget, OccupationVector, PatternPair, SubsetIndex, UnitaryMatrix};

use crate::error::{CliError, CliResult, Flag};
use crate::render::Record;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Identity {
    Lemma2,
    Theorem1,
    Theorem2,
    Corollary1,
    Muir,
    ClassicalConvolution,
    TwoParticle,
    ThreeParticle,
    SumDifference,
    SingleModeBunching,
}

impl Identity {
    pub const ALL: [Identity; 10] = [
        Identity::Lemma2,
        Identity::Theorem1,
        Identity::Theorem2,
        Identity::Corollary1,
        Identity::Muir,
        Identity::ClassicalConvolution,
        Identity::TwoParticle,
        Identity::ThreeParticle,
        Identity::SumDifference,
        Identity::SingleModeBunching,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::Lemma2 => "lemma2",
            Identity::Theorem1 => "theorem1",
            Identity::Theorem2 => "theorem2",
            Identity::Corollary1 => "corollary1",
            Identity::Muir => "muir",
            Identity::ClassicalConvolution => "classical-convolution",
            Identity::TwoParticle => "two-particle",
            Identity::ThreeParticle => "three-particle",
            Identity::SumDifference => "sum-difference",
            Identity::SingleModeBunching => "single-mode-bunching",
        }
    }

    fn needs_table(self) -> bool {
        !matches!(self, Identity::Theorem2 | Identity::Corollary1 | Identity::Muir)
    }
}

/// Parses `all` or a comma-separated list of names into the canonical order.
pub fn parse_suite(text: &str) -> CliResult<Vec<Identity>> {
    let mut chosen = Vec::new();
    for name in text.split(',').map(str::trim) {
        if name == "all" {
            chosen.extend(Identity::ALL);
            continue;
        }
        match Identity::ALL.iter().find(|id| id.name() == name) {
            Some(id) => chosen.push(*id),
            None => {
                let known: Vec<&str> = Identity::ALL.iter().map(|id| id.name()).collect();
                return Err(CliError::input(format!(
                    "--suite: unknown identity `{name}`; expected `all` or any of {}",
                    known.join(", ")
                )));
            }
        }
    }
    chosen.sort();
    chosen.dedup();
    Ok(chosen)
}

fn records(
    modes: usize,
    input: Option<&OccupationVector>,
    output: Option<&OccupationVector>,
    reports: Vec<IdentityReport>,
) -> Vec<Record> {
    reports
        .into_iter()
        .map(|report| Record { modes, input: input.cloned(), output: output.cloned(), report })
        .collect()
}

fn indicator(modes: &[usize], dim: usize) -> OccupationVector {
    OccupationVector::indicator(&SubsetIndex::new(modes.to_vec(), dim).expect("modes in range"))
}

/// Every check of `suite` on `u`, with patterns of at most `max_particles`
/// particles, in suite order and then pattern order.
pub fn run_suite(u: &UnitaryMatrix, suite: &[Identity], max_particles: usize) -> CliResult<Vec<Record>> {
    let n = u.dim();
    let caps = Budget::default();
    let pairs = conserving_pairs(n, max_particles, &caps).flag("--budget")?;
    let table = if suite.iter().any(|id| id.needs_table()) {
        Some(TransitionTable::build(u, max_particles, &caps).flag("--budget")?)
    } else {
        None
    };
    let mut out = Vec::new();
    for &id in suite {
        let batch: Vec<Vec<Record>> = match id {
            Identity::Lemma2 => {
                let src = table.as_ref().expect("table built");
                try_map_ordered(&pairs, |p| {
                    check_lemma2_with(src, p).map(|r| records(n, Some(&p.input), Some(&p.output), vec![r]))
                })
                .flag("--suite lemma2")?
            }
            Identity::Theorem1 => {
                let src = table.as_ref().expect("table built");
                try_map_ordered(&pairs, |p| {
                    check_theorem1_with(src, p).map(|r| records(n, Some(&p.input), Some(&p.output), vec![r]))
                })
                .flag("--suite theorem1")?
            }
            Identity::Theorem2 => try_map_ordered(&pairs, |p| {
                check_theorem2(u.matrix(), p).map(|r| records(n, Some(&p.input), Some(&p.output), vec![r]))
            })
            .flag("--suite theorem2")?,
            Identity::Corollary1 => vec![records(n, None, None, vec![check_corollary1(u.matrix()).flag("--suite corollary1")?])],
            Identity::Muir => vec![records(n, None, None, vec![check_muir(u.matrix()).flag("--suite muir")?])],
            Identity::ClassicalConvolution => {
                let src = table.as_ref().expect("table built");
                let splits: Vec<(PatternPair, OccupationVector)> = pairs
                    .iter()
                    .flat_map(|p| {
                        subvectors(&p.input)
                            .into_iter()
                            .filter(|j| j.total() > 0 && j.total() < p.input.total())
                            .map(move |j| (p.clone(), j))
                    })
                    .collect();
                try_map_ordered(&splits, |(p, j)| {
                    check_classical_convolution_with(src, p, j).map(|mut r| {
                        r.identity_name = format!("{}:{}", r.identity_name, j.token());
                        records(n, Some(&p.input), Some(&p.output), vec![r])
                    })
                })
                .flag("--suite classical-convolution")?
            }
            Identity::TwoParticle => {
                let src = table.as_ref().expect("table built");
                let subsets = if max_particles >= 2 { enumerate_subsets(n, 2) } else { Vec::new() };
                let combos: Vec<(&SubsetIndex, &SubsetIndex)> =
                    subsets.iter().flat_map(|a| subsets.iter().map(move |b| (a, b))).collect();
                try_map_ordered(&combos, |(a, b)| {
                    let (i, o) = (a.indices(), b.indices());
                    check_two_particle_with(src, (i[0], i[1]), (o[0], o[1]))
                        .map(|r| records(n, Some(&indicator(i, n)), Some(&indicator(o, n)), r))
                })
                .flag("--suite two-particle")?
            }
            Identity::ThreeParticle => {
                let src = table.as_ref().expect("table built");
                let subsets = if max_particles >= 3 { enumerate_subsets(n, 3) } else { Vec::new() };
                let combos: Vec<(&SubsetIndex, &SubsetIndex)> =
                    subsets.iter().flat_map(|a| subsets.iter().map(move |b| (a, b))).collect();
                try_map_ordered(&combos, |(a, b)| {
                    let (i, o) = (a.indices(), b.indices());
                    check_three_particle_with(src, [i[0], i[1], i[2]], [o[0], o[1], o[2]])
                        .map(|r| records(n, Some(&indicator(i, n)), Some(&indicator(o, n)), r))
                })
                .flag("--suite three-particle")?
            }
            Identity::SumDifference => {
                let src = table.as_ref().expect("table built");
                let mut batch = Vec::new();
                let mut seen = 0;
                for upto in 1..=n.min(4).min(max_particles) {
                    let reports = check_sum_difference_system_with(src, upto).flag("--suite sum-difference")?;
                    let leading = indicator(&(0..upto).collect::<Vec<_>>(), n);
                    batch.push(records(n, Some(&leading), Some(&leading), reports[seen..].to_vec()));
                    seen = reports.len();
                }
                batch
            }
            Identity::SingleModeBunching => {
                let src = table.as_ref().expect("table built");
                let cases: Vec<(usize, usize)> =
                    (1..=max_particles).flat_map(|k| (0..n).map(move |m| (k, m))).collect();
                try_map_ordered(&cases, |&(k, m)| {
                    let bunched = OccupationVector::single_mode(n, m, k);
                    check_single_mode_bunching_with(src, k, m).map(|r| records(n, Some(&bunched), Some(&bunched), r))
                })
                .flag("--suite single-mode-bunching")?
            }
        };
        out.extend(batch.into_iter().flatten());
    }
    Ok(out)
}
