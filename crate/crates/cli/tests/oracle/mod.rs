//! Brute-force reference implementations that share no code with the library:
//! permanents and determinants by explicit permutation sums, and classical
//! probabilities by enumerating every particle-to-mode assignment.

#![allow(dead_code)]

use interfere_core::{Complex64, ComplexMatrix};

/// All permutations of `0..n` with their parities (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<(Vec<usize>, bool)> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut odd = false;
    let mut out = vec![(perm.clone(), odd)];
    let mut c = vec![0; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            odd = !odd;
            out.push((perm.clone(), odd));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn sum_over_permutations(a: &[Vec<Complex64>], signed: bool) -> Complex64 {
    let n = a.len();
    let mut total = Complex64::new(0.0, 0.0);
    for (perm, odd) in permutations(n) {
        let mut prod = Complex64::new(1.0, 0.0);
        for (row, &col) in perm.iter().enumerate() {
            prod *= a[row][col];
        }
        total += if signed && odd { -prod } else { prod };
    }
    total
}

pub fn permanent(a: &[Vec<Complex64>]) -> Complex64 {
    sum_over_permutations(a, false)
}

pub fn determinant(a: &[Vec<Complex64>]) -> Complex64 {
    sum_over_permutations(a, true)
}

pub fn rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.rows()).map(|r| (0..m.cols()).map(|c| m[(r, c)]).collect()).collect()
}

fn expand(counts: &[usize]) -> Vec<usize> {
    counts.iter().enumerate().flat_map(|(mode, &k)| std::iter::repeat(mode).take(k)).collect()
}

fn factorial_product(counts: &[usize]) -> f64 {
    counts.iter().map(|&k| (1..=k).product::<usize>() as f64).product()
}

fn pick(u: &ComplexMatrix, rows: &[usize], cols: &[usize]) -> Vec<Vec<Complex64>> {
    rows.iter().map(|&r| cols.iter().map(|&c| u[(r, c)]).collect()).collect()
}

/// `|per U[n, i]|^2 / (n! i!)`, rows indexed by output modes.
pub fn boson(u: &ComplexMatrix, input: &[usize], output: &[usize]) -> f64 {
    let (cols, rows) = (expand(input), expand(output));
    if cols.len() != rows.len() {
        return 0.0;
    }
    permanent(&pick(u, &rows, &cols)).norm_sqr() / (factorial_product(input) * factorial_product(output))
}

pub fn fermion(u: &ComplexMatrix, input: &[usize], output: &[usize]) -> f64 {
    if input.iter().chain(output).any(|&k| k > 1) {
        return 0.0;
    }
    let (cols, rows) = (expand(input), expand(output));
    if cols.len() != rows.len() {
        return 0.0;
    }
    determinant(&pick(u, &rows, &cols)).norm_sqr()
}

/// Each distinguishable particle independently lands in output mode `r` with
/// probability `|U_{r,s}|^2`; sums every assignment whose counts equal `output`.
pub fn classical(u: &ComplexMatrix, input: &[usize], output: &[usize]) -> f64 {
    let sources = expand(input);
    let dim = u.rows();
    if sources.len() != output.iter().sum::<usize>() {
        return 0.0;
    }
    let mut total = 0.0;
    let mut target = vec![0usize; sources.len()];
    loop {
        let mut counts = vec![0usize; dim];
        for &t in &target {
            counts[t] += 1;
        }
        if counts == output {
            total += sources.iter().zip(&target).map(|(&s, &t)| u[(t, s)].norm_sqr()).product::<f64>();
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == target.len() {
                return total;
            }
            target[pos] += 1;
            if target[pos] < dim {
                break;
            }
            target[pos] = 0;
            pos += 1;
        }
    }
}

/// Every occupation vector of `dim` modes holding `total` particles.
pub fn occupations(dim: usize, total: usize) -> Vec<Vec<usize>> {
    if dim == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in occupations(dim - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All vectors `v` with `0 <= v <= cap` componentwise.
pub fn below(cap: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &c in cap {
        out = out.into_iter().flat_map(|prefix| (0..=c).map(move |k| [prefix.clone(), vec![k]].concat())).collect();
    }
    out
}

/// The complementarity sum evaluated from the brute-force probabilities.
pub fn complementarity_sum(u: &ComplexMatrix, input: &[usize], output: &[usize]) -> f64 {
    let binary = |cap: &[usize]| below(&cap.iter().map(|&c| c.min(1)).collect::<Vec<_>>());
    let minus = |a: &[usize], b: &[usize]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>();
    let mut total = 0.0;
    for j in binary(input) {
        for k in binary(output) {
            let size: usize = j.iter().sum();
            if size != k.iter().sum::<usize>() {
                continue;
            }
            let sign = if size % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * fermion(u, &j, &k) * boson(u, &minus(input, &j), &minus(output, &k));
        }
    }
    total
}
