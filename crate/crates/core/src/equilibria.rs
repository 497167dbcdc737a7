//! Synchronized equilibria of the rotating-frame system.
//!
//! Every equilibrium belongs to a sign pattern sigma in {-1, +1}^n selecting,
//! per oscillator, the principal or flipped arcsin branch. With
//!
//! ```text
//! chi^s(xi)    = (1/n) sum_i s_i sqrt(1 - ((2i-n-1) xi / (n-1))^2),
//! chibar^s(xi) = xi / (+-beta - xi chi^s(xi)),      beta = (n-1) nu / (pK),
//! ```
//!
//! the equilibria for gain b1 are exactly the solutions xi in (0, 1] of
//! pK/b1 = chibar^s(xi), the sign chosen by the sign of pK chi^s(xi) + b1.
//! Root finding clears denominators: on the + branch the roots solve
//! g(xi) = (n-1) nu - xi (pK chi^s(xi) + b1) = 0, on the - branch
//! h(xi) = (n-1) nu + xi (pK chi^s(xi) + b1) = 0; both forms are pole-free
//! and enforce the branch sign automatically at their roots.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{rotating_vector_field, ModelParams};

/// Residual bound every solved equilibrium must satisfy.
pub const RESIDUAL_LIMIT: f64 = 1e-9;

/// Largest n for exhaustive enumeration over all 2^n patterns.
pub const MAX_ENUMERATION_NODES: usize = 20;

/// A sign pattern sigma in {-1, +1}^n.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignPattern {
    signs: Vec<i8>,
}

impl SignPattern {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.len() < 3 {
            return Err(Error::InvalidParameter("sign pattern needs n >= 3".into()));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("sign entries must be +-1".into()));
        }
        Ok(SignPattern { signs })
    }

    pub fn all_plus(n: usize) -> Self {
        SignPattern { signs: vec![1; n] }
    }

    pub fn all_minus(n: usize) -> Self {
        SignPattern { signs: vec![-1; n] }
    }

    /// Pattern from the low n bits of `mask`; bit i set means sigma_{i+1} = +1.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        SignPattern {
            signs: (0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.signs.len()
    }

    pub fn sign(&self, i: usize) -> f64 {
        self.signs[i] as f64
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Global flip -sigma.
    pub fn flipped(&self) -> Self {
        SignPattern { signs: self.signs.iter().map(|s| -s).collect() }
    }

    /// Swaps the entries at positions i and n-1-i (0-based).
    pub fn mirror_swapped(&self, i: usize) -> Self {
        let mut signs = self.signs.clone();
        signs.swap(i, self.signs.len() - 1 - i);
        SignPattern { signs }
    }

    pub fn count_minus(&self) -> usize {
        self.signs.iter().filter(|&&s| s < 0).count()
    }

    pub fn is_all_plus(&self) -> bool {
        self.count_minus() == 0
    }
}

impl std::fmt::Display for SignPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &s in &self.signs {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for SignPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let signs = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(Error::InvalidParameter(format!("bad sign character {c:?}"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        SignPattern::new(signs)
    }
}

/// Which sign is taken in the chibar denominator, i.e. the sign of
/// pK chi^s(xi) + b1 at the equilibrium.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchSign {
    Plus,
    Minus,
}

impl BranchSign {
    pub fn value(&self) -> f64 {
        match self {
            BranchSign::Plus => 1.0,
            BranchSign::Minus => -1.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            BranchSign::Plus => "+",
            BranchSign::Minus => "-",
        }
    }
}

/// One solved equilibrium.
#[derive(Clone, Debug)]
pub struct EquilibriumRecord {
    pub sigma: SignPattern,
    /// Root xi in (0, 1] of the branch equation.
    pub xi: f64,
    /// C_D^sigma = chi^sigma(xi); equals (1/n) sum cos v_i by construction.
    pub c_d: f64,
    pub branch: BranchSign,
    /// Rotating-frame phase vector.
    pub v: Vec<f64>,
    /// Sup-norm of the rotating vector field at v.
    pub residual: f64,
    /// True when xi sits at the xi = 1 endpoint (pitchfork coincidence).
    pub boundary: bool,
}

fn coeff(i: usize, n: usize) -> f64 {
    (2 * (i as i64 + 1) - n as i64 - 1) as f64 / (n as f64 - 1.0)
}

/// chi^sigma(xi) = (1/n) sum_i sigma_i sqrt(1 - ((2i-n-1) xi/(n-1))^2).
pub fn chi(sigma: &SignPattern, xi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::InvalidParameter(format!("xi = {xi} outside [0, 1]")));
    }
    let n = sigma.n();
    let mut acc = 0.0;
    for i in 0..n {
        let s = coeff(i, n) * xi;
        acc += sigma.sign(i) * (1.0 - s * s).max(0.0).sqrt();
    }
    Ok(acc / n as f64)
}

/// chibar^sigma(xi) = xi / (+-beta - xi chi^sigma(xi)).
///
/// Signals a pole when the denominator magnitude drops below 1e-14.
pub fn chibar(sigma: &SignPattern, xi: f64, params: &ModelParams, branch: BranchSign) -> Result<f64> {
    let denom = branch.value() * params.beta() - xi * chi(sigma, xi)?;
    if denom.abs() < 1e-14 {
        return Err(Error::ChibarPole { xi, denom });
    }
    Ok(xi / denom)
}

/// Scan grid on (0, 1]: 4096 uniform points plus geometric tails toward both
/// endpoints (chibar derivatives blow up at xi = 1; large gains put roots at
/// tiny xi).
pub fn xi_grid() -> Vec<f64> {
    let mut grid = Vec::with_capacity(4096 + 64);
    for j in (12..=44).rev() {
        grid.push(2f64.powi(-j));
    }
    for k in 1..=4096u32 {
        grid.push(k as f64 / 4096.0);
    }
    for j in 12..=44 {
        grid.push(1.0 - 2f64.powi(-j));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    grid
}

/// Branch equation whose zeros are the equilibrium xi values:
/// +: (n-1)nu - xi (pK chi + b1), -: (n-1)nu + xi (pK chi + b1).
fn branch_equation(sigma: &SignPattern, params: &ModelParams, branch: BranchSign, xi: f64) -> f64 {
    let lead = (params.n as f64 - 1.0) * params.nu();
    let c = chi(sigma, xi).expect("xi within [0,1]");
    lead - branch.value() * xi * (params.p_k() * c + params.b1)
}

/// Precomputed sqrt(1 - (c_i xi)^2) factors of chi over a grid. The factors
/// do not depend on sigma, so one table serves all 2^n patterns of an
/// enumeration.
struct ChiTable {
    grid: Vec<f64>,
    n: usize,
    /// grid.len() x n, row-major.
    terms: Vec<f64>,
}

impl ChiTable {
    fn new(n: usize, grid: Vec<f64>) -> Self {
        let mut terms = Vec::with_capacity(grid.len() * n);
        for &xi in &grid {
            for i in 0..n {
                let s = coeff(i, n) * xi;
                terms.push((1.0 - s * s).max(0.0).sqrt());
            }
        }
        ChiTable { grid, n, terms }
    }

    fn chi_at(&self, sigma: &SignPattern, k: usize) -> f64 {
        let row = &self.terms[k * self.n..(k + 1) * self.n];
        let mut acc = 0.0;
        for (i, t) in row.iter().enumerate() {
            acc += sigma.sign(i) * t;
        }
        acc / self.n as f64
    }
}

fn bisect_root(
    f: &impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    f_lo: f64,
) -> f64 {
    let mut sign_lo = f_lo.signum();
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == sign_lo {
            lo = mid;
            sign_lo = fm.signum();
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for the maximum of f on [lo, hi].
pub(crate) fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// All roots of the branch equation on (0, 1], including tangent double roots
/// resolved by refining interior extrema of the equation between grid points.
fn scan_branch(sigma: &SignPattern, params: &ModelParams, branch: BranchSign, table: &ChiTable) -> Vec<f64> {
    let grid = &table.grid[..];
    let lead = (params.n as f64 - 1.0) * params.nu();
    let f = |xi: f64| branch_equation(sigma, params, branch, xi);
    let values: Vec<f64> = grid
        .iter()
        .enumerate()
        .map(|(k, &xi)| {
            lead - branch.value() * xi * (params.p_k() * table.chi_at(sigma, k) + params.b1)
        })
        .collect();
    let mut roots: Vec<f64> = Vec::new();
    let mut bracketed = vec![false; grid.len()]; // interval k = [grid[k], grid[k+1]]

    for k in 0..grid.len() - 1 {
        if values[k] == 0.0 {
            roots.push(grid[k]);
            bracketed[k] = true;
        } else if values[k].signum() != values[k + 1].signum() && values[k + 1] != 0.0 {
            roots.push(bisect_root(&f, grid[k], grid[k + 1], values[k]));
            bracketed[k] = true;
        }
    }
    if *values.last().unwrap() == 0.0 {
        roots.push(*grid.last().unwrap());
    }

    // A pair of roots can hide between grid points near a saddle-node
    // tangency: look for interior extrema whose refined value crosses zero.
    for k in 1..grid.len() - 1 {
        let dl = values[k] - values[k - 1];
        let dr = values[k + 1] - values[k];
        if dl * dr >= 0.0 || bracketed[k - 1] || bracketed[k] {
            continue;
        }
        let maximum = dl > 0.0;
        let g = |x: f64| if maximum { f(x) } else { -f(x) };
        let (x_ext, g_ext) = golden_max(&g, grid[k - 1], grid[k + 1], 1e-13);
        let f_ext = if maximum { g_ext } else { -g_ext };
        if f_ext == 0.0 {
            roots.push(x_ext);
        } else if f_ext.signum() != values[k - 1].signum() {
            roots.push(bisect_root(&f, grid[k - 1], x_ext, values[k - 1]));
            roots.push(bisect_root(&f, x_ext, grid[k + 1], f_ext));
        }
    }

    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    roots
}

/// Phase vector v^sigma for a root xi on the given branch:
/// phi_i = +-arcsin((2i-n-1) xi/(n-1)), then
/// v_i = phi_i (sigma_i = +1), pi - phi_i (sigma_i = -1, phi_i >= 0),
/// -phi_i - pi (sigma_i = -1, phi_i < 0).
pub fn build_phase_vector(sigma: &SignPattern, xi: f64, branch: BranchSign) -> Vec<f64> {
    let n = sigma.n();
    (0..n)
        .map(|i| {
            // clamp absorbs rounding at xi = 1
            let arg = (coeff(i, n) * xi).clamp(-1.0, 1.0);
            let phi = branch.value() * arg.asin();
            if sigma.sign(i) > 0.0 {
                phi
            } else if phi >= 0.0 {
                std::f64::consts::PI - phi
            } else {
                -phi - std::f64::consts::PI
            }
        })
        .collect()
}

/// Solves all equilibria of one sign pattern at the parameters' gain b1.
///
/// Returns every root xi in (0, 1] across both branch signs, sorted by xi;
/// an empty list is a valid outcome (no equilibrium for this pattern).
pub fn solve_equilibrium(sigma: &SignPattern, params: &ModelParams) -> Result<Vec<EquilibriumRecord>> {
    params.validate()?;
    if sigma.n() != params.n {
        return Err(Error::DimensionMismatch { expected: params.n, got: sigma.n() });
    }
    if params.b1 == 0.0 {
        return Err(Error::InvalidParameter(
            "b1 = 0 admits one-parameter equilibrium families; the pattern solver needs b1 != 0".into(),
        ));
    }
    let table = ChiTable::new(params.n, xi_grid());
    solve_with_table(sigma, params, &table)
}

fn solve_with_table(
    sigma: &SignPattern,
    params: &ModelParams,
    table: &ChiTable,
) -> Result<Vec<EquilibriumRecord>> {
    let mut records = Vec::new();
    for branch in [BranchSign::Plus, BranchSign::Minus] {
        for xi in scan_branch(sigma, params, branch, table) {
            let v = build_phase_vector(sigma, xi, branch);
            let field = rotating_vector_field(&v, params)?;
            let residual = field.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if residual >= RESIDUAL_LIMIT {
                return Err(Error::ResidualCheck { residual, limit: RESIDUAL_LIMIT });
            }
            records.push(EquilibriumRecord {
                sigma: sigma.clone(),
                xi,
                c_d: chi(sigma, xi)?,
                branch,
                v,
                residual,
                boundary: 1.0 - xi < 1e-9,
            });
        }
    }
    records.sort_by(|a, b| a.xi.partial_cmp(&b.xi).unwrap());
    Ok(records)
}

/// Solves every sign pattern sigma in {-1, +1}^n and concatenates the
/// records, ordered by pattern mask then xi.
pub fn enumerate_equilibria(params: &ModelParams) -> Result<Vec<EquilibriumRecord>> {
    params.validate()?;
    if params.b1 == 0.0 {
        return Err(Error::InvalidParameter("enumeration needs b1 != 0".into()));
    }
    let n = params.n;
    if n > MAX_ENUMERATION_NODES {
        return Err(Error::EnumerationBudget { n, max: MAX_ENUMERATION_NODES });
    }
    let table = ChiTable::new(n, xi_grid());
    let per_mask: Vec<Result<Vec<EquilibriumRecord>>> = (0..1u64 << n)
        .into_par_iter()
        .map(|mask| solve_with_table(&SignPattern::from_mask(mask, n), params, &table))
        .collect();
    let mut all = Vec::new();
    for recs in per_mask {
        all.extend(recs?);
    }
    Ok(all)
}

/// Per-pattern root multiplicity of an enumeration result.
pub fn multiplicity(records: &[EquilibriumRecord]) -> Vec<(SignPattern, usize)> {
    let mut counts: Vec<(SignPattern, usize)> = Vec::new();
    for rec in records {
        match counts.iter_mut().find(|(s, _)| s == &rec.sigma) {
            Some((_, c)) => *c += 1,
            None => counts.push((rec.sigma.clone(), 1)),
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(n: usize, a: f64, p_k: f64, b1: f64) -> ModelParams {
        // fold pK into k with p = 1
        ModelParams::new(n, a, p_k, 1.0, b1, 1.0, 1.0, 0).unwrap()
    }

    #[test]
    fn chi_all_plus_at_zero_is_one() {
        let s = SignPattern::all_plus(7);
        assert_eq!(chi(&s, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn chi_all_plus_n3_at_one() {
        let s = SignPattern::all_plus(3);
        assert!((chi(&s, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn chi_rejects_outside_domain() {
        let s = SignPattern::all_plus(4);
        assert!(chi(&s, -0.1).is_err());
        assert!(chi(&s, 1.1).is_err());
    }

    proptest! {
        #[test]
        fn chi_flips_sign_with_sigma(mask in 0u64..256, xi in 0.0f64..=1.0) {
            let s = SignPattern::from_mask(mask, 8);
            let a = chi(&s, xi).unwrap();
            let b = chi(&s.flipped(), xi).unwrap();
            prop_assert!((a + b).abs() < 1e-15);
        }
    }

    #[test]
    fn chibar_vanishes_at_small_xi() {
        let p = params(5, 1.0, 0.5, 0.2);
        let s = SignPattern::all_plus(5);
        let v = chibar(&s, 1e-9, &p, BranchSign::Plus).unwrap();
        assert!(v.abs() < 1e-8);
    }

    #[test]
    fn chibar_bounded_when_beta_large() {
        // beta = 0.8 > max xi chi for n=5, a=1, pK=0.5
        let p = params(5, 1.0, 0.5, 0.2);
        let s = SignPattern::all_plus(5);
        for k in 1..=1000 {
            let xi = k as f64 / 1000.0;
            let v = chibar(&s, xi, &p, BranchSign::Plus).unwrap();
            assert!(v.is_finite() && v > 0.0);
        }
    }

    #[test]
    fn chibar_pole_when_beta_small() {
        // n=4, beta = 3 nu / pK = 0.1 with a = 1, pK = 3.75
        let p = params(4, 1.0, 3.75, 0.2);
        assert!((p.beta() - 0.1).abs() < 1e-15);
        let s = SignPattern::all_plus(4);
        let mut saw_pole_side = false;
        let mut prev = 0.0;
        for k in 1..=4096 {
            let xi = k as f64 / 4096.0;
            match chibar(&s, xi, &p, BranchSign::Plus) {
                Err(Error::ChibarPole { .. }) => {
                    saw_pole_side = true;
                    break;
                }
                Ok(v) => {
                    if prev > 0.0 && v < 0.0 {
                        saw_pole_side = true; // denominator crossed zero between grid points
                        break;
                    }
                    prev = v;
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(saw_pole_side, "expected a pole in (0,1) at beta = 0.1");
    }

    #[test]
    fn solve_all_plus_single_root_small_gain() {
        let p = params(5, 1.0, 0.5, 0.2);
        let recs = solve_equilibrium(&SignPattern::all_plus(5), &p).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].residual < RESIDUAL_LIMIT);
        assert_eq!(recs[0].branch, BranchSign::Plus);
        assert!(recs[0].xi > 0.0 && recs[0].xi < 1.0);
    }

    #[test]
    fn solve_rejects_zero_gain() {
        let p = params(5, 1.0, 0.5, 0.0);
        assert!(solve_equilibrium(&SignPattern::all_plus(5), &p).is_err());
    }

    #[test]
    fn large_gain_every_pattern_has_root_at_small_xi() {
        let n = 6;
        let p = params(n, 1.0, 0.5, 1e3);
        let xi_expect = (n as f64 - 1.0) * p.nu() / p.b1;
        for mask in 0..1u64 << n {
            let s = SignPattern::from_mask(mask, n);
            let recs = solve_equilibrium(&s, &p).unwrap();
            assert!(!recs.is_empty(), "no root for {s}");
            let rel = (recs[0].xi - xi_expect).abs() / xi_expect;
            assert!(rel < 1e-2, "xi = {} vs {}", recs[0].xi, xi_expect);
        }
    }

    #[test]
    fn mirror_swap_pairing_shares_c_d() {
        // pairing: swapping (sigma_i, sigma_{n+1-i}) = (-1, +1) leaves C_D
        let n = 6;
        let p = params(n, 1.0, 0.5, 2.0);
        let s = "-+++++".parse::<SignPattern>().unwrap();
        let swapped = s.mirror_swapped(0);
        assert_eq!(swapped.to_string(), "+++++-");
        let r1 = solve_equilibrium(&s, &p).unwrap();
        let r2 = solve_equilibrium(&swapped, &p).unwrap();
        assert_eq!(r1.len(), r2.len());
        assert!(!r1.is_empty());
        for (a, b) in r1.iter().zip(&r2) {
            assert!((a.c_d - b.c_d).abs() < 1e-12);
            assert!((a.xi - b.xi).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn records_satisfy_defining_identities(mask in 0u64..64, b1_mil in 50u32..5000) {
            // every solved record, across patterns and gains: zero sine sum,
            // C_D consistent with the phase vector, residual within bound
            let b1 = b1_mil as f64 / 1000.0;
            let p = params(6, 1.0, 0.5, b1);
            let sigma = SignPattern::from_mask(mask, 6);
            for rec in solve_equilibrium(&sigma, &p).unwrap() {
                let sin_sum: f64 = rec.v.iter().map(|x| x.sin()).sum();
                prop_assert!(sin_sum.abs() < 1e-9);
                let cos_mean: f64 = rec.v.iter().map(|x| x.cos()).sum::<f64>() / 6.0;
                prop_assert!((cos_mean - rec.c_d).abs() < 1e-9);
                prop_assert!(rec.residual < RESIDUAL_LIMIT);
                prop_assert!(rec.xi > 0.0 && rec.xi <= 1.0);
            }
        }
    }

    #[test]
    fn record_invariants_hold_on_census() {
        let p = params(4, 1.0, 0.5, 2.0);
        let recs = enumerate_equilibria(&p).unwrap();
        assert_eq!(recs.len(), 16);
        for rec in &recs {
            let sin_sum: f64 = rec.v.iter().map(|x| x.sin()).sum();
            assert!(sin_sum.abs() < 1e-9, "sum sin = {sin_sum:e}");
            let cos_mean: f64 = rec.v.iter().map(|x| x.cos()).sum::<f64>() / 4.0;
            assert!((cos_mean - rec.c_d).abs() < 1e-9);
            assert!(rec.residual < RESIDUAL_LIMIT);
        }
    }

    #[test]
    fn census_n3_has_eight_records() {
        let p = params(3, 1.0, 0.5, 2.0);
        let recs = enumerate_equilibria(&p).unwrap();
        assert_eq!(recs.len(), 8);
        let mult = multiplicity(&recs);
        assert_eq!(mult.len(), 8);
        assert!(mult.iter().all(|(_, c)| *c == 1));
    }

    #[test]
    fn enumeration_budget_enforced() {
        let p = params(21, 1.0, 0.5, 2.0);
        assert!(matches!(enumerate_equilibria(&p), Err(Error::EnumerationBudget { .. })));
    }

    #[test]
    fn sign_pattern_parsing_roundtrip() {
        let s: SignPattern = "+-+".parse().unwrap();
        assert_eq!(s.to_string(), "+-+");
        assert!("+x-".parse::<SignPattern>().is_err());
        assert!("++".parse::<SignPattern>().is_err());
    }
}
