//! Saddle-node and pitchfork bifurcations of the equilibrium branches.
//!
//! With b1 as the control parameter, a branch for pattern sigma is the curve
//! b1 = pK / chibar^sigma(xi). Interior local extrema of chibar mark
//! saddle-nodes (maximum: supercritical, minimum: subcritical); the xi = 1
//! endpoint carries the pitchfork where the four patterns differing in
//! sigma_1, sigma_n coincide, with criticality read off the one-sided slope
//! of chibar for the mixed pattern sigma^{+-}.

use crate::equilibria::{build_phase_vector, chi, chibar, golden_max, solve_equilibrium, BranchSign, SignPattern};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::spectra::{classify, default_zero_tol, jacobian, sym_eigenvalues, StabilityClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BifurcationKind {
    SaddleNode,
    Pitchfork,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criticality {
    Supercritical,
    Subcritical,
}

impl Criticality {
    pub fn label(&self) -> &'static str {
        match self {
            Criticality::Supercritical => "supercritical",
            Criticality::Subcritical => "subcritical",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BifurcationPoint {
    pub kind: BifurcationKind,
    pub sigma: SignPattern,
    /// Location of the extremum (saddle-node) or 1 (pitchfork).
    pub xi_star: f64,
    /// Critical gain pK / chibar^sigma(xi_star).
    pub b1_star: f64,
    pub criticality: Criticality,
}

/// Outcome of the no-equilibrium check for b1 = 0:
/// holds iff beta > max_{xi in [0,1]} xi chi^sigma(xi) with sigma all +1.
#[derive(Clone, Copy, Debug)]
pub struct NoEquilibriumCheck {
    pub holds: bool,
    pub beta: f64,
    pub max_xi_chi: f64,
}

/// Evaluates the non-existence condition by grid scan with golden-section
/// refinement of the maximum of xi chi(xi).
pub fn no_equilibrium_condition(params: &ModelParams) -> NoEquilibriumCheck {
    let sigma = SignPattern::all_plus(params.n);
    let f = |xi: f64| xi * chi(&sigma, xi).expect("xi in [0,1]");
    let grid = crate::equilibria::xi_grid();
    let mut best_k = 0;
    let mut best = f64::NEG_INFINITY;
    for (k, &xi) in grid.iter().enumerate() {
        let v = f(xi);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let lo = if best_k == 0 { 0.0 } else { grid[best_k - 1] };
    let hi = if best_k + 1 == grid.len() { 1.0 } else { grid[best_k + 1] };
    let (_, max_xi_chi) = golden_max(&f, lo, hi, 1e-12);
    let max_xi_chi = max_xi_chi.max(best);
    let beta = params.beta();
    NoEquilibriumCheck { holds: beta > max_xi_chi, beta, max_xi_chi }
}

/// Numerator of d(chibar)/d(xi): +-beta + xi^2 d(chi)/d(xi). Under the
/// non-existence condition (all-plus pattern, + branch) it decreases
/// monotonically from beta to -infinity, giving the unique saddle-node.
pub fn chibar_derivative_numerator(
    sigma: &SignPattern,
    xi: f64,
    params: &ModelParams,
    branch: BranchSign,
) -> f64 {
    let n = sigma.n();
    let mut dchi = 0.0;
    for i in 0..n {
        let c = (2 * (i as i64 + 1) - n as i64 - 1) as f64 / (n as f64 - 1.0);
        let s = c * xi;
        let root = (1.0 - s * s).max(f64::MIN_POSITIVE).sqrt();
        dchi -= sigma.sign(i) * c * c * xi / root;
    }
    dchi /= n as f64;
    branch.value() * params.beta() + xi * xi * dchi
}

/// Pole-free segments of the chibar denominator over the grid.
fn segments(sigma: &SignPattern, params: &ModelParams, branch: BranchSign, grid: &[f64]) -> Vec<(usize, usize)> {
    let den = |xi: f64| branch.value() * params.beta() - xi * chi(sigma, xi).expect("xi in [0,1]");
    let mut segs = Vec::new();
    let mut start = 0;
    let mut prev_sign = den(grid[0]).signum();
    for (k, &xi) in grid.iter().enumerate().skip(1) {
        let s = den(xi).signum();
        if s != prev_sign {
            if k - 1 > start {
                segs.push((start, k - 1));
            }
            start = k;
            prev_sign = s;
        }
    }
    if grid.len() - 1 > start {
        segs.push((start, grid.len() - 1));
    }
    segs
}

/// Locates all interior local extrema of chibar^sigma on (0, 1) for one
/// branch sign. Each extremum is refined by golden section to |dxi| < 1e-10;
/// maxima are supercritical saddle-nodes, minima subcritical (pole segments
/// are scanned separately, never interpolated across).
pub fn saddle_node_points(
    sigma: &SignPattern,
    params: &ModelParams,
    branch: BranchSign,
) -> Result<Vec<BifurcationPoint>> {
    params.validate()?;
    if sigma.n() != params.n {
        return Err(Error::DimensionMismatch { expected: params.n, got: sigma.n() });
    }
    let grid = crate::equilibria::xi_grid();
    let cb = |xi: f64| {
        let den = branch.value() * params.beta() - xi * chi(sigma, xi).expect("xi in [0,1]");
        xi / den
    };
    let mut points = Vec::new();
    for (s0, s1) in segments(sigma, params, branch, &grid) {
        if s1 - s0 < 2 {
            continue;
        }
        let vals: Vec<f64> = grid[s0..=s1].iter().map(|&x| cb(x)).collect();
        for k in 1..vals.len() - 1 {
            let dl = vals[k] - vals[k - 1];
            let dr = vals[k + 1] - vals[k];
            if dl * dr >= 0.0 {
                continue;
            }
            let maximum = dl > 0.0;
            let g = |x: f64| if maximum { cb(x) } else { -cb(x) };
            let (xi_star, _) = golden_max(&g, grid[s0 + k - 1], grid[s0 + k + 1], 1e-11);
            if xi_star <= grid[0] || xi_star >= 1.0 - 1e-12 {
                continue;
            }
            let cb_star = cb(xi_star);
            if cb_star == 0.0 {
                continue;
            }
            points.push(BifurcationPoint {
                kind: BifurcationKind::SaddleNode,
                sigma: sigma.clone(),
                xi_star,
                b1_star: params.p_k() / cb_star,
                criticality: if maximum { Criticality::Supercritical } else { Criticality::Subcritical },
            });
        }
    }
    points.sort_by(|a, b| a.xi_star.partial_cmp(&b.xi_star).unwrap());
    Ok(points)
}

/// Result of the pitchfork scan: one point per interior pattern, plus the
/// patterns skipped because chibar(1) vanished (degenerate, unclassified).
#[derive(Clone, Debug)]
pub struct PitchforkScan {
    pub points: Vec<BifurcationPoint>,
    pub degenerate: Vec<SignPattern>,
}

/// Pitchfork points at xi = 1 for every interior pattern (sigma_2..sigma_{n-1}).
///
/// The reported sigma is the representative with sigma_1 = sigma_n = +1; the
/// critical gain is pK / chibar^sigma(1), identical for all four sigma^{++--}
/// since the boundary terms drop out of chi at xi = 1. Criticality comes from
/// the sign of the one-sided slope of chibar^{sigma^{+-}} at xi = 1,
/// stabilized over the stencil xi = 1 - 2^{-k}; if the stencil signs do not
/// settle, the sign is cross-checked by counting sigma^{+-} roots on both
/// sides of the critical gain.
pub fn pitchfork_points(params: &ModelParams) -> Result<PitchforkScan> {
    params.validate()?;
    let n = params.n;
    if n > crate::equilibria::MAX_ENUMERATION_NODES {
        return Err(Error::EnumerationBudget { n, max: crate::equilibria::MAX_ENUMERATION_NODES });
    }
    let mut points = Vec::new();
    let mut degenerate = Vec::new();
    for mask in 0..1u64 << (n - 2) {
        let mut signs = vec![1i8; n];
        for b in 0..n - 2 {
            signs[b + 1] = if mask >> b & 1 == 1 { 1 } else { -1 };
        }
        let sigma_pp = SignPattern::new(signs.clone())?;
        let cb1 = match chibar(&sigma_pp, 1.0, params, BranchSign::Plus) {
            Ok(v) => v,
            Err(Error::ChibarPole { .. }) => {
                degenerate.push(sigma_pp);
                continue;
            }
            Err(e) => return Err(e),
        };
        if cb1.abs() < 1e-12 {
            degenerate.push(sigma_pp);
            continue;
        }
        let b1_star = params.p_k() / cb1;

        let mut pm_signs = signs;
        pm_signs[n - 1] = -1;
        let sigma_pm = SignPattern::new(pm_signs)?;
        let slope_sign = one_sided_slope_sign(&sigma_pm, params)
            .map(Ok)
            .unwrap_or_else(|| branch_count_sign(&sigma_pm, params, b1_star))?;

        points.push(BifurcationPoint {
            kind: BifurcationKind::Pitchfork,
            sigma: sigma_pp,
            xi_star: 1.0,
            b1_star,
            criticality: if slope_sign > 0 { Criticality::Supercritical } else { Criticality::Subcritical },
        });
    }
    Ok(PitchforkScan { points, degenerate })
}

/// One-sided difference quotient signs of chibar at xi = 1 over a dyadic
/// stencil; Some(sign) when the last five agree.
fn one_sided_slope_sign(sigma: &SignPattern, params: &ModelParams) -> Option<i8> {
    let cb = |xi: f64| chibar(sigma, xi, params, BranchSign::Plus).ok();
    let at_one = cb(1.0)?;
    let mut signs = Vec::new();
    for k in 8..=20 {
        let h = 2f64.powi(-k);
        let v = cb(1.0 - h)?;
        signs.push(if at_one - v >= 0.0 { 1i8 } else { -1i8 });
    }
    let tail = &signs[signs.len() - 5..];
    if tail.iter().all(|&s| s == tail[0]) {
        Some(tail[0])
    } else {
        None
    }
}

/// Fallback criticality probe: the twin patterns exist on the side of b1_star
/// where new roots are born (positive slope: larger gains).
fn branch_count_sign(sigma_pm: &SignPattern, params: &ModelParams, b1_star: f64) -> Result<i8> {
    let eps = 1e-4 * b1_star.abs().max(1.0);
    let above = solve_equilibrium(sigma_pm, &params.clone().with_b1(b1_star + eps))?.len();
    let below = solve_equilibrium(sigma_pm, &params.clone().with_b1(b1_star - eps))?.len();
    Ok(if above > below { 1 } else { -1 })
}

/// One tabulated point of a branch diagram.
#[derive(Clone, Debug)]
pub struct BranchRow {
    pub xi: f64,
    /// None on pole rows.
    pub chibar: Option<f64>,
    /// Gain pK / chibar(xi) carrying this equilibrium; None on pole rows or
    /// where chibar vanishes.
    pub b1: Option<f64>,
    pub n_positive: Option<usize>,
    pub class: Option<StabilityClass>,
    pub pole: bool,
}

/// Tabulates (xi, chibar, b1, stability) along one branch. Stability is
/// classified from the Jacobian spectrum at v^sigma(xi) with the gain the
/// branch assigns to that xi.
pub fn branch_diagram(
    sigma: &SignPattern,
    params: &ModelParams,
    xi_values: &[f64],
    branch: BranchSign,
) -> Result<Vec<BranchRow>> {
    params.validate()?;
    if sigma.n() != params.n {
        return Err(Error::DimensionMismatch { expected: params.n, got: sigma.n() });
    }
    let mut rows = Vec::with_capacity(xi_values.len());
    for &xi in xi_values {
        if !(xi > 0.0 && xi <= 1.0) {
            return Err(Error::InvalidParameter(format!("diagram xi = {xi} outside (0, 1]")));
        }
        let cb = match chibar(sigma, xi, params, branch) {
            Ok(v) => v,
            Err(Error::ChibarPole { .. }) => {
                rows.push(BranchRow { xi, chibar: None, b1: None, n_positive: None, class: None, pole: true });
                continue;
            }
            Err(e) => return Err(e),
        };
        if cb.abs() < 1e-300 {
            rows.push(BranchRow { xi, chibar: Some(cb), b1: None, n_positive: None, class: None, pole: false });
            continue;
        }
        let b1 = params.p_k() / cb;
        let v = build_phase_vector(sigma, xi, branch);
        let at_gain = params.clone().with_b1(b1);
        let a = jacobian(&v, &at_gain)?;
        let eigs = sym_eigenvalues(&a)?;
        let report = classify(&eigs, default_zero_tol(&a));
        rows.push(BranchRow {
            xi,
            chibar: Some(cb),
            b1: Some(b1),
            n_positive: Some(report.n_positive),
            class: Some(report.class),
            pole: false,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, a: f64, p_k: f64, b1: f64) -> ModelParams {
        ModelParams::new(n, a, p_k, 1.0, b1, 1.0, 1.0, 0).unwrap()
    }

    #[test]
    fn no_equilibrium_check_reports_both_numbers() {
        // n=5, a=1, pK=0.5: beta = 4 * 0.1 / 0.5 = 0.8
        let p = params(5, 1.0, 0.5, 0.2);
        let chk = no_equilibrium_condition(&p);
        assert!((chk.beta - 0.8).abs() < 1e-15);
        assert!(chk.max_xi_chi > 0.0 && chk.max_xi_chi < 1.0);
        assert!(chk.holds);
    }

    #[test]
    fn no_equilibrium_trivial_when_coupling_vanishes() {
        let p = params(5, 1.0, 1e-6, 0.2);
        let chk = no_equilibrium_condition(&p);
        assert!(chk.holds && chk.beta > 1e4);
    }

    #[test]
    fn condition_approaches_continuum_threshold() {
        // as n grows the condition becomes pK/a < 2/pi
        let n = 1000;
        let chk = no_equilibrium_condition(&params(n, 1.0, 0.5, 0.2));
        // max xi chi -> pi/4 and beta -> a/(2 pK) = 1, so holds <=> pK/a < 2/pi
        assert!((chk.max_xi_chi - std::f64::consts::FRAC_PI_4).abs() < 2e-3);
        // pK/a = 0.5 < 2/pi = 0.63661..., so the condition holds
        assert!(chk.holds);
        // 2/pi to five decimals as reported (0.63661, truncated)
        assert!((2.0 / std::f64::consts::PI - 0.63661).abs() < 1e-5);

        let tight = no_equilibrium_condition(&params(n, 1.0, 0.64, 0.2));
        // pK/a = 0.64 > 2/pi = 0.6366: condition fails for large n
        assert!(!tight.holds);
    }

    #[test]
    fn all_plus_has_unique_supercritical_point() {
        let p = params(5, 1.0, 0.5, 0.2);
        let pts = saddle_node_points(&SignPattern::all_plus(5), &p, BranchSign::Plus).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].criticality, Criticality::Supercritical);
        assert!(pts[0].xi_star > 0.0 && pts[0].xi_star < 1.0);
        assert!(pts[0].b1_star > 0.0);
    }

    #[test]
    fn fold_location_matches_closed_form_n3() {
        // n=3 all-plus: chi = (1 + 2 sqrt(1-xi^2))/3 and the derivative
        // numerator beta + xi^2 chi' vanishes where xi^3 = sqrt(1 - xi^2)
        // (beta = 2/3 here), i.e. xi0^2 solves u^3 + u - 1 = 0.
        let p = params(3, 1.0, 0.5, 0.2);
        assert!((p.beta() - 2.0 / 3.0).abs() < 1e-15);
        let mut u: f64 = 0.7;
        for _ in 0..60 {
            u -= (u * u * u + u - 1.0) / (3.0 * u * u + 1.0);
        }
        let xi0 = u.sqrt();
        let pts = saddle_node_points(&SignPattern::all_plus(3), &p, BranchSign::Plus).unwrap();
        assert_eq!(pts.len(), 1);
        // xi at a flat maximum is accurate to ~sqrt(eps); b1 is quadratic there
        assert!((pts[0].xi_star - xi0).abs() < 1e-7, "xi = {} vs {xi0}", pts[0].xi_star);
        let chi0 = (1.0 + 2.0 * (1.0 - u).sqrt()) / 3.0;
        let b1_expect = p.p_k() * (p.beta() - xi0 * chi0) / xi0;
        assert!((pts[0].b1_star - b1_expect).abs() < 1e-10);
    }

    #[test]
    fn all_minus_subcritical_on_minus_branch() {
        // sigma_1 = sigma_n = -1 with chibar(1) <= 0 and bounded: one
        // subcritical point; on the minus branch the all-minus curve mirrors
        // the all-plus curve with criticality exchanged.
        let p = params(5, 1.0, 0.5, 0.2);
        let pts = saddle_node_points(&SignPattern::all_minus(5), &p, BranchSign::Minus).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].criticality, Criticality::Subcritical);
    }

    #[test]
    fn flip_symmetry_swaps_branch_and_criticality() {
        let p = params(6, 1.0, 0.5, 0.2);
        let s = "+-++-+".parse::<SignPattern>().unwrap();
        let plus = saddle_node_points(&s, &p, BranchSign::Plus).unwrap();
        let minus_of_flip = saddle_node_points(&s.flipped(), &p, BranchSign::Minus).unwrap();
        assert_eq!(plus.len(), minus_of_flip.len());
        for (a, b) in plus.iter().zip(&minus_of_flip) {
            assert!((a.xi_star - b.xi_star).abs() < 1e-8);
            assert_ne!(a.criticality, b.criticality);
        }
    }

    #[test]
    fn derivative_numerator_single_sign_change() {
        let p = params(6, 1.0, 0.5, 0.2);
        let s = SignPattern::all_plus(6);
        let mut prev = f64::INFINITY;
        let mut changes = 0;
        let mut last_sign = 1.0;
        for k in 1..=2000 {
            let xi = k as f64 / 2001.0;
            let v = chibar_derivative_numerator(&s, xi, &p, BranchSign::Plus);
            assert!(v < prev + 1e-12, "not decreasing at xi = {xi}");
            if v.signum() != last_sign {
                changes += 1;
                last_sign = v.signum();
            }
            prev = v;
        }
        assert_eq!(changes, 1);
    }

    #[test]
    fn pitchfork_n3_closed_form() {
        // n=3: chi(1) = sigma_2/3, chibar(1) = 1/(beta - sigma_2/3), and with
        // a = 1, pK = 0.5 (beta = 2/3) the interior +1 pattern gives
        // b1* = pK (beta - 1/3) = 1/6
        let p = params(3, 1.0, 0.5, 0.2);
        let scan = pitchfork_points(&p).unwrap();
        assert_eq!(scan.points.len(), 2);
        assert!(scan.degenerate.is_empty());
        let plus = scan
            .points
            .iter()
            .find(|pt| pt.sigma.sign(1) > 0.0)
            .unwrap();
        assert!((plus.b1_star - 1.0 / 6.0).abs() < 1e-12);
        // self-consistency demanded by the contract: b1* chibar(1) = pK
        let cb1 = chibar(&plus.sigma, 1.0, &p, BranchSign::Plus).unwrap();
        assert!((plus.b1_star * cb1 - p.p_k()).abs() < 1e-10);
        let minus = scan.points.iter().find(|pt| pt.sigma.sign(1) < 0.0).unwrap();
        assert!((minus.b1_star - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pitchfork_birth_side_matches_criticality() {
        let p = params(4, 1.0, 0.5, 0.2);
        let scan = pitchfork_points(&p).unwrap();
        for pt in &scan.points {
            let mut pm = pt.sigma.signs().to_vec();
            pm[3] = -1;
            let sigma_pm = SignPattern::new(pm).unwrap();
            let eps = 1e-4;
            let above = solve_equilibrium(&sigma_pm, &p.clone().with_b1(pt.b1_star * (1.0 + eps)))
                .unwrap()
                .len();
            let below = solve_equilibrium(&sigma_pm, &p.clone().with_b1(pt.b1_star * (1.0 - eps)))
                .unwrap()
                .len();
            match pt.criticality {
                Criticality::Supercritical => assert!(above > below),
                Criticality::Subcritical => assert!(below > above),
            }
        }
    }

    #[test]
    fn diagram_bounded_curve_single_maximum() {
        // n=4, beta=1: a=1, pK=0.375
        let p = params(4, 1.0, 0.375, 0.2);
        assert!((p.beta() - 1.0).abs() < 1e-15);
        let grid: Vec<f64> = (1..=400).map(|k| k as f64 / 400.0).collect();
        let rows = branch_diagram(&SignPattern::all_plus(4), &p, &grid, BranchSign::Plus).unwrap();
        assert!(rows.iter().all(|r| !r.pole));
        let vals: Vec<f64> = rows.iter().map(|r| r.chibar.unwrap()).collect();
        let mut maxima = 0;
        for k in 1..vals.len() - 1 {
            if vals[k] > vals[k - 1] && vals[k] > vals[k + 1] {
                maxima += 1;
            }
        }
        assert_eq!(maxima, 1);
    }

    #[test]
    fn diagram_flags_unbounded_curve() {
        // n=4, beta=0.1: a=1, pK=3.75
        let p = params(4, 1.0, 3.75, 0.2);
        assert!((p.beta() - 0.1).abs() < 1e-15);
        let grid: Vec<f64> = (1..=400).map(|k| k as f64 / 400.0).collect();
        let rows = branch_diagram(&SignPattern::all_plus(4), &p, &grid, BranchSign::Plus).unwrap();
        // denominator changes sign inside (0,1): chibar runs off to +-infinity
        let vals: Vec<f64> = rows.iter().filter_map(|r| r.chibar).collect();
        let crossed = rows.iter().any(|r| r.pole)
            || vals.windows(2).any(|w| w[0] > 0.0 && w[1] < 0.0);
        assert!(crossed);
    }

    #[test]
    fn diagram_stability_flips_once_at_saddle_node() {
        let p = params(5, 1.0, 0.5, 0.2);
        let s = SignPattern::all_plus(5);
        let sn = &saddle_node_points(&s, &p, BranchSign::Plus).unwrap()[0];
        let grid: Vec<f64> = (1..=200).map(|k| k as f64 * 0.995 / 200.0).collect();
        let rows = branch_diagram(&s, &p, &grid, BranchSign::Plus).unwrap();
        let mut flips = Vec::new();
        let mut prev: Option<StabilityClass> = None;
        for r in &rows {
            let c = r.class.unwrap();
            if c == StabilityClass::Marginal {
                continue; // zero crossing neighborhood
            }
            if let Some(pc) = prev {
                if pc != c {
                    flips.push(r.xi);
                }
            }
            prev = Some(c);
        }
        assert_eq!(flips.len(), 1, "flips at {flips:?}");
        assert!((flips[0] - sn.xi_star).abs() < 0.01);
    }
}
