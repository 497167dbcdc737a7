//! Continuum-limit synchronized solutions.
//!
//! For the uniform graphon W = p the synchronized profile is
//! U(x) = arcsin(a (x - 1/2) / (pK C + b1)) with C > 0 solving
//!
//! ```text
//! C = int_0^1 sqrt(1 - (a (x - 1/2) / (pK C + b1))^2) dx.
//! ```
//!
//! Substituting eta = a / (2 (pK C + b1)) turns this into
//! b1 = (pK/2) phi(eta), phi(eta) = (beta0 - S(eta)) / eta with
//! S(eta) = arcsin(eta) + eta sqrt(1 - eta^2) and beta0 = a / pK. phi is
//! strictly decreasing on (0, 1), so bisection on eta is bracketed and the
//! solution exists iff b1 >= a/2 - pi pK / 4. Sign-flipped ("discontinuous")
//! profiles reverse the integrand over a flip set of subintervals.
//!
//! All sqrt(1 - s^2) integrals use the antiderivative
//! (s sqrt(1 - s^2) + arcsin s) / 2 in closed form.

use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegratorConfig};
use crate::model::{ModelParams, RotatingField};

/// Which synchronized profile a [`ContinuumSolution`] describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolutionKind {
    /// U(x) from the C-equation.
    Continuous,
    /// pi - U(x), sharing the continuous solution's constant.
    FlippedContinuous,
    /// U flipped on the intervals of a flip set.
    Discontinuous,
}

impl SolutionKind {
    fn name(&self) -> &'static str {
        match self {
            SolutionKind::Continuous => "continuous",
            SolutionKind::FlippedContinuous => "flipped-continuous",
            SolutionKind::Discontinuous => "discontinuous",
        }
    }
}

/// Disjoint flip intervals, each contained in [0, 1/2] or [1/2, 1].
///
/// Intervals are treated half-open [lo, hi) (the last one closed at 1);
/// endpoint conventions are immaterial in L2.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlipSet {
    intervals: Vec<(f64, f64)>,
}

impl FlipSet {
    pub fn empty() -> Self {
        FlipSet { intervals: Vec::new() }
    }

    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        intervals.retain(|(lo, hi)| lo != hi);
        for &(lo, hi) in &intervals {
            if !(lo.is_finite() && hi.is_finite() && lo < hi && lo >= 0.0 && hi <= 1.0) {
                return Err(Error::MalformedFlipSet(format!("bad interval [{lo}, {hi}]")));
            }
            if !(hi <= 0.5 || lo >= 0.5) {
                return Err(Error::MalformedFlipSet(format!(
                    "interval [{lo}, {hi}] straddles 1/2; split it at the midpoint"
                )));
            }
        }
        intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in intervals.windows(2) {
            if w[0].1 > w[1].0 {
                return Err(Error::MalformedFlipSet(format!(
                    "intervals [{}, {}] and [{}, {}] overlap",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(FlipSet { intervals })
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals
            .iter()
            .any(|&(lo, hi)| x >= lo && (x < hi || (hi == 1.0 && x == 1.0)))
    }
}

/// One synchronized continuum solution.
#[derive(Clone, Debug)]
pub struct ContinuumSolution {
    /// Constant of the (possibly flip-generalized) C-equation.
    pub c: f64,
    pub a: f64,
    pub p_k: f64,
    pub b1: f64,
    /// eta = a / (2 (pK C + b1)) in (0, 1].
    pub eta: f64,
    pub kind: SolutionKind,
    pub flip_set: FlipSet,
}

impl ContinuumSolution {
    /// Denominator pK C + b1 of the arcsin argument.
    pub fn denominator(&self) -> f64 {
        self.p_k * self.c + self.b1
    }

    fn base_u(&self, x: f64) -> f64 {
        let arg = (self.a * (x - 0.5) / self.denominator()).clamp(-1.0, 1.0);
        arg.asin()
    }

    /// Profile value at x in [0, 1].
    pub fn u(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidParameter(format!("x = {x} outside [0, 1]")));
        }
        let u = self.base_u(x);
        Ok(match self.kind {
            SolutionKind::Continuous => u,
            SolutionKind::FlippedContinuous => std::f64::consts::PI - u,
            SolutionKind::Discontinuous => {
                if self.flip_set.contains(x) {
                    if x >= 0.5 {
                        std::f64::consts::PI - u
                    } else {
                        -u - std::f64::consts::PI
                    }
                } else {
                    u
                }
            }
        })
    }

    /// Amplitude of the synchronized band, arcsin(eta). Defined for the
    /// continuous solution only.
    pub fn delta_u(&self) -> Result<f64> {
        if self.kind != SolutionKind::Continuous {
            return Err(Error::WrongSolutionKind {
                expected: "continuous",
                got: self.kind.name(),
            });
        }
        Ok(self.eta.asin())
    }

    /// The flipped profile pi - U(x) built on the same constant.
    pub fn flipped(&self) -> Result<ContinuumSolution> {
        if self.kind != SolutionKind::Continuous {
            return Err(Error::WrongSolutionKind {
                expected: "continuous",
                got: self.kind.name(),
            });
        }
        let mut s = self.clone();
        s.kind = SolutionKind::FlippedContinuous;
        Ok(s)
    }
}

/// Gain threshold a/2 - pi pK / 4 below which the continuous solution does
/// not exist (for pK/a < 2/pi).
pub fn existence_threshold(a: f64, p_k: f64) -> f64 {
    0.5 * a - 0.25 * std::f64::consts::PI * p_k
}

/// arcsin(eta) + eta sqrt(1 - eta^2), twice the antiderivative of
/// sqrt(1 - s^2) evaluated over [0, eta].
fn s_fn(eta: f64) -> f64 {
    eta.asin() + eta * (1.0 - eta * eta).max(0.0).sqrt()
}

fn check_cl_params(a: f64, p_k: f64) -> Result<()> {
    if !(a > 0.0 && p_k > 0.0) {
        return Err(Error::InvalidParameter(format!("need a > 0 and pK > 0, got a = {a}, pK = {p_k}")));
    }
    Ok(())
}

/// Solves the C-equation by bisection on eta. Returns None (no solution)
/// when b1 lies below the existence threshold.
pub fn solve_c(a: f64, p_k: f64, b1: f64) -> Result<Option<ContinuumSolution>> {
    check_cl_params(a, p_k)?;
    if !b1.is_finite() {
        return Err(Error::InvalidParameter("b1 must be finite".into()));
    }
    let beta0 = a / p_k;
    // psi is strictly decreasing; psi(1) = threshold - b1
    let psi = |eta: f64| 0.5 * p_k * (beta0 - s_fn(eta)) / eta - b1;
    let at_one = psi(1.0);
    if at_one > 0.0 {
        return Ok(None);
    }
    let eta = if at_one == 0.0 {
        1.0
    } else {
        let mut lo = 0.5;
        while psi(lo) <= 0.0 {
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(Error::InvalidParameter("failed to bracket the C-equation".into()));
            }
        }
        let mut hi = if lo == 0.5 { 1.0 } else { lo * 2.0 };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if psi(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let c = (0.5 * a / eta - b1) / p_k;
    Ok(Some(ContinuumSolution {
        c,
        a,
        p_k,
        b1,
        eta,
        kind: SolutionKind::Continuous,
        flip_set: FlipSet::empty(),
    }))
}

/// Residual of the C-equation at a candidate constant, in closed form.
pub fn c1_residual(c: f64, a: f64, p_k: f64, b1: f64) -> f64 {
    let d = p_k * c + b1;
    let eta = 0.5 * a / d;
    c - s_fn(eta) / (2.0 * eta)
}

/// Closed-form right-hand side of the flip-generalized C-equation at
/// denominator d = pK C + b1:
///
/// ```text
/// F(d) = int_{[0,1] \ I} sqrt(1 - (a(x - 1/2)/d)^2) dx - int_I (same) dx,
/// ```
///
/// evaluated as the full integral minus twice the flip-set part.
pub fn flip_rhs(flip: &FlipSet, d: f64, a: f64) -> f64 {
    let anti = |s: f64| {
        let s = s.clamp(-1.0, 1.0);
        0.5 * (s * (1.0 - s * s).max(0.0).sqrt() + s.asin())
    };
    let piece = |x0: f64, x1: f64| {
        let s0 = a * (x0 - 0.5) / d;
        let s1 = a * (x1 - 0.5) / d;
        (d / a) * (anti(s1) - anti(s0))
    };
    let full = piece(0.0, 1.0);
    let flipped: f64 = flip.intervals().iter().map(|&(lo, hi)| piece(lo, hi)).sum();
    full - 2.0 * flipped
}

/// Solves the flip-generalized C-equation by bisection on eta, with all
/// integrals in closed form. Requires a positive root C > 0; when several
/// exist the one closest to the continuous regime (largest C) is returned.
/// An empty flip set reduces exactly to [`solve_c`].
pub fn solve_c_discontinuous(
    flip: &FlipSet,
    a: f64,
    p_k: f64,
    b1: f64,
) -> Result<Option<ContinuumSolution>> {
    check_cl_params(a, p_k)?;
    if flip.is_empty() {
        return solve_c(a, p_k, b1);
    }
    // r(eta) = C_implied(eta) - F(eta): +infinity as eta -> 0+
    let r = |eta: f64| {
        let d = 0.5 * a / eta;
        (d - b1) / p_k - flip_rhs(flip, d, a)
    };
    const GRID: usize = 2048;
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_eta = 1e-9;
    let mut prev_val = r(prev_eta);
    for k in 1..=GRID {
        let eta = k as f64 / GRID as f64;
        let val = r(eta);
        if prev_val == 0.0 {
            roots.push(prev_eta);
        } else if prev_val.signum() != val.signum() {
            let (mut lo, mut hi) = (prev_eta, eta);
            let sign_lo = prev_val.signum();
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if r(mid).signum() == sign_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_eta = eta;
        prev_val = val;
    }
    if prev_val == 0.0 {
        roots.push(1.0);
    }

    // smallest eta = largest C
    for eta in roots {
        let d = 0.5 * a / eta;
        let c = (d - b1) / p_k;
        if c > 0.0 {
            let residual = c - flip_rhs(flip, d, a);
            if residual.abs() >= 1e-10 {
                return Err(Error::ResidualCheck { residual: residual.abs(), limit: 1e-10 });
            }
            return Ok(Some(ContinuumSolution {
                c,
                a,
                p_k,
                b1,
                eta,
                kind: SolutionKind::Discontinuous,
                flip_set: flip.clone(),
            }));
        }
    }
    Ok(None)
}

/// A function on [0, 1] that quadrature can sample, with optional
/// discontinuity locations.
pub trait Profile {
    fn eval(&self, x: f64) -> f64;

    /// Interior breakpoints the quadrature grid must respect.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl Profile for ContinuumSolution {
    fn eval(&self, x: f64) -> f64 {
        self.u(x).expect("quadrature keeps x inside [0, 1]")
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.flip_set
            .intervals()
            .iter()
            .flat_map(|&(lo, hi)| [lo, hi])
            .filter(|x| *x > 0.0 && *x < 1.0)
            .collect()
    }
}

/// Piecewise-constant function equal to values[i] on [i/n, (i+1)/n), the
/// last interval closed.
#[derive(Clone, Debug)]
pub struct StepFunction {
    values: Vec<f64>,
}

impl StepFunction {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Profile for StepFunction {
    fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let i = ((x * n as f64).floor() as usize).min(n - 1);
        self.values[i]
    }

    fn breakpoints(&self) -> Vec<f64> {
        let n = self.values.len();
        (1..n).map(|i| i as f64 / n as f64).collect()
    }
}

/// Wraps a closure as a [`Profile`] (smooth, no breakpoints).
pub struct FnProfile<F>(F);

impl<F: Fn(f64) -> f64> FnProfile<F> {
    pub fn new(f: F) -> Self {
        FnProfile(f)
    }
}

impl<F: Fn(f64) -> f64> Profile for FnProfile<F> {
    fn eval(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

/// Step-function embedding of a phase vector.
pub fn embed(v: &[f64]) -> StepFunction {
    assert!(!v.is_empty(), "embedding needs at least one value");
    StepFunction { values: v.to_vec() }
}

/// L2(0,1) distance by composite midpoint quadrature on a grid refined
/// against both profiles' breakpoints (plus a uniform base grid), `m_sub`
/// midpoint samples per cell.
pub fn l2_distance(f: &dyn Profile, g: &dyn Profile, m_sub: usize) -> f64 {
    assert!(m_sub >= 1, "m_sub must be >= 1");
    const BASE: usize = 256;
    let mut cuts: Vec<f64> = (0..=BASE).map(|k| k as f64 / BASE as f64).collect();
    cuts.extend(f.breakpoints());
    cuts.extend(g.breakpoints());
    cuts.retain(|x| (0.0..=1.0).contains(x));
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let h = (x1 - x0) / m_sub as f64;
        for k in 0..m_sub {
            let x = x0 + (k as f64 + 0.5) * h;
            let d = f.eval(x) - g.eval(x);
            acc += d * d * h;
        }
    }
    acc.sqrt()
}

/// Evolves the continuum equation from profile `g0` by midpoint collocation.
///
/// With the uniform graphon W = p, collocating the integral at the M cell
/// midpoints reproduces the complete-graph model with M nodes exactly
/// (omega(x) sampled at midpoints equals the discrete frequencies), so the
/// evolution is the rotating-frame M-node system, embedded back into step
/// functions at the sample times.
pub fn cl_evolve(
    g0: &dyn Profile,
    a: f64,
    p_k: f64,
    b1: f64,
    m: usize,
    t_span: (f64, f64),
    sample_times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, StepFunction)>> {
    if m < 3 {
        return Err(Error::InvalidParameter(format!("collocation size m = {m} < 3")));
    }
    check_cl_params(a, p_k)?;
    let params = ModelParams::new(m, a, p_k, 1.0, b1, 0.0, 0.0, 0)?;
    let u0: Vec<f64> = (0..m).map(|i| g0.eval((i as f64 + 0.5) / m as f64)).collect();
    let mut field = RotatingField::complete(&params);
    let traj = integrate(
        |t, v: &[f64], out: &mut [f64]| field.eval(t, v, out),
        &u0,
        t_span,
        cfg,
        Some(sample_times),
    )?;
    Ok(traj
        .times()
        .iter()
        .zip(traj.states())
        .map(|(&t, s)| (t, embed(s)))
        .collect())
}
