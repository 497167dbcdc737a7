//! Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4) with dense
//! output) plus steady-state detection for the rotating-frame dynamics.
//!
//! The embedded pair controls the local error against atol + rtol |u| per
//! component; dense output is the standard 5-coefficient quartic interpolant.
//! A fixed-step driver is provided for order verification.

use crate::error::{Error, Result};

/// Tolerances and step bounds for [`integrate`].
#[derive(Clone, Debug)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-9,
            atol: 1e-11,
            h_init: 1e-3,
            h_max: 1.0,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidParameter("rtol and atol must be > 0".into()));
        }
        if !(self.h_init > 0.0 && self.h_init <= self.h_max) {
            return Err(Error::InvalidParameter("need 0 < h_init <= h_max".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be >= 1".into()));
        }
        Ok(())
    }
}

/// Sampled solution: `states[k]` is the phase vector at `times[k]`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        self.times.last().map(|&t| (t, self.states.last().unwrap().as_slice()))
    }
}

/// Result of [`steady_state`].
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub state: Vec<f64>,
    pub converged: bool,
    pub t_reached: f64,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const ER: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.2; // largest shrink factor per step is 1/FAC_MIN
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04; // PI stabilization

struct Dopri5<F> {
    f: F,
    t: f64,
    y: Vec<f64>,
    h: f64,
    dir: f64,
    cfg: IntegratorConfig,
    k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
    cont: [Vec<f64>; 5],
    t_old: f64,
    h_old: f64,
    facold: f64,
    steps: usize,
}

enum StepOutcome {
    Accepted,
    Rejected,
}

impl<F: FnMut(f64, &[f64], &mut [f64])> Dopri5<F> {
    fn new(mut f: F, t0: f64, y0: &[f64], dir: f64, cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        let n = y0.len();
        let mut k = [(); 7].map(|_| vec![0.0; n]);
        f(t0, y0, &mut k[0]);
        if k[0].iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteDerivative { t: t0 });
        }
        Ok(Dopri5 {
            h: dir * cfg.h_init.min(cfg.h_max),
            f,
            t: t0,
            y: y0.to_vec(),
            dir,
            cfg,
            k,
            y_stage: vec![0.0; n],
            y_new: vec![0.0; n],
            cont: [(); 5].map(|_| vec![0.0; n]),
            t_old: t0,
            h_old: 0.0,
            facold: 1e-4,
            steps: 0,
        })
    }

    /// Attempts one step of size `self.h` (clipped to `t_limit`).
    fn step(&mut self, t_limit: f64) -> Result<StepOutcome> {
        if self.steps >= self.cfg.max_steps {
            return Err(Error::StepBudget { max_steps: self.cfg.max_steps, t: self.t });
        }
        self.steps += 1;

        let mut clipped = false;
        if (self.t + self.h - t_limit) * self.dir > 0.0 {
            self.h = t_limit - self.t;
            clipped = true;
        }
        let h = self.h;
        if h.abs() < 1e-14 * self.t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t: self.t, h });
        }
        let n = self.y.len();

        // stages 2..6
        let rows: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
        for (s, row) in rows.iter().enumerate() {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, &a) in row.iter().enumerate() {
                    acc += a * self.k[j][i];
                }
                self.y_stage[i] = self.y[i] + h * acc;
            }
            (self.f)(self.t + C[s + 1] * h, &self.y_stage, &mut self.k[s + 1]);
        }

        // 5th-order solution and FSAL stage
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..6 {
                acc += B[j] * self.k[j][i];
            }
            self.y_new[i] = self.y[i] + h * acc;
        }
        (self.f)(self.t + h, &self.y_new, &mut self.k[6]);

        if self.y_new.iter().any(|x| !x.is_finite()) || self.k[6].iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteDerivative { t: self.t + h });
        }

        // weighted RMS of the embedded error estimate
        let mut err = 0.0;
        for i in 0..n {
            let sk = self.cfg.atol + self.cfg.rtol * self.y[i].abs().max(self.y_new[i].abs());
            let mut e = 0.0;
            for j in 0..7 {
                e += ER[j] * self.k[j][i];
            }
            err += (h * e / sk).powi(2);
        }
        err = (err / n as f64).sqrt();

        let fac11 = err.powf(0.2);
        let fac = (fac11 / self.facold.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);

        if err <= 1.0 {
            self.facold = err.max(1e-4);
            // dense-output coefficients for [t, t+h]
            for i in 0..n {
                let ydiff = self.y_new[i] - self.y[i];
                let bspl = h * self.k[0][i] - ydiff;
                self.cont[0][i] = self.y[i];
                self.cont[1][i] = ydiff;
                self.cont[2][i] = bspl;
                self.cont[3][i] = ydiff - h * self.k[6][i] - bspl;
                let mut dsum = 0.0;
                for j in 0..7 {
                    dsum += D[j] * self.k[j][i];
                }
                self.cont[4][i] = h * dsum;
            }
            self.t_old = self.t;
            self.h_old = h;
            // land exactly on the limit; t + h can miss it by an ulp
            self.t = if clipped { t_limit } else { self.t + h };
            std::mem::swap(&mut self.y, &mut self.y_new);
            self.k.swap(0, 6); // FSAL
            let h_new = h / fac;
            self.h = self.dir * h_new.abs().min(self.cfg.h_max);
            Ok(StepOutcome::Accepted)
        } else {
            self.h = h / (fac11 / SAFE).min(1.0 / FAC_MIN);
            Ok(StepOutcome::Rejected)
        }
    }

    /// Dense-output evaluation inside the last accepted step.
    fn dense_eval(&self, t: f64, out: &mut [f64]) {
        let s = if self.h_old == 0.0 { 0.0 } else { (t - self.t_old) / self.h_old };
        let s1 = 1.0 - s;
        for i in 0..out.len() {
            out[i] = self.cont[0][i]
                + s * (self.cont[1][i]
                    + s1 * (self.cont[2][i] + s * (self.cont[3][i] + s1 * self.cont[4][i])));
        }
    }

    /// Derivative at the current point (FSAL stage).
    fn deriv_sup_norm(&self) -> f64 {
        self.k[0].iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Integrates `du/dt = f(t, u)` over `t_span`, reporting either every
/// accepted step or exactly the requested `sample_times` (monotone in the
/// integration direction, inside the span) via dense output.
pub fn integrate<F>(
    f: F,
    u0: &[f64],
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
    sample_times: Option<&[f64]>,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let (t0, t1) = t_span;
    if t0 == t1 || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidParameter(format!("bad t_span ({t0}, {t1})")));
    }
    if u0.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite initial state".into()));
    }
    let dir = (t1 - t0).signum();
    if let Some(ts) = sample_times {
        for w in ts.windows(2) {
            if (w[1] - w[0]) * dir < 0.0 {
                return Err(Error::InvalidParameter(
                    "sample times must be monotone in the integration direction".into(),
                ));
            }
        }
        for &t in ts {
            if (t - t0) * dir < -1e-12 || (t - t1) * dir > 1e-12 {
                return Err(Error::SampleOutOfSpan { t, t0, t1 });
            }
        }
    }

    let mut stepper = Dopri5::new(f, t0, u0, dir, cfg.clone())?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut sample_idx = 0;

    if let Some(ts) = sample_times {
        while sample_idx < ts.len() && (ts[sample_idx] - t0) * dir <= 0.0 {
            times.push(ts[sample_idx]);
            states.push(u0.to_vec());
            sample_idx += 1;
        }
    } else {
        times.push(t0);
        states.push(u0.to_vec());
    }

    while (stepper.t - t1) * dir < 0.0 {
        match stepper.step(t1)? {
            StepOutcome::Rejected => continue,
            StepOutcome::Accepted => {
                if let Some(ts) = sample_times {
                    while sample_idx < ts.len() && (ts[sample_idx] - stepper.t) * dir <= 0.0 {
                        let mut out = vec![0.0; u0.len()];
                        stepper.dense_eval(ts[sample_idx], &mut out);
                        times.push(ts[sample_idx]);
                        states.push(out);
                        sample_idx += 1;
                    }
                } else {
                    times.push(stepper.t);
                    states.push(stepper.y.clone());
                }
            }
        }
    }

    // samples numerically equal to t1 that survived the loop guard
    if let Some(ts) = sample_times {
        while sample_idx < ts.len() {
            times.push(ts[sample_idx]);
            states.push(stepper.y.clone());
            sample_idx += 1;
        }
    }

    Ok(Trajectory { times, states })
}

/// Fixed-step driver over the same 5th-order stages, for order checks.
pub fn integrate_fixed<F>(mut f: F, u0: &[f64], t_span: (f64, f64), n_steps: usize) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be >= 1".into()));
    }
    let (t0, t1) = t_span;
    let n = u0.len();
    let h = (t1 - t0) / n_steps as f64;
    let mut y = u0.to_vec();
    let mut k = [(); 7].map(|_| vec![0.0; n]);
    let mut stage = vec![0.0; n];
    let rows: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
    for step in 0..n_steps {
        let t = t0 + step as f64 * h;
        f(t, &y, &mut k[0]);
        for (s, row) in rows.iter().enumerate() {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, &a) in row.iter().enumerate() {
                    acc += a * k[j][i];
                }
                stage[i] = y[i] + h * acc;
            }
            f(t + C[s + 1] * h, &stage, &mut k[s + 1]);
        }
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..6 {
                acc += B[j] * k[j][i];
            }
            y[i] += h * acc;
        }
        if y.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteDerivative { t: t + h });
        }
    }
    Ok(y)
}

/// Integrates forward from t = 0 until the sup-norm of the derivative stays
/// below `eps` over a trailing window of length `window`, or `t_max` is hit.
///
/// The derivative criterion (rather than state differences) avoids declaring
/// convergence during slow transients.
pub fn steady_state<F>(
    f: F,
    u0: &[f64],
    cfg: &IntegratorConfig,
    t_max: f64,
    window: f64,
    eps: f64,
) -> Result<SteadyState>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if !(window > 0.0 && window < t_max) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < window ({window}) < t_max ({t_max})"
        )));
    }
    // keep at least a few derivative samples inside every window
    let mut cfg = cfg.clone();
    cfg.h_max = cfg.h_max.min(window / 4.0);
    cfg.h_init = cfg.h_init.min(cfg.h_max);

    let mut stepper = Dopri5::new(f, 0.0, u0, 1.0, cfg)?;
    let mut quiet_since: Option<f64> = if stepper.deriv_sup_norm() < eps { Some(0.0) } else { None };

    while stepper.t < t_max {
        match stepper.step(t_max)? {
            StepOutcome::Rejected => continue,
            StepOutcome::Accepted => {
                if stepper.deriv_sup_norm() < eps {
                    let since = *quiet_since.get_or_insert(stepper.t);
                    if stepper.t - since >= window {
                        return Ok(SteadyState {
                            state: stepper.y,
                            converged: true,
                            t_reached: stepper.t,
                        });
                    }
                } else {
                    quiet_since = None;
                }
            }
        }
    }
    Ok(SteadyState { state: stepper.y, converged: false, t_reached: stepper.t })
}
