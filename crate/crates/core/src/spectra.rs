//! Jacobian of the rotating-frame system and its real spectrum.
//!
//! At an equilibrium v the Jacobian is
//!
//! ```text
//! A_ii = -(pK/n) sum_{j != i} cos(v_j - v_i) - b1 cos(v_i),
//! A_ij =  (pK/n) cos(v_j - v_i),   i != j,
//! ```
//!
//! which is symmetric, so all eigenvalues are real and stability reduces to
//! counting signs. Eigenvalues come from cyclic Jacobi rotations; no
//! eigenvectors are needed for classification.

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Dense square matrix, row-major.
#[derive(Clone, Debug)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut m = Matrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n);
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.data[i * self.n + j] = x;
    }

    /// Largest entry magnitude.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }
}

/// Jacobian of the rotating-frame field at phase vector v (complete graph).
///
/// The upper triangle is computed and mirrored, so the result is symmetric
/// bitwise; the diagonal carries minus the off-diagonal row sum minus
/// b1 cos(v_i), making every row sum to -b1 cos(v_i).
pub fn jacobian(v: &[f64], params: &ModelParams) -> Result<Matrix> {
    let n = params.n;
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    let pk_over_n = params.p_k() / n as f64;
    let mut a = Matrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let x = pk_over_n * (v[j] - v[i]).cos();
            a.set(i, j, x);
            a.set(j, i, x);
        }
    }
    for i in 0..n {
        let mut off = 0.0;
        for j in 0..n {
            if j != i {
                off += a.get(i, j);
            }
        }
        a.set(i, i, -off - params.b1 * v[i].cos());
    }
    Ok(a)
}

const MAX_SWEEPS: usize = 60;

/// All eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi
/// rotations (Numerical Recipes scheme, values only).
///
/// Rejects matrices whose asymmetry exceeds 1e-12 relative to the largest
/// entry.
pub fn sym_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    let n = a.n();
    let scale = a.norm_max().max(1.0);
    for i in 0..n {
        for j in i + 1..n {
            let delta = (a.get(i, j) - a.get(j, i)).abs();
            if delta > 1e-12 * scale {
                return Err(Error::NotSymmetric { i, j, delta });
            }
        }
    }
    if n == 1 {
        return Ok(vec![a.get(0, 0)]);
    }

    let mut m = a.clone();
    let mut d: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    for sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n - 1)
            .map(|p| (p + 1..n).map(|q| m.get(p, q).abs()).sum::<f64>())
            .sum();
        if off <= f64::MIN_POSITIVE {
            let mut eig = d;
            eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
            return Ok(eig);
        }
        // threshold sweeps as in Numerical Recipes
        let tresh = if sweep < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m.get(p, q);
                let g = 100.0 * apq.abs();
                if sweep > 3
                    && d[p].abs() + g == d[p].abs()
                    && d[q].abs() + g == d[q].abs()
                {
                    m.set(p, q, 0.0);
                    continue;
                }
                if apq.abs() <= tresh {
                    continue;
                }
                let h = d[q] - d[p];
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        t = -t;
                    }
                    t
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;
                z[p] -= h;
                z[q] += h;
                d[p] -= h;
                d[q] += h;
                m.set(p, q, 0.0);
                let rot = |m: &mut Matrix, i: usize, j: usize, k: usize, l: usize| {
                    let g = m.get(i, j);
                    let h = m.get(k, l);
                    m.set(i, j, g - s * (h + g * tau));
                    m.set(k, l, h + s * (g - h * tau));
                };
                for j in 0..p {
                    rot(&mut m, j, p, j, q);
                }
                for j in p + 1..q {
                    rot(&mut m, p, j, j, q);
                }
                for j in q + 1..n {
                    rot(&mut m, p, j, q, j);
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            d[i] = b[i];
            z[i] = 0.0;
        }
    }
    Err(Error::EigenNonConvergence { sweeps: MAX_SWEEPS })
}

/// Stability classification of a real spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityClass {
    AsymptoticallyStable,
    Unstable,
    Marginal,
}

impl StabilityClass {
    pub fn label(&self) -> &'static str {
        match self {
            StabilityClass::AsymptoticallyStable => "stable",
            StabilityClass::Unstable => "unstable",
            StabilityClass::Marginal => "marginal",
        }
    }
}

#[derive(Clone, Debug)]
pub struct StabilityReport {
    /// Ascending real eigenvalues.
    pub eigenvalues: Vec<f64>,
    pub n_positive: usize,
    pub n_negative: usize,
    pub n_zero: usize,
    pub class: StabilityClass,
}

/// Default zero threshold, 1e-8 (1 + max |A_ij|): near bifurcation points an
/// eigenvalue crosses zero and is reported Marginal rather than misclassified.
pub fn default_zero_tol(a: &Matrix) -> f64 {
    1e-8 * (1.0 + a.norm_max())
}

/// Counts eigenvalue signs with |lambda| < zero_tol treated as zero.
pub fn classify(eigenvalues: &[f64], zero_tol: f64) -> StabilityReport {
    let mut eigs = eigenvalues.to_vec();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n_zero = eigs.iter().filter(|x| x.abs() < zero_tol).count();
    let n_positive = eigs.iter().filter(|x| **x >= zero_tol).count();
    let n_negative = eigs.len() - n_zero - n_positive;
    let class = if n_positive == 0 && n_zero == 0 {
        StabilityClass::AsymptoticallyStable
    } else if n_positive == 0 {
        StabilityClass::Marginal
    } else {
        StabilityClass::Unstable
    };
    StabilityReport { eigenvalues: eigs, n_positive, n_negative, n_zero, class }
}

/// Jacobian, spectrum and classification in one call.
pub fn stability(v: &[f64], params: &ModelParams) -> Result<StabilityReport> {
    let a = jacobian(v, params)?;
    let eigs = sym_eigenvalues(&a)?;
    Ok(classify(&eigs, default_zero_tol(&a)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, p_k: f64, b1: f64) -> ModelParams {
        ModelParams::new(n, 1.0, p_k, 1.0, b1, 1.0, 1.0, 0).unwrap()
    }

    #[test]
    fn jacobian_at_origin_spectrum() {
        // A = (pK/n)(J - nI) - b1 I: eigenvalues -b1 once, -pK - b1 repeated
        let p = params(4, 0.5, 1.0);
        let a = jacobian(&[0.0; 4], &p).unwrap();
        let eigs = sym_eigenvalues(&a).unwrap();
        let expect = [-1.5, -1.5, -1.5, -1.0];
        for (e, x) in eigs.iter().zip(expect) {
            assert!((e - x).abs() < 1e-12, "{eigs:?}");
        }
    }

    #[test]
    fn jacobian_is_bitwise_symmetric() {
        let p = params(6, 0.7, 0.3);
        let v = [0.3, -1.2, 0.9, 2.0, -0.4, 0.05];
        let a = jacobian(&v, &p).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(a.get(i, j).to_bits(), a.get(j, i).to_bits());
            }
        }
    }

    #[test]
    fn jacobian_row_sums() {
        let p = params(5, 0.5, 0.8);
        let v = [0.1, -0.7, 1.3, 0.4, -2.1];
        let a = jacobian(&v, &p).unwrap();
        for i in 0..5 {
            let row: f64 = (0..5).map(|j| a.get(i, j)).sum();
            assert!((row + p.b1 * v[i].cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_diagonal() {
        let a = Matrix::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 3.0]]);
        assert_eq!(sym_eigenvalues(&a).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigen_two_by_two_exchange() {
        let a = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = sym_eigenvalues(&a).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigen_rejects_asymmetry() {
        let a = Matrix::from_rows(&[&[0.0, 1.0], &[2.0, 0.0]]);
        assert!(matches!(sym_eigenvalues(&a), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn eigen_matches_characteristic_polynomial_3x3() {
        // brute-force oracle: roots of det(A - x I) for symmetric 3x3 via
        // the trigonometric solution of the depressed cubic
        let rows: [&[f64]; 3] = [&[2.0, -0.4, 0.7], &[-0.4, -1.0, 0.2], &[0.7, 0.2, 0.5]];
        let a = Matrix::from_rows(&rows);
        let eigs = sym_eigenvalues(&a).unwrap();

        let (p1, q, tr) = {
            let tr = a.trace();
            let mut sum_sq = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    sum_sq += a.get(i, j) * a.get(i, j);
                }
            }
            let mean = tr / 3.0;
            let p2 = (0..3).map(|i| (a.get(i, i) - mean).powi(2)).sum::<f64>()
                + 2.0 * (a.get(0, 1).powi(2) + a.get(0, 2).powi(2) + a.get(1, 2).powi(2));
            let p1 = (p2 / 6.0).sqrt();
            let det_b = {
                let b = |i: usize, j: usize| {
                    (a.get(i, j) - if i == j { mean } else { 0.0 }) / p1
                };
                b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
                    - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
                    + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0))
            };
            let _ = sum_sq;
            (p1, det_b / 2.0, tr)
        };
        let phi = (q.clamp(-1.0, 1.0)).acos() / 3.0;
        let mean = tr / 3.0;
        let mut expect = [
            mean + 2.0 * p1 * phi.cos(),
            mean + 2.0 * p1 * (phi + 2.0 * std::f64::consts::PI / 3.0).cos(),
            mean + 2.0 * p1 * (phi + 4.0 * std::f64::consts::PI / 3.0).cos(),
        ];
        expect.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (e, x) in eigs.iter().zip(expect) {
            assert!((e - x).abs() < 1e-9, "{eigs:?} vs {expect:?}");
        }
    }

    #[test]
    fn eigen_sum_and_product_match_trace_and_det() {
        let p = params(4, 0.5, 0.9);
        let v = [0.2, -0.5, 0.8, 1.9];
        let a = jacobian(&v, &p).unwrap();
        let eigs = sym_eigenvalues(&a).unwrap();
        let tr = a.trace();
        assert!((eigs.iter().sum::<f64>() - tr).abs() < 1e-9 * 4.0 * a.norm_max().max(1.0));

        // 4x4 determinant by cofactor expansion
        fn det(m: &[[f64; 4]; 4]) -> f64 {
            let minor = |m: &[[f64; 4]; 4], skip: usize| {
                let mut s = [[0.0; 3]; 3];
                for (ri, r) in (1..4).enumerate() {
                    let mut cj = 0;
                    for c in 0..4 {
                        if c == skip {
                            continue;
                        }
                        s[ri][cj] = m[r][c];
                        cj += 1;
                    }
                }
                s[0][0] * (s[1][1] * s[2][2] - s[1][2] * s[2][1])
                    - s[0][1] * (s[1][0] * s[2][2] - s[1][2] * s[2][0])
                    + s[0][2] * (s[1][0] * s[2][1] - s[1][1] * s[2][0])
            };
            (0..4)
                .map(|c| {
                    let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                    sign * m[0][c] * minor(m, c)
                })
                .sum()
        }
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = a.get(i, j);
            }
        }
        let d = det(&m);
        let prod: f64 = eigs.iter().product();
        assert!((prod - d).abs() < 1e-8 * d.abs().max(1.0), "prod {prod} det {d}");
    }

    #[test]
    fn classify_all_negative_is_stable() {
        let r = classify(&[-3.0, -1.0, -0.2], 1e-8);
        assert_eq!(r.class, StabilityClass::AsymptoticallyStable);
        assert_eq!((r.n_positive, r.n_negative, r.n_zero), (0, 3, 0));
    }

    #[test]
    fn classify_marginal_and_unstable() {
        let r = classify(&[-1.0, 1e-12, -0.5], 1e-8);
        assert_eq!(r.class, StabilityClass::Marginal);
        let r = classify(&[-1.0, 0.3], 1e-8);
        assert_eq!(r.class, StabilityClass::Unstable);
        assert_eq!(r.n_positive, 1);
    }

    #[test]
    fn counts_sum_to_n() {
        let r = classify(&[-2.0, -1e-10, 1e-10, 0.4, 5.0], 1e-8);
        assert_eq!(r.n_positive + r.n_negative + r.n_zero, 5);
    }
}
