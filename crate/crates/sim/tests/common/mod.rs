//! Shared fixtures for the integration and acceptance suites: the three
//! fixed small dynamics instances with their certificates, random matrix
//! builders honoring spectral bands, and the pairwise-decay assertion.

// each integration-test binary compiles its own copy, so helpers used by
// only one suite look dead in the others
#![allow(dead_code)]

use tvopt_core::certify::{
    fb_gamma_star, fb_rate, pal_certify, pd_certificate, pd_metric, PalProgramInput,
};
use tvopt_core::dynamics::{ConstraintData, ProblemData, VectorField};
use tvopt_core::linalg::Matrix;
use tvopt_core::metric::{weighted_norm, Metric};
use tvopt_core::monotone::MonotoneMap;
use tvopt_core::prox::ProxFamily;
use tvopt_core::rng::SplitMix64;

/// 20 random trajectory pairs must satisfy
/// `|z1(t) - z2(t)|_P <= (1 + 5 dt c) e^{-c t} |z1(0) - z2(0)|_P`
/// over `[0, 10/c]` under forward Euler.
pub fn assert_pairwise_decay(
    field: &VectorField<f64>,
    metric: &Metric<f64>,
    c: f64,
    dt: f64,
    seed: u64,
    scale: f64,
) {
    let mut rng = SplitMix64::new(seed);
    let n = field.state_dim();
    let t_end = 10.0 / c;
    let steps = (t_end / dt).round() as usize;
    let slack = 1.0 + 5.0 * dt * c;
    for pair in 0..20 {
        let mut z1: Vec<f64> = rng.normal_vec(n).iter().map(|v| v * scale).collect();
        let mut z2: Vec<f64> = rng.normal_vec(n).iter().map(|v| v * scale).collect();
        let e0 = weighted_norm(&sub(&z1, &z2), metric).unwrap();
        for k in 0..=steps {
            let t = k as f64 * dt;
            let e = weighted_norm(&sub(&z1, &z2), metric).unwrap();
            assert!(
                e <= slack * (-c * t).exp() * e0 + 1e-12,
                "pair {pair}: decay violated at t = {t}: {e} > {}",
                slack * (-c * t).exp() * e0
            );
            let v1 = field.eval(&z1, t);
            let v2 = field.eval(&z2, t);
            for i in 0..n {
                z1[i] += dt * v1[i];
                z2[i] += dt * v2[i];
            }
        }
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

/// Forward-backward instance: affine strongly monotone operator with an l1
/// regularizer; certificate is the closed-form splitting rate in the
/// Euclidean metric.
pub fn fb_instance() -> (ProblemData<f64>, f64) {
    let m_mat =
        Matrix::from_row_slice(3, 3, &[1.6, 0.3, -0.2, -0.1, 1.4, 0.2, 0.3, -0.2, 1.8]).unwrap();
    let op = MonotoneMap::affine(m_mat, vec![0.4, -0.7, 0.2]).unwrap();
    let m = op.strong_monotonicity();
    let ell = op.lipschitz();
    let gamma = fb_gamma_star(m, ell);
    let rate = fb_rate(m, ell, gamma).unwrap();
    let data = ProblemData::new(op, ProxFamily::l1(3, 0.5).unwrap(), None, gamma).unwrap();
    (data, rate)
}

/// Primal-dual instance: quadratic objective with one equality constraint;
/// certificate from the closed-form saddle gains.
pub fn pd_instance() -> (ProblemData<f64>, f64, Metric<f64>) {
    let h = Matrix::from_row_slice(3, 3, &[1.5, 0.2, 0.0, 0.2, 1.2, -0.1, 0.0, -0.1, 1.8]).unwrap();
    let vals = tvopt_core::linalg::sym_eigenvalues(&h).unwrap();
    let (rho, ell) = (vals[0], vals[2]);
    let a = Matrix::from_row_slice(1, 3, &[0.8, -0.5, 1.1]).unwrap();
    let aat = 0.8 * 0.8 + 0.5 * 0.5 + 1.1 * 1.1;
    let gains = pd_certificate(rho, ell, aat, aat).unwrap();
    let metric = pd_metric(&gains, &a).unwrap();
    let hh = h.clone();
    let op = MonotoneMap::gradient_from_fn(3, rho, ell, 0.0, move |x: &[f64], _: &[f64]| {
        let mut v = hh.matvec(x);
        v[0] += 0.3;
        v[1] -= 0.1;
        v
    })
    .unwrap();
    let con = ConstraintData::new(a, |_: &[f64]| vec![0.7], 0.0).unwrap();
    let data = ProblemData::new(op, ProxFamily::Zero { dim: 3 }, Some(con), 1.0).unwrap();
    (data, gains.c, metric)
}

/// Augmented-Lagrangian instance: quadratic objective, moving-halfspace
/// regularizer behind a row constraint; certificate from the program.
pub fn pal_instance() -> (ProblemData<f64>, f64, Metric<f64>) {
    let h = Matrix::from_row_slice(2, 2, &[1.5, 0.2, 0.2, 1.1]).unwrap();
    let vals = tvopt_core::linalg::sym_eigenvalues(&h).unwrap();
    let (rho, ell) = (vals[0], vals[1]);
    let a = Matrix::from_row_slice(1, 2, &[0.8, -0.6]).unwrap();
    let aat = 1.0;
    let gamma = 1.0;
    let input = PalProgramInput::with_defaults(rho, ell, aat, aat, gamma).unwrap();
    let cert = pal_certify(&input, &a).unwrap();
    assert!(cert.c_star > 0.0);
    let hh = h.clone();
    let op = MonotoneMap::gradient_from_fn(2, rho, ell, 0.0, move |x: &[f64], _: &[f64]| {
        let mut v = hh.matvec(x);
        v[0] += 0.3;
        v[1] -= 0.2;
        v
    })
    .unwrap();
    let con = ConstraintData::new(a, |_: &[f64]| vec![0.0], 0.0).unwrap();
    let data = ProblemData::new(op, ProxFamily::Halfspace, Some(con), gamma).unwrap();
    (data, cert.c_star, cert.metric.clone())
}

/// Random orthonormal columns via Gram-Schmidt.
pub fn random_orthonormal(rng: &mut SplitMix64, rows: usize, cols: usize) -> Matrix<f64> {
    let mut q = Matrix::zeros(rows, cols);
    for j in 0..cols {
        let mut v = rng.normal_vec(rows);
        for k in 0..j {
            let col: Vec<f64> = (0..rows).map(|i| q[(i, k)]).collect();
            let proj = tvopt_core::linalg::dot(&v, &col);
            for i in 0..rows {
                v[i] -= proj * col[i];
            }
        }
        let nrm = tvopt_core::linalg::norm2(&v);
        for i in 0..rows {
            q[(i, j)] = v[i] / nrm;
        }
    }
    q
}

/// Symmetric matrix with spectrum uniform in `[lo, hi]`.
pub fn random_symmetric_in(rng: &mut SplitMix64, n: usize, lo: f64, hi: f64) -> Matrix<f64> {
    let q = random_orthonormal(rng, n, n);
    let mut scaled = q.clone();
    for j in 0..n {
        let w = rng.uniform(lo, hi);
        for i in 0..n {
            scaled[(i, j)] *= w;
        }
    }
    scaled.matmul(&q.transpose())
}

/// Random `m x n` matrix with `a_min I <= A A' <= a_max I`.
pub fn random_banded(
    rng: &mut SplitMix64,
    m: usize,
    n: usize,
    a_min: f64,
    a_max: f64,
) -> Matrix<f64> {
    let q = random_orthonormal(rng, n, m);
    let mut a = Matrix::zeros(m, n);
    for i in 0..m {
        let s = rng.uniform(a_min, a_max).sqrt();
        for j in 0..n {
            a[(i, j)] = s * q[(j, i)];
        }
    }
    a
}
