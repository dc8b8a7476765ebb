//! Verification suites for the certificates: random-sample LMI checks for
//! the saddle lemmas, a brute-force grid oracle for the nonlinear program,
//! golden-section checks of the optimal-step formulas, and sampled-Jacobian
//! log-norm validation of the affine forward-backward metric.

use tvopt_core::certify::{
    affine_fb_certificate, dual_block_bound_check, fb_gamma_star, fb_rate,
    generalized_saddle_check, pal_certify, pal_h, pd_certificate, proxgrad_gamma_star,
    proxgrad_rate, saddle_lmi_check, PalProgramInput,
};
use tvopt_core::linalg::Matrix;
use tvopt_core::metric::lognorm;
use tvopt_core::prox::ProxFamily;
use tvopt_core::rng::SplitMix64;

// ── random sample builders ──────────────────────────────────────────

/// Random orthonormal columns via Gram-Schmidt.
fn random_orthonormal(rng: &mut SplitMix64, rows: usize, cols: usize) -> Matrix<f64> {
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
fn random_symmetric_in(rng: &mut SplitMix64, n: usize, lo: f64, hi: f64) -> Matrix<f64> {
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

// ── Theorem-level checks ────────────────────────────────────────────

#[test]
fn saddle_lmi_holds_on_200_samples() {
    let mut rng = SplitMix64::new(211);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let n = 2 + rng.usize_below(3);
        let m = 1 + rng.usize_below(n);
        let rho = rng.uniform(0.3, 1.5);
        let ell = rho * rng.uniform(1.0, 2.5);
        let a_min = rng.uniform(0.4, 2.0);
        let a_max = a_min * rng.uniform(1.0, 2.0);
        let b = random_symmetric_in(&mut rng, n, rho, ell);
        let a = banded(&mut rng, m, n, a_min, a_max);
        let gains = pd_certificate(rho, ell, a_min, a_max).unwrap();
        let ok = saddle_lmi_check(&b, &a, gains.alpha, gains.c).unwrap();
        assert!(ok, "saddle LMI failed for a sampled (B, A) pair");
        worst = worst.max(gains.c);
    }
    assert!(worst > 0.0);
}

#[test]
fn saddle_lmi_sharpness_probe() {
    // doubling the certified rate must fail for at least one sample
    let mut rng = SplitMix64::new(223);
    let mut failed_somewhere = false;
    for _ in 0..50 {
        let n = 2 + rng.usize_below(3);
        let m = 1 + rng.usize_below(n);
        let rho = rng.uniform(0.3, 1.5);
        let ell = rho * rng.uniform(1.0, 2.5);
        let a_min = rng.uniform(0.4, 2.0);
        let a_max = a_min * rng.uniform(1.0, 2.0);
        let b = random_symmetric_in(&mut rng, n, rho, ell);
        let a = banded(&mut rng, m, n, a_min, a_max);
        let gains = pd_certificate(rho, ell, a_min, a_max).unwrap();
        if !saddle_lmi_check(&b, &a, gains.alpha, 2.0 * gains.c).unwrap() {
            failed_somewhere = true;
            break;
        }
    }
    assert!(
        failed_somewhere,
        "inflated rate never failed; check is vacuous"
    );
}

fn banded(rng: &mut SplitMix64, m: usize, n: usize, a_min: f64, a_max: f64) -> Matrix<f64> {
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

#[test]
fn generalized_saddle_holds_with_program_certificate() {
    let mut rng = SplitMix64::new(227);
    for _ in 0..200 {
        let n = 2 + rng.usize_below(3);
        let m = 1 + rng.usize_below(n);
        let rho = rng.uniform(0.3, 1.5);
        let ell = rho * rng.uniform(1.0, 2.5);
        let a_min = rng.uniform(0.4, 2.0);
        let a_max = a_min * rng.uniform(1.0, 2.0);
        let gamma = rng.uniform(0.5, 4.0);
        let a = banded(&mut rng, m, n, a_min, a_max);
        let input = PalProgramInput::with_defaults(rho, ell, a_min, a_max, gamma).unwrap();
        let cert = pal_certify(&input, &a).unwrap();
        assert!(cert.c_star > 0.0, "expected a strong certificate");
        let b = random_symmetric_in(&mut rng, n, rho, ell);
        let g = random_symmetric_in(&mut rng, m, 0.0, 1.0);
        let ok = generalized_saddle_check(&b, &a, &g, gamma, &cert).unwrap();
        assert!(ok, "generalized saddle LMI failed for a sampled triple");
    }
}

#[test]
fn generalized_saddle_block_diagonal_case() {
    // G = 0 block-diagonalizes the matrix to diag(-B, -gamma I); the check
    // passes whenever c* <= min(rho, gamma)
    let mut rng = SplitMix64::new(229);
    let rho = 1.0;
    let ell = 1.8;
    let (a_min, a_max) = (1.0, 1.0);
    let gamma = 2.0;
    let a = banded(&mut rng, 1, 3, a_min, a_max);
    let input = PalProgramInput::with_defaults(rho, ell, a_min, a_max, gamma).unwrap();
    let cert = pal_certify(&input, &a).unwrap();
    assert!(cert.c_star <= rho.min(gamma));
    let b = random_symmetric_in(&mut rng, 3, rho, ell);
    let g = Matrix::zeros(1, 1);
    assert!(generalized_saddle_check(&b, &a, &g, gamma, &cert).unwrap());
}

#[test]
fn dual_block_bound_on_200_samples() {
    let mut rng = SplitMix64::new(233);
    for _ in 0..200 {
        let m = 1 + rng.usize_below(5);
        let x_max = rng.uniform(0.5, 3.0);
        let x = random_symmetric_in(&mut rng, m, 0.0, x_max);
        let gamma = rng.uniform(0.3, 3.0);
        let alpha = rng.uniform(0.0, gamma / x_max);
        let d: Vec<f64> = (0..m).map(|_| rng.next_f64()).collect();
        assert!(
            dual_block_bound_check(&x, &d, gamma, alpha).unwrap(),
            "dual-block bound failed on a sample"
        );
    }
}

// ── nonlinear program vs brute force ────────────────────────────────

/// Brute-force oracle: scan the (c, alpha) grid at the given resolution for
/// each kappa, independent of the closed-form interval logic.
fn brute_force_best_c(input: &PalProgramInput<f64>, res: f64) -> f64 {
    let mut best = 0.0f64;
    for &kappa in &input.kappa_grid {
        let alpha_max = (1.0 / input.a_max.sqrt() - input.epsilon).min(input.gamma / input.a_max);
        let coef = (0.75 - 1.0 / (2.0 * kappa)) * input.a_min;
        let c_max = input.rho.min(coef * alpha_max);
        if c_max <= 0.0 {
            continue;
        }
        let n_c = (c_max / res).floor() as usize;
        let n_a = (alpha_max / res).floor() as usize;
        let feasible = |c: f64| -> bool {
            for ia in 0..=n_a {
                let alpha = ia as f64 * res;
                if c <= coef * alpha && pal_h(input, c, alpha, kappa) >= 0.0 {
                    return true;
                }
            }
            false
        };
        // feasibility is monotone in c: binary search over the c-grid
        let (mut lo_i, mut hi_i) = (0usize, n_c);
        if feasible(n_c as f64 * res) {
            best = best.max(n_c as f64 * res);
            continue;
        }
        while hi_i - lo_i > 1 {
            let mid = (lo_i + hi_i) / 2;
            if feasible(mid as f64 * res) {
                lo_i = mid;
            } else {
                hi_i = mid;
            }
        }
        best = best.max(lo_i as f64 * res);
    }
    best
}

#[test]
fn program_output_matches_grid_oracle_on_random_tuples() {
    let mut rng = SplitMix64::new(239);
    for trial in 0..10 {
        let rho = rng.uniform(0.2, 2.0);
        let ell = rho * rng.uniform(1.0, 3.0);
        let a_min = rng.uniform(0.3, 3.0);
        let a_max = a_min * rng.uniform(1.0, 3.0);
        let gamma = rng.uniform(0.3, 5.0);
        let eps = 1e-3 / a_max.sqrt();
        let kappas: Vec<f64> = (0..5)
            .map(|i| {
                let lo: f64 = 2.0 / 3.0 + 1e-3;
                (lo.ln() + i as f64 / 4.0 * (100.0f64.ln() - lo.ln())).exp()
            })
            .collect();
        let input = PalProgramInput::new(rho, ell, a_min, a_max, gamma, eps, kappas, 1e-6).unwrap();
        let m = 1 + rng.usize_below(2);
        let n = m + rng.usize_below(2);
        let a = banded(&mut rng, m, n, a_min, a_max);
        let cert = pal_certify(&input, &a).unwrap();
        let oracle = brute_force_best_c(&input, 1e-4);
        assert!(
            (cert.c_star - oracle).abs() <= 2e-3,
            "trial {trial}: program {} vs oracle {oracle}",
            cert.c_star
        );
    }
}

#[test]
fn zero_rate_always_feasible_for_random_inputs() {
    let mut rng = SplitMix64::new(241);
    for _ in 0..50 {
        let rho = rng.uniform(0.2, 2.0);
        let ell = rho * rng.uniform(1.0, 3.0);
        let a_min = rng.uniform(0.3, 3.0);
        let a_max = a_min * rng.uniform(1.0, 3.0);
        let gamma = rng.uniform(0.3, 5.0);
        let input = PalProgramInput::with_defaults(rho, ell, a_min, a_max, gamma).unwrap();
        // alpha = 0 satisfies every constraint at c = 0
        assert!(pal_h(&input, 0.0, 0.0, input.kappa_grid[0]) >= 0.0);
    }
}

#[test]
fn program_monotone_in_a_min() {
    let mut rng = SplitMix64::new(251);
    for _ in 0..10 {
        let rho = rng.uniform(0.4, 1.5);
        let ell = rho * rng.uniform(1.0, 2.0);
        let a_max = rng.uniform(2.0, 4.0);
        let gamma = rng.uniform(0.5, 3.0);
        let lo = rng.uniform(0.3, 1.0);
        let hi = lo * rng.uniform(1.2, 2.0);
        let a1 = banded(&mut rng, 1, 2, lo, lo);
        let mk =
            |a_min: f64| PalProgramInput::with_defaults(rho, ell, a_min, a_max, gamma).unwrap();
        // a_min enters only through the certificate program, so reuse one A
        // whose spectrum sits at the lower bound of both declared bands
        let c_lo = pal_certify(&mk(lo), &a1).unwrap().c_star;
        let c_hi_input = mk(hi.min(a_max));
        // the same A violates the larger a_min band, so only compare h and the
        // rate cap analytically: enlarging a_min never shrinks the optimum
        let best_lo = brute_force_best_c(&mk(lo), 1e-3);
        let best_hi = brute_force_best_c(&c_hi_input, 1e-3);
        assert!(best_hi + 1e-9 >= best_lo, "a_min grew but c* shrank");
        assert!(c_lo <= best_lo + 2e-3);
    }
}

// ── optimal-step formulas ───────────────────────────────────────────

/// Golden-section maximizer on an interval.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if f(a) < f(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn fb_rate_optimizer_matches_formula() {
    let mut rng = SplitMix64::new(257);
    for _ in 0..100 {
        let m = rng.uniform(0.2, 2.0);
        let ell = m * rng.uniform(1.05, 4.0);
        let gs = fb_gamma_star(m, ell);
        // identity at the optimizer, frozen symbolic substitution
        let at_star = fb_rate(m, ell, gs).unwrap();
        let closed = 1.0 - (1.0 - (m / ell) * (m / ell)).sqrt();
        assert!((at_star - closed).abs() < 1e-12);
        // single interior maximizer found numerically
        let eps = 1e-9;
        let found = golden_max(
            |g| fb_rate(m, ell, g).unwrap_or(0.0),
            eps,
            2.0 * m / (ell * ell) - eps,
        );
        assert!((found - gs).abs() < 1e-6, "golden {found} vs formula {gs}");
    }
}

#[test]
fn proxgrad_rate_optimizer_matches_formula() {
    let mut rng = SplitMix64::new(263);
    for _ in 0..100 {
        let m = rng.uniform(0.2, 2.0);
        let ell = m * rng.uniform(1.05, 4.0);
        let gs = proxgrad_gamma_star(m, ell);
        let at_star = proxgrad_rate(m, ell, gs).unwrap();
        let kappa = ell / m;
        let closed = 1.0 - (kappa - 1.0) / (kappa + 1.0);
        assert!((at_star - closed).abs() < 1e-12);
        let eps = 1e-9;
        let found = golden_max(
            |g| proxgrad_rate(m, ell, g).unwrap_or(0.0),
            eps,
            2.0 / ell - eps,
        );
        assert!((found - gs).abs() < 1e-6);
    }
}

#[test]
fn proxgrad_rate_dominates_fb_rate_for_gradients() {
    let mut rng = SplitMix64::new(269);
    for _ in 0..50 {
        let m = rng.uniform(0.2, 2.0);
        let ell = m * rng.uniform(1.05, 4.0);
        // shared domain: (0, 2m/ell^2)
        let hi = 2.0 * m / (ell * ell);
        for k in 1..40 {
            let gamma = hi * k as f64 / 40.0;
            if gamma <= 0.0 || gamma >= hi {
                continue;
            }
            let fb = fb_rate(m, ell, gamma).unwrap();
            let pg = proxgrad_rate(m, ell, gamma).unwrap();
            assert!(pg >= fb - 1e-12, "gradient rate below splitting rate");
        }
    }
}

// ── affine forward-backward metric validated on sampled Jacobians ──

#[test]
fn affine_fb_metric_bounds_sampled_jacobians() {
    let mut rng = SplitMix64::new(271);
    for _ in 0..8 {
        let n = 2 + rng.usize_below(2);
        let a = random_symmetric_in(&mut rng, n, 0.6, 2.5);
        let lmin = tvopt_core::linalg::sym_eigenvalues(&a).unwrap()[0];
        let gamma = 1.0 / lmin * rng.uniform(1.1, 2.0);
        let cert = affine_fb_certificate(&a, gamma).unwrap();
        let b = rng.normal_vec(n);
        let fam = ProxFamily::l1(n, 0.7).unwrap();

        // forward-backward field through the l1 prox
        let field = |x: &[f64]| -> Vec<f64> {
            let ax = a.matvec(x);
            let inner: Vec<f64> = x
                .iter()
                .zip(ax.iter().zip(&b))
                .map(|(&xi, (&axi, &bi))| xi - gamma * (axi + bi))
                .collect();
            let p = fam.evaluate(&inner, gamma, &[]).unwrap();
            p.iter().zip(x).map(|(&pi, &xi)| pi - xi).collect()
        };

        let mut checked = 0;
        for _ in 0..60 {
            let x: Vec<f64> = rng.normal_vec(n).iter().map(|v| v * 2.0).collect();
            // finite-difference Jacobian with kink detection
            let h = 1e-6;
            let mut jac = Matrix::zeros(n, n);
            let mut smooth = true;
            for j in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fp = field(&xp);
                let fm = field(&xm);
                let mut xp2 = x.clone();
                let mut xm2 = x.clone();
                xp2[j] += 40.0 * h;
                xm2[j] -= 40.0 * h;
                let fp2 = field(&xp2);
                let fm2 = field(&xm2);
                for i in 0..n {
                    let s1 = (fp[i] - fm[i]) / (2.0 * h);
                    let s2 = (fp2[i] - fm2[i]) / (80.0 * h);
                    if (s1 - s2).abs() > 1e-7 {
                        smooth = false;
                    }
                    jac[(i, j)] = s1;
                }
            }
            if !smooth {
                continue;
            }
            let mu = lognorm(&jac, &cert.metric).unwrap();
            assert!(mu <= -1.0 + 1e-6, "sampled Jacobian log-norm {mu} above -1");
            checked += 1;
        }
        assert!(checked >= 20, "too few smooth sample points");
    }
}
