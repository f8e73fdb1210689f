#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rankgm::edge_selection::{wishart_posterior_mean, wishart_reference};
use rankgm::horseshoe_gibbs::augment::{posterior_moments, sample_gaussian_posterior};
use rankgm::horseshoe_gibbs::{
    sample_a, sample_b, sample_h, sample_lambda2, sample_sigma2, GaussianPrior, HorseshoeState,
    SolveRoute,
};
use rankgm::model_selection::constrained_mle;
use rankgm::rng::rng_from_seed;
use rankgm::simulation::{scaled_l1, score_structure, ConfusionCounts};
use rankgm::EdgeMatrix;

/// Adaptive Simpson quadrature on a finite interval, started from 256 equal
/// panels so that narrow peaks cannot be missed by the first estimate.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let panels = 256;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == panels { b } else { lo + h };
            simpson(f, lo, hi, tol / panels as f64)
        })
        .sum()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Mean and variance of N(mu, sigma2) truncated to (lower, upper), by quadrature.
pub fn truncated_moments(mu: f64, sigma2: f64, lower: f64, upper: f64) -> (f64, f64) {
    let sd = sigma2.sqrt();
    let lo = lower.max(mu - 40.0 * sd);
    let hi = upper.min(mu + 40.0 * sd);
    // Shift so the density peaks at 1 inside the interval, avoiding underflow far in a tail.
    let mode = mu.clamp(lo, hi);
    let log_peak = -(mode - mu).powi(2) / (2.0 * sigma2);
    let dens = |x: f64| (-(x - mu).powi(2) / (2.0 * sigma2) - log_peak).exp();
    let tol = 1e-13;
    let z = integrate(&dens, lo, hi, tol);
    let m1 = integrate(&|x| x * dens(x), lo, hi, tol) / z;
    let m2 = integrate(&|x| (x - m1).powi(2) * dens(x), lo, hi, tol) / z;
    (m1, m2)
}

/// Standard normal CDF Φ and survival 1 − Φ from erfc.
pub fn phi(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn phi_upper(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// CDF of N(mu, sigma2) truncated to (lower, upper), evaluated in whichever
/// tail keeps precision.
pub fn truncated_cdf(x: f64, mu: f64, sigma2: f64, lower: f64, upper: f64) -> f64 {
    let sd = sigma2.sqrt();
    let (a, b, z) = ((lower - mu) / sd, (upper - mu) / sd, (x - mu) / sd);
    if a > 0.0 {
        (phi_upper(a) - phi_upper(z)) / (phi_upper(a) - phi_upper(b))
    } else {
        (phi(z) - phi(a)) / (phi(b) - phi(a))
    }
}

/// Two-sided Kolmogorov–Smirnov statistic of `sample` against `cdf`.
pub fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at level 0.001: √(−ln(0.0005)/2)/√n.
pub fn ks_critical_001(n: usize) -> f64 {
    (-(0.0005f64).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean and batch-means standard error of an autocorrelated series.
pub fn batch_mean_se(xs: &[f64], batches: usize) -> (f64, f64) {
    let len = xs.len() / batches;
    let means: Vec<f64> = xs
        .chunks(len)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    mean_and_se(&means)
}

pub fn standard_normal_matrix(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_from_seed(seed);
    DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
}

/// Draws of N(0, Σ) rows for a given covariance Σ.
pub fn gaussian_rows(sigma: &DMatrix<f64>, n: usize, seed: u64) -> DMatrix<f64> {
    let l = sigma.clone().cholesky().expect("covariance is SPD").l();
    standard_normal_matrix(n, sigma.nrows(), seed) * l.transpose()
}

/// Objective −n log det Ψ + tr(ΨS) with +∞ outside the SPD cone, computed by
/// LU so it does not share code with the library.
pub fn precision_objective(psi: &DMatrix<f64>, s: &DMatrix<f64>, n: usize) -> f64 {
    if psi.clone().cholesky().is_none() {
        return f64::INFINITY;
    }
    let det = psi.clone().lu().determinant();
    -(n as f64) * det.ln() + (psi * s).trace()
}

/// Free coordinates: the diagonal, then the edges in order.
pub fn build_precision(theta: &[f64], edges: &EdgeMatrix) -> DMatrix<f64> {
    let p = edges.p();
    let mut psi = DMatrix::from_diagonal(&DVector::from_column_slice(&theta[..p]));
    for (e, (i, j)) in edges.edges().enumerate() {
        psi[(i, j)] = theta[p + e];
        psi[(j, i)] = theta[p + e];
    }
    psi
}

/// Nelder–Mead simplex minimization with restarts.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, start: Vec<f64>) -> Vec<f64> {
    let dim = start.len();
    let mut best = start;
    for _restart in 0..6 {
        let mut simplex: Vec<Vec<f64>> = vec![best.clone()];
        for i in 0..dim {
            let mut v = best.clone();
            v[i] += 0.05 * v[i].abs().max(0.1);
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
        for _ in 0..20_000 {
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();
            if (values[dim] - values[0]).abs() < 1e-15 * values[0].abs().max(1.0) {
                break;
            }
            let centroid: Vec<f64> = (0..dim)
                .map(|k| simplex[..dim].iter().map(|v| v[k]).sum::<f64>() / dim as f64)
                .collect();
            let towards = |t: f64| -> Vec<f64> {
                (0..dim)
                    .map(|k| centroid[k] + t * (simplex[dim][k] - centroid[k]))
                    .collect()
            };
            let reflected = towards(-1.0);
            let fr = f(&reflected);
            if fr < values[0] {
                let expanded = towards(-2.0);
                let fe = f(&expanded);
                if fe < fr {
                    simplex[dim] = expanded;
                    values[dim] = fe;
                } else {
                    simplex[dim] = reflected;
                    values[dim] = fr;
                }
            } else if fr < values[dim - 1] {
                simplex[dim] = reflected;
                values[dim] = fr;
            } else {
                let contracted = if fr < values[dim] {
                    towards(-0.5)
                } else {
                    towards(0.5)
                };
                let fc = f(&contracted);
                if fc < values[dim].min(fr) {
                    simplex[dim] = contracted;
                    values[dim] = fc;
                } else {
                    for i in 1..=dim {
                        simplex[i] = (0..dim)
                            .map(|k| simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]))
                            .collect();
                        values[i] = f(&simplex[i]);
                    }
                }
            }
        }
        let i = (0..=dim)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .unwrap();
        best = simplex[i].clone();
    }
    best
}

/// Inverse by Gauss–Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let p = m.nrows();
    let mut a = m.clone();
    let mut inv = DMatrix::identity(p, p);
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
            .unwrap();
        a.swap_rows(col, pivot);
        inv.swap_rows(col, pivot);
        let d = a[(col, col)];
        for j in 0..p {
            a[(col, j)] /= d;
            inv[(col, j)] /= d;
        }
        for i in (0..p).filter(|&i| i != col) {
            let f = a[(i, col)];
            for j in 0..p {
                a[(i, j)] -= f * a[(col, j)];
                inv[(i, j)] -= f * inv[(col, j)];
            }
        }
    }
    inv
}

/// Checks sample mean and covariance of `draws` against closed-form moments,
/// each entry within four standard errors.
pub fn check_gaussian_moments(draws: &[DVector<f64>], mean: &DVector<f64>, cov: &DMatrix<f64>) {
    let q = mean.len();
    for k in 0..q {
        let xs: Vec<f64> = draws.iter().map(|b| b[k]).collect();
        let (m, se) = mean_and_se(&xs);
        assert!(
            (m - mean[k]).abs() < 4.0 * se,
            "mean[{k}] {m} vs {} (se {se})",
            mean[k]
        );
        for d in k..q {
            let prods: Vec<f64> = draws
                .iter()
                .map(|b| (b[k] - mean[k]) * (b[d] - mean[d]))
                .collect();
            let (c, se) = mean_and_se(&prods);
            assert!(
                (c - cov[(k, d)]).abs() < 4.0 * se,
                "cov[{k},{d}] {c} vs {} (se {se})",
                cov[(k, d)]
            );
        }
    }
}

/// Inverse-gamma CDF P(X ≤ x) = Q(shape, rate/x) with Q the upper regularized gamma.
pub fn ig_cdf(shape: f64, rate: f64, x: f64) -> f64 {
    statrs::function::gamma::gamma_ur(shape, rate / x)
}

/// Median by bisection on the inverse-gamma CDF.
pub fn ig_median(shape: f64, rate: f64) -> f64 {
    let (mut lo, mut hi) = (1e-12f64, 1e12f64);
    for _ in 0..300 {
        let mid = (lo * hi).sqrt();
        if ig_cdf(shape, rate, mid) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// Empirical median within four standard errors of the oracle, with the
/// standard error 1 / (2 f(m) √N) from the inverse-gamma density f.
pub fn check_median(xs: &mut [f64], shape: f64, rate: f64) {
    let m = ig_median(shape, rate);
    xs.sort_by(f64::total_cmp);
    let emp = xs[xs.len() / 2];
    let ln_density = shape * rate.ln()
        - statrs::function::gamma::ln_gamma(shape)
        - (shape + 1.0) * m.ln()
        - rate / m;
    let se = 1.0 / (2.0 * ln_density.exp() * (xs.len() as f64).sqrt());
    assert!(
        (emp - m).abs() < 4.0 * se,
        "median {emp} vs {m} (se {se}), IG({shape}, {rate})"
    );
}

/// Confusion counts (tp, tn, fp, fn) of two row-major p × p bit matrices.
pub fn brute_force(est: &[bool], truth: &[bool], p: usize) -> (u64, u64, u64, u64) {
    let (mut tp, mut tn, mut fp, mut fn_) = (0, 0, 0, 0);
    // Walk the full matrix and halve: each unordered pair appears twice.
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            match (est[i * p + j], truth[i * p + j]) {
                (true, true) => tp += 1,
                (false, false) => tn += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
            }
        }
    }
    (tp / 2, tn / 2, fp / 2, fn_ / 2)
}

pub fn symmetric_bits(p: usize, rng: &mut impl Rng, density: f64) -> Vec<bool> {
    let mut bits = vec![false; p * p];
    for i in 0..p {
        for j in i + 1..p {
            let b = rng.random::<f64>() < density;
            bits[i * p + j] = b;
            bits[j * p + i] = b;
        }
    }
    bits
}

/// Scores `cases` random edge-matrix pairs and matrix pairs with the library
/// and with brute-force counters; every value must agree exactly.
pub fn metric_fuzz(cases: usize, seed: u64) {
    let p = 20;
    let mut rng = rng_from_seed(seed);
    for case in 0..cases {
        let density = [0.0, 0.05, 0.3, 0.7, 1.0][case % 5];
        let e = symmetric_bits(p, &mut rng, density);
        let t = symmetric_bits(p, &mut rng, [0.1, 0.5, 0.0, 1.0, 0.2][case / 5 % 5]);
        let est = EdgeMatrix::from_fn(p, |i, j| e[i * p + j]);
        let truth = EdgeMatrix::from_fn(p, |i, j| t[i * p + j]);
        let (tp, tn, fp, fn_) = brute_force(&e, &t, p);
        let scores = score_structure(&est, &truth).unwrap();
        assert_eq!(scores.counts, ConfusionCounts { tp, tn, fp, fn_ });
        let sp = if tn + fp == 0 {
            1.0
        } else {
            tn as f64 / (tn + fp) as f64
        };
        let se = if tp + fn_ == 0 {
            1.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let (tpf, tnf, fpf, fnf) = (tp as f64, tn as f64, fp as f64, fn_ as f64);
        let denom = (tpf + fpf) * (tpf + fnf) * (tnf + fpf) * (tnf + fnf);
        let mcc = if denom == 0.0 {
            0.0
        } else {
            (tpf * tnf - fpf * fnf) / denom.sqrt()
        };
        assert_eq!(
            (scores.sp, scores.se, scores.mcc),
            (sp, se, mcc),
            "case {case}"
        );

        let a = DMatrix::from_fn(p, p, |_, _| rng.random::<f64>() * 4.0 - 2.0);
        let b = DMatrix::from_fn(p, p, |_, _| rng.random::<f64>() * 4.0 - 2.0);
        let mut sum = 0.0;
        for k in 0..p {
            for d in 0..p {
                sum += (a[(k, d)] - b[(k, d)]).abs();
            }
        }
        assert_eq!(scaled_l1(&a, &b).unwrap(), sum / (p * p) as f64);
    }
}

const DRAWS: usize = 100_000;

/// Moments of 10⁵ augmented draws against the closed-form posterior of a
/// random n × q regression.
pub fn regression_moments(n: usize, q: usize, route: SolveRoute) {
    let x = standard_normal_matrix(n, q, 1);
    let y = standard_normal_matrix(n, 1, 2).column(0).into_owned();
    let prior = GaussianPrior::from_variances(DVector::from_fn(q, |k, _| 0.3 + 0.4 * k as f64));
    let sigma2 = 0.7;
    let (mean, cov) = posterior_moments(&x, &y, sigma2, &prior).unwrap();
    let mut rng = rng_from_seed(3);
    let draws: Vec<DVector<f64>> = (0..DRAWS)
        .map(|_| sample_gaussian_posterior(&x, &y, sigma2, &prior, None, route, &mut rng).unwrap())
        .collect();
    check_gaussian_moments(&draws, &mean, &cov);
}

fn fixed_state() -> (HorseshoeState, DMatrix<f64>) {
    let mut state = HorseshoeState::new(3, 2.0).unwrap();
    let col = state.column_mut(0);
    col.beta = DVector::from_vec(vec![0.4, -0.2]);
    col.lambda2 = 0.8;
    col.a = 1.5;
    col.b = DVector::from_vec(vec![2.0, 0.5]);
    col.h = DVector::from_vec(vec![1.0, 3.0]);
    col.sigma2 = 0.9;
    (state, standard_normal_matrix(30, 3, 8))
}

/// Every inverse-gamma full conditional against its analytic law.
pub fn inverse_gamma_oracles() {
    let (state, y) = fixed_state();
    let (p, c) = (3.0f64, 2.0f64);
    let col = state.column(0);
    let factor = |k: f64| p * p * k / (c * c);
    let mut rng = rng_from_seed(9);

    // λ²: shape (q + 1)/2 = 1.5, rate ½ Σ β² p²k / (σ² b c²) + 1/a
    let quad = 0.4f64.powi(2) * factor(2.0) / 2.0 + 0.2f64.powi(2) * factor(3.0) / 0.5;
    let rate = 0.5 * quad / 0.9 + 1.0 / 1.5;
    let mut xs: Vec<f64> = (0..DRAWS)
        .map(|_| sample_lambda2(0, &state, &mut rng).unwrap())
        .collect();
    check_median(&mut xs, 1.5, rate);

    // a: IG(1, 1/λ² + 1); median rate / ln 2
    let mut xs: Vec<f64> = (0..DRAWS)
        .map(|_| sample_a(0, &state, &mut rng).unwrap())
        .collect();
    let rate = 1.0 / 0.8 + 1.0;
    assert!((ig_median(1.0, rate) - rate / std::f64::consts::LN_2).abs() < 1e-9 * rate);
    check_median(&mut xs, 1.0, rate);

    // b_kd for the predictor in global row 3 (0-based column 2)
    let rate = factor(3.0) * 0.04 / (2.0 * 0.9 * 0.8) + 1.0 / 3.0;
    let mut xs: Vec<f64> = (0..DRAWS)
        .map(|_| sample_b(2, 0, &state, &mut rng).unwrap())
        .collect();
    check_median(&mut xs, 1.0, rate);

    // h_kd: IG(1, 1/b + 1)
    let mut xs: Vec<f64> = (0..DRAWS)
        .map(|_| sample_h(1, 0, &state, &mut rng).unwrap())
        .collect();
    check_median(&mut xs, 1.0, 1.0 / 2.0 + 1.0);

    // σ²: shape (n + q)/2 + 0.01, rate ½ RSS + ½ Σ β² p²k / (λ² b c²) + 0.01; mean and median
    let resid = y.column(0) - y.columns(1, 2) * &col.beta;
    let shape = (30.0 + 2.0) / 2.0 + 0.01;
    let rate = 0.5 * resid.norm_squared() + 0.5 * quad / 0.8 + 0.01;
    let mut xs: Vec<f64> = (0..DRAWS)
        .map(|_| sample_sigma2(0, &state, &y, &mut rng).unwrap())
        .collect();
    let (m, se) = mean_and_se(&xs);
    assert!((m - rate / (shape - 1.0)).abs() < 4.0 * se);
    check_median(&mut xs, shape, rate);

    // last column: IG(n/2 + 0.01, ½‖Y_p‖² + 0.01)
    let shape = 15.0 + 0.01;
    let rate = 0.5 * y.column(2).norm_squared() + 0.01;
    let xs: Vec<f64> = (0..DRAWS)
        .map(|_| sample_sigma2(2, &state, &y, &mut rng).unwrap())
        .collect();
    let (m, se) = mean_and_se(&xs);
    assert!((m - rate / (shape - 1.0)).abs() < 4.0 * se);
}

/// Wishart reference mean and partial correlations against a Gauss–Jordan
/// inverse on random Gram matrices.
pub fn wishart_closed_form() {
    for (seed, (n, p)) in [(30, 4), (8, 6), (200, 10), (3, 5)].into_iter().enumerate() {
        let y = standard_normal_matrix(n, p, seed as u64);
        let s = y.transpose() * &y;
        let oracle = gauss_jordan_inverse(&(DMatrix::identity(p, p) + &s)) * (n as f64 + 3.0);
        let lambda = wishart_posterior_mean(&y, 3.0).unwrap();
        assert!((&lambda - &oracle).amax() < 1e-10, "n={n} p={p}");
        let phi = wishart_reference(&y, 3.0).unwrap();
        for k in 0..p {
            for d in 0..p {
                let expect = if k == d {
                    1.0
                } else {
                    -oracle[(k, d)] / (oracle[(k, k)] * oracle[(d, d)]).sqrt()
                };
                assert!((phi[(k, d)] - expect).abs() < 1e-10);
            }
        }
    }
}

/// Gram matrix of n rows with neighbouring columns correlated.
pub fn sample_s(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
    let mut y = standard_normal_matrix(n, p, seed);
    for i in 0..n {
        // correlate neighbouring columns
        for j in 1..p {
            y[(i, j)] += 0.6 * y[(i, j - 1)];
        }
    }
    y.transpose() * y
}

/// Constrained MLE against Nelder–Mead within 1e-4, zeros bit-exact.
pub fn check_against_oracle(edges: EdgeMatrix, seed: u64) {
    let (n, p) = (40, edges.p());
    let s = sample_s(n, p, seed);
    let psi = constrained_mle(&s, &edges, n).unwrap();
    let f = |theta: &[f64]| precision_objective(&build_precision(theta, &edges), &s, n);
    let start: Vec<f64> = (0..p)
        .map(|d| n as f64 / s[(d, d)])
        .chain(edges.edges().map(|_| 0.0))
        .collect();
    let oracle = build_precision(&nelder_mead(&f, start), &edges);
    assert!(
        (&psi - &oracle).amax() < 1e-4,
        "library\n{psi}\noracle\n{oracle}"
    );
    for i in 0..p {
        for j in 0..p {
            if i != j && !edges.has_edge(i, j) {
                assert_eq!(psi[(i, j)].to_bits(), 0f64.to_bits());
            }
        }
    }
}

/// Empty graph: diagonal n/S_dd. Complete graph: nS⁻¹.
pub fn mle_closed_forms() {
    let (n, p) = (25, 5);
    let s = sample_s(n, p, 4);
    let empty = constrained_mle(&s, &EdgeMatrix::empty(p), n).unwrap();
    for d in 0..p {
        assert!((empty[(d, d)] - n as f64 / s[(d, d)]).abs() < 1e-8);
    }
    let full = constrained_mle(&s, &EdgeMatrix::complete(p), n).unwrap();
    let oracle = s.clone().try_inverse().unwrap() * n as f64;
    assert!((&full - &oracle).amax() < 1e-8);
}
