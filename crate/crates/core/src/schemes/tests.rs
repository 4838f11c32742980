use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dense::{from_vector, signal_weights, to_vector, DenseChannel};
use crate::signal::Side;

/// Dense channel whose whitened matrix has singular values `svals`.
fn conditioned(users: usize, base: usize, nt: usize, svals: &[f64], seed: u64) -> DenseChannel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = SignalSet::zeros(Side::Base, base, vec![crate::SignalChannel::Physical(2)], nt, 0.1).unwrap();
    let u = SignalSet::zeros(Side::Users, users, vec![crate::SignalChannel::Physical(2)], nt, 0.1).unwrap();
    let (m, n) = (u.len(), b.len());
    let orth = |k: usize, rng: &mut ChaCha8Rng| {
        DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0)).qr().q()
    };
    let uo = orth(m, &mut rng);
    let vo = orth(n, &mut rng);
    let mut sigma = DMatrix::zeros(m, n);
    for (i, s) in svals.iter().enumerate().take(m.min(n)) {
        sigma[(i, i)] = *s;
    }
    let whitened = uo * sigma * vo.transpose();
    let wb = signal_weights(&b, None);
    let wu = signal_weights(&u, None);
    let a = DMatrix::from_fn(m, n, |i, j| whitened[(i, j)] * wb[j].sqrt() / wu[i].sqrt());
    DenseChannel::new(a, b, u).unwrap()
}

fn random_signal(template: &SignalSet<f64>, seed: u64) -> SignalSet<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = template.zeros_like();
    s.as_mut_slice().iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
    s
}

fn cfg(scheme: SchemeKind, lambda: Option<f64>, max_iter: usize, tol: f64) -> SchemeConfig<f64> {
    SchemeConfig { scheme, lambda, max_iter, tol, ..SchemeConfig::default() }
}

fn rel_err(a: &SignalSet<f64>, b: &DVector<f64>) -> f64 {
    (to_vector(a) - b).norm() / b.norm()
}

/// Oracle pieces in plain coordinates: `A* = W_b^-1 A^T W_u`.
struct Oracle {
    a: DMatrix<f64>,
    a_star: DMatrix<f64>,
    wb: DMatrix<f64>,
}

impl Oracle {
    fn new(ch: &DenseChannel) -> Self {
        let wb = DMatrix::from_diagonal(&DVector::from_vec(signal_weights(&ch.zero_base(), None)));
        let wu = DMatrix::from_diagonal(&DVector::from_vec(signal_weights(&ch.zero_users(), None)));
        let a = ch.matrix().clone();
        let a_star = wb.clone().try_inverse().unwrap() * a.transpose() * &wu;
        Self { a, a_star, wb }
    }

    fn regularized_ls(&self, s: &DVector<f64>, lambda: f64) -> DVector<f64> {
        let n = self.a.ncols();
        let k = &self.a_star * &self.a + DMatrix::identity(n, n) * lambda;
        k.lu().solve(&(&self.a_star * s)).unwrap()
    }

    fn regularized_mn(&self, s: &DVector<f64>, lambda: f64) -> DVector<f64> {
        let m = self.a.nrows();
        let k = &self.a * &self.a_star + DMatrix::identity(m, m) * lambda;
        &self.a_star * k.lu().solve(s).unwrap()
    }
}

#[test]
fn zero_pilot_terminates_immediately() {
    let ch = conditioned(1, 2, 4, &[1.0, 1.2, 1.3, 1.5], 1);
    let z = ch.zero_users();
    for scheme in SchemeKind::ALL {
        let (r, trace) = solve(&z, &ch, &cfg(scheme, Some(0.1), 20, 1e-6)).unwrap();
        assert!(r.as_slice().iter().all(|v| *v == 0.0), "{scheme:?}");
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].cost, 0.0);
        assert_eq!(trace.stop, StopReason::Tolerance);
    }
}

#[test]
fn gradient_iterates_match_matrix_iteration() {
    let ch = conditioned(2, 2, 5, &[0.3, 0.5, 0.8, 1.0, 1.1, 1.4, 1.6, 2.0, 2.2, 2.5], 2);
    let o = Oracle::new(&ch);
    let s = random_signal(&ch.zero_users(), 3);
    let sv = to_vector(&s);
    let wu = DMatrix::from_diagonal(&DVector::from_vec(signal_weights(&s, None)));
    let mut r = DVector::zeros(o.a.ncols());
    for k in 1..=6 {
        let res = &sv - &o.a * &r;
        let g = &o.a_star * res;
        let ag = &o.a * &g;
        let beta = (g.transpose() * &o.wb * &g)[(0, 0)] / (ag.transpose() * &wu * &ag)[(0, 0)];
        r += beta * g;
        let (got, _) = run_gradient(&s, &ch, &cfg(SchemeKind::Gradient, None, k, 1e-14)).unwrap();
        assert!(rel_err(&got, &r) < 1e-10, "iterate {k}");
    }
}

#[test]
fn gradient_reg_with_zero_lambda_is_gradient() {
    let ch = conditioned(1, 2, 4, &[0.5, 1.0, 1.5, 2.0], 4);
    let s = random_signal(&ch.zero_users(), 5);
    let (a, ta) = run_gradient(&s, &ch, &cfg(SchemeKind::Gradient, None, 15, 1e-9)).unwrap();
    let (b, tb) = run_gradient_reg(&s, &ch, &cfg(SchemeKind::GradientReg, Some(0.0), 15, 1e-9)).unwrap();
    assert_eq!(a.as_slice(), b.as_slice());
    assert_eq!(ta.costs(), tb.costs());

    let (c, _) = run_min_norm(&s, &ch, &cfg(SchemeKind::MinNorm, None, 15, 1e-9)).unwrap();
    let (d, _) = run_min_norm_reg(&s, &ch, &cfg(SchemeKind::MinNormReg, Some(0.0), 15, 1e-9)).unwrap();
    assert_eq!(c.as_slice(), d.as_slice());
}

#[test]
fn regularized_fixed_points_match_dense_solves() {
    let ch = conditioned(1, 2, 5, &[0.6, 0.9, 1.1, 1.4, 1.8], 6);
    let o = Oracle::new(&ch);
    let s = random_signal(&ch.zero_users(), 7);
    let sv = to_vector(&s);
    let lambda = 0.5;
    let ls = o.regularized_ls(&sv, lambda);
    let (g, _) = run_gradient_reg(&s, &ch, &cfg(SchemeKind::GradientReg, Some(lambda), 300, 1e-13)).unwrap();
    assert!(rel_err(&g, &ls) < 1e-8);
    let (r, _) = run_rls(&s, &ch, &cfg(SchemeKind::Rls, Some(lambda), 300, 1e-13)).unwrap();
    assert!(rel_err(&r, &ls) < 1e-6);
    assert!(rel_err(&r, &to_vector(&g)) < 1e-5);

    let mn = o.regularized_mn(&sv, lambda);
    let (m, _) = run_min_norm_reg(&s, &ch, &cfg(SchemeKind::MinNormReg, Some(lambda), 300, 1e-13)).unwrap();
    assert!(rel_err(&m, &mn) < 1e-6);
}

#[test]
fn min_norm_matches_pseudo_inverse() {
    let ch = conditioned(1, 3, 4, &[0.8, 1.0, 1.1, 1.2], 8);
    let o = Oracle::new(&ch);
    let s = random_signal(&ch.zero_users(), 9);
    let sv = to_vector(&s);
    let pinv = o.regularized_mn(&sv, 0.0);
    let (r, trace) = run_min_norm(&s, &ch, &cfg(SchemeKind::MinNorm, None, 400, 1e-12)).unwrap();
    assert!(rel_err(&r, &pinv) < 1e-6, "{}", rel_err(&r, &pinv));
    assert!(trace.converged());
    // Another exact solution has a larger norm.
    let other = &pinv + (DMatrix::identity(o.a.ncols(), o.a.ncols()) - &o.a_star * (&o.a * &o.a_star).try_inverse().unwrap() * &o.a)
        * DVector::from_element(o.a.ncols(), 0.3);
    let norm = |v: &DVector<f64>| (v.transpose() * &o.wb * v)[(0, 0)].sqrt();
    assert!((&o.a * &other - &sv).norm() < 1e-10);
    assert!(norm(&to_vector(&r)) <= norm(&other) + 1e-9);
}

#[test]
fn large_lambda_limits() {
    let ch = conditioned(1, 2, 4, &[0.5, 1.0, 1.5, 2.0], 10);
    let s = random_signal(&ch.zero_users(), 11);
    let a_norm2 = 4.0;
    let (r, _) = run_gradient_reg(&s, &ch, &cfg(SchemeKind::GradientReg, Some(1e6 * a_norm2), 50, 1e-10)).unwrap();
    let rs = ch.apply_a_star(&s).unwrap();
    assert!(norm_b(&r).unwrap() < 1e-5 * norm_b(&rs).unwrap());

    let lambda = 1e6 * a_norm2;
    let (m, _) = run_min_norm_reg(&s, &ch, &cfg(SchemeKind::MinNormReg, Some(lambda), 50, 1e-12)).unwrap();
    let neumann = norm_b(&rs).unwrap() / lambda;
    assert!((norm_b(&m).unwrap() - neumann).abs() <= 0.05 * neumann);
}

#[test]
fn line_search_costs_never_increase() {
    let ch = conditioned(2, 2, 5, &[1e-3, 0.01, 0.1, 0.3, 0.5, 0.8, 1.0, 1.5, 2.0, 3.0], 12);
    let s = random_signal(&ch.zero_users(), 13);
    for scheme in SchemeKind::ALL {
        let (_, trace) = solve(&s, &ch, &cfg(scheme, Some(0.05), 50, 1e-14)).unwrap();
        let c = trace.costs();
        for w in c.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * c[0], "{scheme:?}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn fixed_step_divergence_is_reported() {
    let ch = conditioned(1, 2, 4, &[0.5, 1.0, 2.0, 4.0], 14);
    let s = random_signal(&ch.zero_users(), 15);
    let mut c = cfg(SchemeKind::Gradient, None, 40, 1e-9);
    c.beta_rule = BetaRule::Fixed(5.0);
    assert!(matches!(solve(&s, &ch, &c), Err(Error::StepSize { consecutive: 3, .. })));
    c.beta_rule = BetaRule::Fixed(0.05);
    let (_, trace) = solve(&s, &ch, &c).unwrap();
    assert!(trace.last().unwrap().cost < trace.records[0].cost);
}

#[test]
fn gradient_matches_finite_differences() {
    let ch = conditioned(1, 2, 5, &[0.5, 0.9, 1.3, 1.7, 2.0], 16);
    let s = random_signal(&ch.zero_users(), 17);
    let r = random_signal(&ch.zero_base(), 18);
    let cost = |x: &SignalSet<f64>| {
        let res = ch.apply_a(x).unwrap().sub(&s).unwrap();
        0.5 * inner_product_signals(&res, &res, None).unwrap()
    };
    let g = ch.apply_a_star(&ch.apply_a(&r).unwrap().sub(&s).unwrap()).unwrap();
    for k in 0..10 {
        let delta = random_signal(&ch.zero_base(), 100 + k);
        let eps = 1e-4 * norm_b(&r).unwrap() / norm_b(&delta).unwrap();
        let mut plus = r.clone();
        plus.axpy(eps, &delta).unwrap();
        let mut minus = r.clone();
        minus.axpy(-eps, &delta).unwrap();
        let fd = (cost(&plus) - cost(&minus)) / (2.0 * eps);
        let an = ip_b(&g, &delta).unwrap();
        assert!((fd - an).abs() <= 1e-5 * an.abs());
    }
}

#[test]
fn weighted_users_change_the_normal_equations() {
    let ch = conditioned(2, 2, 4, &[0.6, 0.9, 1.2, 1.5, 1.6, 1.8, 2.0, 2.1], 19);
    let s = random_signal(&ch.zero_users(), 20);
    let w = vec![1.0, 4.0];
    let mut c = cfg(SchemeKind::GradientReg, Some(0.3), 400, 1e-13);
    c.user_weights = Some(w.clone());
    let (r, _) = run_gradient_reg(&s, &ch, &c).unwrap();
    // (A* W A + lambda) r = A* W s.
    let lhs = {
        let mut x = ch.apply_a_star(&ch.apply_a(&r).unwrap().antenna_weighted(&w).unwrap()).unwrap();
        x.axpy(0.3, &r).unwrap();
        x
    };
    let rhs = ch.apply_a_star(&s.antenna_weighted(&w).unwrap()).unwrap();
    assert!(lhs.max_abs_diff(&rhs) < 1e-8 * rhs.max_abs());
}

#[test]
fn probe_detects_duplicated_columns() {
    let ch = conditioned(1, 2, 4, &[0.5, 1.0, 1.5, 2.0], 21);
    let rep = null_space_probe(&ch, 1e-3, None, 4096).unwrap();
    assert_eq!(rep.singular_values.len(), 8);
    assert_eq!(rep.z0_dim, 4); // fat 4x8 operator
    let square = conditioned(2, 2, 4, &[0.5, 0.7, 1.0, 1.2, 1.4, 1.5, 1.7, 2.0], 22);
    assert_eq!(null_space_probe(&square, 1e-3, None, 4096).unwrap().z0_dim, 0);

    let mut a = square.matrix().clone();
    for i in 0..a.nrows() {
        for t in 0..4 {
            a[(i, 4 + t)] = a[(i, t)];
        }
    }
    let dup = DenseChannel::new(a, square.zero_base(), square.zero_users()).unwrap();
    let rep = null_space_probe(&dup, 1e-3, None, 4096).unwrap();
    assert!(rep.z0_dim >= 1);
    let mut r = dup.zero_base();
    r.set(0, 0, 1, 1.0);
    r.set(1, 0, 1, -1.0);
    let frac = null_space_probe(&dup, 1e-3, Some(&r), 4096).unwrap().energy_fraction.unwrap();
    assert!((frac - 1.0).abs() < 1e-10);
    assert!(matches!(null_space_probe(&dup, 1e-3, None, 8), Err(Error::Size { .. })));
}

#[test]
fn pilot_layout() {
    let t = SignalSet::<f64>::zeros_full(Side::Users, 3, 6, 0.5).unwrap();
    let alpha = [0.0, 1.0, -2.0, 0.5, 0.0, 0.0];
    let p = make_pilot(&alpha, 1, 2, &t).unwrap();
    assert_eq!(p.series(1, 2), &alpha);
    assert!(p.series(0, 2).iter().chain(p.series(2, 2)).all(|v| *v == 0.0));
    let energy: f64 = inner_product_signals(&p, &p, None).unwrap();
    let direct: f64 = alpha.iter().enumerate().map(|(i, a)| if i == 0 || i == 5 { 0.25 } else { 0.5 } * a * a).sum();
    assert!((energy - direct).abs() < 1e-15);
    assert!(make_pilot(&alpha, 3, 2, &t).is_err());
    assert!(make_pilot(&alpha[..5], 0, 2, &t).is_err());
    assert!(make_pilot(&[0.0; 6], 0, 2, &t).unwrap().max_abs() == 0.0);
}

#[test]
fn noise_is_seeded() {
    let ch = conditioned(1, 1, 4, &[1.0; 4], 23);
    let r = random_signal(&ch.zero_base(), 24);
    let a = NoisyChannel::new(&ch, 0.1, 5).unwrap().apply_a(&r).unwrap();
    let b = NoisyChannel::new(&ch, 0.1, 5).unwrap().apply_a(&r).unwrap();
    let clean = ch.apply_a(&r).unwrap();
    assert_eq!(a, b);
    assert!(a.max_abs_diff(&clean) > 0.0);
}

#[test]
fn config_validation() {
    assert!(cfg(SchemeKind::Rls, Some(0.0), 10, 1e-3).validate().is_err());
    assert!(cfg(SchemeKind::Gradient, None, 0, 1e-3).validate().is_err());
    assert!(cfg(SchemeKind::Gradient, Some(-1.0), 10, 1e-3).validate().is_err());
    assert!(cfg(SchemeKind::MinNorm, None, 10, 0.0).validate().is_err());
    let ch = conditioned(1, 1, 4, &[2.0; 4], 25);
    let est = estimate_operator_norm(&ch, None, 10, 1).unwrap();
    assert!((est - 2.0).abs() < 1e-9);
    let _ = from_vector(&ch.zero_base(), &DVector::zeros(4));
}
