use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trcomm::{
    energy_total, inner_product_fields, inner_product_signals, time_reverse_field, time_reverse_signals,
    FieldMovie, FieldState, Grid, Medium, MovieKind, Physics, PhysicsKind, SignalSet, Side,
};

struct Case {
    grid: Grid<f64>,
    medium: Medium<f64>,
    physics: Physics,
    rng: ChaCha8Rng,
}

fn case(kind: PhysicsKind, nx: usize, ny: usize, nt: usize, seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Grid::new(nx, ny, 0.1, 0.13, 0.01, nt).unwrap();
    let n = nx * ny;
    let pos = |rng: &mut ChaCha8Rng| (0..n).map(|_| rng.random_range(0.5..2.0)).collect::<Vec<f64>>();
    let (a, b) = (pos(&mut rng), pos(&mut rng));
    let medium = match kind {
        PhysicsKind::Acoustic2D => Medium::acoustic(nx, ny, a, b).unwrap(),
        PhysicsKind::MaxwellTm2D => {
            let s = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            Medium::maxwell_tm(nx, ny, a, b, s).unwrap()
        }
    };
    Case { grid, medium, physics: Physics::new(kind), rng }
}

impl Case {
    fn movie(&mut self) -> FieldMovie<f64> {
        let rng = &mut self.rng;
        FieldMovie::from_fn(&self.grid, MovieKind::State, |_, _, _, _| rng.random_range(-1.0..1.0))
    }

    fn signals(&mut self, antennas: usize) -> SignalSet<f64> {
        let mut s = SignalSet::zeros_full(Side::Base, antennas, self.grid.nt(), self.grid.dt()).unwrap();
        s.as_mut_slice().iter_mut().for_each(|v| *v = self.rng.random_range(-1.0..1.0));
        s
    }

    fn ip(&self, u: &FieldMovie<f64>, v: &FieldMovie<f64>) -> f64 {
        inner_product_fields(u, v, &self.medium, &self.grid).unwrap()
    }
}

fn kinds() -> impl Strategy<Value = PhysicsKind> {
    prop_oneof![Just(PhysicsKind::Acoustic2D), Just(PhysicsKind::MaxwellTm2D)]
}

fn combine(a: f64, u: &FieldMovie<f64>, b: f64, v: &FieldMovie<f64>) -> FieldMovie<f64> {
    let data = u.as_slice().iter().zip(v.as_slice()).map(|(x, y)| a * x + b * y).collect();
    FieldMovie::from_vec(u.nx(), u.ny(), u.nt(), u.kind(), data).unwrap()
}

fn close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * scale.max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn field_reversal_is_an_involution(kind in kinds(), nx in 4usize..10, ny in 4usize..10, nt in 2usize..8, seed: u64) {
        let mut c = case(kind, nx, ny, nt, seed);
        let u = c.movie();
        let twice = time_reverse_field(&time_reverse_field(&u, &c.physics), &c.physics);
        prop_assert_eq!(twice.as_slice(), u.as_slice());
    }

    #[test]
    fn signal_reversal_is_an_involution(kind in kinds(), antennas in 1usize..5, nt in 2usize..10, seed: u64) {
        let mut c = case(kind, 4, 4, nt, seed);
        let s = c.signals(antennas);
        let twice = time_reverse_signals(&time_reverse_signals(&s, &c.physics).unwrap(), &c.physics).unwrap();
        prop_assert_eq!(twice.as_slice(), s.as_slice());
    }

    #[test]
    fn field_reversal_is_an_isometry(kind in kinds(), nx in 4usize..10, ny in 4usize..10, nt in 2usize..8, seed: u64) {
        let mut c = case(kind, nx, ny, nt, seed);
        let (u, v) = (c.movie(), c.movie());
        let (su, sv) = (time_reverse_field(&u, &c.physics), time_reverse_field(&v, &c.physics));
        let scale = c.ip(&u, &u).sqrt() * c.ip(&v, &v).sqrt();
        prop_assert!(close(c.ip(&su, &sv), c.ip(&u, &v), scale, 1e-14));
    }

    #[test]
    fn field_inner_product_is_symmetric_and_bilinear(
        kind in kinds(), nx in 4usize..10, ny in 4usize..10, nt in 2usize..8, seed: u64,
        a in -3.0f64..3.0, b in -3.0f64..3.0,
    ) {
        let mut c = case(kind, nx, ny, nt, seed);
        let (u, v, w) = (c.movie(), c.movie(), c.movie());
        let n = |x: &FieldMovie<f64>| c.ip(x, x).sqrt();
        prop_assert!(close(c.ip(&u, &v), c.ip(&v, &u), n(&u) * n(&v), 1e-14));
        let lhs = c.ip(&combine(a, &u, b, &v), &w);
        let rhs = a * c.ip(&u, &w) + b * c.ip(&v, &w);
        let scale = (a.abs() * n(&u) + b.abs() * n(&v)) * n(&w);
        prop_assert!(close(lhs, rhs, scale, 1e-14));
    }

    #[test]
    fn signal_inner_product_is_symmetric_and_bilinear(
        antennas in 1usize..5, nt in 2usize..10, seed: u64, a in -3.0f64..3.0, b in -3.0f64..3.0,
    ) {
        let mut c = case(PhysicsKind::Acoustic2D, 4, 4, nt, seed);
        let (r, s, t) = (c.signals(antennas), c.signals(antennas), c.signals(antennas));
        let ip = |x: &SignalSet<f64>, y: &SignalSet<f64>| inner_product_signals(x, y, None).unwrap();
        let n = |x: &SignalSet<f64>| ip(x, x).sqrt();
        prop_assert!(close(ip(&r, &s), ip(&s, &r), n(&r) * n(&s), 1e-14));
        let mut mix = r.scaled(a);
        mix.axpy(b, &s).unwrap();
        let scale = (a.abs() * n(&r) + b.abs() * n(&s)) * n(&t);
        prop_assert!(close(ip(&mix, &t), a * ip(&r, &t) + b * ip(&s, &t), scale, 1e-14));
    }

    #[test]
    fn energy_is_nonnegative(kind in kinds(), nx in 4usize..10, ny in 4usize..10, seed: u64, amp in 0.0f64..1e3) {
        let mut c = case(kind, nx, ny, 2, seed);
        let data = (0..3 * nx * ny).map(|_| amp * c.rng.random_range(-1.0..1.0)).collect();
        let u = FieldState::from_vec(nx, ny, data).unwrap();
        prop_assert!(energy_total(&u, &c.medium, &c.grid).unwrap() >= 0.0);
    }
}

fn fill(s: &SignalSet<f64>, rng: &mut ChaCha8Rng) -> SignalSet<f64> {
    let mut out = s.zeros_like();
    out.as_mut_slice().iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
    out
}

fn assert_linear(
    op: impl Fn(&SignalSet<f64>) -> SignalSet<f64>,
    x: &SignalSet<f64>,
    y: &SignalSet<f64>,
    a: f64,
    b: f64,
) -> Result<(), TestCaseError> {
    let mut mix = x.scaled(a);
    mix.axpy(b, y).unwrap();
    let lhs = op(&mix);
    let mut rhs = op(x).scaled(a);
    rhs.axpy(b, &op(y)).unwrap();
    let scale = lhs.max_abs().max(rhs.max_abs());
    prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-13 * scale.max(f64::MIN_POSITIVE));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn communication_operators_are_linear(
        kind in kinds(), lossy: bool, seed: u64, a in -3.0f64..3.0, b in -3.0f64..3.0,
    ) {
        use trcomm::verify::verification_scene;
        let sigma = if lossy && kind == PhysicsKind::MaxwellTm2D { 2.5 } else { 0.0 };
        let scene = verification_scene(kind, sigma, trcomm::Tier::Tiny, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let (r1, r2) = (fill(&scene.zero_base(), &mut rng), fill(&scene.zero_base(), &mut rng));
        assert_linear(|r| scene.apply_a(r).unwrap(), &r1, &r2, a, b)?;
        let (s1, s2) = (fill(&scene.zero_users(), &mut rng), fill(&scene.zero_users(), &mut rng));
        assert_linear(|s| scene.apply_a_star(s).unwrap(), &s1, &s2, a, b)?;
    }
}
