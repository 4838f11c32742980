//! Executable identity suite: adjoint pairs, the discrete dot-product test,
//! time-reversal identities, mirror commutations and the explicit-matrix
//! adjoint oracle, each reported with its measured error and threshold.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::antenna::{AntennaArray, AntennaShape};
use crate::dense::{adjoint_report, DEFAULT_MAX_DIMS};
use crate::diagnostics::inner_product_fields;
use crate::error::{Error, Result};
use crate::field::{FieldMovie, MovieKind};
use crate::grid::Grid;
use crate::medium::Medium;
use crate::ops::{apply_m, apply_q, MeasurementSpec, Scene};
use crate::physics::{Physics, PhysicsKind, CHANNELS};
use crate::propagator::{run_adjoint_direct, run_adjoint_via_tr_with, run_forward, StepperConfig};
use crate::reversal::{time_reverse_field, time_reverse_signals};
use crate::signal::{inner_product_signals, signal_norm, Side, SignalSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    #[default]
    Tiny,
    Small,
}

impl FromStr for Tier {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tiny" => Ok(Tier::Tiny),
            "small" => Ok(Tier::Small),
            other => Err(Error::Config(format!("unknown tier `{other}` (expected tiny or small)"))),
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Tiny => "tiny",
            Tier::Small => "small",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub tier: Tier,
    pub seed: u64,
    /// Replaces the reversal sign mask used by every mirror. Only useful to
    /// demonstrate that the suite detects a wrong mask.
    pub sign_mask_override: Option<[i8; CHANNELS]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub error: f64,
    pub threshold: f64,
    pub elapsed: Duration,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.error.is_finite() && self.error <= self.threshold
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<48} error {:.3e}  threshold {:.1e}  {}  ({:.2?})",
            self.name,
            self.error,
            self.threshold,
            if self.passed() { "PASS" } else { "FAIL" },
            self.elapsed
        )
    }
}

struct TierDims {
    n: usize,
    nt: usize,
    base: Vec<(usize, usize)>,
    users: Vec<(usize, usize)>,
}

fn dims(tier: Tier) -> TierDims {
    match tier {
        Tier::Tiny => TierDims { n: 12, nt: 24, base: vec![(4, 5)], users: vec![(6, 6), (6, 3)] },
        Tier::Small => TierDims {
            n: 32,
            nt: 60,
            base: vec![(10, 12), (10, 16), (10, 20)],
            users: vec![(15, 13), (15, 19)],
        },
    }
}

/// Heterogeneous test scene; `sigma > 0` is only used for Maxwell.
pub fn verification_scene(kind: PhysicsKind, sigma: f64, tier: Tier, seed: u64) -> Result<Scene<f64>> {
    let d = dims(tier);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = d.n * d.n;
    let a: Vec<f64> = (0..cells).map(|_| rng.random_range(0.8..1.5)).collect();
    let b: Vec<f64> = (0..cells).map(|_| rng.random_range(0.8..1.5)).collect();
    let medium = match kind {
        PhysicsKind::Acoustic2D => Medium::acoustic(d.n, d.n, a, b)?,
        PhysicsKind::MaxwellTm2D => Medium::maxwell_tm(d.n, d.n, a, b, vec![sigma; cells])?,
    };
    let dx = 0.1;
    let grid = Grid::new(d.n, d.n, dx, dx, 0.5 * dx / (2.0 * medium.c_max()), d.nt)?;
    let base = AntennaArray::new(&grid, &d.base, AntennaShape::Gaussian { width: 0.7 })?;
    let users = AntennaArray::new(&grid, &d.users, AntennaShape::Delta)?;
    Scene::new(grid, medium, base, users, StepperConfig::default())
}

fn random_movie(grid: &Grid<f64>, kind: MovieKind, rng: &mut ChaCha8Rng) -> FieldMovie<f64> {
    FieldMovie::from_fn(grid, kind, |_, _, _, _| rng.random_range(-1.0..1.0))
}

fn random_signals(template: &SignalSet<f64>, rng: &mut ChaCha8Rng) -> SignalSet<f64> {
    let mut s = template.zeros_like();
    s.as_mut_slice().iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
    s
}

fn rel_max(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs()));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

struct Suite {
    results: Vec<CheckResult>,
}

impl Suite {
    fn check(&mut self, name: String, threshold: f64, f: impl FnOnce() -> Result<f64>) -> Result<()> {
        let start = Instant::now();
        let error = f()?;
        self.results.push(CheckResult { name, error, threshold, elapsed: start.elapsed() });
        Ok(())
    }
}

/// Runs every identity on acoustic, lossless Maxwell and lossy Maxwell scenes.
pub fn run_identity_suite(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let mut suite = Suite { results: Vec::new() };
    let cases = [
        ("acoustic", PhysicsKind::Acoustic2D, 0.0),
        ("maxwell", PhysicsKind::MaxwellTm2D, 0.0),
        ("maxwell_lossy", PhysicsKind::MaxwellTm2D, 2.5),
    ];
    for (offset, (label, kind, sigma)) in cases.into_iter().enumerate() {
        let seed = opts.seed.wrapping_add(offset as u64);
        let mut phys = Physics::new(kind);
        if let Some(mask) = opts.sign_mask_override {
            phys = phys.with_sign_mask_override(mask);
        }
        let scene = verification_scene(kind, sigma, opts.tier, seed)?.with_physics(phys);
        physics_checks(&mut suite, label, &scene, seed)?;
    }
    Ok(suite.results)
}

fn physics_checks(suite: &mut Suite, label: &str, scene: &Scene<f64>, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let (g, m, phys) = (&scene.grid, &scene.medium, &scene.physics);
    let cfg = scene.stepper;

    for (tag, spec) in [("full", MeasurementSpec::Full), ("partial", MeasurementSpec::Partial(phys.scalar_channel()))] {
        let u = random_movie(g, MovieKind::State, &mut rng);
        let r0 = SignalSet::zeros(Side::Base, scene.base.len(), spec.channels(), g.nt(), g.dt())?;
        let r = random_signals(&r0, &mut rng);
        suite.check(format!("{label}/measurement_adjoint_{tag}"), 1e-12, || {
            let mu = apply_m(&u, &scene.base, &spec, g, Side::Base)?;
            let mut q = apply_q(&r, &scene.base, &spec, g)?.with_kind(MovieKind::State);
            let plane = g.cells();
            for t in 0..g.nt() {
                let f = q.frame_mut(t);
                for c in 0..CHANNELS {
                    for (x, gv) in f[c * plane..(c + 1) * plane].iter_mut().zip(m.gamma(c)) {
                        *x /= *gv;
                    }
                }
            }
            let lhs = inner_product_signals(&mu, &r, None)?;
            let rhs = inner_product_fields(&u, &q, m, g)?;
            let bound = signal_norm(&mu, None)? * signal_norm(&r, None)?
                + inner_product_fields(&u, &u, m, g)?.sqrt() * inner_product_fields(&q, &q, m, g)?.sqrt();
            Ok((lhs - rhs).abs() / bound)
        })?;
    }

    let q = random_movie(g, MovieKind::Source, &mut rng);
    let v = random_movie(g, MovieKind::State, &mut rng);
    let direct = run_adjoint_direct(&v, m, g, &cfg)?;
    suite.check(format!("{label}/forward_adjoint_dot_product"), 1e-12, || {
        let fq = run_forward(&q, m, g, &cfg)?;
        let lhs = inner_product_fields(&fq, &v, m, g)?;
        let rhs = inner_product_fields(&q, &direct, m, g)?;
        let nq = inner_product_fields(&q, &q, m, g)?.sqrt();
        let nv = inner_product_fields(&v, &v, m, g)?.sqrt();
        Ok((lhs - rhs).abs() / (nq * nv))
    })?;
    suite.check(format!("{label}/adjoint_via_time_reversal"), 1e-12, || {
        let tr = run_adjoint_via_tr_with(&v, m, g, &cfg, phys)?;
        Ok(rel_max(tr.as_slice(), direct.as_slice()))
    })?;

    let spec = &scene.base_measurement;
    let u = random_movie(g, MovieKind::State, &mut rng);
    let r = random_signals(&scene.zero_base(), &mut rng);
    let s = random_signals(&scene.zero_users(), &mut rng);
    suite.check(format!("{label}/commute_measure_base"), 1e-13, || {
        let lhs = apply_m(&time_reverse_field(&u, phys), &scene.base, spec, g, Side::Base)?;
        let rhs = time_reverse_signals(&apply_m(&u, &scene.base, spec, g, Side::Base)?, phys)?;
        Ok(rel_max(lhs.as_slice(), rhs.as_slice()))
    })?;
    suite.check(format!("{label}/commute_source_base"), 1e-13, || {
        let lhs = time_reverse_field(&apply_q(&r, &scene.base, spec, g)?, phys);
        let rhs = apply_q(&time_reverse_signals(&r, phys)?, &scene.base, spec, g)?;
        Ok(rel_max(lhs.as_slice(), rhs.as_slice()))
    })?;
    let uspec = &scene.user_measurement;
    suite.check(format!("{label}/commute_measure_users"), 1e-13, || {
        let lhs = apply_m(&time_reverse_field(&u, phys), &scene.users, uspec, g, Side::Users)?;
        let rhs = time_reverse_signals(&apply_m(&u, &scene.users, uspec, g, Side::Users)?, phys)?;
        Ok(rel_max(lhs.as_slice(), rhs.as_slice()))
    })?;
    suite.check(format!("{label}/commute_source_users"), 1e-13, || {
        let lhs = time_reverse_field(&apply_q(&s, &scene.users, uspec, g)?, phys);
        let rhs = apply_q(&time_reverse_signals(&s, phys)?, &scene.users, uspec, g)?;
        Ok(rel_max(lhs.as_slice(), rhs.as_slice()))
    })?;

    suite.check(format!("{label}/linearity_of_a"), 1e-13, || {
        let (alpha, beta) = (0.7, -1.3);
        let r2 = random_signals(&r, &mut rng);
        let mut combo = r.scaled(alpha);
        combo.axpy(beta, &r2)?;
        let mut expected = scene.apply_a(&r)?.scaled(alpha);
        expected.axpy(beta, &scene.apply_a(&r2)?)?;
        Ok(rel_max(scene.apply_a(&combo)?.as_slice(), expected.as_slice()))
    })?;
    suite.check(format!("{label}/mirror_adjoint_dot_product"), 1e-12, || {
        let ar = scene.apply_a(&r)?;
        if ar.max_abs() == 0.0 {
            return Ok(f64::INFINITY);
        }
        let a_star_s = scene.apply_a_star(&s)?;
        let lhs = inner_product_signals(&ar, &s, None)?;
        let rhs = inner_product_signals(&r, &a_star_s, None)?;
        let bound = signal_norm(&ar, None)? * signal_norm(&s, None)?
            + signal_norm(&r, None)? * signal_norm(&a_star_s, None)?;
        Ok((lhs - rhs).abs() / bound)
    })?;
    let partial = scene.clone().with_measurement(MeasurementSpec::Partial(phys.scalar_channel()))?;
    for (tag, sc) in [("full", scene), ("partial", &partial)] {
        suite.check(format!("{label}/mirror_adjoint_matrix_{tag}"), 1e-12, || {
            let (a, report) = adjoint_report(sc, DEFAULT_MAX_DIMS)?;
            Ok(if a.amax() == 0.0 { f64::INFINITY } else { report.relative_discrepancy })
        })?;
    }
    Ok(())
}
