use trcomm::propagator::{Forcing, Propagator};
use trcomm::{Grid, Medium, PhysicsKind, StepperConfig};

struct Pulse {
    index: usize,
    samples: Vec<f64>,
}

impl Forcing<f64> for Pulse {
    fn visit(&self, n: usize, f: &mut dyn FnMut(usize, f64)) {
        if let Some(v) = self.samples.get(n) {
            f(self.index, *v);
        }
    }
}

fn ricker(n: usize, dt: f64, f0: f64, t0: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let a = (std::f64::consts::PI * f0 * (i as f64 * dt - t0)).powi(2);
            (1.0 - 2.0 * a) * (-a).exp()
        })
        .collect()
}

/// Free-space 2D response to the time derivative of `src`, sampled cell-averaged.
fn green_oracle(src: &[f64], dt: f64, radius: f64, c: f64) -> Vec<f64> {
    let a = radius / c;
    let prim = |tau: f64| if tau <= a { 0.0 } else { (tau / a).acosh() };
    let deriv: Vec<f64> = (0..src.len())
        .map(|k| {
            let (lo, hi) = (k.saturating_sub(1), (k + 1).min(src.len() - 1));
            (src[hi] - src[lo]) / ((hi - lo) as f64 * dt)
        })
        .collect();
    (0..src.len())
        .map(|n| {
            (0..=n)
                .map(|k| {
                    let tau = (n - k) as f64 * dt;
                    deriv[k] * (prim(tau + 0.5 * dt) - prim(tau - 0.5 * dt))
                })
                .sum()
        })
        .collect()
}

fn best_lag(a: &[f64], b: &[f64], max_shift: isize) -> (isize, f64) {
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (na, nb) = (norm(a), norm(b));
    (-max_shift..=max_shift)
        .map(|s| {
            let dot: f64 = (0..a.len() as isize)
                .filter_map(|i| {
                    let j = i + s;
                    (j >= 0 && (j as usize) < b.len()).then(|| a[i as usize] * b[j as usize])
                })
                .sum();
            (s, dot / (na * nb))
        })
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap()
}

#[test]
fn arrival_time_matches_distance_over_speed() {
    let (n, dx, c) = (161, 1.0, 1.0);
    let dt = 0.5 * dx / (2.0 * c);
    let nt = 320;
    let g = Grid::new(n, n, dx, dx, dt, nt).unwrap();
    let m = Medium::homogeneous(PhysicsKind::Acoustic2D, &g, c).unwrap();
    let plane = n * n;
    let (ci, cj) = (80, 80);
    let src = Pulse { index: 2 * plane + ci * n + cj, samples: ricker(nt, dt, 0.08, 15.0) };
    let p = Propagator::new(&g, &m, StepperConfig::default()).unwrap();
    let radii = [20usize, 35, 50];
    let probes: Vec<usize> = radii.iter().map(|r| 2 * plane + ci * n + cj + r).collect();
    let mut traces = vec![Vec::new(); radii.len()];
    p.forward(&src, &mut |_: usize, f: &[f64]| {
        for (t, &k) in traces.iter_mut().zip(&probes) {
            t.push(f[k]);
        }
        Ok(())
    })
    .unwrap();
    for (r, trace) in radii.iter().zip(&traces) {
        let oracle = green_oracle(&src.samples, dt, *r as f64 * dx, c);
        let (lag, corr) = best_lag(&oracle, trace, 40);
        assert!(corr > 0.95, "radius {r}: correlation {corr}");
        assert!((lag as f64 * dt).abs() <= dx / c, "radius {r}: lag {} time units", lag as f64 * dt);
    }
}

fn lossless_medium(kind: PhysicsKind, g: &Grid<f64>, seed: u64) -> Medium<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = g.cells();
    let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.8..1.5)).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.8..1.5)).collect();
    match kind {
        PhysicsKind::Acoustic2D => Medium::acoustic(g.nx(), g.ny(), a, b).unwrap(),
        PhysicsKind::MaxwellTm2D => Medium::maxwell_tm(g.nx(), g.ny(), b, a, vec![0.0; n]).unwrap(),
    }
}

fn stable_grid(nx: usize, ny: usize, nt: usize, c_max: f64) -> Grid<f64> {
    let dx = 0.1;
    Grid::new(nx, ny, dx, dx, 0.5 * dx / (2.0 * c_max), nt).unwrap()
}

#[test]
fn field_is_exactly_zero_outside_the_domain_of_dependence() {
    for kind in [PhysicsKind::Acoustic2D, PhysicsKind::MaxwellTm2D] {
        let g = stable_grid(41, 37, 30, 1.6);
        let m = lossless_medium(kind, &g, 3);
        let p = Propagator::new(&g, &m, StepperConfig::default()).unwrap();
        let plane = g.cells();
        let (si, sj) = (20usize, 18usize);
        let src = Pulse { index: 2 * plane + sj * g.nx() + si, samples: vec![1.0; g.nt()] };
        let mut reached = 0usize;
        p.forward(&src, &mut |n: usize, f: &[f64]| {
            for c in 0..3 {
                for j in 0..g.ny() {
                    for i in 0..g.nx() {
                        let d = i.abs_diff(si) + j.abs_diff(sj);
                        let v = f[c * plane + j * g.nx() + i];
                        if d > n / 2 + 1 {
                            assert!(v == 0.0, "{kind:?} step {n}: ({c},{i},{j}) = {v}");
                        } else if v != 0.0 {
                            reached = reached.max(d);
                        }
                    }
                }
            }
            Ok(())
        })
        .unwrap();
        assert!(reached + 1 >= g.nt() / 2, "{kind:?}: front only reached {reached}");
    }
}

#[test]
fn lossless_recursion_is_time_reversible() {
    for kind in [PhysicsKind::Acoustic2D, PhysicsKind::MaxwellTm2D] {
        let g = stable_grid(48, 40, 2, 1.6);
        let m = lossless_medium(kind, &g, 11);
        let p = Propagator::new(&g, &m, StepperConfig::default()).unwrap();
        let (nx, plane) = (g.nx(), g.cells());
        let mut u1 = vec![0.0; 3 * plane];
        for j in 1..g.ny() - 1 {
            for i in 1..nx - 1 {
                let r2 = (i as f64 - 22.0).powi(2) + (j as f64 - 19.0).powi(2);
                u1[2 * plane + j * nx + i] = (-r2 / 12.0).exp();
            }
        }
        let u0 = vec![0.0; 3 * plane];
        let steps = 300;
        let mut frames = Vec::new();
        p.run_free(&u0, &u1, steps, &mut |_: usize, f: &[f64]| {
            frames.push(f.to_vec());
            Ok(())
        })
        .unwrap();

        let mask = trcomm::Physics::new(kind).sign_mask();
        let flip = |f: &[f64]| -> Vec<f64> {
            f.iter().enumerate().map(|(e, v)| if mask[e / plane] < 0 { -v } else { *v }).collect()
        };
        let last = frames.len() - 1;
        let moved = frames[last].iter().zip(&u1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(moved > 1e-2, "{kind:?}: pulse never left");

        let mut back = Vec::new();
        p.run_free(&flip(&frames[last]), &flip(&frames[last - 1]), steps, &mut |_: usize, f: &[f64]| {
            back.push(flip(f));
            Ok(())
        })
        .unwrap();
        let scale = u1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (k, f) in back.iter().enumerate() {
            let err = f.iter().zip(&frames[last - k]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-10 * scale, "{kind:?} frame {k}: {err}");
        }
    }
}

#[test]
fn forward_solve_is_linear() {
    use rand::{Rng, SeedableRng};
    use trcomm::{run_forward, FieldMovie, MovieKind};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
    let g = stable_grid(18, 15, 25, 1.6);
    for kind in [PhysicsKind::Acoustic2D, PhysicsKind::MaxwellTm2D] {
        let m = lossless_medium(kind, &g, 4);
        let mut random = || {
            FieldMovie::from_fn(&g, MovieKind::Source, |_, _, _, _| rng.random_range(-1.0..1.0))
        };
        let (q1, q2) = (random(), random());
        let (a, b) = (0.7, -2.3);
        let mix: Vec<f64> = q1.as_slice().iter().zip(q2.as_slice()).map(|(x, y)| a * x + b * y).collect();
        let q3 = FieldMovie::from_vec(g.nx(), g.ny(), g.nt(), MovieKind::Source, mix).unwrap();
        let cfg = StepperConfig::default();
        let (u1, u2, u3) = (
            run_forward(&q1, &m, &g, &cfg).unwrap(),
            run_forward(&q2, &m, &g, &cfg).unwrap(),
            run_forward(&q3, &m, &g, &cfg).unwrap(),
        );
        let scale = u3.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = u1
            .as_slice()
            .iter()
            .zip(u2.as_slice())
            .zip(u3.as_slice())
            .map(|((x, y), z)| (a * x + b * y - z).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-13 * scale, "{kind:?}: {err}");
    }
}
