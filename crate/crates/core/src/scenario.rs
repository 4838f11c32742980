//! Reproducible synthetic scenes: media, antenna layouts and pilot wavelets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::antenna::{AntennaArray, AntennaShape};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::medium::Medium;
use crate::ops::{MeasurementSpec, Scene};
use crate::physics::{Physics, PhysicsKind, ReversalConvention};
use crate::propagator::StepperConfig;
use crate::scalar::Real;
use crate::schemes::make_pilot;
use crate::signal::SignalSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    /// Defaults to `dx`.
    #[serde(default)]
    pub dy: Option<f64>,
    pub nt: usize,
    /// Courant number used to derive `dt = cfl min(dx, dy) / (2 c_max)`.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

fn default_cfl() -> f64 {
    0.5
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum MediumRecipe {
    Homogeneous {
        c: f64,
    },
    /// Circular inclusions that scale the local wave speed by a factor drawn
    /// from `contrast`; only the compliance (`kappa` or `eps`) changes.
    RandomScatterers {
        c: f64,
        count: usize,
        /// Radius range in cells.
        radius: [f64; 2],
        /// Speed-factor range.
        contrast: [f64; 2],
    },
    /// High-impedance bands of `band` cells along the top and bottom edges;
    /// inertia is multiplied and compliance divided by `contrast`, so the
    /// wave speed is unchanged.
    Waveguide {
        c: f64,
        band: usize,
        contrast: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Layout {
    /// `count` antennas evenly spaced from `start` to `end` (cell indices).
    Line {
        count: usize,
        start: [usize; 2],
        end: [usize; 2],
        #[serde(default)]
        shape: AntennaShape,
    },
    Points {
        positions: Vec<[usize; 2]>,
        #[serde(default)]
        shape: AntennaShape,
    },
}

impl Layout {
    pub fn centers(&self) -> Result<Vec<(usize, usize)>> {
        match self {
            Layout::Line { count, start, end, .. } => {
                if *count == 0 {
                    return Err(Error::Layout("line layout needs at least one antenna".into()));
                }
                Ok((0..*count)
                    .map(|k| {
                        let f = if *count == 1 { 0.0 } else { k as f64 / (*count - 1) as f64 };
                        let lerp = |a: usize, b: usize| (a as f64 + f * (b as f64 - a as f64)).round() as usize;
                        (lerp(start[0], end[0]), lerp(start[1], end[1]))
                    })
                    .collect())
            }
            Layout::Points { positions, .. } => Ok(positions.iter().map(|p| (p[0], p[1])).collect()),
        }
    }

    pub fn shape(&self) -> AntennaShape {
        match self {
            Layout::Line { shape, .. } | Layout::Points { shape, .. } => *shape,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum WaveletRecipe {
    /// Ricker wavelet with peak frequency `f0` centred at `t0`
    /// (default `1.5 / f0`).
    Ricker {
        f0: f64,
        #[serde(default)]
        t0: Option<f64>,
    },
    GaussianPulse {
        t0: f64,
        width: f64,
    },
    /// Linear sweep from `f1` to `f2` over `[start, start + duration]`.
    Chirp {
        f1: f64,
        f2: f64,
        #[serde(default)]
        start: f64,
        duration: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum MeasurementRecipe {
    #[default]
    Full,
    Partial {
        channel: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub physics: PhysicsKind,
    #[serde(default)]
    pub convention: ReversalConvention,
    pub grid: GridSpec,
    pub medium: MediumRecipe,
    /// Uniform conductivity (Maxwell only).
    #[serde(default)]
    pub sigma: f64,
    pub base: Layout,
    pub users: Layout,
    pub pilot: WaveletRecipe,
    /// Scale applied to the unit-peak wavelet; `0` gives a zero pilot.
    #[serde(default = "unit")]
    pub pilot_amplitude: f64,
    #[serde(default)]
    pub pilot_user: usize,
    #[serde(default)]
    pub measurement: MeasurementRecipe,
    /// Standard deviation of additive measurement noise.
    #[serde(default)]
    pub noise: f64,
    pub seed: u64,
}

/// Output of [`build_scene`].
#[derive(Debug, Clone)]
pub struct BuiltScene<T: Real> {
    pub scene: Scene<T>,
    pub wavelet: Vec<T>,
    /// Ideal user signal `s~`.
    pub pilot: SignalSet<T>,
    pub pilot_user: usize,
    pub pilot_channel: usize,
}

/// Builds coefficient arrays `(inertia, compliance)` for a recipe.
fn medium_arrays(recipe: &MediumRecipe, nx: usize, ny: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = nx * ny;
    let positive = |v: f64, what: &str| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!("{what} must be positive, got {v}")))
        }
    };
    match recipe {
        MediumRecipe::Homogeneous { c } => {
            positive(*c, "wave speed")?;
            Ok((vec![1.0; n], vec![1.0 / (c * c); n]))
        }
        MediumRecipe::RandomScatterers { c, count, radius, contrast } => {
            positive(*c, "wave speed")?;
            positive(radius[0], "scatterer radius")?;
            positive(contrast[0], "scatterer contrast")?;
            if radius[1] < radius[0] || contrast[1] < contrast[0] {
                return Err(Error::Config("scatterer ranges must be [min, max]".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut speed = vec![*c; n];
            for _ in 0..*count {
                let cx = rng.random_range(0.0..nx as f64);
                let cy = rng.random_range(0.0..ny as f64);
                let r = if radius[1] > radius[0] { rng.random_range(radius[0]..radius[1]) } else { radius[0] };
                let k = if contrast[1] > contrast[0] {
                    rng.random_range(contrast[0]..contrast[1])
                } else {
                    contrast[0]
                };
                for j in 0..ny {
                    for i in 0..nx {
                        let (di, dj) = (i as f64 + 0.5 - cx, j as f64 + 0.5 - cy);
                        if di * di + dj * dj <= r * r {
                            speed[j * nx + i] = c * k;
                        }
                    }
                }
            }
            Ok((vec![1.0; n], speed.iter().map(|s| 1.0 / (s * s)).collect()))
        }
        MediumRecipe::Waveguide { c, band, contrast } => {
            positive(*c, "wave speed")?;
            positive(*contrast, "band contrast")?;
            if 2 * band >= ny {
                return Err(Error::Config(format!("waveguide bands of {band} cells leave no channel")));
            }
            let mut inertia = vec![1.0; n];
            let mut compliance = vec![1.0 / (c * c); n];
            for j in 0..ny {
                if j < *band || j >= ny - band {
                    for i in 0..nx {
                        inertia[j * nx + i] *= contrast;
                        compliance[j * nx + i] /= contrast;
                    }
                }
            }
            Ok((inertia, compliance))
        }
    }
}

/// Deterministic construction of the scene, its pilot and the derived `dt`.
pub fn build_scene<T: Real>(spec: &SceneSpec) -> Result<BuiltScene<T>> {
    let g = &spec.grid;
    let dy = g.dy.unwrap_or(g.dx);
    if !(g.cfl > 0.0 && g.cfl <= std::f64::consts::FRAC_1_SQRT_2) {
        return Err(Error::Config(format!("cfl must lie in (0, 1/sqrt(2)], got {}", g.cfl)));
    }
    if spec.physics == PhysicsKind::Acoustic2D && spec.sigma != 0.0 {
        return Err(Error::Config("sigma is only meaningful for maxwell_tm".into()));
    }
    if !(spec.noise >= 0.0 && spec.noise.is_finite()) {
        return Err(Error::Config(format!("noise must be >= 0, got {}", spec.noise)));
    }
    let (inertia, compliance) = medium_arrays(&spec.medium, g.nx, g.ny, spec.seed)?;
    let cast = |v: Vec<f64>| v.into_iter().map(T::lit).collect::<Vec<T>>();
    let n = g.nx * g.ny;
    let medium = match spec.physics {
        PhysicsKind::Acoustic2D => Medium::acoustic(g.nx, g.ny, cast(inertia), cast(compliance))?,
        PhysicsKind::MaxwellTm2D => {
            Medium::maxwell_tm(g.nx, g.ny, cast(compliance), cast(inertia), cast(vec![spec.sigma; n]))?
        }
    };
    let c_max = medium.c_max();
    if !(c_max.is_finite() && c_max > T::zero()) {
        return Err(Error::Config("medium has no finite wave speed".into()));
    }
    let cfl = T::lit(g.cfl);
    let dt = cfl * T::lit(g.dx.min(dy)) / (T::lit(2.0) * c_max);
    let grid = Grid::new(g.nx, g.ny, T::lit(g.dx), T::lit(dy), dt, g.nt)?;

    let base = AntennaArray::new(&grid, &spec.base.centers()?, spec.base.shape())
        .map_err(|e| Error::Layout(format!("base array: {e}")))?;
    let users = AntennaArray::new(&grid, &spec.users.centers()?, spec.users.shape())
        .map_err(|e| Error::Layout(format!("user array: {e}")))?;
    let stepper = StepperConfig::with_cfl(cfl);
    let measurement = match spec.measurement {
        MeasurementRecipe::Full => MeasurementSpec::Full,
        MeasurementRecipe::Partial { channel } => MeasurementSpec::Partial(channel),
    };
    let pilot_channel = match spec.measurement {
        MeasurementRecipe::Full => Physics::new(spec.physics).scalar_channel(),
        MeasurementRecipe::Partial { .. } => 0,
    };
    let scene = Scene::new(grid, medium, base, users, stepper)?
        .with_physics(Physics::new(spec.physics).with_convention(spec.convention))
        .with_measurement(measurement)?;
    let wavelet = make_wavelet(&spec.pilot, &scene.grid)?;
    if !spec.pilot_amplitude.is_finite() {
        return Err(Error::Config(format!("pilot_amplitude must be finite, got {}", spec.pilot_amplitude)));
    }
    let amplitude = T::lit(spec.pilot_amplitude);
    let scaled: Vec<T> = wavelet.iter().map(|v| *v * amplitude).collect();
    let pilot = make_pilot(&scaled, spec.pilot_user, pilot_channel, &scene.zero_users())?;
    Ok(BuiltScene { scene, wavelet, pilot, pilot_user: spec.pilot_user, pilot_channel })
}

/// Samples a pilot waveform on the grid's time levels, normalized to unit
/// peak amplitude.
pub fn make_wavelet<T: Real>(recipe: &WaveletRecipe, grid: &Grid<T>) -> Result<Vec<T>> {
    let dt = grid.dt().as_f64();
    let nt = grid.nt();
    let resolvable = |f: f64, what: &str| {
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::Sampling(format!("{what} must be positive, got {f}")));
        }
        if 1.0 / f < 10.0 * dt {
            return Err(Error::Sampling(format!(
                "{what} {f} has {:.2} samples per period at dt = {dt}; at least 10 are needed",
                1.0 / (f * dt)
            )));
        }
        Ok(())
    };
    let pi = std::f64::consts::PI;
    let raw: Vec<f64> = match *recipe {
        WaveletRecipe::Ricker { f0, t0 } => {
            resolvable(f0, "ricker frequency")?;
            let t0 = t0.unwrap_or(1.5 / f0);
            (0..nt)
                .map(|i| {
                    let a = (pi * f0 * (i as f64 * dt - t0)).powi(2);
                    (1.0 - 2.0 * a) * (-a).exp()
                })
                .collect()
        }
        WaveletRecipe::GaussianPulse { t0, width } => {
            resolvable(1.0 / (2.0 * pi * width), "gaussian pulse bandwidth")?;
            (0..nt)
                .map(|i| {
                    let x = (i as f64 * dt - t0) / width;
                    (-0.5 * x * x).exp()
                })
                .collect()
        }
        WaveletRecipe::Chirp { f1, f2, start, duration } => {
            resolvable(f1, "chirp start frequency")?;
            resolvable(f2, "chirp end frequency")?;
            if !(duration > 0.0) {
                return Err(Error::Sampling(format!("chirp duration must be positive, got {duration}")));
            }
            (0..nt)
                .map(|i| {
                    let tau = i as f64 * dt - start;
                    if !(0.0..=duration).contains(&tau) {
                        return 0.0;
                    }
                    let phase = 2.0 * pi * (f1 * tau + 0.5 * (f2 - f1) * tau * tau / duration);
                    phase.sin()
                })
                .collect()
        }
    };
    let peak = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::Sampling("wavelet vanishes on the time grid".into()));
    }
    Ok(raw.into_iter().map(|v| T::lit(v / peak)).collect())
}
