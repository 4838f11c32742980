//! Source and measurement operators, communication operators `A`, `B`, and
//! the mirror adjoint `A* = T B T-hat`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::antenna::AntennaArray;
use crate::error::{Error, Result};
use crate::field::{FieldMovie, MovieKind};
use crate::grid::Grid;
use crate::medium::Medium;
use crate::physics::{Physics, CHANNELS};
use crate::propagator::{Forcing, Propagator, Recorder, StepperConfig, Tee};
use crate::reversal::time_reverse_signals;
use crate::scalar::Real;
use crate::signal::{Side, SignalChannel, SignalSet};

/// Per-antenna linear measurement with a declared formal adjoint.
///
/// `taps` is `C x 3` row-major: output channel `c` reads
/// `sum_ch taps[c][ch] * int gamma u_ch`. `adjoint` is `3 x C` row-major and
/// drives the matching source operator `Q = Gamma M*`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedMeasurement<T> {
    taps: Vec<[T; CHANNELS]>,
    adjoint: Vec<[T; CHANNELS]>,
}

impl<T: Real> GeneralizedMeasurement<T> {
    /// `adjoint` is given column-wise: `adjoint[c][ch]` is entry `(ch, c)` of
    /// the declared `3 x C` adjoint matrix.
    pub fn new(taps: Vec<[T; CHANNELS]>, adjoint: Vec<[T; CHANNELS]>) -> Result<Self> {
        if taps.is_empty() || taps.len() != adjoint.len() {
            return Err(Error::Measurement(format!(
                "{} tap rows but {} adjoint columns",
                taps.len(),
                adjoint.len()
            )));
        }
        Ok(Self { taps, adjoint })
    }

    /// Declared adjoint equal to the exact transpose of `taps`.
    pub fn transposed(taps: Vec<[T; CHANNELS]>) -> Result<Self> {
        let adjoint = taps.clone();
        Self::new(taps, adjoint)
    }

    pub fn outputs(&self) -> usize {
        self.taps.len()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum MeasurementSpec<T> {
    /// Every field channel is measured and every channel can be emitted.
    #[default]
    Full,
    /// Only field channel `nu`.
    Partial(usize),
    Generalized(GeneralizedMeasurement<T>),
}

impl<T: Real> MeasurementSpec<T> {
    pub fn channels(&self) -> Vec<SignalChannel> {
        match self {
            Self::Full => (0..CHANNELS).map(SignalChannel::Physical).collect(),
            Self::Partial(nu) => vec![SignalChannel::Physical(*nu)],
            Self::Generalized(g) => g
                .taps
                .iter()
                .map(|row| SignalChannel::Combination(row.map(|v| v != T::zero())))
                .collect(),
        }
    }

    pub fn channel_count(&self) -> usize {
        match self {
            Self::Full => CHANNELS,
            Self::Partial(_) => 1,
            Self::Generalized(g) => g.outputs(),
        }
    }

    /// Weight of field channel `ch` in output channel `c`.
    #[inline]
    fn tap(&self, c: usize, ch: usize) -> T {
        match self {
            Self::Full => if c == ch { T::one() } else { T::zero() },
            Self::Partial(nu) => if ch == *nu { T::one() } else { T::zero() },
            Self::Generalized(g) => g.taps[c][ch],
        }
    }

    /// Weight of signal channel `c` in emitted field channel `ch`.
    #[inline]
    fn emit(&self, c: usize, ch: usize) -> T {
        match self {
            Self::Generalized(g) => g.adjoint[c][ch],
            _ => self.tap(c, ch),
        }
    }

    /// Checks that the spec is usable with `phys`: channel indices exist,
    /// the declared adjoint passes a dot-product test, and every output
    /// channel has a definite time-reversal parity in both directions.
    pub fn validate(&self, phys: &Physics) -> Result<()> {
        match self {
            Self::Full => Ok(()),
            Self::Partial(nu) if *nu < CHANNELS => Ok(()),
            Self::Partial(nu) => Err(Error::Measurement(format!("field channel {nu} does not exist"))),
            Self::Generalized(g) => {
                let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
                let outs = g.outputs();
                for _ in 0..8 {
                    let x: Vec<T> = (0..CHANNELS).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect();
                    let y: Vec<T> = (0..outs).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect();
                    let mut lhs = T::zero();
                    let mut rhs = T::zero();
                    let mut scale = T::zero();
                    for c in 0..outs {
                        for ch in 0..CHANNELS {
                            lhs += g.taps[c][ch] * x[ch] * y[c];
                            rhs += x[ch] * g.adjoint[c][ch] * y[c];
                            scale += (g.taps[c][ch] * x[ch] * y[c]).abs();
                        }
                    }
                    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
                    if (lhs - rhs).abs() > tol * scale.max(T::min_positive_value()) {
                        return Err(Error::Measurement(format!(
                            "declared adjoint fails the dot-product test: {lhs} vs {rhs}"
                        )));
                    }
                }
                let mask = phys.sign_mask();
                for c in 0..outs {
                    let sign = SignalChannel::Combination(g.taps[c].map(|v| v != T::zero()))
                        .sign(phys)
                        .map_err(|e| Error::Measurement(format!("output channel {c}: {e}")))?;
                    if (0..CHANNELS).any(|ch| g.adjoint[c][ch] != T::zero() && mask[ch] != sign) {
                        return Err(Error::Measurement(format!(
                            "output channel {c}: declared adjoint does not commute with time reversal"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Streams `q = sum_k gamma_k (E r_k)` into a propagator.
struct SourceForcing<'a, T> {
    signals: &'a SignalSet<T>,
    array: &'a AntennaArray<T>,
    spec: &'a MeasurementSpec<T>,
    plane: usize,
    /// Optional per-entry divisor (used for `Gamma^-1 Q`).
    divide: Option<&'a Medium<T>>,
}

impl<T: Real> Forcing<T> for SourceForcing<'_, T> {
    fn visit(&self, n: usize, f: &mut dyn FnMut(usize, T)) {
        for (k, ant) in self.array.antennas().iter().enumerate() {
            for c in 0..self.signals.channel_count() {
                let r = self.signals.get(k, c, n);
                if r == T::zero() {
                    continue;
                }
                for ch in 0..CHANNELS {
                    let e = self.spec.emit(c, ch);
                    if e == T::zero() {
                        continue;
                    }
                    for &(idx, g) in &ant.support {
                        let mut v = g * e * r;
                        if let Some(m) = self.divide {
                            v /= m.gamma(ch)[idx];
                        }
                        f(ch * self.plane + idx, v);
                    }
                }
            }
        }
    }
}

/// Measures frames into a signal set.
struct MeasureRecorder<'a, T> {
    array: &'a AntennaArray<T>,
    spec: &'a MeasurementSpec<T>,
    plane: usize,
    area: T,
    /// Optional per-entry multiplier (used for `M Gamma`).
    multiply: Option<&'a Medium<T>>,
    out: SignalSet<T>,
}

impl<T: Real> Recorder<T> for MeasureRecorder<'_, T> {
    fn record(&mut self, n: usize, frame: &[T]) -> Result<()> {
        for (k, ant) in self.array.antennas().iter().enumerate() {
            for c in 0..self.out.channel_count() {
                let mut acc = T::zero();
                for ch in 0..CHANNELS {
                    let w = self.spec.tap(c, ch);
                    if w == T::zero() {
                        continue;
                    }
                    let mut part = T::zero();
                    for &(idx, g) in &ant.support {
                        let mut v = frame[ch * self.plane + idx];
                        if let Some(m) = self.multiply {
                            v *= m.gamma(ch)[idx];
                        }
                        part += g * v;
                    }
                    acc += w * part;
                }
                self.out.set(k, c, n, acc * self.area);
            }
        }
        Ok(())
    }
}

fn check_signals<T: Real>(
    r: &SignalSet<T>,
    side: Side,
    array: &AntennaArray<T>,
    spec: &MeasurementSpec<T>,
    grid: &Grid<T>,
) -> Result<()> {
    if r.side() != side {
        return Err(Error::Side { expected: format!("{side:?}"), found: format!("{:?}", r.side()) });
    }
    if r.antennas() != array.len() || r.channel_count() != spec.channel_count() || r.nt() != grid.nt() {
        return Err(Error::Dimension(format!(
            "signal set is {}x{}x{}, expected {}x{}x{}",
            r.antennas(),
            r.channel_count(),
            r.nt(),
            array.len(),
            spec.channel_count(),
            grid.nt()
        )));
    }
    if !array.fits(grid) {
        return Err(Error::Dimension("antenna array was built for another grid".into()));
    }
    Ok(())
}

fn zero_signals<T: Real>(side: Side, array: &AntennaArray<T>, spec: &MeasurementSpec<T>, grid: &Grid<T>) -> SignalSet<T> {
    SignalSet::zeros(side, array.len(), spec.channels(), grid.nt(), grid.dt())
        .expect("array and grid were validated")
}

/// `Q r`: source field `q(x, t) = sum_k gamma_k(x) r_k(t)` (channel-embedded
/// per the measurement spec).
pub fn apply_q<T: Real>(
    r: &SignalSet<T>,
    array: &AntennaArray<T>,
    spec: &MeasurementSpec<T>,
    grid: &Grid<T>,
) -> Result<FieldMovie<T>> {
    check_signals(r, r.side(), array, spec, grid)?;
    let mut q = FieldMovie::zeros(grid, MovieKind::Source);
    let src = SourceForcing { signals: r, array, spec, plane: grid.cells(), divide: None };
    for n in 0..grid.nt() {
        let frame = q.frame_mut(n);
        src.visit(n, &mut |e, v| frame[e] += v);
    }
    Ok(q)
}

/// `M u`: signals `s_k(t) = int gamma_k u(x, t) dx`.
pub fn apply_m<T: Real>(
    u: &FieldMovie<T>,
    array: &AntennaArray<T>,
    spec: &MeasurementSpec<T>,
    grid: &Grid<T>,
    side: Side,
) -> Result<SignalSet<T>> {
    if u.nx() != grid.nx() || u.ny() != grid.ny() || u.nt() != grid.nt() || !array.fits(grid) {
        return Err(Error::Dimension("field movie, antenna array and grid disagree".into()));
    }
    let mut rec = MeasureRecorder {
        array,
        spec,
        plane: grid.cells(),
        area: grid.cell_area(),
        multiply: None,
        out: zero_signals(side, array, spec, grid),
    };
    for n in 0..grid.nt() {
        rec.record(n, u.frame(n))?;
    }
    Ok(rec.out)
}

/// Everything needed to apply the communication operators.
#[derive(Debug, Clone)]
pub struct Scene<T: Real> {
    pub grid: Grid<T>,
    pub medium: Medium<T>,
    /// Reversal convention used by the mirrors.
    pub physics: Physics,
    pub base: AntennaArray<T>,
    pub users: AntennaArray<T>,
    pub stepper: StepperConfig<T>,
    pub base_measurement: MeasurementSpec<T>,
    pub user_measurement: MeasurementSpec<T>,
}

impl<T: Real> Scene<T> {
    pub fn new(
        grid: Grid<T>,
        medium: Medium<T>,
        base: AntennaArray<T>,
        users: AntennaArray<T>,
        stepper: StepperConfig<T>,
    ) -> Result<Self> {
        if !medium.matches(&grid) || !base.fits(&grid) || !users.fits(&grid) {
            return Err(Error::Dimension("grid, medium and antenna arrays disagree".into()));
        }
        users.validate(&grid)?;
        base.check_disjoint_from(&users)?;
        // Fails early on CFL violations.
        Propagator::new(&grid, &medium, stepper)?;
        let physics = Physics::new(medium.kind());
        Ok(Self {
            grid,
            medium,
            physics,
            base,
            users,
            stepper,
            base_measurement: MeasurementSpec::Full,
            user_measurement: MeasurementSpec::Full,
        })
    }

    /// Uses `spec` at both ends after validating it.
    pub fn with_measurement(self, spec: MeasurementSpec<T>) -> Result<Self> {
        self.with_measurements(spec.clone(), spec)
    }

    pub fn with_measurements(mut self, base: MeasurementSpec<T>, users: MeasurementSpec<T>) -> Result<Self> {
        base.validate(&self.physics)?;
        users.validate(&self.physics)?;
        self.base_measurement = base;
        self.user_measurement = users;
        Ok(self)
    }

    pub fn with_physics(mut self, physics: Physics) -> Self {
        self.physics = physics;
        self
    }

    pub fn zero_base(&self) -> SignalSet<T> {
        zero_signals(Side::Base, &self.base, &self.base_measurement, &self.grid)
    }

    pub fn zero_users(&self) -> SignalSet<T> {
        zero_signals(Side::Users, &self.users, &self.user_measurement, &self.grid)
    }

    fn propagator(&self) -> Result<Propagator<'_, T>> {
        Propagator::new(&self.grid, &self.medium, self.stepper)
    }

    fn transfer(
        &self,
        input: &SignalSet<T>,
        from: (&AntennaArray<T>, &MeasurementSpec<T>, Side),
        to: (&AntennaArray<T>, &MeasurementSpec<T>, Side),
        extra: Option<&mut dyn Recorder<T>>,
    ) -> Result<SignalSet<T>> {
        check_signals(input, from.2, from.0, from.1, &self.grid)?;
        let prop = self.propagator()?;
        let plane = self.grid.cells();
        let src = SourceForcing { signals: input, array: from.0, spec: from.1, plane, divide: None };
        let mut rec = MeasureRecorder {
            array: to.0,
            spec: to.1,
            plane,
            area: self.grid.cell_area(),
            multiply: None,
            out: zero_signals(to.2, to.0, to.1, &self.grid),
        };
        match extra {
            Some(x) => prop.forward(&src, &mut Tee(&mut rec, x))?,
            None => prop.forward(&src, &mut rec)?,
        }
        Ok(rec.out)
    }

    /// `A r = M-hat F Q r`.
    pub fn apply_a(&self, r: &SignalSet<T>) -> Result<SignalSet<T>> {
        self.apply_a_with(r, None)
    }

    /// [`Scene::apply_a`] that also feeds every state frame to `extra`.
    pub fn apply_a_with(&self, r: &SignalSet<T>, extra: Option<&mut dyn Recorder<T>>) -> Result<SignalSet<T>> {
        self.transfer(
            r,
            (&self.base, &self.base_measurement, Side::Base),
            (&self.users, &self.user_measurement, Side::Users),
            extra,
        )
    }

    /// `B s = M F Q-hat s`.
    pub fn apply_b(&self, s: &SignalSet<T>) -> Result<SignalSet<T>> {
        self.transfer(
            s,
            (&self.users, &self.user_measurement, Side::Users),
            (&self.base, &self.base_measurement, Side::Base),
            None,
        )
    }

    /// `A* s = T B T-hat s`.
    pub fn apply_a_star(&self, s: &SignalSet<T>) -> Result<SignalSet<T>> {
        if s.side() != Side::Users {
            return Err(Error::Side { expected: "Users".into(), found: format!("{:?}", s.side()) });
        }
        let mirrored = time_reverse_signals(s, &self.physics)?;
        let b = self.apply_b(&mirrored)?;
        time_reverse_signals(&b, &self.physics)
    }

    /// `A* s = Q* F* M-hat* s = M Gamma F* Gamma^-1 Q-hat s`, through the
    /// reverse-traversal adjoint solver instead of a time-reversal experiment.
    pub fn apply_a_adjoint_direct(&self, s: &SignalSet<T>) -> Result<SignalSet<T>> {
        check_signals(s, Side::Users, &self.users, &self.user_measurement, &self.grid)?;
        let prop = self.propagator()?;
        let plane = self.grid.cells();
        let src = SourceForcing {
            signals: s,
            array: &self.users,
            spec: &self.user_measurement,
            plane,
            divide: Some(&self.medium),
        };
        let mut rec = MeasureRecorder {
            array: &self.base,
            spec: &self.base_measurement,
            plane,
            area: self.grid.cell_area(),
            multiply: Some(&self.medium),
            out: self.zero_base(),
        };
        prop.adjoint(&src, &mut rec)?;
        Ok(rec.out)
    }
}

/// The only view of the physical channel available to the iterative schemes.
pub trait CommunicationChannel<T: Real> {
    /// Emit `r` at the base, record at the users.
    fn apply_a(&self, r: &SignalSet<T>) -> Result<SignalSet<T>>;
    /// Adjoint of `apply_a` in the unweighted signal inner products.
    fn apply_a_star(&self, s: &SignalSet<T>) -> Result<SignalSet<T>>;
    fn zero_base(&self) -> SignalSet<T>;
    fn zero_users(&self) -> SignalSet<T>;
}

impl<T: Real> CommunicationChannel<T> for Scene<T> {
    fn apply_a(&self, r: &SignalSet<T>) -> Result<SignalSet<T>> {
        Scene::apply_a(self, r)
    }
    fn apply_a_star(&self, s: &SignalSet<T>) -> Result<SignalSet<T>> {
        Scene::apply_a_star(self, s)
    }
    fn zero_base(&self) -> SignalSet<T> {
        Scene::zero_base(self)
    }
    fn zero_users(&self) -> SignalSet<T> {
        Scene::zero_users(self)
    }
}
