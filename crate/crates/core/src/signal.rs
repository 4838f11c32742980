use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::trapezoid_weights;
use crate::physics::{Physics, CHANNELS};
use crate::scalar::{pairwise_sum_by, Real};

/// Which end of the link a signal belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Signals at the users (`Z-hat`, `Y-hat`).
    Users,
    /// Signals at the base antennas (`Z`, `Y`).
    Base,
}

/// Physical meaning of one signal channel, needed to mirror it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalChannel {
    /// Direct sample of field channel `c`.
    Physical(usize),
    /// Linear combination of the flagged field channels.
    Combination([bool; CHANNELS]),
    /// No known mapping; such signals cannot be time reversed.
    Unassigned,
}

impl SignalChannel {
    /// Time-reversal sign of this channel under `phys`, if it is well defined.
    pub fn sign(&self, phys: &Physics) -> Result<i8> {
        let mask = phys.sign_mask();
        match *self {
            SignalChannel::Physical(c) if c < CHANNELS => Ok(mask[c]),
            SignalChannel::Physical(c) => {
                Err(Error::ChannelMapping(format!("field channel {c} does not exist")))
            }
            SignalChannel::Combination(used) => {
                let mut signs = (0..CHANNELS).filter(|&c| used[c]).map(|c| mask[c]);
                let first = signs
                    .next()
                    .ok_or_else(|| Error::ChannelMapping("combination uses no field channel".into()))?;
                if signs.all(|s| s == first) {
                    Ok(first)
                } else {
                    Err(Error::ChannelMapping(
                        "combination mixes channels of opposite time-reversal parity".into(),
                    ))
                }
            }
            SignalChannel::Unassigned => {
                Err(Error::ChannelMapping("signal channel has no declared field channel".into()))
            }
        }
    }
}

/// Per-antenna, per-channel time series, stored antenna-major:
/// entry `(k * C + c) * nt + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSet<T> {
    antennas: usize,
    channels: Vec<SignalChannel>,
    nt: usize,
    dt: T,
    side: Side,
    data: Vec<T>,
}

impl<T: Real> SignalSet<T> {
    pub fn zeros(side: Side, antennas: usize, channels: Vec<SignalChannel>, nt: usize, dt: T) -> Result<Self> {
        if antennas == 0 {
            return Err(Error::Dimension("signal set needs at least one antenna".into()));
        }
        if channels.is_empty() {
            return Err(Error::Dimension("signal set needs at least one channel".into()));
        }
        if nt == 0 {
            return Err(Error::Dimension("signal set needs at least one sample".into()));
        }
        if !(dt > T::zero() && dt.is_finite()) {
            return Err(Error::Config(format!("signal dt must be positive, got {dt}")));
        }
        let len = antennas * channels.len() * nt;
        Ok(Self { antennas, channels, nt, dt, side, data: vec![T::zero(); len] })
    }

    /// Full measurement layout: every antenna carries all field channels.
    pub fn zeros_full(side: Side, antennas: usize, nt: usize, dt: T) -> Result<Self> {
        Self::zeros(side, antennas, (0..CHANNELS).map(SignalChannel::Physical).collect(), nt, dt)
    }

    pub fn from_vec(
        side: Side,
        antennas: usize,
        channels: Vec<SignalChannel>,
        nt: usize,
        dt: T,
        data: Vec<T>,
    ) -> Result<Self> {
        let mut s = Self::zeros(side, antennas, channels, nt, dt)?;
        if data.len() != s.data.len() {
            return Err(Error::Dimension(format!(
                "signal set needs {} samples, got {}",
                s.data.len(),
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dimension("signal set contains non-finite samples".into()));
        }
        s.data = data;
        Ok(s)
    }

    /// Zero set with the same layout.
    pub fn zeros_like(&self) -> Self {
        Self { data: vec![T::zero(); self.data.len()], ..self.clone() }
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }
    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }
    pub fn channels(&self) -> &[SignalChannel] {
        &self.channels
    }
    pub fn nt(&self) -> usize {
        self.nt
    }
    pub fn dt(&self) -> T {
        self.dt
    }
    pub fn side(&self) -> Side {
        self.side
    }
    pub fn len(&self) -> usize {
        self.data.len()
    }
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn offset(&self, k: usize, c: usize) -> usize {
        (k * self.channels.len() + c) * self.nt
    }

    pub fn series(&self, k: usize, c: usize) -> &[T] {
        let o = self.offset(k, c);
        &self.data[o..o + self.nt]
    }

    pub fn series_mut(&mut self, k: usize, c: usize) -> &mut [T] {
        let o = self.offset(k, c);
        let nt = self.nt;
        &mut self.data[o..o + nt]
    }

    #[inline]
    pub fn get(&self, k: usize, c: usize, t: usize) -> T {
        self.data[self.offset(k, c) + t]
    }

    #[inline]
    pub fn set(&mut self, k: usize, c: usize, t: usize, v: T) {
        let o = self.offset(k, c);
        self.data[o + t] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Same antenna count, channel layout, sample count, spacing and side.
    pub fn same_layout(&self, other: &Self) -> bool {
        self.antennas == other.antennas
            && self.channels.len() == other.channels.len()
            && self.nt == other.nt
            && self.dt == other.dt
            && self.side == other.side
    }

    pub fn check_layout(&self, other: &Self) -> Result<()> {
        if self.same_layout(other) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "signal layouts differ: {:?} {}x{}x{} vs {:?} {}x{}x{}",
                self.side,
                self.antennas,
                self.channels.len(),
                self.nt,
                other.side,
                other.antennas,
                other.channels.len(),
                other.nt
            )))
        }
    }

    pub fn scale(&mut self, a: T) {
        self.data.iter_mut().for_each(|v| *v *= a);
    }

    pub fn scaled(&self, a: T) -> Self {
        let mut s = self.clone();
        s.scale(a);
        s
    }

    /// `self += a * other`; layouts must agree.
    pub fn axpy(&mut self, a: T, other: &Self) -> Result<()> {
        self.check_layout(other)?;
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * *o;
        }
        Ok(())
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut s = self.clone();
        s.axpy(-T::one(), other)?;
        Ok(s)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    /// Per-antenna weighted copy, `w_k * s_k`.
    pub fn antenna_weighted(&self, weights: &[T]) -> Result<Self> {
        if weights.len() != self.antennas {
            return Err(Error::Dimension(format!(
                "{} antenna weights for {} antennas",
                weights.len(),
                self.antennas
            )));
        }
        let mut s = self.clone();
        let per = self.channels.len() * self.nt;
        for (k, w) in weights.iter().enumerate() {
            s.data[k * per..(k + 1) * per].iter_mut().for_each(|v| *v *= *w);
        }
        Ok(s)
    }
}

/// `sum_k w_k sum_c sum_t a b dt_t` with trapezoidal time weights. `weights`
/// defaults to all ones.
pub fn inner_product_signals<T: Real>(a: &SignalSet<T>, b: &SignalSet<T>, weights: Option<&[T]>) -> Result<T> {
    a.check_layout(b)?;
    if let Some(w) = weights {
        if w.len() != a.antennas {
            return Err(Error::Dimension(format!(
                "{} antenna weights for {} antennas",
                w.len(),
                a.antennas
            )));
        }
    }
    let tw = trapezoid_weights(a.nt, a.dt);
    let per = a.channels.len() * a.nt;
    let nt = a.nt;
    Ok(pairwise_sum_by(a.data.len(), &|i| {
        let wk = weights.map_or(T::one(), |w| w[i / per]);
        wk * tw[i % nt] * a.data[i] * b.data[i]
    }))
}

/// `sqrt(<s, s>)`.
pub fn signal_norm<T: Real>(s: &SignalSet<T>, weights: Option<&[T]>) -> Result<T> {
    Ok(inner_product_signals(s, s, weights)?.max(T::zero()).sqrt())
}

/// Per-antenna energies `sum_c sum_t s^2 dt_t`.
pub fn antenna_energies<T: Real>(s: &SignalSet<T>) -> Vec<T> {
    let tw = trapezoid_weights(s.nt, s.dt);
    (0..s.antennas)
        .map(|k| {
            let per = s.channels.len() * s.nt;
            let base = k * per;
            pairwise_sum_by(per, &|i| {
                let v = s.data[base + i];
                tw[i % s.nt] * v * v
            })
        })
        .collect()
}
