//! Discrete time reversal: sample `i` maps to `nt - 1 - i` and every channel
//! is multiplied by its sign under the physics' reversal convention.

use crate::error::{Error, Result};
use crate::field::FieldMovie;
use crate::physics::{Physics, CHANNELS};
use crate::scalar::Real;
use crate::signal::SignalSet;

/// Mirror `T` (base) or `T-hat` (users).
pub fn time_reverse_signals<T: Real>(s: &SignalSet<T>, phys: &Physics) -> Result<SignalSet<T>> {
    let signs = s
        .channels()
        .iter()
        .map(|ch| ch.sign(phys))
        .collect::<Result<Vec<_>>>()?;
    let nt = s.nt();
    let mut out = s.zeros_like();
    for k in 0..s.antennas() {
        for (c, &sg) in signs.iter().enumerate() {
            let src = s.series(k, c);
            let dst = out.series_mut(k, c);
            for t in 0..nt {
                dst[nt - 1 - t] = apply_sign(sg, src[t]);
            }
        }
    }
    Ok(out)
}

/// Operator `S` on a space-time field.
pub fn time_reverse_field<T: Real>(q: &FieldMovie<T>, phys: &Physics) -> FieldMovie<T> {
    let mask = phys.sign_mask();
    let nt = q.nt();
    let plane = q.nx() * q.ny();
    let mut out = q.clone();
    for t in 0..nt {
        let src = q.frame(t);
        let dst = out.frame_mut(nt - 1 - t);
        for c in 0..CHANNELS {
            for (d, s) in dst[c * plane..(c + 1) * plane]
                .iter_mut()
                .zip(&src[c * plane..(c + 1) * plane])
            {
                *d = apply_sign(mask[c], *s);
            }
        }
    }
    out
}

#[inline]
fn apply_sign<T: Real>(sign: i8, v: T) -> T {
    if sign < 0 {
        -v
    } else {
        v
    }
}

/// Sign of a single field channel, validated.
pub fn channel_sign(phys: &Physics, channel: usize) -> Result<i8> {
    phys.sign_mask()
        .get(channel)
        .copied()
        .ok_or_else(|| Error::ChannelMapping(format!("field channel {channel} does not exist")))
}
