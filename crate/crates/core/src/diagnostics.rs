//! Energy inner product, energy density and flux.

use crate::error::{Error, Result};
use crate::field::{FieldMovie, FieldState};
use crate::grid::Grid;
use crate::medium::Medium;
use crate::physics::{PhysicsKind, CHANNELS};
use crate::scalar::{pairwise_sum_by, Real};

fn check_movie<T: Real>(u: &FieldMovie<T>, grid: &Grid<T>, m: &Medium<T>) -> Result<()> {
    if u.nx() != grid.nx() || u.ny() != grid.ny() || u.nt() != grid.nt() || !m.matches(grid) {
        return Err(Error::Dimension(format!(
            "movie {}x{}x{} does not fit grid {}x{}x{} / medium {}x{}",
            u.nx(),
            u.ny(),
            u.nt(),
            grid.nx(),
            grid.ny(),
            grid.nt(),
            m.nx(),
            m.ny()
        )));
    }
    Ok(())
}

fn check_state<T: Real>(u: &FieldState<T>, m: &Medium<T>) -> Result<()> {
    if u.nx() != m.nx() || u.ny() != m.ny() {
        return Err(Error::Dimension(format!(
            "state {}x{} does not fit medium {}x{}",
            u.nx(),
            u.ny(),
            m.nx(),
            m.ny()
        )));
    }
    Ok(())
}

/// `<u, v>_U = sum_t dt_t sum_cells sum_ch gamma u v dx dy`, trapezoidal in time.
pub fn inner_product_fields<T: Real>(
    u: &FieldMovie<T>,
    v: &FieldMovie<T>,
    m: &Medium<T>,
    grid: &Grid<T>,
) -> Result<T> {
    check_movie(u, grid, m)?;
    check_movie(v, grid, m)?;
    let tw = grid.time_weights();
    let plane = grid.cells();
    let frame = CHANNELS * plane;
    let (a, b) = (u.as_slice(), v.as_slice());
    let s = pairwise_sum_by(a.len(), &|i| {
        let t = i / frame;
        let r = i % frame;
        tw[t] * m.gamma(r / plane)[r % plane] * a[i] * b[i]
    });
    Ok(s * grid.cell_area())
}

/// `sqrt(<u, u>_U)`.
pub fn field_norm<T: Real>(u: &FieldMovie<T>, m: &Medium<T>, grid: &Grid<T>) -> Result<T> {
    Ok(inner_product_fields(u, u, m, grid)?.max(T::zero()).sqrt())
}

/// `1/2 sum_ch gamma u^2` per cell.
pub fn energy_density<T: Real>(u: &FieldState<T>, m: &Medium<T>) -> Result<Vec<T>> {
    check_state(u, m)?;
    Ok(frame_density(u.as_slice(), m))
}

pub(crate) fn frame_density<T: Real>(frame: &[T], m: &Medium<T>) -> Vec<T> {
    let plane = m.nx() * m.ny();
    let half = T::lit(0.5);
    (0..plane)
        .map(|idx| {
            let mut e = T::zero();
            for c in 0..CHANNELS {
                let x = frame[c * plane + idx];
                e += m.gamma(c)[idx] * x * x;
            }
            half * e
        })
        .collect()
}

/// Total energy `1/2 int <Gamma u, u> dx`.
pub fn energy_total<T: Real>(u: &FieldState<T>, m: &Medium<T>, grid: &Grid<T>) -> Result<T> {
    check_state(u, m)?;
    Ok(frame_energy(u.as_slice(), m, grid))
}

pub(crate) fn frame_energy<T: Real>(frame: &[T], m: &Medium<T>, grid: &Grid<T>) -> T {
    let plane = grid.cells();
    let half = T::lit(0.5);
    half * grid.cell_area()
        * pairwise_sum_by(frame.len(), &|i| m.gamma(i / plane)[i % plane] * frame[i] * frame[i])
}

/// Energy flux per cell, evaluated pointwise on the stored values.
///
/// Acoustic: `p v`. Maxwell TM: the in-plane part of `E x H`, i.e.
/// `(-E_z H_y, E_z H_x)`.
pub fn flux<T: Real>(u: &FieldState<T>, m: &Medium<T>) -> Result<[Vec<T>; 2]> {
    check_state(u, m)?;
    let (a, b, s) = (u.channel(0), u.channel(1), u.channel(2));
    Ok(match m.kind() {
        PhysicsKind::Acoustic2D => [
            s.iter().zip(a).map(|(p, v)| *p * *v).collect(),
            s.iter().zip(b).map(|(p, v)| *p * *v).collect(),
        ],
        PhysicsKind::MaxwellTm2D => [
            s.iter().zip(b).map(|(e, hy)| -(*e * *hy)).collect(),
            s.iter().zip(a).map(|(e, hx)| *e * *hx).collect(),
        ],
    })
}
