use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::physics::CHANNELS;
use crate::scalar::Real;

/// One time level of the 3-channel state, channel-major: entry
/// `channel * nx * ny + j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState<T> {
    nx: usize,
    ny: usize,
    data: Vec<T>,
}

impl<T: Real> FieldState<T> {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self { nx, ny, data: vec![T::zero(); CHANNELS * nx * ny] }
    }

    pub fn from_vec(nx: usize, ny: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != CHANNELS * nx * ny {
            return Err(Error::Dimension(format!(
                "field state needs {} values, got {}",
                CHANNELS * nx * ny,
                data.len()
            )));
        }
        Ok(Self { nx, ny, data })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn channel(&self, c: usize) -> &[T] {
        let n = self.nx * self.ny;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [T] {
        let n = self.nx * self.ny;
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, i: usize, j: usize) -> T {
        self.data[(c * self.ny + j) * self.nx + i]
    }

    pub fn set(&mut self, c: usize, i: usize, j: usize, v: T) {
        self.data[(c * self.ny + j) * self.nx + i] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn boundary_is_zero(&self) -> bool {
        ring_is_zero(self.nx, self.ny, &self.data)
    }
}

/// Interpretation of a space-time record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MovieKind {
    State,
    Source,
}

/// `nt` consecutive [`FieldState`] frames stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMovie<T> {
    nx: usize,
    ny: usize,
    nt: usize,
    kind: MovieKind,
    data: Vec<T>,
}

impl<T: Real> FieldMovie<T> {
    pub fn zeros(grid: &Grid<T>, kind: MovieKind) -> Self {
        Self::zeros_dims(grid.nx(), grid.ny(), grid.nt(), kind)
    }

    pub fn zeros_dims(nx: usize, ny: usize, nt: usize, kind: MovieKind) -> Self {
        Self { nx, ny, nt, kind, data: vec![T::zero(); nt * CHANNELS * nx * ny] }
    }

    pub fn from_vec(nx: usize, ny: usize, nt: usize, kind: MovieKind, data: Vec<T>) -> Result<Self> {
        if data.len() != nt * CHANNELS * nx * ny {
            return Err(Error::Dimension(format!(
                "movie needs {} values, got {}",
                nt * CHANNELS * nx * ny,
                data.len()
            )));
        }
        Ok(Self { nx, ny, nt, kind, data })
    }

    /// Fills every interior entry with `f(t, channel, i, j)`; the boundary ring
    /// stays zero.
    pub fn from_fn(grid: &Grid<T>, kind: MovieKind, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut m = Self::zeros(grid, kind);
        let (nx, ny) = (grid.nx(), grid.ny());
        for t in 0..grid.nt() {
            for c in 0..CHANNELS {
                for j in 1..ny - 1 {
                    for i in 1..nx - 1 {
                        m.data[((t * CHANNELS + c) * ny + j) * nx + i] = f(t, c, i, j);
                    }
                }
            }
        }
        m
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn nt(&self) -> usize {
        self.nt
    }
    pub fn kind(&self) -> MovieKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: MovieKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn frame_len(&self) -> usize {
        CHANNELS * self.nx * self.ny
    }

    pub fn frame(&self, t: usize) -> &[T] {
        let n = self.frame_len();
        &self.data[t * n..(t + 1) * n]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [T] {
        let n = self.frame_len();
        &mut self.data[t * n..(t + 1) * n]
    }

    pub fn state(&self, t: usize) -> FieldState<T> {
        FieldState { nx: self.nx, ny: self.ny, data: self.frame(t).to_vec() }
    }

    pub fn get(&self, t: usize, c: usize, i: usize, j: usize) -> T {
        self.data[((t * CHANNELS + c) * self.ny + j) * self.nx + i]
    }

    pub fn set(&mut self, t: usize, c: usize, i: usize, j: usize, v: T) {
        self.data[((t * CHANNELS + c) * self.ny + j) * self.nx + i] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Shape and invariant check against `grid`: frame count, finite entries,
    /// zero boundary ring.
    pub fn validate(&self, grid: &Grid<T>) -> Result<()> {
        if self.nx != grid.nx() || self.ny != grid.ny() || self.nt != grid.nt() {
            return Err(Error::Dimension(format!(
                "movie is {}x{}x{} but grid is {}x{}x{}",
                self.nx,
                self.ny,
                self.nt,
                grid.nx(),
                grid.ny(),
                grid.nt()
            )));
        }
        if !self.data.iter().all(|v| v.is_finite()) {
            return Err(Error::Dimension("movie contains non-finite entries".into()));
        }
        for t in 0..self.nt {
            if !ring_is_zero(self.nx, self.ny, self.frame(t)) {
                return Err(Error::Dimension(format!("frame {t} is nonzero on the boundary ring")));
            }
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.nt == other.nt
    }

    pub fn scale(&mut self, a: T) {
        self.data.iter_mut().for_each(|v| *v *= a);
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: T, other: &Self) {
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * *o;
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }
}

pub(crate) fn ring_is_zero<T: Real>(nx: usize, ny: usize, frame: &[T]) -> bool {
    let n = nx * ny;
    for c in 0..CHANNELS {
        let ch = &frame[c * n..(c + 1) * n];
        for i in 0..nx {
            if ch[i] != T::zero() || ch[(ny - 1) * nx + i] != T::zero() {
                return false;
            }
        }
        for j in 0..ny {
            if ch[j * nx] != T::zero() || ch[j * nx + nx - 1] != T::zero() {
                return false;
            }
        }
    }
    true
}
