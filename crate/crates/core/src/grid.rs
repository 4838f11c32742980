use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform space-time discretization of `Omega x [0, T]`.
///
/// Cell `(i, j)` has linear index `j * nx + i`. The outermost ring of cells is
/// the zero-Dirichlet boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    nx: usize,
    ny: usize,
    dx: T,
    dy: T,
    dt: T,
    nt: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(nx: usize, ny: usize, dx: T, dy: T, dt: T, nt: usize) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::Config(format!("grid needs nx, ny >= 4, got {nx} x {ny}")));
        }
        if nt < 2 {
            return Err(Error::Config(format!("grid needs nt >= 2, got {nt}")));
        }
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !(positive(dx) && positive(dy) && positive(dt)) {
            return Err(Error::Config(format!(
                "spacings must be positive and finite: dx={dx}, dy={dy}, dt={dt}"
            )));
        }
        Ok(Self { nx, ny, dx, dy, dt, nt })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn dx(&self) -> T {
        self.dx
    }
    pub fn dy(&self) -> T {
        self.dy
    }
    pub fn dt(&self) -> T {
        self.dt
    }
    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_area(&self) -> T {
        self.dx * self.dy
    }

    /// `T = (nt - 1) dt`.
    pub fn duration(&self) -> T {
        T::from_count(self.nt - 1) * self.dt
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    /// Trapezoidal quadrature weights on `[0, T]`.
    pub fn time_weights(&self) -> Vec<T> {
        trapezoid_weights(self.nt, self.dt)
    }

    /// Same grid with a different number of time samples.
    pub fn with_nt(&self, nt: usize) -> Result<Self> {
        Self::new(self.nx, self.ny, self.dx, self.dy, self.dt, nt)
    }

}

pub fn trapezoid_weights<T: Real>(nt: usize, dt: T) -> Vec<T> {
    let half = dt * T::lit(0.5);
    (0..nt)
        .map(|i| if i == 0 || i + 1 == nt { half } else { dt })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::new(3, 10, 1.0, 1.0, 0.1, 10).is_err());
        assert!(Grid::new(10, 10, 1.0, 1.0, 0.1, 1).is_err());
        assert!(Grid::new(10, 10, 0.0, 1.0, 0.1, 10).is_err());
        assert!(Grid::new(10, 10, 1.0, 1.0, -0.1, 10).is_err());
        assert!(Grid::new(4, 4, 1.0, 1.0, 0.1, 2).is_ok());
    }

    #[test]
    fn trapezoid_weights_integrate_constants_exactly() {
        let g = Grid::new(6, 6, 1.0, 1.0, 0.25, 9).unwrap();
        let w = g.time_weights();
        assert_eq!(w[0], 0.125);
        assert_eq!(w[4], 0.25);
        assert_eq!(w.iter().sum::<f64>(), g.duration());
    }

    #[test]
    fn boundary_ring() {
        let g = Grid::new(5, 6, 1.0, 1.0, 0.1, 3).unwrap();
        assert!(g.is_boundary(0, 3));
        assert!(g.is_boundary(4, 3));
        assert!(g.is_boundary(2, 5));
        assert!(!g.is_boundary(1, 1));
        assert_eq!(g.coords(g.index(3, 4)), (3, 4));
    }
}
