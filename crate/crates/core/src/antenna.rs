use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Real;

/// Shape of the characteristic function `gamma_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AntennaShape {
    /// Single cell with weight `1 / (dx dy)`.
    #[default]
    Delta,
    /// 3x3 Gaussian bump with standard deviation `width` cells.
    Gaussian { width: f64 },
}

/// One antenna: center cell and weighted support.
#[derive(Debug, Clone, PartialEq)]
pub struct Antenna<T> {
    pub center: (usize, usize),
    /// `(cell index, gamma)` pairs; `sum gamma dx dy = 1`.
    pub support: Vec<(usize, T)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntennaArray<T> {
    nx: usize,
    ny: usize,
    antennas: Vec<Antenna<T>>,
}

impl<T: Real> AntennaArray<T> {
    /// Builds and validates an array: supports must lie in the interior and
    /// be pairwise disjoint.
    pub fn new(grid: &Grid<T>, centers: &[(usize, usize)], shape: AntennaShape) -> Result<Self> {
        let arr = Self::unchecked(grid, centers, shape)?;
        arr.validate(grid)?;
        Ok(arr)
    }

    /// Builds an array without the disjointness check (coincident antennas
    /// are allowed). Supports still have to avoid the boundary ring.
    #[doc(hidden)]
    pub fn unchecked(grid: &Grid<T>, centers: &[(usize, usize)], shape: AntennaShape) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Layout("antenna array is empty".into()));
        }
        let antennas = centers
            .iter()
            .map(|&c| build_antenna(grid, c, shape))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { nx: grid.nx(), ny: grid.ny(), antennas })
    }

    pub fn validate(&self, grid: &Grid<T>) -> Result<()> {
        let mut owner = vec![usize::MAX; grid.cells()];
        let mut clashes = Vec::new();
        for (k, a) in self.antennas.iter().enumerate() {
            for &(idx, _) in &a.support {
                let (i, j) = grid.coords(idx);
                if grid.is_boundary(i, j) {
                    return Err(Error::Layout(format!("antenna {k} touches the boundary at ({i}, {j})")));
                }
                if owner[idx] != usize::MAX && owner[idx] != k {
                    clashes.push((owner[idx], k));
                }
                owner[idx] = k;
            }
        }
        clashes.sort_unstable();
        clashes.dedup();
        if clashes.is_empty() {
            Ok(())
        } else {
            let list: Vec<String> = clashes.iter().map(|(a, b)| format!("{a}&{b}")).collect();
            Err(Error::Layout(format!("overlapping antenna supports: {}", list.join(", "))))
        }
    }

    pub fn len(&self) -> usize {
        self.antennas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.antennas.is_empty()
    }

    pub fn antennas(&self) -> &[Antenna<T>] {
        &self.antennas
    }

    pub fn antenna(&self, k: usize) -> &Antenna<T> {
        &self.antennas[k]
    }

    pub fn centers(&self) -> Vec<(usize, usize)> {
        self.antennas.iter().map(|a| a.center).collect()
    }

    pub(crate) fn fits(&self, grid: &Grid<T>) -> bool {
        self.nx == grid.nx() && self.ny == grid.ny()
    }

    /// `int gamma_k^2 dx dy`.
    pub fn self_overlap(&self, k: usize, grid: &Grid<T>) -> T {
        self.antennas[k].support.iter().map(|(_, g)| *g * *g).sum::<T>() * grid.cell_area()
    }

    /// Supports of two arrays must not intersect either.
    pub fn check_disjoint_from(&self, other: &Self) -> Result<()> {
        for (k, a) in self.antennas.iter().enumerate() {
            for (l, b) in other.antennas.iter().enumerate() {
                if a.support.iter().any(|(ia, _)| b.support.iter().any(|(ib, _)| ia == ib)) {
                    return Err(Error::Layout(format!(
                        "base antenna {k} overlaps user antenna {l}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn build_antenna<T: Real>(grid: &Grid<T>, center: (usize, usize), shape: AntennaShape) -> Result<Antenna<T>> {
    let (ci, cj) = center;
    if ci >= grid.nx() || cj >= grid.ny() {
        return Err(Error::Layout(format!("antenna center ({ci}, {cj}) is outside the grid")));
    }
    let area = grid.cell_area();
    let support = match shape {
        AntennaShape::Delta => vec![(grid.index(ci, cj), T::one() / area)],
        AntennaShape::Gaussian { width } => {
            if !(width > 0.0 && width.is_finite()) {
                return Err(Error::Config(format!("gaussian antenna width must be positive, got {width}")));
            }
            if ci == 0 || cj == 0 || ci + 1 >= grid.nx() || cj + 1 >= grid.ny() {
                return Err(Error::Layout(format!("gaussian antenna at ({ci}, {cj}) needs a full 3x3 stencil")));
            }
            let w = T::lit(width);
            let mut raw = Vec::with_capacity(9);
            for dj in -1i32..=1 {
                for di in -1i32..=1 {
                    let r2 = T::lit((di * di + dj * dj) as f64);
                    let v = (-(r2) / (T::lit(2.0) * w * w)).exp();
                    let idx = grid.index((ci as i32 + di) as usize, (cj as i32 + dj) as usize);
                    raw.push((idx, v));
                }
            }
            let total: T = raw.iter().map(|(_, v)| *v).sum::<T>() * area;
            raw.into_iter().map(|(i, v)| (i, v / total)).collect()
        }
    };
    Ok(Antenna { center, support })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid<f64> {
        Grid::new(12, 10, 0.5, 0.25, 0.05, 4).unwrap()
    }

    #[test]
    fn normalization() {
        let g = grid();
        for shape in [AntennaShape::Delta, AntennaShape::Gaussian { width: 0.8 }] {
            let a = AntennaArray::new(&g, &[(3, 3), (7, 6)], shape).unwrap();
            for ant in a.antennas() {
                let s: f64 = ant.support.iter().map(|(_, w)| *w).sum::<f64>() * g.cell_area();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_overlap_and_boundary() {
        let g = grid();
        let e = AntennaArray::new(&g, &[(3, 3), (4, 4)], AntennaShape::Gaussian { width: 1.0 }).unwrap_err();
        assert!(matches!(e, Error::Layout(ref m) if m.contains("0&1")));
        assert!(AntennaArray::new(&g, &[(0, 3)], AntennaShape::Delta).is_err());
        assert!(AntennaArray::new(&g, &[(3, 3), (3, 3)], AntennaShape::Delta).is_err());
        assert!(AntennaArray::unchecked(&g, &[(3, 3), (3, 3)], AntennaShape::Delta).is_ok());
    }

    #[test]
    fn delta_overlap_is_inverse_area() {
        let g = grid();
        let a = AntennaArray::new(&g, &[(3, 3)], AntennaShape::Delta).unwrap();
        assert!((a.self_overlap(0, &g) - 1.0 / g.cell_area()).abs() < 1e-12);
    }
}
