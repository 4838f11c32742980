use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::physics::{face_couplings, Axis, PhysicsKind, CHANNELS};
use crate::scalar::Real;

/// Per-cell coefficient fields of `Gamma` and `Phi`.
///
/// `inertia` is `rho` (acoustic) or `mu` (Maxwell), `compliance` is `kappa` or
/// `eps`, and `loss` is `sigma` (always zero for acoustics). Face channels use
/// the arithmetic mean of `inertia` over the two cells sharing the face.
#[derive(Debug, Clone, PartialEq)]
pub struct Medium<T> {
    kind: PhysicsKind,
    nx: usize,
    ny: usize,
    inertia: Vec<T>,
    compliance: Vec<T>,
    loss: Vec<T>,
    gamma: [Vec<T>; CHANNELS],
    c_max: T,
}

impl<T: Real> Medium<T> {
    pub fn acoustic(nx: usize, ny: usize, rho: Vec<T>, kappa: Vec<T>) -> Result<Self> {
        let zeros = vec![T::zero(); nx * ny];
        Self::build(PhysicsKind::Acoustic2D, nx, ny, rho, kappa, zeros)
    }

    pub fn maxwell_tm(nx: usize, ny: usize, eps: Vec<T>, mu: Vec<T>, sigma: Vec<T>) -> Result<Self> {
        Self::build(PhysicsKind::MaxwellTm2D, nx, ny, mu, eps, sigma)
    }

    /// Uniform medium with wave speed `c`, unit inertia (`rho = 1` or `mu = 1`)
    /// and `compliance = 1 / c^2`.
    pub fn homogeneous(kind: PhysicsKind, grid: &Grid<T>, c: T) -> Result<Self> {
        Self::homogeneous_lossy(kind, grid, c, T::zero())
    }

    pub fn homogeneous_lossy(kind: PhysicsKind, grid: &Grid<T>, c: T, sigma: T) -> Result<Self> {
        let n = grid.cells();
        let inertia = vec![T::one(); n];
        let compliance = vec![T::one() / (c * c); n];
        let loss = vec![sigma; n];
        if kind == PhysicsKind::Acoustic2D && sigma != T::zero() {
            return Err(Error::Config("acoustic media carry no loss term".into()));
        }
        Self::build(kind, grid.nx(), grid.ny(), inertia, compliance, loss)
    }

    pub(crate) fn build(
        kind: PhysicsKind,
        nx: usize,
        ny: usize,
        inertia: Vec<T>,
        compliance: Vec<T>,
        loss: Vec<T>,
    ) -> Result<Self> {
        let n = nx * ny;
        if inertia.len() != n || compliance.len() != n || loss.len() != n {
            return Err(Error::Dimension(format!(
                "medium arrays must have {n} entries (got {}, {}, {})",
                inertia.len(),
                compliance.len(),
                loss.len()
            )));
        }
        let bad = |v: &T| !(v.is_finite() && *v > T::zero());
        if inertia.iter().any(bad) || compliance.iter().any(bad) {
            return Err(Error::Config("Gamma must be uniformly positive definite".into()));
        }
        if loss.iter().any(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(Error::Config("Phi must be positive semi-definite".into()));
        }
        if kind == PhysicsKind::Acoustic2D && loss.iter().any(|v| *v != T::zero()) {
            return Err(Error::Config("acoustic media carry no loss term".into()));
        }

        let half = T::lit(0.5);
        let couplings = face_couplings(kind);
        let face = |axis: Axis| -> Vec<T> {
            (0..n)
                .map(|idx| {
                    let (i, j) = (idx % nx, idx / nx);
                    let nb = match axis {
                        Axis::X if i + 1 < nx => idx + 1,
                        Axis::Y if j + 1 < ny => idx + nx,
                        _ => idx,
                    };
                    half * (inertia[idx] + inertia[nb])
                })
                .collect()
        };
        let gamma = [face(couplings[0].axis), face(couplings[1].axis), compliance.clone()];

        // Largest local speed over every (center, adjacent face) pair.
        let mut c_max = T::zero();
        for j in 0..ny {
            for i in 0..nx {
                let idx = j * nx + i;
                let mut faces = Vec::with_capacity(4);
                for (ch, cp) in couplings.iter().enumerate() {
                    faces.push(gamma[ch][idx]);
                    let prev = match cp.axis {
                        Axis::X if i > 0 => Some(idx - 1),
                        Axis::Y if j > 0 => Some(idx - nx),
                        _ => None,
                    };
                    if let Some(p) = prev {
                        faces.push(gamma[ch][p]);
                    }
                }
                for f in faces {
                    let c = T::one() / (compliance[idx] * f).sqrt();
                    if c > c_max {
                        c_max = c;
                    }
                }
            }
        }

        Ok(Self { kind, nx, ny, inertia, compliance, loss, gamma, c_max })
    }

    pub fn kind(&self) -> PhysicsKind {
        self.kind
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Diagonal of `Gamma` for `channel`, one entry per cell.
    pub fn gamma(&self, channel: usize) -> &[T] {
        &self.gamma[channel]
    }

    /// Diagonal of `Phi` for `channel`; only the center channel can be lossy.
    pub fn phi(&self, channel: usize) -> Option<&[T]> {
        (channel == 2).then_some(&self.loss[..])
    }

    pub fn is_lossless(&self) -> bool {
        self.loss.iter().all(|s| *s == T::zero())
    }

    /// `rho` or `mu`, per cell.
    pub fn inertia(&self) -> &[T] {
        &self.inertia
    }

    /// `kappa` or `eps`, per cell.
    pub fn compliance(&self) -> &[T] {
        &self.compliance
    }

    /// `sigma`, per cell.
    pub fn loss(&self) -> &[T] {
        &self.loss
    }

    pub fn c_max(&self) -> T {
        self.c_max
    }

    pub fn min_gamma(&self) -> T {
        self.gamma
            .iter()
            .flat_map(|g| g.iter().copied())
            .fold(T::infinity(), T::min)
    }

    pub(crate) fn matches(&self, grid: &Grid<T>) -> bool {
        self.nx == grid.nx() && self.ny == grid.ny()
    }
}
