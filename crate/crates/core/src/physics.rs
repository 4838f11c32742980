//! The two 2D symmetric hyperbolic systems and their time-reversal sign masks.
//!
//! Both reductions carry three channels. Channels 0 and 1 live on cell faces
//! (velocity or magnetic field), channel 2 at cell centers (pressure or `E_z`).

use serde::{Deserialize, Serialize};

/// Number of field channels in both 2D reductions.
pub const CHANNELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhysicsKind {
    /// `(v_x, v_y, p)` with `Gamma = diag(rho, rho, kappa)`, `Phi = 0`.
    #[serde(rename = "acoustic")]
    Acoustic2D,
    /// TM mode `(H_x, H_y, E_z)` with `Gamma = diag(mu, mu, eps)`, `Phi = diag(0, 0, sigma)`.
    #[serde(rename = "maxwell_tm")]
    MaxwellTm2D,
}

/// Which field group flips sign under time reversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReversalConvention {
    /// Acoustic: velocities flip. Maxwell: the electric field flips.
    #[default]
    Standard,
    /// Maxwell: the magnetic field flips and `E` is kept. For acoustics this
    /// flips pressure instead of velocity.
    Alternative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

/// Spatial coupling of a face channel to the center channel: the face channel
/// sits on faces normal to `axis` and its equation contains `sign * d/d(axis)`
/// of the center channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceCoupling {
    pub axis: Axis,
    pub sign: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Physics {
    kind: PhysicsKind,
    convention: ReversalConvention,
    mask_override: Option<[i8; CHANNELS]>,
}

impl Physics {
    pub fn new(kind: PhysicsKind) -> Self {
        Self { kind, convention: ReversalConvention::Standard, mask_override: None }
    }

    pub fn acoustic() -> Self {
        Self::new(PhysicsKind::Acoustic2D)
    }

    pub fn maxwell_tm() -> Self {
        Self::new(PhysicsKind::MaxwellTm2D)
    }

    pub fn with_convention(mut self, convention: ReversalConvention) -> Self {
        self.convention = convention;
        self
    }

    /// Replaces the sign mask used by the mirrors. Only meant for mutation
    /// tests of the verification suite.
    #[doc(hidden)]
    pub fn with_sign_mask_override(mut self, mask: [i8; CHANNELS]) -> Self {
        self.mask_override = Some(mask);
        self
    }

    pub fn kind(&self) -> PhysicsKind {
        self.kind
    }

    pub fn convention(&self) -> ReversalConvention {
        self.convention
    }

    pub fn channel_count(&self) -> usize {
        CHANNELS
    }

    /// Per-channel sign applied by `S`, `T` and `T-hat`.
    pub fn sign_mask(&self) -> [i8; CHANNELS] {
        if let Some(m) = self.mask_override {
            return m;
        }
        let standard = match self.kind {
            PhysicsKind::Acoustic2D => [-1, -1, 1],
            PhysicsKind::MaxwellTm2D => [1, 1, -1],
        };
        match self.convention {
            ReversalConvention::Standard => standard,
            ReversalConvention::Alternative => standard.map(|s| -s),
        }
    }

    pub fn channel_names(&self) -> [&'static str; CHANNELS] {
        channel_names(self.kind)
    }

    /// Index of the scalar (center) channel: `p` or `E_z`.
    pub fn scalar_channel(&self) -> usize {
        2
    }
}

pub fn channel_names(kind: PhysicsKind) -> [&'static str; CHANNELS] {
    match kind {
        PhysicsKind::Acoustic2D => ["v_x", "v_y", "p"],
        PhysicsKind::MaxwellTm2D => ["H_x", "H_y", "E_z"],
    }
}

/// Couplings of channels 0 and 1.
///
/// Acoustic: `rho dv_x/dt + dp/dx`, `rho dv_y/dt + dp/dy`, `kappa dp/dt + div v`.
/// Maxwell TM: `mu dH_x/dt + dE_z/dy`, `mu dH_y/dt - dE_z/dx`,
/// `eps dE_z/dt - (dH_y/dx - dH_x/dy) + sigma E_z`.
pub fn face_couplings(kind: PhysicsKind) -> [FaceCoupling; 2] {
    match kind {
        PhysicsKind::Acoustic2D => [
            FaceCoupling { axis: Axis::X, sign: 1 },
            FaceCoupling { axis: Axis::Y, sign: 1 },
        ],
        PhysicsKind::MaxwellTm2D => [
            FaceCoupling { axis: Axis::Y, sign: 1 },
            FaceCoupling { axis: Axis::X, sign: -1 },
        ],
    }
}
