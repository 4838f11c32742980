use nalgebra::DMatrix;

use super::*;
use crate::dense::{assemble_a, signal_weights};

/// Singular spectrum of `A` between the weighted signal spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    /// Descending; one value per base-signal dimension (rank-deficient fat
    /// operators contribute exact zeros).
    pub singular_values: Vec<f64>,
    /// Count of singular values `<= 1e-8 sigma_max` (numerical `Z_0`).
    pub z0_dim: usize,
    /// Count of singular values `< eps sigma_max` (`Z_eps`).
    pub z_eps_dim: usize,
    pub eps: f64,
    /// Share of `||r||^2` lying in `Z_eps`, when a probe signal was given.
    pub energy_fraction: Option<f64>,
}

/// Assembles `A` explicitly and reports its near-null space. Fails with a
/// size error when `dim Z + dim Z-hat > max_dims`.
pub fn null_space_probe(
    ch: &dyn CommunicationChannel<f64>,
    eps: f64,
    r: Option<&SignalSet<f64>>,
    max_dims: usize,
) -> Result<ProbeReport> {
    let a = assemble_a(ch, max_dims)?;
    let wb = signal_weights(&ch.zero_base(), None);
    let wu = signal_weights(&ch.zero_users(), None);
    let (m, n) = (a.nrows(), a.ncols());
    // Orthonormal coordinates: A~ = W_u^1/2 A W_b^-1/2, padded to square
    // when fat so that the full right singular basis is available.
    let rows = m.max(n);
    let mut at = DMatrix::zeros(rows, n);
    for i in 0..m {
        for j in 0..n {
            at[(i, j)] = wu[i].sqrt() * a[(i, j)] / wb[j].sqrt();
        }
    }
    let svd = at.svd(false, true);
    let v_t = svd.v_t.as_ref().ok_or_else(|| Error::Config("SVD did not return V".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let z0_dim = singular_values.iter().filter(|s| **s <= 1e-8 * smax).count();
    let z_eps_dim = singular_values.iter().filter(|s| **s < eps * smax).count();

    let energy_fraction = match r {
        None => None,
        Some(r) => {
            ch.zero_base().check_layout(r)?;
            let rt: Vec<f64> = r.as_slice().iter().zip(&wb).map(|(x, w)| x * w.sqrt()).collect();
            let total: f64 = rt.iter().map(|x| x * x).sum();
            let mut inside = 0.0;
            for &i in &order {
                if svd.singular_values[i] < eps * smax {
                    let c: f64 = v_t.row(i).iter().zip(&rt).map(|(v, x)| v * x).sum();
                    inside += c * c;
                }
            }
            Some(if total > 0.0 { inside / total } else { 0.0 })
        }
    };
    Ok(ProbeReport { singular_values, z0_dim, z_eps_dim, eps, energy_fraction })
}
