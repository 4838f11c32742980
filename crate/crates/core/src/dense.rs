//! Explicit matrices of the communication operator for small problems.
//!
//! Signals are flattened in storage order. With `W_b`, `W_u` the diagonal
//! quadrature weights of the base and user signal spaces, the adjoint of `A`
//! is `W_b^-1 A^T W_u`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::trapezoid_weights;
use crate::ops::CommunicationChannel;
use crate::signal::SignalSet;

/// Default ceiling on `dim Z + dim Z-hat` for explicit assembly.
pub const DEFAULT_MAX_DIMS: usize = 4096;

/// Diagonal quadrature weights of a signal space, optionally scaled per
/// antenna.
pub fn signal_weights(template: &SignalSet<f64>, antenna_weights: Option<&[f64]>) -> Vec<f64> {
    let tw = trapezoid_weights(template.nt(), template.dt());
    let per = template.channel_count() * template.nt();
    (0..template.len())
        .map(|i| antenna_weights.map_or(1.0, |w| w[i / per]) * tw[i % template.nt()])
        .collect()
}

pub fn to_vector(s: &SignalSet<f64>) -> DVector<f64> {
    DVector::from_column_slice(s.as_slice())
}

pub fn from_vector(template: &SignalSet<f64>, v: &DVector<f64>) -> SignalSet<f64> {
    let mut s = template.zeros_like();
    s.as_mut_slice().copy_from_slice(v.as_slice());
    s
}

fn check_size(channel: &dyn CommunicationChannel<f64>, max_dims: usize) -> Result<(usize, usize)> {
    let n = channel.zero_base().len();
    let m = channel.zero_users().len();
    if n + m > max_dims {
        return Err(Error::Size { dims: n + m, limit: max_dims });
    }
    Ok((m, n))
}

/// `A` assembled column by column from unit base signals.
pub fn assemble_a(channel: &dyn CommunicationChannel<f64>, max_dims: usize) -> Result<DMatrix<f64>> {
    let (m, n) = check_size(channel, max_dims)?;
    let template = channel.zero_base();
    let mut a = DMatrix::zeros(m, n);
    for j in 0..n {
        let mut e = template.clone();
        e.as_mut_slice()[j] = 1.0;
        let col = channel.apply_a(&e)?;
        a.column_mut(j).copy_from_slice(col.as_slice());
    }
    Ok(a)
}

/// `A*` assembled column by column from unit user signals.
pub fn assemble_a_star(channel: &dyn CommunicationChannel<f64>, max_dims: usize) -> Result<DMatrix<f64>> {
    let (m, n) = check_size(channel, max_dims)?;
    let template = channel.zero_users();
    let mut a = DMatrix::zeros(n, m);
    for j in 0..m {
        let mut e = template.clone();
        e.as_mut_slice()[j] = 1.0;
        let col = channel.apply_a_star(&e)?;
        a.column_mut(j).copy_from_slice(col.as_slice());
    }
    Ok(a)
}

/// `W_b^-1 A^T W_u`.
pub fn weighted_transpose(a: &DMatrix<f64>, base_weights: &[f64], user_weights: &[f64]) -> DMatrix<f64> {
    let mut t = a.transpose();
    for (i, mut row) in t.row_iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= user_weights[j] / base_weights[i];
        }
    }
    t
}

/// Result of comparing an assembled adjoint with the weighted transpose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointReport {
    pub rows: usize,
    pub cols: usize,
    /// Largest entrywise difference divided by the largest entry of `A`.
    pub relative_discrepancy: f64,
}

/// Assembles `A` and `A*` and compares `A*` with `W_b^-1 A^T W_u`.
pub fn adjoint_report(channel: &dyn CommunicationChannel<f64>, max_dims: usize) -> Result<(DMatrix<f64>, AdjointReport)> {
    let a = assemble_a(channel, max_dims)?;
    let a_star = assemble_a_star(channel, max_dims)?;
    let wb = signal_weights(&channel.zero_base(), None);
    let wu = signal_weights(&channel.zero_users(), None);
    let expected = weighted_transpose(&a, &wb, &wu);
    let scale = expected.amax().max(a.amax());
    let diff = (&a_star - &expected).amax();
    let relative_discrepancy = if scale > 0.0 { diff / scale } else { diff };
    Ok((a.clone(), AdjointReport { rows: a.nrows(), cols: a.ncols(), relative_discrepancy }))
}

/// A communication channel given by an explicit matrix.
#[derive(Debug, Clone)]
pub struct DenseChannel {
    a: DMatrix<f64>,
    a_star: DMatrix<f64>,
    base: SignalSet<f64>,
    users: SignalSet<f64>,
}

impl DenseChannel {
    /// `a` maps flattened base signals to flattened user signals; the adjoint
    /// is formed from the quadrature weights of the two templates.
    pub fn new(a: DMatrix<f64>, base: SignalSet<f64>, users: SignalSet<f64>) -> Result<Self> {
        if a.nrows() != users.len() || a.ncols() != base.len() {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but signal spaces have {} and {} entries",
                a.nrows(),
                a.ncols(),
                users.len(),
                base.len()
            )));
        }
        let a_star = weighted_transpose(&a, &signal_weights(&base, None), &signal_weights(&users, None));
        Ok(Self { a, a_star, base: base.zeros_like(), users: users.zeros_like() })
    }

    pub fn from_channel(channel: &dyn CommunicationChannel<f64>, max_dims: usize) -> Result<Self> {
        Self::new(assemble_a(channel, max_dims)?, channel.zero_base(), channel.zero_users())
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn adjoint_matrix(&self) -> &DMatrix<f64> {
        &self.a_star
    }
}

impl CommunicationChannel<f64> for DenseChannel {
    fn apply_a(&self, r: &SignalSet<f64>) -> Result<SignalSet<f64>> {
        self.base.check_layout(r)?;
        Ok(from_vector(&self.users, &(&self.a * to_vector(r))))
    }
    fn apply_a_star(&self, s: &SignalSet<f64>) -> Result<SignalSet<f64>> {
        self.users.check_layout(s)?;
        Ok(from_vector(&self.base, &(&self.a_star * to_vector(s))))
    }
    fn zero_base(&self) -> SignalSet<f64> {
        self.base.clone()
    }
    fn zero_users(&self) -> SignalSet<f64> {
        self.users.clone()
    }
}
