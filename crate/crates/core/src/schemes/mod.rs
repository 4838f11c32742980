//! Iterative time-reversal schemes for the inverse problem of communication:
//! find base signals `r` with `A r = s~`.
//!
//! Every scheme sees the physical channel only through
//! [`CommunicationChannel`]: one forward experiment (`A`) and one
//! time-reversal experiment (`A* = T B T-hat`) per operator application.

mod gradient;
mod min_norm;
mod noise;
mod pilot;
mod probe;
mod rls;

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt17;
use crate::ops::CommunicationChannel;
use crate::scalar::Real;
use crate::signal::{antenna_energies, inner_product_signals, SignalSet};

pub use gradient::{run_gradient, run_gradient_reg};
pub use min_norm::{run_min_norm, run_min_norm_reg};
pub use noise::NoisyChannel;
pub use pilot::make_pilot;
pub use probe::{null_space_probe, ProbeReport};
pub use rls::run_rls;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Gradient,
    GradientReg,
    MinNorm,
    MinNormReg,
    Rls,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] =
        [Self::Gradient, Self::GradientReg, Self::MinNorm, Self::MinNormReg, Self::Rls];

    pub fn is_regularized(self) -> bool {
        matches!(self, Self::GradientReg | Self::MinNormReg | Self::Rls)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaRule<T> {
    Fixed(T),
    ExactLineSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig<T> {
    pub scheme: SchemeKind,
    pub beta_rule: BetaRule<T>,
    /// Regularization weight; `None` picks `1e-2 ||A||^2` from a power
    /// estimate.
    pub lambda: Option<T>,
    pub max_iter: usize,
    pub tol: T,
    /// Per-user weights of the user-side inner product.
    pub user_weights: Option<Vec<T>>,
}

impl<T: Real> Default for SchemeConfig<T> {
    fn default() -> Self {
        Self {
            scheme: SchemeKind::Gradient,
            beta_rule: BetaRule::ExactLineSearch,
            lambda: None,
            max_iter: 50,
            tol: T::lit(1e-3),
            user_weights: None,
        }
    }
}

impl<T: Real> SchemeConfig<T> {
    pub fn new(scheme: SchemeKind) -> Self {
        Self { scheme, ..Self::default() }
    }

    /// Full check used before dispatch: regularized schemes need `lambda > 0`.
    pub fn validate(&self) -> Result<()> {
        self.validate_numbers()?;
        if self.scheme.is_regularized() && self.lambda == Some(T::zero()) {
            return Err(Error::Config(format!("{:?} needs lambda > 0", self.scheme)));
        }
        Ok(())
    }

    /// Checks ranges only; `lambda = 0` is accepted so that the regularized
    /// runners can reproduce their unregularized counterparts.
    pub fn validate_numbers(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if let Some(l) = self.lambda {
            if !(l >= T::zero() && l.is_finite()) {
                return Err(Error::Config(format!("lambda must be >= 0, got {l}")));
            }
        }
        if let BetaRule::Fixed(b) = self.beta_rule {
            if !(b > T::zero() && b.is_finite()) {
                return Err(Error::Config(format!("fixed beta must be positive, got {b}")));
            }
        }
        if let Some(w) = &self.user_weights {
            if w.iter().any(|v| !(*v >= T::zero() && v.is_finite())) {
                return Err(Error::Config("user weights must be finite and >= 0".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Relative residual of the scheme's own equation fell below `tol`.
    Tolerance,
    /// The search direction vanished exactly.
    Stationary,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord<T> {
    pub iter: usize,
    /// Objective the scheme descends on.
    pub cost: T,
    /// `||A r - s~||` for the current base iterate.
    pub residual: T,
    /// `||r||_Z`.
    pub base_energy: T,
    /// Step taken from this iterate; `None` for the last record.
    pub beta: Option<T>,
    /// `int |(A r)_j|^2 dt` per user.
    pub user_energies: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeTrace<T> {
    pub scheme: SchemeKind,
    pub lambda: T,
    pub records: Vec<IterationRecord<T>>,
    pub stop: StopReason,
}

impl<T: Real> SchemeTrace<T> {
    fn new(scheme: SchemeKind, lambda: T) -> Self {
        Self { scheme, lambda, records: Vec::new(), stop: StopReason::MaxIter }
    }

    pub fn converged(&self) -> bool {
        self.stop != StopReason::MaxIter
    }

    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn costs(&self) -> Vec<T> {
        self.records.iter().map(|r| r.cost).collect()
    }

    pub fn last(&self) -> Option<&IterationRecord<T>> {
        self.records.last()
    }

    /// CSV with header `iter,cost,residual,base_energy,beta,user1_energy,...`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let users = self.records.first().map_or(0, |r| r.user_energies.len());
        let mut header = String::from("iter,cost,residual,base_energy,beta");
        for j in 1..=users {
            header.push_str(&format!(",user{j}_energy"));
        }
        writeln!(w, "{header}")?;
        for r in &self.records {
            let mut line = format!(
                "{},{},{},{},{}",
                r.iter,
                fmt17(r.cost),
                fmt17(r.residual),
                fmt17(r.base_energy),
                r.beta.map(fmt17).unwrap_or_default()
            );
            for e in &r.user_energies {
                line.push(',');
                line.push_str(&fmt17(*e));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Operator access plus the user-side weighting.
struct Ctx<'a, T: Real> {
    ch: &'a dyn CommunicationChannel<T>,
    weights: Option<Vec<T>>,
}

impl<'a, T: Real> Ctx<'a, T> {
    fn new(ch: &'a dyn CommunicationChannel<T>, s_tilde: &SignalSet<T>, cfg: &SchemeConfig<T>) -> Result<Self> {
        cfg.validate_numbers()?;
        ch.zero_users().check_layout(s_tilde)?;
        if let Some(w) = &cfg.user_weights {
            if w.len() != s_tilde.antennas() {
                return Err(Error::Config(format!(
                    "{} user weights for {} users",
                    w.len(),
                    s_tilde.antennas()
                )));
            }
        }
        Ok(Self { ch, weights: cfg.user_weights.clone() })
    }

    fn a(&self, r: &SignalSet<T>) -> Result<SignalSet<T>> {
        self.ch.apply_a(r)
    }

    /// Adjoint of `A` for the weighted user inner product: `A* W s`.
    fn adj(&self, s: &SignalSet<T>) -> Result<SignalSet<T>> {
        match &self.weights {
            Some(w) => self.ch.apply_a_star(&s.antenna_weighted(w)?),
            None => self.ch.apply_a_star(s),
        }
    }

    fn ip_u(&self, a: &SignalSet<T>, b: &SignalSet<T>) -> Result<T> {
        inner_product_signals(a, b, self.weights.as_deref())
    }

    fn norm_u(&self, a: &SignalSet<T>) -> Result<T> {
        Ok(self.ip_u(a, a)?.max(T::zero()).sqrt())
    }
}

fn ip_b<T: Real>(a: &SignalSet<T>, b: &SignalSet<T>) -> Result<T> {
    inner_product_signals(a, b, None)
}

fn norm_b<T: Real>(a: &SignalSet<T>) -> Result<T> {
    Ok(ip_b(a, a)?.max(T::zero()).sqrt())
}

fn relative<T: Real>(x: T, reference: T) -> T {
    if reference > T::zero() {
        x / reference
    } else {
        T::zero()
    }
}

/// Raises the step-size error once the cost has risen three times in a row
/// under a fixed step.
struct DivergenceGuard<T> {
    last: Option<T>,
    rises: usize,
}

impl<T: Real> DivergenceGuard<T> {
    fn new() -> Self {
        Self { last: None, rises: 0 }
    }

    fn observe(&mut self, cost: T, rule: BetaRule<T>) -> Result<()> {
        if let Some(prev) = self.last {
            self.rises = if cost > prev { self.rises + 1 } else { 0 };
        }
        self.last = Some(cost);
        if let BetaRule::Fixed(beta) = rule {
            if self.rises >= 3 {
                return Err(Error::StepSize { consecutive: self.rises, beta: beta.as_f64() });
            }
        }
        Ok(())
    }
}

fn push_record<T: Real>(
    trace: &mut SchemeTrace<T>,
    iter: usize,
    cost: T,
    residual: T,
    base_energy: T,
    received: &SignalSet<T>,
) {
    trace.records.push(IterationRecord {
        iter,
        cost,
        residual,
        base_energy,
        beta: None,
        user_energies: antenna_energies(received),
    });
}

fn set_beta<T: Real>(trace: &mut SchemeTrace<T>, beta: T) {
    if let Some(r) = trace.records.last_mut() {
        r.beta = Some(beta);
    }
}

/// `||A||` estimated by `steps` power iterations on `A* W A` from a seeded
/// random start.
pub fn estimate_operator_norm<T: Real>(
    ch: &dyn CommunicationChannel<T>,
    user_weights: Option<&[T]>,
    steps: usize,
    seed: u64,
) -> Result<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = ch.zero_base();
    x.as_mut_slice().iter_mut().for_each(|v| *v = T::lit(rng.random_range(-1.0..1.0)));
    let mut estimate = T::zero();
    for _ in 0..steps.max(1) {
        let nx = norm_b(&x)?;
        if nx == T::zero() {
            return Ok(T::zero());
        }
        x.scale(T::one() / nx);
        let ax = ch.apply_a(&x)?;
        let wax = match user_weights {
            Some(w) => ax.antenna_weighted(w)?,
            None => ax,
        };
        let y = ch.apply_a_star(&wax)?;
        estimate = norm_b(&y)?;
        x = y;
    }
    Ok(estimate.sqrt())
}

/// `1e-2 ||A||^2` with a 10-step power estimate.
pub fn default_lambda<T: Real>(ch: &dyn CommunicationChannel<T>, user_weights: Option<&[T]>) -> Result<T> {
    let n = estimate_operator_norm(ch, user_weights, 10, 0x1a3b_d5)?;
    Ok(T::lit(1e-2) * n * n)
}

/// Runs the scheme selected in `cfg`, resolving a missing `lambda` first.
pub fn solve<T: Real>(
    s_tilde: &SignalSet<T>,
    ch: &dyn CommunicationChannel<T>,
    cfg: &SchemeConfig<T>,
) -> Result<(SignalSet<T>, SchemeTrace<T>)> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    if cfg.scheme.is_regularized() && cfg.lambda.is_none() {
        cfg.lambda = Some(default_lambda(ch, cfg.user_weights.as_deref())?);
    }
    match cfg.scheme {
        SchemeKind::Gradient => run_gradient(s_tilde, ch, &cfg),
        SchemeKind::GradientReg => run_gradient_reg(s_tilde, ch, &cfg),
        SchemeKind::MinNorm => run_min_norm(s_tilde, ch, &cfg),
        SchemeKind::MinNormReg => run_min_norm_reg(s_tilde, ch, &cfg),
        SchemeKind::Rls => run_rls(s_tilde, ch, &cfg),
    }
}

fn lambda_of<T: Real>(cfg: &SchemeConfig<T>) -> Result<T> {
    cfg.lambda
        .ok_or_else(|| Error::Config(format!("{:?} needs an explicit lambda here", cfg.scheme)))
}

#[cfg(test)]
mod tests;
