use std::cell::RefCell;

use rand_distr::{Distribution, Normal};

use super::*;

/// Adds seeded white Gaussian noise to every signal the channel measures.
pub struct NoisyChannel<'a, T> {
    inner: &'a dyn CommunicationChannel<T>,
    normal: Normal<f64>,
    rng: RefCell<ChaCha8Rng>,
}

impl<'a, T: Real> NoisyChannel<'a, T> {
    pub fn new(inner: &'a dyn CommunicationChannel<T>, std_dev: T, seed: u64) -> Result<Self> {
        let normal = Normal::new(0.0, std_dev.as_f64())
            .map_err(|e| Error::Config(format!("noise level {std_dev}: {e}")))?;
        Ok(Self { inner, normal, rng: RefCell::new(ChaCha8Rng::seed_from_u64(seed)) })
    }

    fn perturb(&self, mut s: SignalSet<T>) -> SignalSet<T> {
        let mut rng = self.rng.borrow_mut();
        for v in s.as_mut_slice() {
            *v += T::lit(self.normal.sample(&mut *rng));
        }
        s
    }
}

impl<T: Real> CommunicationChannel<T> for NoisyChannel<'_, T> {
    fn apply_a(&self, r: &SignalSet<T>) -> Result<SignalSet<T>> {
        Ok(self.perturb(self.inner.apply_a(r)?))
    }
    fn apply_a_star(&self, s: &SignalSet<T>) -> Result<SignalSet<T>> {
        Ok(self.perturb(self.inner.apply_a_star(s)?))
    }
    fn zero_base(&self) -> SignalSet<T> {
        self.inner.zero_base()
    }
    fn zero_users(&self) -> SignalSet<T> {
        self.inner.zero_users()
    }
}
