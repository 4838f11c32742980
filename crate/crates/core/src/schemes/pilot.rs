use super::*;

/// Ideal user signal: `alpha` on channel `channel` of user `user`, zero
/// everywhere else. `template` fixes the user-side layout.
pub fn make_pilot<T: Real>(
    alpha: &[T],
    user: usize,
    channel: usize,
    template: &SignalSet<T>,
) -> Result<SignalSet<T>> {
    if user >= template.antennas() {
        return Err(Error::Config(format!(
            "user index {user} out of range for {} users",
            template.antennas()
        )));
    }
    if channel >= template.channel_count() {
        return Err(Error::Config(format!(
            "pilot channel {channel} out of range for {} channels",
            template.channel_count()
        )));
    }
    if alpha.len() != template.nt() {
        return Err(Error::Dimension(format!(
            "pilot has {} samples, expected {}",
            alpha.len(),
            template.nt()
        )));
    }
    let mut s = template.zeros_like();
    s.series_mut(user, channel).copy_from_slice(alpha);
    Ok(s)
}
