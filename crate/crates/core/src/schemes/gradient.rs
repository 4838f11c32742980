use super::*;

/// Basic least-squares scheme: `r <- r + beta T B T-hat (s~ - A r)`.
///
/// Stops when `||s~ - A r|| <= tol ||s~||`.
pub fn run_gradient<T: Real>(
    s_tilde: &SignalSet<T>,
    ch: &dyn CommunicationChannel<T>,
    cfg: &SchemeConfig<T>,
) -> Result<(SignalSet<T>, SchemeTrace<T>)> {
    descend(s_tilde, ch, cfg, T::zero(), SchemeKind::Gradient)
}

/// Tikhonov-regularized scheme:
/// `r <- r + beta (T B T-hat (s~ - A r) - lambda r)`.
///
/// Stops when the normal-equation residual `||A*(s~ - A r) - lambda r||`
/// falls below `tol` times its initial value. With `lambda = 0` this is
/// exactly [`run_gradient`].
pub fn run_gradient_reg<T: Real>(
    s_tilde: &SignalSet<T>,
    ch: &dyn CommunicationChannel<T>,
    cfg: &SchemeConfig<T>,
) -> Result<(SignalSet<T>, SchemeTrace<T>)> {
    let lambda = lambda_of(cfg)?;
    if !(lambda >= T::zero()) {
        return Err(Error::Config(format!("lambda must be >= 0, got {lambda}")));
    }
    descend(s_tilde, ch, cfg, lambda, SchemeKind::GradientReg)
}

fn descend<T: Real>(
    s_tilde: &SignalSet<T>,
    ch: &dyn CommunicationChannel<T>,
    cfg: &SchemeConfig<T>,
    lambda: T,
    kind: SchemeKind,
) -> Result<(SignalSet<T>, SchemeTrace<T>)> {
    let ctx = Ctx::new(ch, s_tilde, cfg)?;
    let half = T::lit(0.5);
    let mut trace = SchemeTrace::new(kind, lambda);
    let mut guard = DivergenceGuard::new();
    let s_norm = ctx.norm_u(s_tilde)?;
    let mut d0 = None;
    let mut r = ch.zero_base();

    for n in 0..=cfg.max_iter {
        let ar = ctx.a(&r)?;
        let s = s_tilde.sub(&ar)?;
        let res = ctx.norm_u(&s)?;
        let r2 = ip_b(&r, &r)?;
        let cost = half * res * res + half * lambda * r2;
        push_record(&mut trace, n, cost, res, r2.max(T::zero()).sqrt(), &ar);
        guard.observe(cost, cfg.beta_rule)?;

        let mut d = ctx.adj(&s)?;
        if lambda != T::zero() {
            d.axpy(-lambda, &r)?;
        }
        let dd = ip_b(&d, &d)?;
        let d_norm = dd.max(T::zero()).sqrt();
        let rel = if lambda == T::zero() {
            relative(res, s_norm)
        } else {
            relative(d_norm, *d0.get_or_insert(d_norm))
        };
        if rel <= cfg.tol {
            trace.stop = StopReason::Tolerance;
            break;
        }
        if dd == T::zero() {
            trace.stop = StopReason::Stationary;
            break;
        }
        if n == cfg.max_iter {
            trace.stop = StopReason::MaxIter;
            break;
        }

        let beta = match cfg.beta_rule {
            BetaRule::Fixed(b) => b,
            BetaRule::ExactLineSearch => {
                let ad = ctx.a(&d)?;
                let curvature = ctx.ip_u(&ad, &ad)? + lambda * dd;
                if !(curvature > T::zero()) {
                    trace.stop = StopReason::Stationary;
                    break;
                }
                dd / curvature
            }
        };
        set_beta(&mut trace, beta);
        r.axpy(beta, &d)?;
    }
    Ok((r, trace))
}
