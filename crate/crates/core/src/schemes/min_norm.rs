use super::*;

/// Minimum-norm scheme: gradient iteration for `C s^ = s~` with `C = A A*`,
/// followed by `r_MN = T B T-hat s^`.
///
/// Per iteration: `r' = A* s^`, `s' = s~ - A r'`, `r'' = A* s'`,
/// `s^ <- s^ + beta A r''`. Stops when `||s~ - C s^|| <= tol ||s~||`.
pub fn run_min_norm<T: Real>(
    s_tilde: &SignalSet<T>,
    ch: &dyn CommunicationChannel<T>,
    cfg: &SchemeConfig<T>,
) -> Result<(SignalSet<T>, SchemeTrace<T>)> {
    ladder(s_tilde, ch, cfg, T::zero(), SchemeKind::MinNorm)
}

/// Regularized minimum-norm scheme for `(A A* + lambda I) s^ = s~`:
/// `s' = s~ - A r' - lambda s^`, `s^ <- s^ + beta A r'' + beta lambda s'`.
/// With `lambda = 0` this is exactly [`run_min_norm`].
pub fn run_min_norm_reg<T: Real>(
    s_tilde: &SignalSet<T>,
    ch: &dyn CommunicationChannel<T>,
    cfg: &SchemeConfig<T>,
) -> Result<(SignalSet<T>, SchemeTrace<T>)> {
    let lambda = lambda_of(cfg)?;
    if !(lambda >= T::zero()) {
        return Err(Error::Config(format!("lambda must be >= 0, got {lambda}")));
    }
    ladder(s_tilde, ch, cfg, lambda, SchemeKind::MinNormReg)
}

fn ladder<T: Real>(
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
    let reference = ctx.norm_u(s_tilde)?;
    let mut s_hat = ch.zero_users();
    let mut r_half;

    let mut n = 0;
    loop {
        r_half = ctx.adj(&s_hat)?;
        let ar = ctx.a(&r_half)?;
        let user_res = s_tilde.sub(&ar)?;
        let mut rho = user_res.clone();
        if lambda != T::zero() {
            rho.axpy(-lambda, &s_hat)?;
        }
        let own = ctx.norm_u(&rho)?;
        let cost = half * own * own;
        push_record(&mut trace, n, cost, ctx.norm_u(&user_res)?, norm_b(&r_half)?, &ar);
        guard.observe(cost, cfg.beta_rule)?;

        if relative(own, reference) <= cfg.tol {
            trace.stop = StopReason::Tolerance;
            break;
        }
        if n == cfg.max_iter {
            trace.stop = StopReason::MaxIter;
            break;
        }
        let r_next = ctx.adj(&rho)?;
        let mut d = ctx.a(&r_next)?;
        if lambda != T::zero() {
            d.axpy(lambda, &rho)?;
        }
        if ctx.ip_u(&d, &d)? == T::zero() {
            trace.stop = StopReason::Stationary;
            break;
        }
        let beta = match cfg.beta_rule {
            BetaRule::Fixed(b) => b,
            BetaRule::ExactLineSearch => {
                let mut kd = ctx.a(&ctx.adj(&d)?)?;
                if lambda != T::zero() {
                    kd.axpy(lambda, &d)?;
                }
                let kk = ctx.ip_u(&kd, &kd)?;
                if !(kk > T::zero()) {
                    trace.stop = StopReason::Stationary;
                    break;
                }
                ctx.ip_u(&rho, &kd)? / kk
            }
        };
        set_beta(&mut trace, beta);
        s_hat.axpy(beta, &d)?;
        n += 1;
    }
    Ok((r_half, trace))
}
