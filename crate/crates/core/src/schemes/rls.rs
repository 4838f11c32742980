use super::*;

/// Regularized least squares through `(A* A + lambda I) r = r~`, with
/// `r~ = T B T-hat s~` sent once by the user.
///
/// Per iteration: `s' = A r`, `r' = r~ - T B T-hat s' - lambda r`,
/// `s'' = A r'`, `r <- r + beta T B T-hat s'' + beta lambda r'`. Stops when
/// `||r'|| <= tol ||r~||`.
pub fn run_rls<T: Real>(
    s_tilde: &SignalSet<T>,
    ch: &dyn CommunicationChannel<T>,
    cfg: &SchemeConfig<T>,
) -> Result<(SignalSet<T>, SchemeTrace<T>)> {
    let lambda = lambda_of(cfg)?;
    if !(lambda >= T::zero()) {
        return Err(Error::Config(format!("lambda must be >= 0, got {lambda}")));
    }
    let ctx = Ctx::new(ch, s_tilde, cfg)?;
    let half = T::lit(0.5);
    let mut trace = SchemeTrace::new(SchemeKind::Rls, lambda);
    let mut guard = DivergenceGuard::new();
    let r_tilde = ctx.adj(s_tilde)?;
    let reference = norm_b(&r_tilde)?;
    let mut r = ch.zero_base();

    for n in 0..=cfg.max_iter {
        let s_half = ctx.a(&r)?;
        let mut rho = r_tilde.sub(&ctx.adj(&s_half)?)?;
        if lambda != T::zero() {
            rho.axpy(-lambda, &r)?;
        }
        let own = norm_b(&rho)?;
        let cost = half * own * own;
        let user_res = ctx.norm_u(&s_tilde.sub(&s_half)?)?;
        push_record(&mut trace, n, cost, user_res, norm_b(&r)?, &s_half);
        guard.observe(cost, cfg.beta_rule)?;

        if relative(own, reference) <= cfg.tol {
            trace.stop = StopReason::Tolerance;
            break;
        }
        if n == cfg.max_iter {
            trace.stop = StopReason::MaxIter;
            break;
        }
        let s_next = ctx.a(&rho)?;
        let mut d = ctx.adj(&s_next)?;
        if lambda != T::zero() {
            d.axpy(lambda, &rho)?;
        }
        if ip_b(&d, &d)? == T::zero() {
            trace.stop = StopReason::Stationary;
            break;
        }
        let beta = match cfg.beta_rule {
            BetaRule::Fixed(b) => b,
            BetaRule::ExactLineSearch => {
                let mut kd = ctx.adj(&ctx.a(&d)?)?;
                if lambda != T::zero() {
                    kd.axpy(lambda, &d)?;
                }
                let kk = ip_b(&kd, &kd)?;
                if !(kk > T::zero()) {
                    trace.stop = StopReason::Stationary;
                    break;
                }
                ip_b(&rho, &kd)? / kk
            }
        };
        set_beta(&mut trace, beta);
        r.axpy(beta, &d)?;
    }
    Ok((r, trace))
}
