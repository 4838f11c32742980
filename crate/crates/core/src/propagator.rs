//! Explicit two-step leapfrog on the Yee-staggered grid.
//!
//! All three channels are held at every integer time level and advanced by
//!
//! ```text
//! (Gamma + dt Phi) u[n+1] = (Gamma - dt Phi) u[n-1] - 2 dt L u[n] + 2 dt w[n] q[n]
//! ```
//!
//! with `u[-1] = u[0] = 0`, `w[0] = 1/2` and `w[n] = 1` otherwise. `L` is the
//! skew-symmetric staggered difference operator under zero-Dirichlet
//! conditions; the boundary ring is never updated. The adjoint is the exact
//! reverse traversal of this recursion, and with trapezoidal time weights it
//! coincides with `Gamma^-1 S F S Gamma`.

use crate::error::{Error, Result};
use crate::field::{FieldMovie, MovieKind};
use crate::grid::{trapezoid_weights, Grid};
use crate::medium::Medium;
use crate::physics::{face_couplings, Axis, Physics, CHANNELS};
use crate::reversal::time_reverse_field;
use crate::scalar::{pairwise_sum_by, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig<T> {
    /// Largest admissible Courant number `c_max 2 dt / min(dx, dy)`.
    pub cfl: T,
    /// Print `step i/nt` to standard error.
    pub progress: bool,
}

impl<T: Real> Default for StepperConfig<T> {
    fn default() -> Self {
        Self { cfl: T::FRAC_1_SQRT_2(), progress: false }
    }
}

impl<T: Real> StepperConfig<T> {
    pub fn with_cfl(cfl: T) -> Self {
        Self { cfl, progress: false }
    }
}

/// Source term delivered one time level at a time as `(frame offset, value)`
/// pairs; unvisited entries are zero.
pub trait Forcing<T> {
    fn visit(&self, n: usize, f: &mut dyn FnMut(usize, T));
}

/// Receives computed frames. Frames may arrive in any order.
pub trait Recorder<T> {
    fn record(&mut self, n: usize, frame: &[T]) -> Result<()>;
}

/// No source at all.
pub struct NoForcing;

impl<T> Forcing<T> for NoForcing {
    fn visit(&self, _: usize, _: &mut dyn FnMut(usize, T)) {}
}

impl<T: Real> Forcing<T> for FieldMovie<T> {
    fn visit(&self, n: usize, f: &mut dyn FnMut(usize, T)) {
        for (e, v) in self.frame(n).iter().enumerate() {
            if *v != T::zero() {
                f(e, *v);
            }
        }
    }
}

/// Forcing active only before step `until`.
pub struct Truncated<'a, T> {
    pub inner: &'a dyn Forcing<T>,
    pub until: usize,
}

impl<T> Forcing<T> for Truncated<'_, T> {
    fn visit(&self, n: usize, f: &mut dyn FnMut(usize, T)) {
        if n < self.until {
            self.inner.visit(n, f);
        }
    }
}

/// Stores every frame into a movie.
pub struct MovieRecorder<T> {
    pub movie: FieldMovie<T>,
}

impl<T: Real> Recorder<T> for MovieRecorder<T> {
    fn record(&mut self, n: usize, frame: &[T]) -> Result<()> {
        self.movie.frame_mut(n).copy_from_slice(frame);
        Ok(())
    }
}

impl<T, F: FnMut(usize, &[T]) -> Result<()>> Recorder<T> for F {
    fn record(&mut self, n: usize, frame: &[T]) -> Result<()> {
        self(n, frame)
    }
}

/// Sends every frame to two recorders.
pub struct Tee<'a, T>(pub &'a mut dyn Recorder<T>, pub &'a mut dyn Recorder<T>);

impl<T> Recorder<T> for Tee<'_, T> {
    fn record(&mut self, n: usize, frame: &[T]) -> Result<()> {
        self.0.record(n, frame)?;
        self.1.record(n, frame)
    }
}

/// Tracks the largest energy found in the cells next to the boundary ring
/// relative to the largest total energy.
pub struct BoundaryMonitor<'a, T: Real> {
    medium: &'a Medium<T>,
    grid: &'a Grid<T>,
    pub peak_total: T,
    pub peak_boundary: T,
}

impl<'a, T: Real> BoundaryMonitor<'a, T> {
    pub fn new(medium: &'a Medium<T>, grid: &'a Grid<T>) -> Self {
        Self { medium, grid, peak_total: T::zero(), peak_boundary: T::zero() }
    }

    pub fn ratio(&self) -> T {
        if self.peak_total > T::zero() {
            self.peak_boundary / self.peak_total
        } else {
            T::zero()
        }
    }
}

impl<T: Real> Recorder<T> for BoundaryMonitor<'_, T> {
    fn record(&mut self, _: usize, frame: &[T]) -> Result<()> {
        let dens = crate::diagnostics::frame_density(frame, self.medium);
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut total = T::zero();
        let mut edge = T::zero();
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let e = dens[j * nx + i];
                total += e;
                if i == 1 || j == 1 || i == nx - 2 || j == ny - 2 {
                    edge += e;
                }
            }
        }
        self.peak_total = self.peak_total.max(total);
        self.peak_boundary = self.peak_boundary.max(edge);
        Ok(())
    }
}

/// Precomputed update coefficients for one grid and medium.
pub struct Propagator<'a, T: Real> {
    grid: &'a Grid<T>,
    cfg: StepperConfig<T>,
    courant: T,
    plane: usize,
    /// `(Gamma - dt Phi) / (Gamma + dt Phi)`, zero on the ring.
    a: Vec<T>,
    /// `2 dt / (Gamma + dt Phi)`, zero on the ring.
    c2: Vec<T>,
    neg_c2: Vec<T>,
    /// `Gamma` on the interior, zero on the ring.
    gamma_in: Vec<T>,
    /// `1 / (dt Gamma)` on the interior, zero on the ring.
    inv_dt_gamma: Vec<T>,
    gamma: Vec<T>,
    stride: [usize; 2],
    k: [T; 2],
}

impl<'a, T: Real> Propagator<'a, T> {
    pub fn new(grid: &'a Grid<T>, medium: &Medium<T>, cfg: StepperConfig<T>) -> Result<Self> {
        if !medium.matches(grid) {
            return Err(Error::Dimension(format!(
                "medium is {}x{} but grid is {}x{}",
                medium.nx(),
                medium.ny(),
                grid.nx(),
                grid.ny()
            )));
        }
        let limit = T::FRAC_1_SQRT_2();
        if !(cfg.cfl > T::zero() && cfg.cfl <= limit * (T::one() + T::lit(1e-12))) {
            return Err(Error::Config(format!("cfl must lie in (0, 1/sqrt(2)], got {}", cfg.cfl)));
        }
        let courant = medium.c_max() * T::lit(2.0) * grid.dt() / grid.dx().min(grid.dy());
        if !(courant <= cfg.cfl * (T::one() + T::lit(1e-12))) {
            return Err(Error::Cfl { courant: courant.as_f64(), limit: cfg.cfl.as_f64() });
        }

        let (nx, ny) = (grid.nx(), grid.ny());
        let plane = nx * ny;
        let len = CHANNELS * plane;
        let h = grid.dt();
        let mut a = vec![T::zero(); len];
        let mut c2 = vec![T::zero(); len];
        let mut gamma_in = vec![T::zero(); len];
        let mut inv_dt_gamma = vec![T::zero(); len];
        let mut gamma = vec![T::zero(); len];
        for c in 0..CHANNELS {
            let g = medium.gamma(c);
            let phi = medium.phi(c);
            for idx in 0..plane {
                let e = c * plane + idx;
                gamma[e] = g[idx];
                let (i, j) = (idx % nx, idx / nx);
                if grid.is_boundary(i, j) {
                    continue;
                }
                let p = phi.map_or(T::zero(), |p| p[idx]);
                let den = g[idx] + h * p;
                a[e] = (g[idx] - h * p) / den;
                c2[e] = T::lit(2.0) * h / den;
                gamma_in[e] = g[idx];
                inv_dt_gamma[e] = T::one() / (h * g[idx]);
            }
        }
        let neg_c2 = c2.iter().map(|v| -*v).collect();
        let couplings = face_couplings(medium.kind());
        let stride = couplings.map(|cp| match cp.axis {
            Axis::X => 1,
            Axis::Y => nx,
        });
        let k = couplings.map(|cp| {
            let d = match cp.axis {
                Axis::X => grid.dx(),
                Axis::Y => grid.dy(),
            };
            T::lit(cp.sign as f64) / d
        });
        Ok(Self { grid, cfg, courant, plane, a, c2, neg_c2, gamma_in, inv_dt_gamma, gamma, stride, k })
    }

    pub fn grid(&self) -> &Grid<T> {
        self.grid
    }

    pub fn courant(&self) -> T {
        self.courant
    }

    pub fn frame_len(&self) -> usize {
        CHANNELS * self.plane
    }

    /// `acc = a * acc + scale * (L src)` on interior entries. Returns whether
    /// every written value is finite.
    #[inline]
    fn sweep(&self, acc: &mut [T], src: &[T], scale: Option<&[T]>) -> bool {
        let (nx, ny, plane) = (self.grid.nx(), self.grid.ny(), self.plane);
        let [s0, s1] = self.stride;
        let [k0, k1] = self.k;
        let (u0, rest) = src.split_at(plane);
        let (u1, u2) = rest.split_at(plane);
        let mut ok = true;
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let idx = j * nx + i;
                let p = u2[idx];
                let l = [
                    k0 * (u2[idx + s0] - p),
                    k1 * (u2[idx + s1] - p),
                    -(k0 * (u0[idx - s0] - u0[idx]) + k1 * (u1[idx - s1] - u1[idx])),
                ];
                for (c, lv) in l.into_iter().enumerate() {
                    let e = c * plane + idx;
                    let f = scale.map_or(T::one(), |s| s[e]);
                    let v = self.a[e] * acc[e] + f * lv;
                    ok &= v.is_finite();
                    acc[e] = v;
                }
            }
        }
        ok
    }

    /// `out = L src` (zero on the ring).
    pub fn apply_l(&self, src: &[T], out: &mut [T]) {
        let (nx, ny, plane) = (self.grid.nx(), self.grid.ny(), self.plane);
        let [s0, s1] = self.stride;
        let [k0, k1] = self.k;
        out.iter_mut().for_each(|v| *v = T::zero());
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let idx = j * nx + i;
                let p = src[2 * plane + idx];
                out[idx] = k0 * (src[2 * plane + idx + s0] - p);
                out[plane + idx] = k1 * (src[2 * plane + idx + s1] - p);
                out[2 * plane + idx] = -(k0 * (src[idx - s0] - src[idx])
                    + k1 * (src[plane + idx - s1] - src[plane + idx]));
            }
        }
    }

    fn progress(&self, step: usize) {
        let nt = self.grid.nt();
        if self.cfg.progress && (step % (nt / 10).max(1) == 0 || step + 1 == nt) {
            eprintln!("step {step}/{nt}");
        }
    }

    /// Forward solve over `grid.nt()` levels; frame 0 is zero.
    pub fn forward(&self, forcing: &dyn Forcing<T>, rec: &mut dyn Recorder<T>) -> Result<()> {
        let len = self.frame_len();
        let mut prev = vec![T::zero(); len];
        let mut cur = vec![T::zero(); len];
        rec.record(0, &cur)?;
        let half = T::lit(0.5);
        for n in 0..self.grid.nt() - 1 {
            let mut ok = self.sweep(&mut prev, &cur, Some(&self.neg_c2));
            let wn = if n == 0 { half } else { T::one() };
            forcing.visit(n, &mut |e, v| {
                let x = prev[e] + wn * self.c2[e] * v;
                ok &= x.is_finite();
                prev[e] = x;
            });
            if !ok {
                return Err(Error::Blowup { step: n + 1 });
            }
            std::mem::swap(&mut prev, &mut cur);
            rec.record(n + 1, &cur)?;
            self.progress(n + 1);
        }
        Ok(())
    }

    /// Continues the recursion from two given levels without any source.
    /// Records `u_prev` as frame 0, `u_cur` as frame 1 and `steps` new frames.
    pub fn run_free(&self, u_prev: &[T], u_cur: &[T], steps: usize, rec: &mut dyn Recorder<T>) -> Result<()> {
        let len = self.frame_len();
        if u_prev.len() != len || u_cur.len() != len {
            return Err(Error::Dimension(format!("free run needs frames of length {len}")));
        }
        let mut prev = u_prev.to_vec();
        let mut cur = u_cur.to_vec();
        rec.record(0, &prev)?;
        rec.record(1, &cur)?;
        for n in 1..=steps {
            if !self.sweep(&mut prev, &cur, Some(&self.neg_c2)) {
                return Err(Error::Blowup { step: n + 1 });
            }
            std::mem::swap(&mut prev, &mut cur);
            rec.record(n + 1, &cur)?;
        }
        Ok(())
    }

    /// Exact transpose of [`Propagator::forward`] with respect to the
    /// `Gamma`-weighted, trapezoid-in-time inner product. `forcing` delivers
    /// the dual field `v`; the recorder receives `(F* v)` frames from last to
    /// first.
    pub fn adjoint(&self, forcing: &dyn Forcing<T>, rec: &mut dyn Recorder<T>) -> Result<()> {
        let len = self.frame_len();
        let nt = self.grid.nt();
        let last = nt - 1;
        let tw = trapezoid_weights(nt, self.grid.dt());
        let mut lam_far = vec![T::zero(); len]; // lambda[n+2]
        let mut lam_near = vec![T::zero(); len]; // lambda[n+1]
        let mut work = vec![T::zero(); len]; // c2 * lambda[n+1]
        let mut out = vec![T::zero(); len];
        rec.record(last, &out)?;
        for n in (1..=last).rev() {
            let mut ok = self.sweep(&mut lam_far, &work, None);
            let wn = tw[n];
            forcing.visit(n, &mut |e, v| {
                let x = lam_far[e] + wn * self.gamma_in[e] * v;
                ok &= x.is_finite();
                lam_far[e] = x;
            });
            if !ok {
                return Err(Error::Blowup { step: n });
            }
            std::mem::swap(&mut lam_far, &mut lam_near);
            for e in 0..len {
                work[e] = self.c2[e] * lam_near[e];
                out[e] = work[e] * self.inv_dt_gamma[e];
            }
            rec.record(n - 1, &out)?;
            self.progress(last + 1 - n);
        }
        Ok(())
    }

    /// Conserved two-level energy
    /// `1/2 |u_n|^2 + 1/2 |u_{n+1}|^2 + dt <L u_n, u_{n+1}>`, all `Gamma`-weighted
    /// and integrated over the cells.
    pub fn leapfrog_energy(&self, u_n: &[T], u_np1: &[T]) -> T {
        let mut lu = vec![T::zero(); self.frame_len()];
        self.apply_l(u_n, &mut lu);
        let h = self.grid.dt();
        let half = T::lit(0.5);
        let g = &self.gamma;
        let s = pairwise_sum_by(lu.len(), &|e| {
            half * g[e] * (u_n[e] * u_n[e] + u_np1[e] * u_np1[e]) + h * lu[e] * u_np1[e]
        });
        s * self.grid.cell_area()
    }

    /// Forward run that returns the two-level energies `E_0 .. E_{nt-2}` and
    /// the single-frame energies of every level.
    pub fn energy_history(&self, forcing: &dyn Forcing<T>, medium: &Medium<T>) -> Result<(Vec<T>, Vec<T>)> {
        let mut last: Option<Vec<T>> = None;
        let mut two_level = Vec::new();
        let mut single = Vec::new();
        let mut rec = |_: usize, frame: &[T]| -> Result<()> {
            single.push(crate::diagnostics::frame_energy(frame, medium, self.grid));
            if let Some(prev) = &last {
                two_level.push(self.leapfrog_energy(prev, frame));
            }
            last = Some(frame.to_vec());
            Ok(())
        };
        self.forward(forcing, &mut rec)?;
        Ok((two_level, single))
    }
}

fn check_input<T: Real>(q: &FieldMovie<T>, g: &Grid<T>) -> Result<()> {
    q.validate(g)
}

/// `u = F q`.
pub fn run_forward<T: Real>(
    q: &FieldMovie<T>,
    m: &Medium<T>,
    g: &Grid<T>,
    cfg: &StepperConfig<T>,
) -> Result<FieldMovie<T>> {
    check_input(q, g)?;
    let p = Propagator::new(g, m, *cfg)?;
    let mut rec = MovieRecorder { movie: FieldMovie::zeros(g, MovieKind::State) };
    p.forward(q, &mut rec)?;
    Ok(rec.movie)
}

/// `F* v` by reverse traversal of the forward recursion.
pub fn run_adjoint_direct<T: Real>(
    v: &FieldMovie<T>,
    m: &Medium<T>,
    g: &Grid<T>,
    cfg: &StepperConfig<T>,
) -> Result<FieldMovie<T>> {
    check_input(v, g)?;
    let p = Propagator::new(g, m, *cfg)?;
    let mut rec = MovieRecorder { movie: FieldMovie::zeros(g, MovieKind::Source) };
    p.adjoint(v, &mut rec)?;
    Ok(rec.movie)
}

/// `Gamma^-1 S F S Gamma v` by literal composition.
pub fn run_adjoint_via_tr<T: Real>(
    v: &FieldMovie<T>,
    m: &Medium<T>,
    g: &Grid<T>,
    cfg: &StepperConfig<T>,
) -> Result<FieldMovie<T>> {
    run_adjoint_via_tr_with(v, m, g, cfg, &Physics::new(m.kind()))
}

/// [`run_adjoint_via_tr`] with an explicit reversal convention.
pub fn run_adjoint_via_tr_with<T: Real>(
    v: &FieldMovie<T>,
    m: &Medium<T>,
    g: &Grid<T>,
    cfg: &StepperConfig<T>,
    phys: &Physics,
) -> Result<FieldMovie<T>> {
    check_input(v, g)?;
    let plane = g.cells();
    let mut gv = v.clone().with_kind(MovieKind::Source);
    scale_by_gamma(&mut gv, m, plane, false);
    let sq = time_reverse_field(&gv, phys);
    let u = run_forward(&sq, m, g, cfg)?;
    let mut out = time_reverse_field(&u, phys).with_kind(MovieKind::Source);
    scale_by_gamma(&mut out, m, plane, true);
    Ok(out)
}

fn scale_by_gamma<T: Real>(u: &mut FieldMovie<T>, m: &Medium<T>, plane: usize, inverse: bool) {
    for t in 0..u.nt() {
        let f = u.frame_mut(t);
        for c in 0..CHANNELS {
            let g = m.gamma(c);
            for (x, gv) in f[c * plane..(c + 1) * plane].iter_mut().zip(g) {
                if inverse {
                    *x /= *gv;
                } else {
                    *x *= *gv;
                }
            }
        }
    }
}
