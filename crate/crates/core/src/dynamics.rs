//! Forward-Euler scale-space flows `f ← f + τ Δ_v^p f`.
//!
//! Three flavors share one stepping loop: the free (Neumann-type) flow, the
//! renormalized flow tracking `g = (f − f̄)/‖f − f̄‖`, and the Dirichlet flow
//! with boundary vertices pinned after every step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::hypergraph::{weight_pow, OrientedHypergraph, VertexId, VertexState};
use crate::operators::{IncidenceSystem, DEFAULT_REGULARIZATION};

const POWER_ITERATIONS: usize = 50;
const CFL_SAFETY: f64 = 0.9;
const TAU_MIN: f64 = 1e-12;
const TAU_MAX: f64 = 1e3;
const MAX_HALVINGS: usize = 60;
/// Energy may rise by this relative amount before a step counts as an
/// increase; absorbs summation noise near the minimum.
const ENERGY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepSize {
    /// CFL estimate plus backtracking on energy increase.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub p: f64,
    pub tau: StepSize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub regularization: f64,
    pub seed: u64,
    pub renormalize: bool,
    pub record_every: usize,
}

impl FlowConfig {
    /// Defaults: automatic step, tolerance 1e-6, at most 1e6 iterations,
    /// regularization 1e-8 below p = 2 and 0 otherwise, a trace row every
    /// 100 iterations.
    pub fn new(p: f64) -> Self {
        FlowConfig {
            p,
            tau: StepSize::Auto,
            tolerance: 1e-6,
            max_iterations: 1_000_000,
            regularization: if p < 2.0 { DEFAULT_REGULARIZATION } else { 0.0 },
            seed: 0,
            renormalize: false,
            record_every: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::POutOfRange { p: self.p, range: "[1, inf)" });
        }
        if !(self.tolerance > 0.0) {
            return bad(format!("tolerance {} must be positive", self.tolerance));
        }
        if let StepSize::Fixed(t) = self.tau {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("step size {t} must be positive"));
            }
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return bad(format!("regularization {} must be nonnegative", self.regularization));
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        Ok(())
    }
}

/// Dirichlet data: distinct vertices with fixed values.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCondition {
    pairs: Vec<(VertexId, f64)>,
}

impl BoundaryCondition {
    pub fn new(pairs: Vec<(VertexId, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyBoundary);
        }
        let mut seen: Vec<VertexId> = pairs.iter().map(|p| p.0).collect();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateBoundaryVertex { vertex: w[0].index() });
        }
        Ok(BoundaryCondition { pairs })
    }

    pub fn pairs(&self) -> &[(VertexId, f64)] {
        &self.pairs
    }

    /// `max_j |F_j|`.
    pub fn scale(&self) -> f64 {
        self.pairs.iter().fold(0.0, |m, p| m.max(p.1.abs()))
    }

    /// Boundary indicator over `n` vertices. Fails when a vertex is out of
    /// range or no interior vertex is left.
    pub fn mask(&self, n: usize) -> Result<Vec<bool>> {
        let mut m = vec![false; n];
        for &(v, _) in &self.pairs {
            if v.index() >= n {
                return Err(Error::VertexOutOfRange { vertex: v.index(), n_vertices: n });
            }
            m[v.index()] = true;
        }
        if m.iter().all(|&b| b) {
            return Err(Error::EmptyInterior);
        }
        Ok(m)
    }

    pub fn apply(&self, f: &mut [f64]) {
        for &(v, val) in &self.pairs {
            f[v.index()] = val;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub relative_change: f64,
    pub energy: f64,
    pub weighted_mean: f64,
    pub rayleigh_quotient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub final_state: VertexState,
    pub iterations: usize,
    pub converged: bool,
    /// Step size in effect at the end (backtracking may have reduced it).
    pub tau: f64,
    pub trace: Vec<TraceEntry>,
}

impl FlowResult {
    pub fn ensure_converged(&self) -> Result<&Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged { iterations: self.iterations })
        }
    }
}

/// Largest eigenvalue of `−Δ²` by power iteration in the weighted vertex
/// space, from a seeded random start.
pub fn largest_eigenvalue(sys: &IncidenceSystem<'_>, iterations: usize, seed: u64) -> Result<f64> {
    let n = sys.n_vertices();
    if n == 0 || sys.n_arcs() == 0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = VertexState((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let mut y = sys.p_laplacian(&x, 2.0, 0.0)?;
        y.iter_mut().for_each(|v| *v = -*v);
        let xx = sys.vertex_dot(&x, &x);
        if xx == 0.0 {
            break;
        }
        lambda = sys.vertex_dot(&x, &y) / xx;
        let ny = y.norm2();
        if ny == 0.0 {
            break;
        }
        y.iter_mut().for_each(|v| *v /= ny);
        x = y;
    }
    Ok(lambda)
}

/// Explicit step size. For p = 2 this is `0.9 · 2/λ_max`; otherwise the
/// p = 2 value is scaled by `(max_q |∇f0(a_q)| + r)^{2−p}`. The result is
/// clamped to `[1e-12, 1e3]` and halved until one step from `f0` does not
/// increase the energy.
pub fn estimate_step_size(
    sys: &IncidenceSystem<'_>,
    p: f64,
    f0: &VertexState,
    regularization: f64,
    seed: u64,
) -> Result<f64> {
    check_len("vertex state", sys.n_vertices(), f0.len())?;
    let lambda = largest_eigenvalue(sys, POWER_ITERATIONS, seed)?;
    let tau2 = if lambda > 0.0 { CFL_SAFETY * 2.0 / lambda } else { TAU_MAX };
    let mut tau = if p == 2.0 {
        tau2
    } else {
        let gmax = sys.gradient(f0)?.norm_inf();
        tau2 * (gmax + regularization).powf(2.0 - p)
    };
    if !tau.is_finite() {
        tau = TAU_MAX;
    }
    tau = tau.clamp(TAU_MIN, TAU_MAX);

    let e0 = sys.energy(f0, p)?;
    let lap = sys.p_laplacian(f0, p, regularization)?;
    let mut cand = f0.clone();
    for _ in 0..MAX_HALVINGS {
        for ((c, f), l) in cand.iter_mut().zip(f0.iter()).zip(lap.iter()) {
            *c = f + tau * l;
        }
        if sys.energy(&cand, p)? <= e0 * (1.0 + ENERGY_SLACK) {
            break;
        }
        tau *= 0.5;
    }
    Ok(tau)
}

/// Shared explicit-Euler machinery.
struct Stepper<'s, 'h> {
    sys: &'s IncidenceSystem<'h>,
    cfg: &'s FlowConfig,
    tau: f64,
    auto: bool,
}

impl<'s, 'h> Stepper<'s, 'h> {
    fn new(sys: &'s IncidenceSystem<'h>, cfg: &'s FlowConfig, f0: &VertexState) -> Result<Self> {
        cfg.validate()?;
        check_len("vertex state", sys.n_vertices(), f0.len())?;
        let (tau, auto) = match cfg.tau {
            StepSize::Fixed(t) => (t, false),
            StepSize::Auto => {
                (estimate_step_size(sys, cfg.p, f0, cfg.regularization, cfg.seed)?, true)
            }
        };
        Ok(Stepper { sys, cfg, tau, auto })
    }

    /// One Euler step from `f` with energy `e`. Returns the candidate, its
    /// energy (only tracked in auto mode), and `Δ^p f`.
    fn step(
        &mut self,
        f: &VertexState,
        e: f64,
        boundary: Option<&BoundaryCondition>,
    ) -> Result<(VertexState, f64, VertexState)> {
        let lap = self.sys.p_laplacian(f, self.cfg.p, self.cfg.regularization)?;
        let mut cand = f.clone();
        let mut halvings = 0;
        loop {
            for ((c, x), l) in cand.iter_mut().zip(f.iter()).zip(lap.iter()) {
                *c = x + self.tau * l;
            }
            if let Some(bc) = boundary {
                bc.apply(&mut cand);
            }
            if !self.auto {
                return Ok((cand, f64::NAN, lap));
            }
            let e_new = self.sys.energy(&cand, self.cfg.p)?;
            if e_new <= e * (1.0 + ENERGY_SLACK) || halvings == MAX_HALVINGS {
                return Ok((cand, e_new, lap));
            }
            self.tau *= 0.5;
            halvings += 1;
        }
    }

    fn energy(&self, f: &VertexState) -> Result<f64> {
        self.sys.energy(f, self.cfg.p)
    }

    fn entry(&self, iteration: usize, relative_change: f64, f: &VertexState) -> Result<TraceEntry> {
        Ok(TraceEntry {
            iteration,
            relative_change,
            energy: self.energy(f)?,
            weighted_mean: self.sys.weighted_mean(f),
            rayleigh_quotient: self.sys.rayleigh_quotient(f, self.cfg.p).unwrap_or(f64::NAN),
        })
    }

    fn should_record(&self, iteration: usize) -> bool {
        iteration % self.cfg.record_every == 0
    }
}

fn relative_change(new: &[f64], old: &[f64]) -> f64 {
    let d: f64 = new.iter().zip(old).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let n: f64 = old.iter().map(|x| x * x).sum::<f64>().sqrt();
    d / n.max(1e-30)
}

/// Free gradient flow. Iterates until the relative change of the next step
/// `‖f_{n+1} − f_n‖₂ / ‖f_n‖₂` drops below the tolerance; the returned
/// state is `f_n` and `iterations` is `n`.
pub fn neumann_flow(sys: &IncidenceSystem<'_>, f0: &VertexState, cfg: &FlowConfig) -> Result<FlowResult> {
    run_pinned(sys, f0, None, cfg)
}

/// Dirichlet flow: boundary vertices are reset to their values after every
/// step. Converged once the relative change is below the tolerance and the
/// interior residual `max |Δ^p f|` is below `tolerance · max_j |F_j|`.
pub fn dirichlet_solve(
    sys: &IncidenceSystem<'_>,
    f0: &VertexState,
    bc: &BoundaryCondition,
    cfg: &FlowConfig,
) -> Result<FlowResult> {
    bc.mask(sys.n_vertices())?;
    run_pinned(sys, f0, Some(bc), cfg)
}

fn run_pinned(
    sys: &IncidenceSystem<'_>,
    f0: &VertexState,
    bc: Option<&BoundaryCondition>,
    cfg: &FlowConfig,
) -> Result<FlowResult> {
    check_len("vertex state", sys.n_vertices(), f0.len())?;
    let mut f = f0.clone();
    let mask = match bc {
        Some(bc) => {
            bc.apply(&mut f);
            Some(bc.mask(sys.n_vertices())?)
        }
        None => None,
    };
    let residual_bound = bc.map(|bc| {
        let s = bc.scale();
        cfg.tolerance * if s > 0.0 { s } else { 1.0 }
    });

    let mut stepper = Stepper::new(sys, cfg, &f)?;
    let mut e = stepper.energy(&f)?;
    let mut trace = Vec::new();
    for n in 0..cfg.max_iterations {
        let (cand, e_new, lap) = stepper.step(&f, e, bc)?;
        let rel = relative_change(&cand, &f);
        let residual_ok = match (&mask, residual_bound) {
            (Some(mask), Some(bound)) => lap
                .iter()
                .zip(mask)
                .filter(|(_, &b)| !b)
                .all(|(l, _)| l.abs() <= bound),
            _ => true,
        };
        if rel < cfg.tolerance && residual_ok {
            trace.push(stepper.entry(n, rel, &f)?);
            return Ok(FlowResult { final_state: f, iterations: n, converged: true, tau: stepper.tau, trace });
        }
        if stepper.should_record(n) {
            trace.push(stepper.entry(n, rel, &f)?);
        }
        f = cand;
        e = e_new;
    }
    let n = cfg.max_iterations;
    trace.push(stepper.entry(n, f64::NAN, &f)?);
    Ok(FlowResult { final_state: f, iterations: n, converged: false, tau: stepper.tau, trace })
}

/// Flow of the renormalized quantity `g = (f − f̄)/‖f − f̄‖_V`.
///
/// An automatic step size is half the free-flow estimate, fixed for the
/// whole run. The iterate is
/// rescaled to its initial norm after every step; for p = 2
/// this leaves the direction sequence unchanged and avoids underflow as
/// `f → f̄`. Stops when `‖g_{n+1} − g_n‖₂` drops below the tolerance. The
/// returned state is `g`, with zero weighted mean and unit weighted norm.
pub fn renormalized_flow(
    sys: &IncidenceSystem<'_>,
    f0: &VertexState,
    cfg: &FlowConfig,
) -> Result<FlowResult> {
    check_len("vertex state", sys.n_vertices(), f0.len())?;
    let conserving = sys.weight_condition_holds();
    let (g0, radius) = normalized_deviation(sys, f0).ok_or(Error::DegenerateInitial)?;
    let scale0 = f0.norm_inf().max(1.0);
    if radius <= 1e-14 * scale0 {
        return Err(Error::DegenerateInitial);
    }
    // with the weight condition constants drop out of Δ, so iterate the
    // centered state; otherwise keep the current mean as the base level
    let mut base = if conserving { 0.0 } else { sys.weighted_mean(f0) };
    let mut f = VertexState(g0.iter().map(|x| base + radius * x).collect());
    let mut g = g0;

    let mut stepper = Stepper::new(sys, cfg, &f)?;
    if stepper.auto {
        // keep every factor 1 − τλ positive; with the full CFL step the
        // highest mode decays by |1 − τλ_max| = 0.8 and can outlast the
        // second eigenfunction after renormalization
        stepper.tau *= 0.5;
        // rescaling changes the energy anyway, and for p < 2 per-step
        // backtracking would shrink τ to the regularization scale
        stepper.auto = false;
    }
    let mut e = stepper.energy(&f)?;
    let mut trace = Vec::new();
    for n in 0..cfg.max_iterations {
        let (cand, _, _) = stepper.step(&f, e, None)?;
        let Some((g_new, _)) = normalized_deviation(sys, &cand) else {
            trace.push(stepper.entry(n, f64::NAN, &g)?);
            return Ok(FlowResult { final_state: g, iterations: n, converged: false, tau: stepper.tau, trace });
        };
        let change: f64 =
            g_new.iter().zip(g.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if !conserving {
            base = sys.weighted_mean(&cand);
        }
        g = g_new;
        f = VertexState(g.iter().map(|x| base + radius * x).collect());
        e = stepper.energy(&f)?;
        let converged = change < cfg.tolerance;
        if converged || stepper.should_record(n + 1) {
            trace.push(stepper.entry(n + 1, change, &g)?);
        }
        if converged {
            return Ok(FlowResult { final_state: g, iterations: n + 1, converged, tau: stepper.tau, trace });
        }
    }
    let n = cfg.max_iterations;
    if trace.last().map(|t| t.iteration) != Some(n) {
        trace.push(stepper.entry(n, f64::NAN, &g)?);
    }
    Ok(FlowResult { final_state: g, iterations: n, converged: false, tau: stepper.tau, trace })
}

/// `((f − f̄)/‖f − f̄‖_V, ‖f − f̄‖_V)`, or `None` for a constant `f`.
fn normalized_deviation(sys: &IncidenceSystem<'_>, f: &[f64]) -> Option<(VertexState, f64)> {
    let m = sys.weighted_mean(f);
    let d: Vec<f64> = f.iter().map(|x| x - m).collect();
    let r = sys.vertex_dot(&d, &d).sqrt();
    if r == 0.0 || !r.is_finite() {
        return None;
    }
    Some((VertexState(d.into_iter().map(|x| x / r).collect()), r))
}

/// `+1` where `f(v) ≥ level`, `−1` where `f(v) < level`; ties go to `+1`.
pub fn threshold(f: &[f64], level: f64) -> Vec<i8> {
    f.iter().map(|&x| if x < level { -1 } else { 1 }).collect()
}

/// `Σ_i w_I^α f(v_i) / Σ_i w_I^α`.
pub fn weighted_mean(h: &OrientedHypergraph, f: &[f64], alpha: f64) -> Result<f64> {
    check_len("vertex state", h.n_vertices(), f.len())?;
    let w = &h.weights().vertex_inner;
    let (num, den) = w.iter().zip(f).fold((0.0, 0.0), |(num, den), (&w, &x)| {
        let m = weight_pow(w, alpha);
        (num + m * x, den + m)
    });
    Ok(num / den)
}
