//! Vertex gradient, adjoint, divergence and the p-Laplacian family.
//!
//! All first-order operators are linear and are precomputed once into an
//! [`IncidenceSystem`]: a hyperarc-major coefficient list for the gradient and
//! a vertex-major (transposed) list for the divergence. Each output entry is
//! accumulated by exactly one task in a fixed order, so sequential and
//! parallel evaluation give bitwise identical results.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::hypergraph::{
    weight_pow, HyperarcState, InnerProductParams, OrientedHypergraph, VertexState,
};

/// Default smoothing of `|x|^{p-2}` at `x = 0` for `p < 2`.
pub const DEFAULT_REGULARIZATION: f64 = 1e-8;

/// Below this many nonzeros the parallel path is not worth the fork/join.
pub const PARALLEL_MIN_NNZ: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Variant {
    /// The fully weighted operators with exponents α, β, γ, ε, η.
    #[default]
    General,
    /// All exponents zero, no `1/|a^out|`, `1/|a^in|` averaging, and a
    /// `-1/deg(v)` factor in adjoint and divergence.
    SimplifiedJostMulas,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OperatorParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub variant: Variant,
}

impl OperatorParams {
    pub fn simplified() -> Self {
        OperatorParams { variant: Variant::SimplifiedJostMulas, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("epsilon", self.epsilon),
            ("eta", self.eta),
        ] {
            if !x.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {x} is not finite")));
            }
        }
        Ok(())
    }

    /// The exponents actually in effect: the simplified variant forces all
    /// of them to zero.
    pub fn effective(&self) -> OperatorParams {
        match self.variant {
            Variant::General => *self,
            Variant::SimplifiedJostMulas => OperatorParams::simplified(),
        }
    }

    /// `(α, ε, η)` as used by the weight condition.
    pub fn effective_vertex_exponents(&self) -> (f64, f64, f64) {
        let e = self.effective();
        (e.alpha, e.epsilon, e.eta)
    }

    pub fn inner_product(&self) -> InnerProductParams {
        let e = self.effective();
        InnerProductParams { alpha: e.alpha, beta: e.beta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Rayon over hyperarcs and vertices when the `parallel` feature is
    /// enabled and the instance is large enough, sequential otherwise.
    #[default]
    Parallel,
    Sequential,
}

/// Precomputed coefficient structure of the gradient and the divergence.
#[derive(Debug, Clone)]
pub struct IncidenceSystem<'h> {
    hypergraph: &'h OrientedHypergraph,
    params: OperatorParams,
    execution: Execution,
    // hyperarc-major: entries arc_ptr[q]..arc_ptr[q+1], out-vertices first
    arc_ptr: Vec<usize>,
    arc_vertex: Vec<usize>,
    grad_coef: Vec<f64>,
    div_coef: Vec<f64>,
    // vertex-major transpose of div_coef
    vtx_ptr: Vec<usize>,
    vtx_arc: Vec<usize>,
    vtx_div: Vec<f64>,
    arc_inner_pow: Vec<f64>,
    arc_gradient_pow: Vec<f64>,
    vertex_measure: Vec<f64>,
}

/// Builds the incidence system for `h` under `params`.
pub fn assemble(h: &OrientedHypergraph, params: OperatorParams) -> Result<IncidenceSystem<'_>> {
    params.validate()?;
    let p = params.effective();
    let simplified = p.variant == Variant::SimplifiedJostMulas;
    let w = h.weights();
    if simplified {
        if let Some(v) = h
            .arcs()
            .iter()
            .flat_map(|a| a.out().iter().chain(a.inp()))
            .find(|v| h.degree()[v.index()] == 0)
        {
            return Err(Error::ZeroDegreeVertex { vertex: v.index() });
        }
    }

    let nnz: usize = h.arcs().iter().map(|a| a.len()).sum();
    let mut arc_ptr = Vec::with_capacity(h.n_arcs() + 1);
    let mut arc_vertex = Vec::with_capacity(nnz);
    let mut grad_coef = Vec::with_capacity(nnz);
    let mut div_coef = Vec::with_capacity(nnz);
    let arc_inner_pow: Vec<f64> = w.arc_inner.iter().map(|&x| weight_pow(x, p.beta)).collect();
    let arc_gradient_pow: Vec<f64> =
        w.arc_gradient.iter().map(|&x| weight_pow(x, p.gamma)).collect();

    arc_ptr.push(0);
    for (q, a) in h.arcs().iter().enumerate() {
        let n_out = a.out().len() as f64;
        let n_in = a.inp().len() as f64;
        let wg = arc_gradient_pow[q];
        let wi = arc_inner_pow[q];
        for (vs, is_out) in [(a.out(), true), (a.inp(), false)] {
            for &v in vs {
                let i = v.index();
                let (g, d) = if simplified {
                    let s = if is_out { -1.0 } else { 1.0 };
                    (s, s / h.degree()[i] as f64)
                } else {
                    let wi_alpha = weight_pow(w.vertex_inner[i], p.alpha);
                    if is_out {
                        let wg_eta = weight_pow(w.vertex_gradient[i], p.eta);
                        (-wg * wi_alpha * wg_eta / n_out, wg_eta / n_out * wi * wg)
                    } else {
                        let wg_eps = weight_pow(w.vertex_gradient[i], p.epsilon);
                        (wg * wi_alpha * wg_eps / n_in, -wg_eps / n_in * wi * wg)
                    }
                };
                arc_vertex.push(i);
                grad_coef.push(g);
                div_coef.push(d);
            }
        }
        arc_ptr.push(arc_vertex.len());
    }

    // transpose; arcs are visited in ascending order so each vertex row is sorted
    let n = h.n_vertices();
    let mut vtx_ptr = vec![0usize; n + 1];
    for &i in &arc_vertex {
        vtx_ptr[i + 1] += 1;
    }
    for i in 0..n {
        vtx_ptr[i + 1] += vtx_ptr[i];
    }
    let mut fill = vtx_ptr.clone();
    let mut vtx_arc = vec![0usize; nnz];
    let mut vtx_div = vec![0.0; nnz];
    for q in 0..h.n_arcs() {
        for k in arc_ptr[q]..arc_ptr[q + 1] {
            let i = arc_vertex[k];
            vtx_arc[fill[i]] = q;
            vtx_div[fill[i]] = div_coef[k];
            fill[i] += 1;
        }
    }

    Ok(IncidenceSystem {
        hypergraph: h,
        params,
        execution: Execution::default(),
        arc_ptr,
        arc_vertex,
        grad_coef,
        div_coef,
        vtx_ptr,
        vtx_arc,
        vtx_div,
        arc_inner_pow,
        arc_gradient_pow,
        vertex_measure: h.vertex_measure(p.alpha),
    })
}

impl<'h> IncidenceSystem<'h> {
    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn execution(&self) -> Execution {
        self.execution
    }

    pub fn hypergraph(&self) -> &'h OrientedHypergraph {
        self.hypergraph
    }

    pub fn params(&self) -> &OperatorParams {
        &self.params
    }

    pub fn n_vertices(&self) -> usize {
        self.hypergraph.n_vertices()
    }

    pub fn n_arcs(&self) -> usize {
        self.hypergraph.n_arcs()
    }

    pub fn nnz(&self) -> usize {
        self.arc_vertex.len()
    }

    /// `(vertex, gradient coefficient)` pairs of hyperarc `q`.
    pub fn grad_coefficients(&self, q: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.arc_ptr[q]..self.arc_ptr[q + 1];
        self.arc_vertex[r.clone()].iter().copied().zip(self.grad_coef[r].iter().copied())
    }

    /// `(vertex, divergence coefficient)` pairs of hyperarc `q`.
    pub fn div_coefficients(&self, q: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.arc_ptr[q]..self.arc_ptr[q + 1];
        self.arc_vertex[r.clone()].iter().copied().zip(self.div_coef[r].iter().copied())
    }

    /// `W_I(a_q)^β`.
    pub fn arc_inner_pow(&self) -> &[f64] {
        &self.arc_inner_pow
    }

    /// `W_G(a_q)^γ`.
    pub fn arc_gradient_pow(&self) -> &[f64] {
        &self.arc_gradient_pow
    }

    /// `w_I(v_i)^α`, the vertex measure of the inner product.
    pub fn vertex_measure(&self) -> &[f64] {
        &self.vertex_measure
    }

    fn parallel(&self) -> bool {
        cfg!(feature = "parallel")
            && self.execution == Execution::Parallel
            && self.nnz() >= PARALLEL_MIN_NNZ
    }

    pub fn gradient(&self, f: &VertexState) -> Result<HyperarcState> {
        check_len("vertex state", self.n_vertices(), f.len())?;
        Ok(HyperarcState(self.gradient_raw(f)))
    }

    fn gradient_raw(&self, f: &[f64]) -> Vec<f64> {
        let row = |q: usize| {
            let mut s = 0.0;
            for k in self.arc_ptr[q]..self.arc_ptr[q + 1] {
                s += self.grad_coef[k] * f[self.arc_vertex[k]];
            }
            s
        };
        map_indices(self.n_arcs(), self.parallel(), row)
    }

    pub fn divergence(&self, big_f: &HyperarcState) -> Result<VertexState> {
        check_len("hyperarc state", self.n_arcs(), big_f.len())?;
        Ok(VertexState(self.divergence_raw(big_f)))
    }

    fn divergence_raw(&self, big_f: &[f64]) -> Vec<f64> {
        let row = |i: usize| {
            let mut s = 0.0;
            for k in self.vtx_ptr[i]..self.vtx_ptr[i + 1] {
                s += self.vtx_div[k] * big_f[self.vtx_arc[k]];
            }
            s
        };
        map_indices(self.n_vertices(), self.parallel(), row)
    }

    /// The adjoint of the gradient with respect to the weighted inner
    /// products; the negated divergence.
    pub fn adjoint(&self, big_f: &HyperarcState) -> Result<VertexState> {
        let mut d = self.divergence(big_f)?;
        d.iter_mut().for_each(|x| *x = -*x);
        Ok(d)
    }

    /// `div(φ_p(∇f))` with `φ_p(x) = |x|^{p-2} x`, smoothed to
    /// `(x² + r²)^{(p-2)/2} x` for `p < 2` and `r > 0`.
    pub fn p_laplacian(&self, f: &VertexState, p: f64, regularization: f64) -> Result<VertexState> {
        check_p(p, 1.0, true)?;
        if !(regularization >= 0.0 && regularization.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "regularization = {regularization} must be finite and nonnegative"
            )));
        }
        check_len("vertex state", self.n_vertices(), f.len())?;
        let mut g = self.gradient_raw(f);
        if p != 2.0 {
            g.iter_mut().for_each(|x| *x = phi(*x, p, regularization));
        }
        Ok(VertexState(self.divergence_raw(&g)))
    }

    /// Evaluates the displayed p-Laplacian formula term by term from the
    /// hypergraph and the raw weights, without the precomputed coefficients.
    /// Exists to cross-check [`Self::p_laplacian`].
    pub fn p_laplacian_direct(&self, f: &VertexState, p: f64) -> Result<VertexState> {
        check_p(p, 1.0, false)?;
        check_len("vertex state", self.n_vertices(), f.len())?;
        let h = self.hypergraph;
        let mut out = vec![0.0; h.n_vertices()];
        match self.params.variant {
            Variant::General => {
                let e = self.params;
                let w = h.weights();
                for (q, a) in h.arcs().iter().enumerate() {
                    let n_out = a.out().len() as f64;
                    let n_in = a.inp().len() as f64;
                    let mut inner = 0.0;
                    for v in a.inp() {
                        let i = v.index();
                        inner += weight_pow(w.vertex_inner[i], e.alpha)
                            * weight_pow(w.vertex_gradient[i], e.epsilon)
                            / n_in
                            * f[i];
                    }
                    for v in a.out() {
                        let i = v.index();
                        inner -= weight_pow(w.vertex_inner[i], e.alpha)
                            * weight_pow(w.vertex_gradient[i], e.eta)
                            / n_out
                            * f[i];
                    }
                    let factor = weight_pow(w.arc_inner[q], e.beta)
                        * weight_pow(w.arc_gradient[q], p * e.gamma)
                        * phi(inner, p, 0.0);
                    for v in a.out() {
                        let i = v.index();
                        out[i] += weight_pow(w.vertex_gradient[i], e.eta) / n_out * factor;
                    }
                    for v in a.inp() {
                        let i = v.index();
                        out[i] -= weight_pow(w.vertex_gradient[i], e.epsilon) / n_in * factor;
                    }
                }
            }
            Variant::SimplifiedJostMulas => {
                // (1/deg v) Σ_{a ∋ v} |Σ_in f − Σ_out f|^{p−2} (Σ_co-oriented f − Σ_anti-oriented f)
                for a in h.arcs() {
                    let s_in: f64 = a.inp().iter().map(|v| f[v.index()]).sum();
                    let s_out: f64 = a.out().iter().map(|v| f[v.index()]).sum();
                    let d = s_in - s_out;
                    let scale = if d == 0.0 { 0.0 } else { d.abs().powf(p - 2.0) };
                    for v in a.out() {
                        out[v.index()] += scale * (s_out - s_in);
                    }
                    for v in a.inp() {
                        out[v.index()] += scale * (s_in - s_out);
                    }
                }
                for (i, x) in out.iter_mut().enumerate() {
                    let deg = h.degree()[i];
                    if deg > 0 {
                        *x /= deg as f64;
                    }
                }
            }
        }
        Ok(VertexState(out))
    }

    /// `E_p(f) = (1/p) Σ_q W_I(a_q)^β |∇f(a_q)|^p`.
    pub fn energy(&self, f: &VertexState, p: f64) -> Result<f64> {
        check_p(p, 1.0, true)?;
        check_len("vertex state", self.n_vertices(), f.len())?;
        Ok(self.energy_of_gradient(&self.gradient_raw(f), p))
    }

    pub(crate) fn energy_of_gradient(&self, grad: &[f64], p: f64) -> f64 {
        let s: f64 = grad
            .iter()
            .zip(&self.arc_inner_pow)
            .map(|(&g, &w)| w * if p == 2.0 { g * g } else { g.abs().powf(p) })
            .sum();
        s / p
    }

    /// `⟨f, −Δ²f⟩_V / ⟨f, f⟩_V` for `p = 2`, `p E_p(f) / Σ w_I^α |f|^p`
    /// otherwise.
    pub fn rayleigh_quotient(&self, f: &VertexState, p: f64) -> Result<f64> {
        check_p(p, 1.0, true)?;
        check_len("vertex state", self.n_vertices(), f.len())?;
        if f.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroFunction);
        }
        let m = &self.vertex_measure;
        if p == 2.0 {
            let lap = self.p_laplacian(f, 2.0, 0.0)?;
            let num: f64 = -m.iter().zip(f.iter()).zip(lap.iter()).map(|((w, a), b)| w * a * b).sum::<f64>();
            let den: f64 = m.iter().zip(f.iter()).map(|(w, a)| w * a * a).sum();
            Ok(num / den)
        } else {
            let den: f64 = m.iter().zip(f.iter()).map(|(w, a)| w * a.abs().powf(p)).sum();
            Ok(p * self.energy(f, p)? / den)
        }
    }

    /// `⟨f, g⟩_V` under the system's α.
    pub fn vertex_dot(&self, f: &[f64], g: &[f64]) -> f64 {
        self.vertex_measure.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
    }

    /// `⟨F, G⟩_A` under the system's β.
    pub fn arc_dot(&self, f: &[f64], g: &[f64]) -> f64 {
        self.arc_inner_pow.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
    }

    /// `Σ_i w_I^α f(v_i) / Σ_i w_I^α`.
    pub fn weighted_mean(&self, f: &[f64]) -> f64 {
        let num: f64 = self.vertex_measure.iter().zip(f).map(|(w, x)| w * x).sum();
        let den: f64 = self.vertex_measure.iter().sum();
        num / den
    }

    /// Whether constants lie in the gradient nullspace for this system.
    pub fn weight_condition_holds(&self) -> bool {
        self.hypergraph.check_weight_condition(&self.params)
    }
}

#[inline]
pub(crate) fn phi(x: f64, p: f64, regularization: f64) -> f64 {
    if p == 2.0 {
        x
    } else if p < 2.0 && regularization > 0.0 {
        (x * x + regularization * regularization).powf((p - 2.0) / 2.0) * x
    } else if x == 0.0 {
        0.0
    } else {
        x.abs().powf(p - 2.0) * x
    }
}

fn check_p(p: f64, lower: f64, inclusive: bool) -> Result<()> {
    let ok = p.is_finite() && if inclusive { p >= lower } else { p > lower };
    if ok {
        Ok(())
    } else {
        Err(Error::POutOfRange { p, range: if inclusive { "[1, inf)" } else { "(1, inf)" } })
    }
}

#[cfg(feature = "parallel")]
fn map_indices<F>(n: usize, parallel: bool, row: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    use rayon::prelude::*;
    if parallel {
        (0..n).into_par_iter().with_min_len(256).map(row).collect()
    } else {
        (0..n).map(row).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn map_indices<F>(n: usize, _parallel: bool, row: F) -> Vec<f64>
where
    F: Fn(usize) -> f64,
{
    (0..n).map(row).collect()
}
