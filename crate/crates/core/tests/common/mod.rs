//! Instance generators and reference implementations shared by the
//! integration tests. The references are written against the raw hypergraph
//! and weights, never against the assembled coefficients.

#![allow(dead_code)]

use hyperlap::hypergraph::weight_pow;
use hyperlap::synth::{add_reversals, conditioned_weights, connected_arcs, random_arcs, random_weights};
use hyperlap::{OperatorParams, OrientedHypergraph, Variant, VertexState};
use rand::Rng;

pub fn random_exponents<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> OperatorParams {
    OperatorParams {
        alpha: rng.gen_range(lo..=hi),
        beta: rng.gen_range(lo..=hi),
        gamma: rng.gen_range(lo..=hi),
        epsilon: rng.gen_range(lo..=hi),
        eta: rng.gen_range(lo..=hi),
        variant: Variant::General,
    }
}

/// Random hypergraph with random weights in `[0.5, 2]`; `n` in `2..=max_n`.
pub fn random_weighted<R: Rng>(rng: &mut R, max_n: usize, max_arcs: usize) -> OrientedHypergraph {
    let n = rng.gen_range(2..=max_n);
    let m = rng.gen_range(1..=max_arcs);
    let arcs = random_arcs(rng, n, m, 4);
    let w = random_weights(rng, n, arcs.len(), 0.5, 2.0);
    OrientedHypergraph::new(n, arcs, Some(w)).unwrap()
}

/// Connected instance whose weights satisfy the weight condition for the
/// returned parameters (ε = η).
pub fn connected_conditioned<R: Rng>(
    rng: &mut R,
    n: usize,
    extra: usize,
) -> (OrientedHypergraph, OperatorParams) {
    let arcs = connected_arcs(rng, n, extra, 3);
    let alpha = rng.gen_range(-1.0..=1.0);
    let eps = if rng.gen_bool(0.5) { 1.0 } else { -1.0 } * rng.gen_range(0.5..=1.5);
    let params = OperatorParams {
        alpha,
        beta: rng.gen_range(-1.0..=1.0),
        gamma: rng.gen_range(-1.0..=1.0),
        epsilon: eps,
        eta: eps,
        variant: Variant::General,
    };
    let w = conditioned_weights(rng, n, arcs.len(), alpha, eps);
    (OrientedHypergraph::new(n, arcs, Some(w)).unwrap(), params)
}

/// Unit-weight instance where roughly half the hyperarcs also appear
/// reversed.
pub fn with_reversals<R: Rng>(rng: &mut R, max_n: usize, max_arcs: usize) -> OrientedHypergraph {
    let n = rng.gen_range(2..=max_n);
    let m = rng.gen_range(1..=max_arcs);
    let mut arcs = random_arcs(rng, n, m, 4);
    add_reversals(rng, &mut arcs, 0.5);
    OrientedHypergraph::new(n, arcs, None).unwrap()
}

pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> VertexState {
    VertexState((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn rel_inf(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    max_abs_diff(a, b) / scale.max(f64::MIN_POSITIVE)
}

fn delta(set: &[hyperlap::VertexId], v: usize) -> f64 {
    if set.iter().any(|x| x.index() == v) {
        1.0
    } else {
        0.0
    }
}

/// Gradient straight from its definition, one hyperarc at a time.
pub fn reference_gradient(h: &OrientedHypergraph, e: &OperatorParams, f: &[f64]) -> Vec<f64> {
    let w = h.weights();
    h.arcs()
        .iter()
        .enumerate()
        .map(|(q, a)| {
            let mut s = 0.0;
            for i in 0..h.n_vertices() {
                let base = weight_pow(w.vertex_inner[i], e.alpha);
                s += (delta(a.inp(), i) * base * weight_pow(w.vertex_gradient[i], e.epsilon)
                    / a.inp().len() as f64
                    - delta(a.out(), i) * base * weight_pow(w.vertex_gradient[i], e.eta)
                        / a.out().len() as f64)
                    * f[i];
            }
            weight_pow(w.arc_gradient[q], e.gamma) * s
        })
        .collect()
}

/// Adjoint straight from its definition, one vertex at a time.
pub fn reference_adjoint(h: &OrientedHypergraph, e: &OperatorParams, g: &[f64]) -> Vec<f64> {
    let w = h.weights();
    (0..h.n_vertices())
        .map(|i| {
            h.arcs()
                .iter()
                .enumerate()
                .map(|(q, a)| {
                    (delta(a.inp(), i) * weight_pow(w.vertex_gradient[i], e.epsilon)
                        / a.inp().len() as f64
                        - delta(a.out(), i) * weight_pow(w.vertex_gradient[i], e.eta)
                            / a.out().len() as f64)
                        * weight_pow(w.arc_inner[q], e.beta)
                        * weight_pow(w.arc_gradient[q], e.gamma)
                        * g[q]
                })
                .sum()
        })
        .collect()
}

/// The simplified p-Laplacian written out with the characteristic-function
/// products over all vertex pairs. Vertices without hyperarcs map to 0.
pub fn reference_simplified_plap(h: &OrientedHypergraph, f: &[f64], p: f64) -> Vec<f64> {
    let n = h.n_vertices();
    (0..n)
        .map(|i| {
            let mut deg = 0usize;
            let mut total = 0.0;
            for a in h.arcs() {
                let (oi, ii) = (delta(a.out(), i), delta(a.inp(), i));
                if oi == 0.0 && ii == 0.0 {
                    continue;
                }
                deg += 1;
                let sum_in: f64 = (0..n).map(|k| delta(a.inp(), k) * f[k]).sum();
                let sum_out: f64 = (0..n).map(|k| delta(a.out(), k) * f[k]).sum();
                let d = (sum_in - sum_out).abs();
                let mag = if d == 0.0 { 0.0 } else { d.powf(p - 2.0) };
                let mut co = 0.0;
                let mut anti = 0.0;
                for k in 0..n {
                    let (ok, ik) = (delta(a.out(), k), delta(a.inp(), k));
                    co += (oi * ok + ii * ik) * f[k];
                    anti += (oi * ik + ii * ok) * f[k];
                }
                total += mag * (co - anti);
            }
            if deg == 0 {
                0.0
            } else {
                total / deg as f64
            }
        })
        .collect()
}
