//! Random and synthetic instances for tests, benchmarks and experiments.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::Rng;

use crate::hypergraph::{weight_pow, Hyperarc, OrientedHypergraph, Weights};
use crate::ingest::ArcList;

/// A random hyperarc on `n ≥ 2` vertices with side sizes in
/// `1..=max_side`.
pub fn random_hyperarc<R: Rng>(rng: &mut R, n: usize, max_side: usize) -> Hyperarc {
    let max_side = max_side.max(1).min(n / 2).max(1);
    let k_out = rng.gen_range(1..=max_side);
    let k_in = rng.gen_range(1..=max_side.min(n - k_out));
    let picked = sample(rng, n, k_out + k_in).into_vec();
    Hyperarc::new(picked[..k_out].iter().copied(), picked[k_out..].iter().copied())
}

/// Up to `m` distinct random hyperarcs; duplicates are discarded.
pub fn random_arcs<R: Rng>(rng: &mut R, n: usize, m: usize, max_side: usize) -> Vec<Hyperarc> {
    let mut seen = HashSet::new();
    let mut arcs = Vec::with_capacity(m);
    for _ in 0..m {
        let a = random_hyperarc(rng, n, max_side);
        if seen.insert(a.clone()) {
            arcs.push(a);
        }
    }
    arcs
}

/// Random pairwise spanning tree (random orientation) plus `extra` random
/// hyperarcs. The tree makes constants the only gradient nullspace.
pub fn connected_arcs<R: Rng>(rng: &mut R, n: usize, extra: usize, max_side: usize) -> Vec<Hyperarc> {
    let mut seen = HashSet::new();
    let mut arcs = Vec::with_capacity(n + extra);
    let order = sample(rng, n, n).into_vec();
    for k in 1..n {
        let a = order[k];
        let b = order[rng.gen_range(0..k)];
        let arc = if rng.gen_bool(0.5) { Hyperarc::new([a], [b]) } else { Hyperarc::new([b], [a]) };
        seen.insert(arc.clone());
        arcs.push(arc);
    }
    for _ in 0..extra {
        let a = random_hyperarc(rng, n, max_side);
        if seen.insert(a.clone()) {
            arcs.push(a);
        }
    }
    arcs
}

/// Adds the reversal of roughly `fraction` of the hyperarcs.
pub fn add_reversals<R: Rng>(rng: &mut R, arcs: &mut Vec<Hyperarc>, fraction: f64) {
    let present: HashSet<Hyperarc> = arcs.iter().cloned().collect();
    let mut extra = Vec::new();
    for a in arcs.iter() {
        let r = a.reversed();
        if rng.gen_bool(fraction) && !present.contains(&r) && !extra.contains(&r) {
            extra.push(r);
        }
    }
    arcs.extend(extra);
}

/// All four weight arrays uniform in `[lo, hi]`.
pub fn random_weights<R: Rng>(rng: &mut R, n: usize, m: usize, lo: f64, hi: f64) -> Weights {
    let mut draw = |k: usize| (0..k).map(|_| rng.gen_range(lo..=hi)).collect::<Vec<_>>();
    Weights {
        vertex_inner: draw(n),
        vertex_gradient: draw(n),
        arc_inner: draw(m),
        arc_gradient: draw(m),
    }
}

/// Random weights satisfying the weight condition for exponents `α` and
/// `ε = η ≠ 0`: `w_G = w_I^{−α/ε}`, so every `w_I^α w_G^ε` equals 1.
pub fn conditioned_weights<R: Rng>(
    rng: &mut R,
    n: usize,
    m: usize,
    alpha: f64,
    epsilon: f64,
) -> Weights {
    let mut w = random_weights(rng, n, m, 0.5, 2.0);
    if epsilon != 0.0 {
        w.vertex_gradient = w.vertex_inner.iter().map(|&x| weight_pow(x, -alpha / epsilon)).collect();
    } else {
        w.vertex_inner = vec![1.0; n];
    }
    w
}

/// Random connected instance with unit weights.
pub fn connected_hypergraph<R: Rng>(rng: &mut R, n: usize, extra: usize, max_side: usize) -> OrientedHypergraph {
    OrientedHypergraph::new(n, connected_arcs(rng, n, extra, max_side), None)
        .expect("generated arcs are valid")
}

/// Two opinion leaders `L1`, `L2` with `followers` exclusive followers each
/// (`a0..`, `b0..`) and `bridges` users (`c0..`) following both leaders.
pub fn two_leader_network(followers: usize, bridges: usize) -> ArcList {
    let mut pairs: Vec<(String, String)> = Vec::with_capacity(2 * followers + 2 * bridges);
    for i in 0..followers {
        pairs.push((format!("a{i}"), "L1".into()));
    }
    for i in 0..followers {
        pairs.push((format!("b{i}"), "L2".into()));
    }
    for k in 0..bridges {
        pairs.push((format!("c{k}"), "L1".into()));
        pairs.push((format!("c{k}"), "L2".into()));
    }
    ArcList::from_pairs(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2usize, 3, 10, 40] {
            let mut arcs = connected_arcs(&mut rng, n, 2 * n, 3);
            add_reversals(&mut rng, &mut arcs, 0.3);
            let m = arcs.len();
            let w = random_weights(&mut rng, n, m, 0.5, 2.0);
            OrientedHypergraph::new(n, arcs, Some(w)).unwrap();
        }
    }

    #[test]
    fn conditioned_weights_satisfy_condition() {
        use crate::operators::OperatorParams;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let arcs = random_arcs(&mut rng, 12, 30, 4);
        let w = conditioned_weights(&mut rng, 12, arcs.len(), 1.3, -0.7);
        let h = OrientedHypergraph::new(12, arcs, Some(w)).unwrap();
        let p = OperatorParams { alpha: 1.3, epsilon: -0.7, eta: -0.7, ..Default::default() };
        assert!(h.check_weight_condition(&p));
    }

    #[test]
    fn two_leaders_shape() {
        let a = two_leader_network(50, 20);
        assert_eq!(a.n_labels(), 2 + 100 + 20);
        assert_eq!(a.len(), 100 + 40);
    }
}
