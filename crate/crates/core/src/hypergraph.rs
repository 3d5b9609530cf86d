//! Oriented hypergraphs: vertices, hyperarcs made of two disjoint vertex sets,
//! the four weight functions, and the weighted function spaces on vertices and
//! hyperarcs.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::operators::OperatorParams;

/// Relative tolerance used whenever two weights are compared for equality.
pub const WEIGHT_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for VertexId {
    fn from(i: usize) -> Self {
        VertexId(i)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A hyperarc `(out, in)`. Both sides are kept sorted and free of repeats.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hyperarc {
    out: Vec<VertexId>,
    inp: Vec<VertexId>,
}

impl Hyperarc {
    /// Builds a hyperarc from arbitrary vertex collections. Set semantics are
    /// applied (sorting, repeated entries collapse); structural checks happen
    /// in [`OrientedHypergraph::new`].
    pub fn new<O, I>(out: O, inp: I) -> Self
    where
        O: IntoIterator,
        O::Item: Into<VertexId>,
        I: IntoIterator,
        I::Item: Into<VertexId>,
    {
        let mut out: Vec<VertexId> = out.into_iter().map(Into::into).collect();
        let mut inp: Vec<VertexId> = inp.into_iter().map(Into::into).collect();
        out.sort_unstable();
        out.dedup();
        inp.sort_unstable();
        inp.dedup();
        Hyperarc { out, inp }
    }

    pub fn out(&self) -> &[VertexId] {
        &self.out
    }

    pub fn inp(&self) -> &[VertexId] {
        &self.inp
    }

    pub fn reversed(&self) -> Hyperarc {
        Hyperarc { out: self.inp.clone(), inp: self.out.clone() }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.out.binary_search(&v).is_ok() || self.inp.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.out.len() + self.inp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty() && self.inp.is_empty()
    }
}

/// The four weight functions. `vertex_inner`/`arc_inner` enter the inner
/// products (w_I, W_I), `vertex_gradient`/`arc_gradient` enter the gradient
/// (w_G, W_G).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub vertex_inner: Vec<f64>,
    pub vertex_gradient: Vec<f64>,
    pub arc_inner: Vec<f64>,
    pub arc_gradient: Vec<f64>,
}

impl Weights {
    pub fn unit(n_vertices: usize, n_arcs: usize) -> Self {
        Weights {
            vertex_inner: vec![1.0; n_vertices],
            vertex_gradient: vec![1.0; n_vertices],
            arc_inner: vec![1.0; n_arcs],
            arc_gradient: vec![1.0; n_arcs],
        }
    }

    fn validate(&self, n_vertices: usize, n_arcs: usize) -> Result<()> {
        check_len("vertex_inner weights", n_vertices, self.vertex_inner.len())?;
        check_len("vertex_gradient weights", n_vertices, self.vertex_gradient.len())?;
        check_len("arc_inner weights", n_arcs, self.arc_inner.len())?;
        check_len("arc_gradient weights", n_arcs, self.arc_gradient.len())?;
        for (what, w) in [
            ("w_I", &self.vertex_inner),
            ("w_G", &self.vertex_gradient),
            ("W_I", &self.arc_inner),
            ("W_G", &self.arc_gradient),
        ] {
            if let Some((index, &value)) =
                w.iter().enumerate().find(|(_, &x)| !(x > 0.0 && x.is_finite()))
            {
                return Err(Error::NonpositiveWeight { what, index, value });
            }
        }
        Ok(())
    }
}

/// Immutable oriented hypergraph. Construct with [`OrientedHypergraph::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedHypergraph {
    n_vertices: usize,
    arcs: Vec<Hyperarc>,
    weights: Weights,
    degree: Vec<usize>,
    labels: Vec<String>,
}

impl OrientedHypergraph {
    /// Validates and builds a hypergraph. Vertex labels default to the
    /// decimal vertex index; weights default to 1.
    pub fn new(n_vertices: usize, arcs: Vec<Hyperarc>, weights: Option<Weights>) -> Result<Self> {
        let mut seen: HashMap<&Hyperarc, usize> = HashMap::with_capacity(arcs.len());
        for (index, a) in arcs.iter().enumerate() {
            if a.out.is_empty() {
                return Err(Error::EmptySide { index, side: "output" });
            }
            if a.inp.is_empty() {
                return Err(Error::EmptySide { index, side: "input" });
            }
            for &v in a.out.iter().chain(&a.inp) {
                if v.0 >= n_vertices {
                    return Err(Error::VertexOutOfRange { vertex: v.0, n_vertices });
                }
            }
            // both sides sorted: linear merge finds the overlap
            let (mut i, mut j) = (0, 0);
            while i < a.out.len() && j < a.inp.len() {
                match a.out[i].cmp(&a.inp[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        return Err(Error::OverlappingSides { index, vertex: a.out[i].0 })
                    }
                }
            }
            if let Some(&first) = seen.get(a) {
                return Err(Error::DuplicateHyperarc { index, first });
            }
            seen.insert(a, index);
        }
        drop(seen);

        let weights = weights.unwrap_or_else(|| Weights::unit(n_vertices, arcs.len()));
        weights.validate(n_vertices, arcs.len())?;

        let mut degree = vec![0usize; n_vertices];
        for a in &arcs {
            for v in a.out.iter().chain(&a.inp) {
                degree[v.0] += 1;
            }
        }
        let labels = (0..n_vertices).map(|i| i.to_string()).collect();
        Ok(OrientedHypergraph { n_vertices, arcs, weights, degree, labels })
    }

    /// Replaces the vertex labels. Labels must be unique.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        check_len("labels", self.n_vertices, labels.len())?;
        let mut seen = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if seen.insert(l.as_str(), i).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate vertex label {l:?}")));
            }
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[Hyperarc] {
        &self.arcs
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn degree(&self) -> &[usize] {
        &self.degree
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v.0]
    }

    /// Label to vertex lookup table.
    pub fn label_index(&self) -> HashMap<&str, VertexId> {
        self.labels.iter().enumerate().map(|(i, l)| (l.as_str(), VertexId(i))).collect()
    }

    /// Reports, for every hyperarc whose reversal is also present, whether
    /// the hyperarc weights agree across the pair.
    pub fn check_symmetric_hyperarc_weights(&self) -> SymmetryReport {
        let index: HashMap<&Hyperarc, usize> =
            self.arcs.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let mut report = SymmetryReport::default();
        for (q, a) in self.arcs.iter().enumerate() {
            let rev = a.reversed();
            let Some(&r) = index.get(&rev) else { continue };
            if r < q {
                continue;
            }
            report.reversed_pairs += 1;
            for (field, w) in [("W_G", &self.weights.arc_gradient), ("W_I", &self.weights.arc_inner)]
            {
                if !approx_eq(w[q], w[r]) {
                    report.violations.push(SymmetryViolation {
                        arc: q,
                        reverse: r,
                        field,
                        values: (w[q], w[r]),
                    });
                }
            }
        }
        report
    }

    /// True iff `w_I(k)^α w_G(k)^ε = w_I(j)^α w_G(j)^η` for every
    /// `j ∈ out`, `k ∈ in` of every hyperarc. Under this condition constant
    /// states have zero gradient.
    pub fn check_weight_condition(&self, params: &OperatorParams) -> bool {
        let (alpha, eps, eta) = params.effective_vertex_exponents();
        let w = &self.weights;
        self.arcs.iter().all(|a| {
            let ins = a
                .inp
                .iter()
                .map(|v| weight_pow(w.vertex_inner[v.0], alpha) * weight_pow(w.vertex_gradient[v.0], eps));
            let outs = a
                .out
                .iter()
                .map(|v| weight_pow(w.vertex_inner[v.0], alpha) * weight_pow(w.vertex_gradient[v.0], eta));
            let (lo, hi) = ins
                .chain(outs)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
            hi - lo <= WEIGHT_RTOL * hi.abs()
        })
    }

    /// `Σ_i w_I(v_i)^α f(v_i) g(v_i)`.
    pub fn inner_product_vertex(
        &self,
        f: &VertexState,
        g: &VertexState,
        p: InnerProductParams,
    ) -> Result<f64> {
        check_len("vertex state", self.n_vertices, f.len())?;
        check_len("vertex state", self.n_vertices, g.len())?;
        Ok(weighted_dot(&self.weights.vertex_inner, p.alpha, f, g))
    }

    /// `Σ_q W_I(a_q)^β F(a_q) G(a_q)`.
    pub fn inner_product_hyperarc(
        &self,
        f: &HyperarcState,
        g: &HyperarcState,
        p: InnerProductParams,
    ) -> Result<f64> {
        check_len("hyperarc state", self.arcs.len(), f.len())?;
        check_len("hyperarc state", self.arcs.len(), g.len())?;
        Ok(weighted_dot(&self.weights.arc_inner, p.beta, f, g))
    }

    /// `w_I^α` for every vertex.
    pub fn vertex_measure(&self, alpha: f64) -> Vec<f64> {
        self.weights.vertex_inner.iter().map(|&w| weight_pow(w, alpha)).collect()
    }
}

fn weighted_dot(w: &[f64], exponent: f64, f: &[f64], g: &[f64]) -> f64 {
    w.iter().zip(f).zip(g).map(|((&w, &a), &b)| weight_pow(w, exponent) * a * b).sum()
}

/// `w^x` for `w > 0`. Exponents other than 0 and 1 go through log space.
#[inline]
pub fn weight_pow(w: f64, x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x == 1.0 {
        w
    } else {
        (x * w.ln()).exp()
    }
}

pub(crate) fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= WEIGHT_RTOL * a.abs().max(b.abs())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymmetryReport {
    /// Number of (hyperarc, reversed hyperarc) pairs found.
    pub reversed_pairs: usize,
    pub violations: Vec<SymmetryViolation>,
}

impl SymmetryReport {
    pub fn is_symmetric(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryViolation {
    pub arc: usize,
    pub reverse: usize,
    pub field: &'static str,
    pub values: (f64, f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct InnerProductParams {
    pub alpha: f64,
    pub beta: f64,
}

macro_rules! state_newtype {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, PartialEq, Default)]
        pub struct $name(pub Vec<f64>);

        impl $name {
            pub fn zeros(n: usize) -> Self {
                $name(vec![0.0; n])
            }

            pub fn constant(n: usize, c: f64) -> Self {
                $name(vec![c; n])
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }

            pub fn norm2(&self) -> f64 {
                self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
            }

            pub fn norm_inf(&self) -> f64 {
                self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                $name(v)
            }
        }

        impl Deref for $name {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut [f64] {
                &mut self.0
            }
        }
    };
}

state_newtype!(
    /// A real function on the vertices.
    VertexState
);
state_newtype!(
    /// A real function on the hyperarcs.
    HyperarcState
);

#[cfg(test)]
mod tests {
    use super::*;

    fn oh1() -> OrientedHypergraph {
        OrientedHypergraph::new(
            4,
            vec![Hyperarc::new([0], [1, 2]), Hyperarc::new([1, 2], [3])],
            None,
        )
        .unwrap()
    }

    #[test]
    fn degrees_count_incidences() {
        assert_eq!(oh1().degree(), &[1, 2, 2, 1]);
    }

    #[test]
    fn structural_errors() {
        let e = OrientedHypergraph::new(3, vec![Hyperarc::new([0], [0, 1])], None).unwrap_err();
        assert_eq!(e, Error::OverlappingSides { index: 0, vertex: 0 });

        let e = OrientedHypergraph::new(
            3,
            vec![Hyperarc::new([0], [1]), Hyperarc::new([0], [1])],
            None,
        )
        .unwrap_err();
        assert_eq!(e, Error::DuplicateHyperarc { index: 1, first: 0 });

        let e = OrientedHypergraph::new(3, vec![Hyperarc::new(Vec::<usize>::new(), [1])], None)
            .unwrap_err();
        assert!(matches!(e, Error::EmptySide { side: "output", .. }));

        let e = OrientedHypergraph::new(2, vec![Hyperarc::new([0], [2])], None).unwrap_err();
        assert_eq!(e, Error::VertexOutOfRange { vertex: 2, n_vertices: 2 });

        let mut w = Weights::unit(2, 1);
        w.arc_inner[0] = 0.0;
        let e = OrientedHypergraph::new(2, vec![Hyperarc::new([0], [1])], Some(w)).unwrap_err();
        assert!(matches!(e, Error::NonpositiveWeight { what: "W_I", .. }));
    }

    #[test]
    fn vertex_inner_product() {
        let h = oh1();
        let ones = VertexState::constant(4, 1.0);
        let p0 = InnerProductParams::default();
        assert_eq!(h.inner_product_vertex(&ones, &ones, p0).unwrap(), 4.0);

        let mut w = Weights::unit(4, 2);
        w.vertex_inner = vec![2.0; 4];
        let h = OrientedHypergraph::new(4, h.arcs().to_vec(), Some(w)).unwrap();
        let f = VertexState(vec![1.0, 2.0, 3.0, 4.0]);
        let p1 = InnerProductParams { alpha: 1.0, beta: 0.0 };
        assert_eq!(h.inner_product_vertex(&f, &ones, p1).unwrap(), 20.0);
        assert_eq!(h.inner_product_vertex(&f, &VertexState::zeros(4), p1).unwrap(), 0.0);

        let e = h.inner_product_vertex(&f, &VertexState::zeros(3), p1).unwrap_err();
        assert!(matches!(e, Error::LengthMismatch { .. }));
    }

    #[test]
    fn hyperarc_inner_product() {
        let h = oh1();
        let ones = HyperarcState::constant(2, 1.0);
        assert_eq!(h.inner_product_hyperarc(&ones, &ones, InnerProductParams::default()).unwrap(), 2.0);

        let mut w = Weights::unit(4, 2);
        w.arc_inner = vec![3.0, 1.0];
        let hw = OrientedHypergraph::new(4, h.arcs().to_vec(), Some(w)).unwrap();
        let f = HyperarcState(vec![1.0, 2.0]);
        let g = HyperarcState(vec![2.0, 1.0]);
        let b1 = InnerProductParams { alpha: 0.0, beta: 1.0 };
        assert_eq!(hw.inner_product_hyperarc(&f, &g, b1).unwrap(), 8.0);

        let b0 = InnerProductParams::default();
        assert_eq!(
            h.inner_product_hyperarc(&f, &g, b0).unwrap(),
            h.inner_product_hyperarc(&f, &g, b1).unwrap()
        );
    }

    #[test]
    fn symmetric_weights() {
        let arcs = vec![Hyperarc::new([0], [1]), Hyperarc::new([1], [0])];
        let mut w = Weights::unit(2, 2);
        w.arc_gradient = vec![2.0, 2.0];
        let h = OrientedHypergraph::new(2, arcs.clone(), Some(w.clone())).unwrap();
        let r = h.check_symmetric_hyperarc_weights();
        assert!(r.is_symmetric());
        assert_eq!(r.reversed_pairs, 1);

        w.arc_gradient = vec![2.0, 3.0];
        let h = OrientedHypergraph::new(2, arcs, Some(w)).unwrap();
        let r = h.check_symmetric_hyperarc_weights();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].field, "W_G");

        let h = OrientedHypergraph::new(3, vec![Hyperarc::new([0], [1, 2])], None).unwrap();
        let r = h.check_symmetric_hyperarc_weights();
        assert!(r.is_symmetric());
        assert_eq!(r.reversed_pairs, 0);
    }

    #[test]
    fn weight_condition() {
        let p = |alpha, epsilon, eta| OperatorParams { alpha, epsilon, eta, ..Default::default() };
        assert!(oh1().check_weight_condition(&p(1.3, -0.4, 2.0)));

        let mut w = Weights::unit(2, 1);
        w.vertex_inner = vec![1.0, 2.0];
        w.vertex_gradient = vec![5.0, 0.25];
        let h = OrientedHypergraph::new(2, vec![Hyperarc::new([0], [1])], Some(w)).unwrap();
        assert!(h.check_weight_condition(&p(0.0, 0.0, 0.0)));
        assert!(!h.check_weight_condition(&p(1.0, 0.0, 0.0)));
    }

    #[test]
    fn labels_must_be_unique() {
        let h = oh1();
        let e = h.clone().with_labels(vec!["a".into(), "b".into(), "a".into(), "c".into()]);
        assert!(e.is_err());
        let h = h.with_labels(vec!["a".into(), "b".into(), "c".into(), "d".into()]).unwrap();
        assert_eq!(h.label(VertexId(2)), "c");
        assert_eq!(h.label_index()["d"], VertexId(3));
    }
}
