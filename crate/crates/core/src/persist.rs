//! On-disk formats.
//!
//! Hypergraphs are JSON documents carrying a schema version, vertex labels,
//! hyperarcs as label lists and the four weight arrays. States, traces,
//! labelings and spectra are CSV tables with a header row. Floats in CSV are
//! written with 17 significant digits; JSON floats use the shortest
//! representation that parses back to the same bits. Either way loading
//! reproduces saved values exactly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::dynamics::TraceEntry;
use crate::error::{Error, Result};
use crate::hypergraph::{HyperarcState, Hyperarc, OrientedHypergraph, VertexState, Weights};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct HypergraphDoc {
    schema_version: u32,
    labels: Vec<String>,
    hyperarcs: Vec<ArcDoc>,
    weights: WeightsDoc,
}

#[derive(Debug, Serialize, Deserialize)]
struct ArcDoc {
    out: Vec<String>,
    #[serde(rename = "in")]
    inp: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WeightsDoc {
    #[serde(rename = "w_I")]
    vertex_inner: Vec<f64>,
    #[serde(rename = "w_G")]
    vertex_gradient: Vec<f64>,
    #[serde(rename = "W_I")]
    arc_inner: Vec<f64>,
    #[serde(rename = "W_G")]
    arc_gradient: Vec<f64>,
}

pub fn save_hypergraph<W: Write>(h: &OrientedHypergraph, w: W) -> Result<()> {
    let labels = h.labels();
    let doc = HypergraphDoc {
        schema_version: SCHEMA_VERSION,
        labels: labels.to_vec(),
        hyperarcs: h
            .arcs()
            .iter()
            .map(|a| ArcDoc {
                out: a.out().iter().map(|v| labels[v.index()].clone()).collect(),
                inp: a.inp().iter().map(|v| labels[v.index()].clone()).collect(),
            })
            .collect(),
        weights: WeightsDoc {
            vertex_inner: h.weights().vertex_inner.clone(),
            vertex_gradient: h.weights().vertex_gradient.clone(),
            arc_inner: h.weights().arc_inner.clone(),
            arc_gradient: h.weights().arc_gradient.clone(),
        },
    };
    serde_json::to_writer_pretty(w, &doc).map_err(|e| Error::Io(e.to_string()))
}

pub fn load_hypergraph<R: Read>(r: R) -> Result<OrientedHypergraph> {
    let value: serde_json::Value = serde_json::from_reader(r).map_err(json_err)?;
    let found = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Parse {
            location: "schema_version".into(),
            message: "missing or not an unsigned integer".into(),
        })?;
    if found != u64::from(SCHEMA_VERSION) {
        return Err(Error::SchemaVersionMismatch {
            found: u32::try_from(found).unwrap_or(u32::MAX),
            expected: SCHEMA_VERSION,
        });
    }
    let doc: HypergraphDoc = serde_json::from_value(value).map_err(json_err)?;
    let index: std::collections::HashMap<&str, usize> =
        doc.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let resolve = |q: usize, side: &[String]| -> Result<Vec<usize>> {
        side.iter()
            .map(|l| {
                index.get(l.as_str()).copied().ok_or_else(|| Error::Parse {
                    location: format!("hyperarcs[{q}]"),
                    message: format!("unknown vertex label {l:?}"),
                })
            })
            .collect()
    };
    let mut arcs = Vec::with_capacity(doc.hyperarcs.len());
    for (q, a) in doc.hyperarcs.iter().enumerate() {
        arcs.push(Hyperarc::new(resolve(q, &a.out)?, resolve(q, &a.inp)?));
    }
    let weights = Weights {
        vertex_inner: doc.weights.vertex_inner,
        vertex_gradient: doc.weights.vertex_gradient,
        arc_inner: doc.weights.arc_inner,
        arc_gradient: doc.weights.arc_gradient,
    };
    OrientedHypergraph::new(doc.labels.len(), arcs, Some(weights))?.with_labels(doc.labels)
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse { location: format!("line {}, column {}", e.line(), e.column()), message: e.to_string() }
}

/// 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    let location = e
        .position()
        .map(|p| format!("line {}", p.line()))
        .unwrap_or_else(|| "csv".into());
    Error::Parse { location, message: e.to_string() }
}

fn parse_f64(s: &str, line: u64) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse {
        location: format!("line {line}"),
        message: format!("{s:?}: {e}"),
    })
}

/// `vertex,value` with vertex labels.
pub fn save_vertex_state<W: Write>(h: &OrientedHypergraph, f: &VertexState, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["vertex", "value"]).map_err(csv_err)?;
    for (label, x) in h.labels().iter().zip(f.iter()) {
        wtr.write_record([label.as_str(), &format_f64(*x)]).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a `vertex,value` table and orders it like the hypergraph. Every
/// vertex must appear exactly once.
pub fn load_vertex_state<R: Read>(h: &OrientedHypergraph, r: R) -> Result<VertexState> {
    let (labels, values) = read_labeled_values(r)?;
    let index = h.label_index();
    let mut f = vec![f64::NAN; h.n_vertices()];
    let mut seen = vec![false; h.n_vertices()];
    for (l, x) in labels.iter().zip(values) {
        let v = *index.get(l.as_str()).ok_or_else(|| Error::UnknownLabel(l.clone()))?;
        if std::mem::replace(&mut seen[v.index()], true) {
            return Err(Error::Parse { location: format!("vertex {l:?}"), message: "listed twice".into() });
        }
        f[v.index()] = x;
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::Parse {
            location: format!("vertex {:?}", h.labels()[i]),
            message: "missing from state file".into(),
        });
    }
    Ok(VertexState(f))
}

/// Reads a two-column `label,value` table as written by the `save_*`
/// functions.
pub fn read_labeled_values<R: Read>(r: R) -> Result<(Vec<String>, Vec<f64>)> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 {
            return Err(Error::Parse { location: format!("line {line}"), message: "expected 2 columns".into() });
        }
        labels.push(rec[0].to_string());
        values.push(parse_f64(&rec[1], line)?);
    }
    Ok((labels, values))
}

/// `hyperarc,value` with the hyperarc index.
pub fn save_hyperarc_state<W: Write>(f: &HyperarcState, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["hyperarc", "value"]).map_err(csv_err)?;
    for (q, x) in f.iter().enumerate() {
        wtr.write_record([q.to_string(), format_f64(*x)]).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn load_hyperarc_state<R: Read>(n_arcs: usize, r: R) -> Result<HyperarcState> {
    let (labels, values) = read_labeled_values(r)?;
    let mut f = vec![f64::NAN; n_arcs];
    let mut seen = vec![false; n_arcs];
    for (l, x) in labels.iter().zip(values) {
        let q: usize = l
            .parse()
            .ok()
            .filter(|&q| q < n_arcs)
            .ok_or_else(|| Error::Parse { location: format!("hyperarc {l:?}"), message: "not a hyperarc index".into() })?;
        seen[q] = true;
        f[q] = x;
    }
    if let Some(q) = seen.iter().position(|s| !s) {
        return Err(Error::Parse { location: format!("hyperarc {q}"), message: "missing".into() });
    }
    Ok(HyperarcState(f))
}

pub const TRACE_HEADER: [&str; 5] =
    ["iteration", "relative_change", "energy", "weighted_mean", "rayleigh_quotient"];

pub fn save_trace<W: Write>(trace: &[TraceEntry], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(TRACE_HEADER).map_err(csv_err)?;
    for t in trace {
        wtr.write_record([
            t.iteration.to_string(),
            format_f64(t.relative_change),
            format_f64(t.energy),
            format_f64(t.weighted_mean),
            format_f64(t.rayleigh_quotient),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn load_trace<R: Read>(r: R) -> Result<Vec<TraceEntry>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(Error::Parse { location: "line 1".into(), message: format!("unexpected header {header:?}") });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let iteration = rec[0].trim().parse::<usize>().map_err(|e| Error::Parse {
            location: format!("line {line}"),
            message: e.to_string(),
        })?;
        out.push(TraceEntry {
            iteration,
            relative_change: parse_f64(&rec[1], line)?,
            energy: parse_f64(&rec[2], line)?,
            weighted_mean: parse_f64(&rec[3], line)?,
            rayleigh_quotient: parse_f64(&rec[4], line)?,
        });
    }
    Ok(out)
}

/// `vertex,label` with labels in {-1, +1}.
pub fn save_labels<W: Write>(vertices: &[String], labels: &[i8], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["vertex", "label"]).map_err(csv_err)?;
    for (v, l) in vertices.iter().zip(labels) {
        wtr.write_record([v.as_str(), &l.to_string()]).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Long format `index,eigenvalue,vertex,value`, one row per eigenvector
/// entry.
pub fn save_spectrum<W: Write>(
    h: &OrientedHypergraph,
    values: &[f64],
    vectors: &[Vec<f64>],
    w: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["index", "eigenvalue", "vertex", "value"]).map_err(csv_err)?;
    for (k, (lambda, v)) in values.iter().zip(vectors).enumerate() {
        for (label, x) in h.labels().iter().zip(v) {
            wtr.write_record([k.to_string(), format_f64(*lambda), label.clone(), format_f64(*x)])
                .map_err(csv_err)?;
        }
    }
    wtr.flush()?;
    Ok(())
}
