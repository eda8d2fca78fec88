//! Text formats: edge lists, node weightings, cut files, and the JSON
//! audit/report schemas. All writers are deterministic.

use std::fmt::Write as _;

use serde::Serialize;

use crate::decomp::Decomposition;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph};
use crate::verify::DecompositionReport;
use crate::weighting::NodeWeighting;

pub const AUDIT_SCHEMA: &str = "expd.audit/1";
pub const REPORT_SCHEMA: &str = "expd.verify/1";

/// Parse `u v [length]` lines; `#` starts a comment. Lengths are
/// all-or-nothing across the file.
pub fn read_edge_list(text: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut lengths = Vec::new();
    let mut max_vertex = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let u: usize = parse_field(parts.next(), line_no, "source vertex")?;
        let v: usize = parse_field(parts.next(), line_no, "target vertex")?;
        let len = parts
            .next()
            .map(|s| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("bad length {s:?}"),
                })
            })
            .transpose()?;
        if let Some(extra) = parts.next() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("unexpected trailing field {extra:?}"),
            });
        }
        match (len, edges.is_empty()) {
            (Some(l), _) if !lengths.is_empty() || edges.is_empty() => lengths.push(l),
            (None, _) if lengths.is_empty() => {}
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "length column must be present on all lines or none".into(),
                })
            }
        }
        max_vertex = max_vertex.max(u).max(v);
        edges.push((u, v));
    }
    let n = if edges.is_empty() { 0 } else { max_vertex + 1 };
    let g = Graph::new(n, edges)?;
    if lengths.is_empty() {
        Ok(g)
    } else {
        g.with_lengths(lengths)
    }
}

fn parse_field(field: Option<&str>, line: usize, what: &str) -> Result<usize> {
    field
        .ok_or_else(|| Error::Parse {
            line,
            msg: format!("missing {what}"),
        })?
        .parse()
        .map_err(|_| Error::Parse {
            line,
            msg: format!("bad {what}"),
        })
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        match g.length(e) {
            Some(l) => writeln!(out, "{u} {v} {l}").unwrap(),
            None => writeln!(out, "{u} {v}").unwrap(),
        }
    }
    out
}

/// Parse `v mass` lines; absent vertices default to zero mass.
pub fn read_node_weighting(text: &str, n: usize) -> Result<NodeWeighting> {
    let mut mass = vec![0u64; n];
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let v: usize = parse_field(parts.next(), line_no, "vertex")?;
        let m: u64 = parts
            .next()
            .ok_or_else(|| Error::Parse {
                line: line_no,
                msg: "missing mass".into(),
            })?
            .parse()
            .map_err(|_| Error::Parse {
                line: line_no,
                msg: "mass must be a nonnegative integer".into(),
            })?;
        if v >= n {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("vertex {v} out of range (graph has {n} vertices)"),
            });
        }
        mass[v] += m;
    }
    Ok(NodeWeighting::new(mass))
}

/// Cut file: a versioned comment header, then one `u v` line per removed
/// edge in edge-id order (parallel edges repeat).
pub fn write_cut(g: &Graph, removed: &[EdgeId]) -> String {
    let mut out = String::from("# expd cut v1\n");
    let mut sorted = removed.to_vec();
    sorted.sort_unstable();
    for e in sorted {
        let (u, v) = g.endpoints(e);
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

/// Resolve a cut file back to edge ids against `g`, consuming parallel
/// edges in id order.
pub fn read_cut(g: &Graph, text: &str) -> Result<Vec<EdgeId>> {
    let mut used = vec![false; g.edge_count()];
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let u: usize = parse_field(parts.next(), line_no, "source vertex")?;
        let v: usize = parse_field(parts.next(), line_no, "target vertex")?;
        let found = g.edges().iter().enumerate().find(|(e, &(a, b))| {
            !used[*e] && ((a, b) == (u, v) || (a, b) == (v, u))
        });
        match found {
            Some((e, _)) => {
                used[e] = true;
                out.push(e);
            }
            None => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("no unused edge ({u},{v}) in the graph"),
                })
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Flow certificate and spreading metric as `edge u v load length` lines
/// with a versioned header, for the audit trail.
pub fn write_flow_summary(
    g: &Graph,
    cert: &crate::flow::FlowCertificate,
    dual: &crate::flow::DualLengths,
) -> String {
    let mut out = format!(
        "# expd flow v1 kappa={} epsilon={} objective={}\n",
        cert.kappa, cert.epsilon, dual.objective
    );
    let loads = cert.edge_loads(g.edge_count());
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        writeln!(out, "{e} {u} {v} {} {}", loads[e], dual.lengths[e]).unwrap();
    }
    out
}

#[derive(Serialize)]
struct AuditDocument<'a> {
    schema: &'static str,
    phi: f64,
    effective_phi: f64,
    removed: &'a [EdgeId],
    components: &'a [Vec<usize>],
    nodes: &'a [crate::decomp::AuditNode],
}

/// The audit trail as deterministic pretty JSON with a versioned header.
pub fn write_audit(d: &Decomposition) -> String {
    let doc = AuditDocument {
        schema: AUDIT_SCHEMA,
        phi: d.phi,
        effective_phi: d.effective_phi,
        removed: &d.removed,
        components: &d.components,
        nodes: &d.audit.nodes,
    };
    serde_json::to_string_pretty(&doc).expect("audit serializes") + "\n"
}

#[derive(serde::Deserialize)]
struct AuditDocumentOwned {
    schema: String,
    phi: f64,
    effective_phi: f64,
    removed: Vec<EdgeId>,
    components: Vec<Vec<usize>>,
    nodes: Vec<crate::decomp::AuditNode>,
}

/// Reload a stored audit trail into a [`Decomposition`].
pub fn read_audit(text: &str) -> Result<Decomposition> {
    let doc: AuditDocumentOwned = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: format!("audit JSON: {e}"),
    })?;
    if doc.schema != AUDIT_SCHEMA {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unsupported audit schema {:?}", doc.schema),
        });
    }
    Ok(Decomposition {
        phi: doc.phi,
        effective_phi: doc.effective_phi,
        removed: doc.removed,
        components: doc.components,
        audit: crate::decomp::AuditTree { nodes: doc.nodes },
    })
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    schema: &'static str,
    #[serde(flatten)]
    report: &'a DecompositionReport,
}

pub fn write_report(report: &DecompositionReport) -> String {
    let doc = ReportDocument {
        schema: REPORT_SCHEMA,
        report,
    };
    serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
}
