use std::fs;

use anyhow::{Context, Result};
use rayon::prelude::*;
use ribbonvol::bvol::{bcomb_bullet, bcomb_resolved, boundary_lengths};
use ribbonvol::cells::cell_vertices;
use ribbonvol::curves::cone_decomposition;
use ribbonvol::latticesum::{lattice_sum_with, LatticeOptions, Precision};
use ribbonvol::quadrature::{mc_integral, Sampling};
use ribbonvol::ribbon::automorphism_group;
use ribbonvol::scalar::{format_rational, ratio_to_f64};
use ribbonvol::thresholds::{closed_form_threshold, global_threshold_at, global_threshold_universal, Threshold};
use ribbonvol::{Error, Rational, RibbonGraph};
use serde::Serialize;
use serde_json::json;

use crate::args::*;
use crate::cache::{self, Kind};
use crate::emit::{joined, Report};
use crate::UsageError;

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn check_type(kind: &TypeArgs) -> Result<()> {
    if kind.boundaries == 0 || 2 * kind.genus + kind.boundaries < 3 {
        return Err(usage(format!("type ({},{}) is not stable", kind.genus, kind.boundaries)));
    }
    Ok(())
}

fn check_boundary(kind: &TypeArgs, lengths: &[Rational]) -> Result<()> {
    if lengths.len() != kind.boundaries {
        return Err(usage(format!("expected {} boundary lengths, got {}", kind.boundaries, lengths.len())));
    }
    Ok(())
}

/// Resolves `--graph`, `--gn` or `-g/-n`. `accept` filters enumerated
/// candidates before `--index` applies.
fn select_graph(sel: &GraphArgs, reduced: bool, accept: impl Fn(&RibbonGraph) -> bool) -> Result<RibbonGraph> {
    if let Some(spec) = &sel.graph {
        let (path, index) = match spec.rsplit_once('#') {
            Some((p, k)) => (p, k.parse::<usize>().map_err(|_| usage(format!("bad graph index in `{spec}`")))?),
            None => (spec.as_str(), sel.index),
        };
        let text = fs::read(path).with_context(|| format!("reading {path}"))?;
        let value: serde_json::Value = serde_json::from_slice(&text).with_context(|| format!("parsing {path}"))?;
        let list = match value {
            serde_json::Value::Array(items) => items,
            single => vec![single],
        };
        let item = list.into_iter().nth(index).ok_or_else(|| usage(format!("{path} has no graph {index}")))?;
        return serde_json::from_value(item).with_context(|| format!("graph {index} of {path}"));
    }
    let (genus, n) = match (sel.gn, sel.genus, sel.boundaries) {
        (Some(t), _, _) => t,
        (None, Some(g), Some(n)) => (g, n),
        _ => return Err(usage("give --graph FILE#k, --gn g,n or -g/-n")),
    };
    check_type(&TypeArgs { genus, boundaries: n })?;
    let graphs = cache::graphs(genus, n, Kind { reduced, unlabelled: false })?;
    let found = graphs.into_iter().filter(|g| accept(g)).nth(sel.index);
    found.ok_or_else(|| usage(format!("no matching graph of type ({genus},{n}) at index {}", sel.index)))
}

pub fn enumerate(a: &EnumerateArgs) -> Result<Report> {
    check_type(&a.kind)?;
    let graphs = cache::graphs(a.kind.genus, a.kind.boundaries, Kind { reduced: a.reduced, unlabelled: a.unlabelled })?;
    let rows = graphs
        .iter()
        .enumerate()
        .map(|(k, g)| {
            vec![
                k.to_string(),
                g.num_edges().to_string(),
                g.num_vertices().to_string(),
                automorphism_group(g).order.to_string(),
                joined(g.sigma()),
                joined(g.iota()),
                joined(g.face_labels()),
            ]
        })
        .collect();
    Report::new(&graphs, vec!["index", "edges", "vertices", "automorphisms", "sigma", "iota", "face_labels"], rows)
}

#[derive(Serialize)]
struct SimplexOut {
    rays: Vec<usize>,
    det: u64,
}

#[derive(Serialize)]
struct ConeOut {
    delta: Vec<usize>,
    rays: Vec<usize>,
    simplices: Vec<SimplexOut>,
}

pub fn cones(a: &GraphArgs) -> Result<Report> {
    let g = select_graph(a, false, |_| true)?;
    let dec = cone_decomposition(&g)?;
    let cones: Vec<ConeOut> = dec
        .cones
        .iter()
        .map(|c| ConeOut {
            delta: c.delta.clone(),
            rays: c.rays.clone(),
            simplices: c.simplices.iter().map(|s| SimplexOut { rays: s.rays.clone(), det: s.det }).collect(),
        })
        .collect();
    let mut rows = Vec::new();
    for (ci, c) in dec.cones.iter().enumerate() {
        for (si, s) in c.simplices.iter().enumerate() {
            let vecs: Vec<String> = s.rays.iter().map(|&r| joined(&dec.curves[r].vector)).collect();
            rows.push(vec![ci.to_string(), si.to_string(), s.det.to_string(), vecs.join(";")]);
        }
    }
    let value = json!({
        "dim": dec.dim,
        "rays": dec.curves.iter().map(|c| &c.vector).collect::<Vec<_>>(),
        "kinds": dec.curves.iter().map(|c| c.kind).collect::<Vec<_>>(),
        "cones": cones,
        "duplicate_deltas": dec.duplicate_deltas,
        "degenerate_deltas": dec.degenerate_deltas,
    });
    Report::new(&value, vec!["cone", "simplex", "det", "rays"], rows)
}

pub fn bvol(a: &BvolArgs) -> Result<Report> {
    let edges = a.lengths.len();
    let g = select_graph(&a.graph, true, |g| g.num_edges() == edges)?;
    if g.num_edges() != edges {
        return Err(usage(format!("graph has {} edges, got {edges} lengths", g.num_edges())));
    }
    let value = bcomb_resolved(&g, &a.lengths)?;
    let bullet = if g.is_trivalent() { Some(format_rational(&bcomb_bullet(&g, &a.lengths)?)) } else { None };
    let boundary = boundary_lengths(&g, &a.lengths);
    let out = json!({
        "value": format_rational(&value),
        "approx": ratio_to_f64(&value),
        "bullet": bullet,
        "L": rationals(&boundary),
        "lengths": rationals(&a.lengths),
        "trivalent": g.is_trivalent(),
    });
    let rows = vec![vec![format_rational(&value), joined(&rationals(&boundary)), joined(&rationals(&a.lengths))]];
    Report::new(&out, vec!["value", "L", "lengths"], rows)
}

pub fn cells(a: &CellsArgs) -> Result<Report> {
    let g = select_graph(&a.graph, false, |_| true)?;
    if a.lengths.len() != g.num_faces() {
        return Err(usage(format!("graph has {} faces, got {} lengths", g.num_faces(), a.lengths.len())));
    }
    let verts = cell_vertices(&g, &a.lengths)?;
    let rows = verts
        .iter()
        .enumerate()
        .map(|(k, v)| {
            vec![k.to_string(), joined(&rationals(&v.lambda)), joined(&v.support), format_rational(&v.density)]
        })
        .collect();
    Report::new(&verts, vec!["vertex", "lambda", "support", "density"], rows)
}

pub fn thresholds(a: &ThresholdArgs) -> Result<Report> {
    check_type(&a.kind)?;
    let (g, n) = (a.kind.genus, a.kind.boundaries);
    if let Some(l) = &a.lengths {
        check_boundary(&a.kind, l)?;
    }
    let closed = closed_form_threshold(g, n)?;
    let universal = global_threshold_universal(g, n)?;
    let at = a.lengths.as_ref().map(|l| global_threshold_at(g, n, l)).transpose()?;
    let computed = at.as_ref().map_or(&universal.value, |t| &t.value);
    let mut witnesses = vec![universal.witness.clone()];
    if let Some(t) = &at {
        witnesses.push(t.witness.clone());
    }
    let out = json!({
        "genus": g,
        "boundaries": n,
        "computed": computed,
        "universal": universal.value,
        "at_lengths": at.as_ref().map(|t| &t.value),
        "closed_form": closed,
        "agree": *computed == closed,
        "witnesses": witnesses.into_iter().flatten().collect::<Vec<_>>(),
    });
    let rows = vec![vec![g.to_string(), n.to_string(), computed.to_string(), closed.to_string()]];
    Report::new(&out, vec!["genus", "boundaries", "computed", "closed_form"], rows)
}

pub fn integrate(a: &IntegrateArgs) -> Result<Report> {
    check_type(&a.kind)?;
    check_boundary(&a.kind, &a.lengths)?;
    let sampling = match a.sampling {
        SamplingArg::Stratified => Sampling::Stratified,
        SamplingArg::Uniform => Sampling::Uniform,
        SamplingArg::Box => Sampling::BoundingBox,
    };
    let est = mc_integral(a.kind.genus, a.kind.boundaries, &a.lengths, a.power, a.samples, a.seed, sampling)?;
    if est.divergent {
        eprintln!("warning: s = {} is at or beyond the integrability threshold; the estimate is not meaningful", a.power);
    }
    let rows = est
        .breakdown
        .iter()
        .map(|c| vec![c.graph.to_string(), c.automorphisms.to_string(), c.value.to_string(), c.std_error.to_string()])
        .collect();
    Report::new(&est, vec!["graph", "automorphisms", "value", "std_error"], rows)
}

pub fn lattice(a: &LatticeArgs) -> Result<Report> {
    check_type(&a.kind)?;
    check_boundary(&a.kind, &a.lengths)?;
    let precision = match (a.exact, a.float) {
        (true, _) => Precision::Exact,
        (_, true) => Precision::Float,
        _ => Precision::Auto,
    };
    if a.exact && a.power.fract() != 0.0 {
        return Err(usage("--exact needs an integral --power"));
    }
    let options = LatticeOptions { trivalent_only: a.trivalent_only, precision };
    let r = lattice_sum_with(a.kind.genus, a.kind.boundaries, &a.lengths, a.power, options)?;
    let mut out = json!({
        "value": r.value,
        "approx": r.value.to_f64(),
        "metrics": r.metrics,
        "graphs": r.graphs,
        "empty_lattice": r.empty_lattice,
        "L": rationals(&a.lengths),
        "power": a.power,
    });
    if a.breakdown {
        out["breakdown"] = serde_json::to_value(&r.breakdown)?;
    }
    let rows = r
        .breakdown
        .iter()
        .map(|t| {
            let value = serde_json::to_value(&t.value).map(|v| v.to_string().trim_matches('"').to_string());
            vec![t.graph.to_string(), t.edges.to_string(), t.automorphisms.to_string(), t.metrics.to_string(), value.unwrap_or_default()]
        })
        .collect();
    Report::new(&out, vec!["graph", "edges", "automorphisms", "metrics", "value"], rows)
}

#[derive(Serialize)]
struct TableRow {
    genus: usize,
    boundaries: usize,
    computed: Option<Threshold>,
    closed_form: Threshold,
    agree: Option<bool>,
    status: String,
}

pub fn table(a: &TableArgs) -> Result<(Report, bool)> {
    let types: Vec<(usize, usize)> = (0..=a.max_genus)
        .flat_map(|g| (1..=a.max_boundaries).map(move |n| (g, n)))
        .filter(|&(g, n)| 2 * g + n >= 3)
        .collect();
    let rows: Vec<Result<TableRow>> = types
        .par_iter()
        .map(|&(g, n)| {
            let closed = closed_form_threshold(g, n)?;
            let edges = 6 * g + 3 * n - 6;
            if edges > a.max_edges {
                let status = format!("skipped: {edges} edges exceed --max-edges");
                return Ok(TableRow { genus: g, boundaries: n, computed: None, closed_form: closed, agree: None, status });
            }
            match global_threshold_universal(g, n) {
                Ok(t) => Ok(TableRow {
                    genus: g,
                    boundaries: n,
                    agree: Some(t.value == closed),
                    computed: Some(t.value),
                    closed_form: closed,
                    status: "ok".into(),
                }),
                Err(Error::TooLarge(msg)) => {
                    Ok(TableRow { genus: g, boundaries: n, computed: None, closed_form: closed, agree: None, status: format!("skipped: {msg}") })
                }
                Err(e) => Err(e.into()),
            }
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let all_agree = rows.iter().all(|r| r.agree != Some(false));
    let csv_rows = rows
        .iter()
        .map(|r| {
            vec![
                r.genus.to_string(),
                r.boundaries.to_string(),
                r.computed.as_ref().map(ToString::to_string).unwrap_or_default(),
                r.closed_form.to_string(),
                r.agree.map(|b| b.to_string()).unwrap_or_default(),
                r.status.clone(),
            ]
        })
        .collect();
    let report = Report::new(&rows, vec!["genus", "boundaries", "computed", "closed_form", "agree", "status"], csv_rows)?;
    Ok((report, all_agree))
}
