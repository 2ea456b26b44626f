//! Numerical integration of powers of the volume function over moduli spaces.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::bvol::{bvol_form, BvolRationalForm};
use crate::cells::{cell_triangulation, cell_vertices, is_nonresonant, tangent_rays, CellVertex};
use crate::error::{Error, Result};
use crate::ribbon::{automorphism_group, enumerate_trivalent, RibbonGraph};
use crate::scalar::ratio_to_f64;
use crate::thresholds::{closed_form_threshold, local_threshold, LinearFormProduct, Threshold};
use crate::triangulate::simplex_volume;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n).expect("at least one node");
    GaussLegendre::new(n).as_node_weight_pairs().iter().map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect()
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = GAUSS7_WEIGHTS[3] * fc;
    for k in 0..7 {
        let dx = h * GK_NODES[k];
        let pair = f(c - dx) + f(c + dx);
        kronrod += GK_WEIGHTS[k] * pair;
        if k % 2 == 1 {
            gauss += GAUSS7_WEIGHTS[k / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature; returns the value and
/// an error estimate.
pub fn adaptive_gk15<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> (f64, f64) {
    const MAX_INTERVALS: usize = 20_000;
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let (mut total, mut err) = (v, e);
    while err > abs_tol.max(rel_tol * total.abs()) && pieces.len() < MAX_INTERVALS {
        let (k, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, v0, e0) = pieces.swap_remove(k);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        total += v1 + v2 - v0;
        err += e1 + e2 - e0;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    let total: f64 = pieces.iter().map(|p| p.2).sum();
    let err: f64 = pieces.iter().map(|p| p.3).sum();
    (total, err)
}

/// `int_{a,b >= 0, a+b <= 1} ((a+b)(1-a)(1-b))^{-s} da db` for `0 < s < 2`.
///
/// The triangle is cut into three corner regions, which the symmetry of the
/// integrand makes equal, and a bounded middle region. In each corner region
/// the distance `c` to the corner is replaced by `w = c^{2-s}`, which absorbs
/// the factor `c^{1-s}`.
pub fn b11_special(s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 2.0) {
        return Err(Error::PowerOutOfRange(s));
    }
    let inner = gauss_legendre_unit(24);
    let corner_profile = |c: f64| -> f64 {
        inner.iter().map(|&(u, w)| w * ((1.0 - c * u) * (1.0 - c + c * u)).powf(-s)).sum()
    };
    let p = 2.0 - s;
    let top = 0.5f64.powf(p);
    let (corner, _) = adaptive_gk15(|w: f64| corner_profile(w.powf(1.0 / p)), 0.0, top, 1e-14, 1e-12);
    let corner = corner / p;
    let middle_profile = |a: f64| -> f64 {
        let lo = 0.5 - a;
        let len = a;
        inner
            .iter()
            .map(|&(u, w)| {
                let b = lo + len * u;
                w * len * ((a + b) * (1.0 - a) * (1.0 - b)).powf(-s)
            })
            .sum()
    };
    let (middle, _) = adaptive_gk15(middle_profile, 0.0, 0.5, 1e-14, 1e-12);
    Ok(3.0 * corner + middle)
}

/// Exact value of the (1,1) integral in terms of [`b11_special`]:
/// `(L/2)^{2-2s} / 6 * B(s)`.
pub fn b11_integral(perimeter: f64, s: f64) -> Result<f64> {
    Ok((perimeter / 2.0).powf(2.0 - 2.0 * s) / 6.0 * b11_special(s)?)
}

/// How sample points are placed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Sampling {
    /// One stratum per piece of a corner-refined triangulation of each cell,
    /// with a pilot run and variance-proportional allocation.
    #[default]
    Stratified,
    /// Uniform over the union of cells weighted by measure.
    Uniform,
    /// Hit-or-miss in a bounding box of each cell chart; independent of the
    /// cell triangulation.
    BoundingBox,
}

/// Contribution of one face-labelled graph with a nonempty cell.
#[derive(Clone, Debug, Serialize)]
pub struct CellContribution {
    pub graph: usize,
    pub automorphisms: usize,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub sampling: Sampling,
    pub breakdown: Vec<CellContribution>,
    /// Set when `s` is at or beyond the integrability threshold.
    pub divergent: bool,
}

#[derive(Clone, Copy, Debug, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}

/// Region of a simplex in barycentric terms.
#[derive(Clone, Copy, Debug)]
enum Piece {
    Whole,
    /// All barycentric coordinates at most 1/2.
    Middle,
    /// `1 - 2^{-j} < b_k <= 1 - 2^{-j-1}`.
    Shell { corner: usize, level: u32 },
    /// `b_k > 1 - 2^{-j}`.
    Tip { corner: usize, level: u32 },
}

const CORNER_LEVELS: u32 = 40;

impl Piece {
    fn fraction(self, dim: usize) -> f64 {
        let d = dim as i32;
        match self {
            Piece::Whole => 1.0,
            Piece::Middle => 1.0 - (dim as f64 + 1.0) * 2f64.powi(-d),
            Piece::Shell { level, .. } => 2f64.powi(-(level as i32) * d) * (1.0 - 2f64.powi(-d)),
            Piece::Tip { level, .. } => 2f64.powi(-(level as i32) * d),
        }
    }

    fn sample<R: Rng>(self, rng: &mut R, dim: usize, out: &mut [f64]) {
        loop {
            let mut sum = 0.0;
            for b in out.iter_mut() {
                *b = rng.sample::<f64, _>(Exp1);
                sum += *b;
            }
            for b in out.iter_mut() {
                *b /= sum;
            }
            let accept = match self {
                Piece::Whole => true,
                Piece::Middle => out.iter().all(|&b| b <= 0.5),
                Piece::Shell { corner, level } | Piece::Tip { corner, level } => {
                    let h = 2f64.powi(-(level as i32));
                    for (m, b) in out.iter_mut().enumerate() {
                        if m != corner {
                            *b *= h;
                        }
                    }
                    out[corner] = 1.0 - h * (1.0 - out[corner]);
                    match self {
                        Piece::Shell { .. } => out[corner] <= 1.0 - h / 2.0,
                        _ => true,
                    }
                }
            };
            if accept {
                return;
            }
            debug_assert!(dim + 1 == out.len());
        }
    }
}

struct Stratum {
    cell: usize,
    simplex: usize,
    piece: Piece,
    /// Measure of the stratum divided by the automorphism count.
    weight: f64,
}

struct Cell {
    graph_index: usize,
    form: BvolRationalForm,
    automorphisms: usize,
    vertices: Vec<Vec<f64>>,
    simplices: Vec<Vec<usize>>,
    /// Chart data for hit-or-miss sampling.
    anchor: ChartBox,
}

struct ChartBox {
    base: Vec<f64>,
    rays: Vec<Vec<f64>>,
    upper: Vec<f64>,
    weight: f64,
}

fn to_f64(v: &[BigRational]) -> Vec<f64> {
    v.iter().map(ratio_to_f64).collect()
}

fn build_cells(graphs: &[RibbonGraph], boundary: &[BigRational]) -> Result<(Vec<Cell>, Vec<(usize, BigRational)>)> {
    let mut cells = Vec::new();
    let mut simplex_measures = Vec::new();
    for (graph_index, g) in graphs.iter().enumerate() {
        let verts = cell_vertices(g, boundary)?;
        if verts.is_empty() {
            continue;
        }
        let simplices = cell_triangulation(g, &verts);
        let anchor = &verts[0];
        let aut = automorphism_group(g).order;
        let index = cells.len();
        for s in &simplices {
            let pts: Vec<Vec<BigRational>> =
                s.iter().map(|&k| anchor.vanishing.iter().map(|&e| verts[k].lambda[e].clone()).collect()).collect();
            let measure = simplex_volume(&pts) * &anchor.density;
            simplex_measures.push((index, measure));
        }
        let chart = chart_box(g, anchor, &verts, aut)?;
        cells.push(Cell {
            graph_index,
            form: bvol_form(g)?,
            automorphisms: aut,
            vertices: verts.iter().map(|v| to_f64(&v.lambda)).collect(),
            simplices,
            anchor: chart,
        });
    }
    Ok((cells, simplex_measures))
}

fn chart_box(g: &RibbonGraph, anchor: &CellVertex, verts: &[CellVertex], aut: usize) -> Result<ChartBox> {
    let rays = tangent_rays(g, anchor)?;
    let upper: Vec<f64> = anchor
        .vanishing
        .iter()
        .map(|&e| verts.iter().map(|v| ratio_to_f64(&v.lambda[e])).fold(0.0, f64::max))
        .collect();
    let box_volume: f64 = upper.iter().product();
    Ok(ChartBox {
        base: to_f64(&anchor.lambda),
        rays: rays.iter().map(|r| to_f64(r)).collect(),
        upper,
        weight: box_volume * ratio_to_f64(&anchor.density) / aut as f64,
    })
}

fn check_integral_input(genus: usize, n: usize, boundary: &[BigRational], s: f64) -> Result<()> {
    if boundary.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: boundary.len() });
    }
    if boundary.iter().any(|l| !l.is_positive()) {
        return Err(Error::NonPositiveLength);
    }
    if !is_nonresonant(boundary) {
        return Err(Error::Resonant);
    }
    if !s.is_finite() {
        return Err(Error::PowerOutOfRange(s));
    }
    if n == 0 || 2 * genus + n < 3 {
        return Err(Error::UnstableType(genus, n));
    }
    Ok(())
}

fn power(x: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if s == 1.0 {
        x
    } else {
        x.powf(s)
    }
}

/// Monte Carlo estimate of `sum_G 1/#Aut(G) int_{cell} B^s dmu_K`.
pub fn mc_integral(
    genus: usize,
    n: usize,
    boundary: &[BigRational],
    s: f64,
    samples: u64,
    seed: u64,
    sampling: Sampling,
) -> Result<IntegralEstimate> {
    check_integral_input(genus, n, boundary, s)?;
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    let graphs = enumerate_trivalent(genus, n)?;
    mc_integral_over(&graphs, boundary, s, samples, seed, sampling)
}

/// [`mc_integral`] over an explicit list of face-labelled trivalent graphs.
pub fn mc_integral_over(
    graphs: &[RibbonGraph],
    boundary: &[BigRational],
    s: f64,
    samples: u64,
    seed: u64,
    sampling: Sampling,
) -> Result<IntegralEstimate> {
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    let (genus, n) = graphs.first().ok_or(Error::NoSamples)?.graph_type();
    let divergent = match closed_form_threshold(genus, n)? {
        Threshold::Finite(q) => s >= q.to_f64().unwrap_or(f64::INFINITY),
        Threshold::Infinite => false,
    };
    let (cells, measures) = build_cells(graphs, boundary)?;
    let (per_cell, total_samples) = match sampling {
        Sampling::BoundingBox => bounding_box(&cells, s, samples, seed),
        _ => stratified(&cells, &measures, s, samples, seed, sampling),
    };
    let breakdown: Vec<CellContribution> = per_cell
        .iter()
        .enumerate()
        .map(|(k, &(v, var))| CellContribution {
            graph: cells[k].graph_index,
            automorphisms: cells[k].automorphisms,
            value: v,
            std_error: var.sqrt(),
        })
        .collect();
    let value = per_cell.iter().map(|c| c.0).sum();
    let std_error = per_cell.iter().map(|c| c.1).sum::<f64>().sqrt();
    Ok(IntegralEstimate { value, std_error, samples: total_samples, seed, sampling, breakdown, divergent })
}

fn evaluate_at(cell: &Cell, bary: &[f64], simplex: &[usize], point: &mut [f64], s: f64) -> f64 {
    point.iter_mut().for_each(|x| *x = 0.0);
    for (b, &k) in bary.iter().zip(simplex) {
        for (p, v) in point.iter_mut().zip(&cell.vertices[k]) {
            *p += b * v;
        }
    }
    match cell.form.evaluate::<f64>(point) {
        Ok(v) => power(v, s),
        Err(_) => 0.0,
    }
}

fn strata_for(cells: &[Cell], measures: &[(usize, BigRational)], sampling: Sampling) -> Vec<Stratum> {
    let mut strata = Vec::new();
    let mut simplex_index = vec![0usize; cells.len()];
    for (cell, m) in measures {
        let k = simplex_index[*cell];
        simplex_index[*cell] += 1;
        let base = ratio_to_f64(m) / cells[*cell].automorphisms as f64;
        let dim = cells[*cell].simplices[k].len() - 1;
        let mut pieces = Vec::new();
        if sampling == Sampling::Uniform || dim == 0 {
            pieces.push(Piece::Whole);
        } else {
            if dim >= 2 {
                pieces.push(Piece::Middle);
            }
            for corner in 0..=dim {
                for level in 1..CORNER_LEVELS {
                    pieces.push(Piece::Shell { corner, level });
                }
                pieces.push(Piece::Tip { corner, level: CORNER_LEVELS });
            }
        }
        for piece in pieces {
            strata.push(Stratum { cell: *cell, simplex: k, piece, weight: base * piece.fraction(dim) });
        }
    }
    strata
}

fn run_stratum(cells: &[Cell], st: &Stratum, s: f64, count: u64, seed: u64, stream: u64) -> Welford {
    let cell = &cells[st.cell];
    let simplex = &cell.simplices[st.simplex];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut bary = vec![0.0; simplex.len()];
    let mut point = vec![0.0; cell.vertices[0].len()];
    let mut acc = Welford::default();
    for _ in 0..count {
        st.piece.sample(&mut rng, simplex.len() - 1, &mut bary);
        acc.push(evaluate_at(cell, &bary, simplex, &mut point, s));
    }
    acc
}

fn stratified(
    cells: &[Cell],
    measures: &[(usize, BigRational)],
    s: f64,
    samples: u64,
    seed: u64,
    sampling: Sampling,
) -> (Vec<(f64, f64)>, u64) {
    let strata = strata_for(cells, measures, sampling);
    let total_weight: f64 = strata.iter().map(|t| t.weight).sum();
    let k = strata.len() as u64;
    let pilot = if sampling == Sampling::Uniform { 0 } else { (samples / (10 * k)).clamp(8, 512) };
    let scores: Vec<f64> = strata
        .par_iter()
        .enumerate()
        .map(|(i, st)| {
            if pilot == 0 {
                st.weight
            } else {
                let w = run_stratum(cells, st, s, pilot, seed, 2 * i as u64 + 1);
                st.weight * w.variance().sqrt()
            }
        })
        .collect();
    let score_sum: f64 = scores.iter().sum();
    let budget = samples.saturating_sub(pilot * k).max(2 * k) as f64;
    let alloc: Vec<u64> = strata
        .iter()
        .zip(&scores)
        .map(|(st, &sc)| {
            let share = if score_sum > 0.0 { sc / score_sum } else { st.weight / total_weight };
            ((budget * share).round() as u64).max(2)
        })
        .collect();
    let results: Vec<Welford> = strata
        .par_iter()
        .enumerate()
        .map(|(i, st)| run_stratum(cells, st, s, alloc[i], seed, 2 * i as u64))
        .collect();
    let mut per_cell = vec![(0.0, 0.0); cells.len()];
    let mut used = 0;
    for (st, w) in strata.iter().zip(&results) {
        per_cell[st.cell].0 += st.weight * w.mean;
        per_cell[st.cell].1 += st.weight * st.weight * w.variance() / w.n as f64;
        used += w.n;
    }
    (per_cell, used + pilot * k)
}

fn bounding_box(cells: &[Cell], s: f64, samples: u64, seed: u64) -> (Vec<(f64, f64)>, u64) {
    let total: f64 = cells.iter().map(|c| c.anchor.weight).sum();
    let per: Vec<u64> =
        cells.iter().map(|c| ((samples as f64 * c.anchor.weight / total).round() as u64).max(2)).collect();
    let out: Vec<(f64, f64)> = cells
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let chart = &cell.anchor;
            let mut point = vec![0.0; chart.base.len()];
            let mut acc = Welford::default();
            for _ in 0..per[i] {
                point.copy_from_slice(&chart.base);
                for (ray, &hi) in chart.rays.iter().zip(&chart.upper) {
                    let x = rng.gen::<f64>() * hi;
                    for (p, r) in point.iter_mut().zip(ray) {
                        *p += r * x;
                    }
                }
                let inside = point.iter().all(|&p| p > 0.0);
                let v = if inside { cell.form.evaluate::<f64>(&point).map(|b| power(b, s)).unwrap_or(0.0) } else { 0.0 };
                acc.push(v);
            }
            (chart.weight * acc.mean, chart.weight * chart.weight * acc.variance() / acc.n as f64)
        })
        .collect();
    (out, per.iter().sum())
}

/// Integral of `f` over the part of `(0, 1]^dim` where the smallest
/// coordinate lies in `(2^{-k-1}, 2^{-k}]`, in logarithmic coordinates with
/// a tensor Gauss rule of `points` nodes per unit interval.
pub fn log_shell<F: FnMut(&[f64]) -> f64>(dim: usize, k: u32, points: usize, mut f: F) -> f64 {
    let rule = gauss_legendre_unit(points);
    let ln2 = std::f64::consts::LN_2;
    let mut total = 0.0;
    for top in 1u64..(1u64 << dim) {
        let mut axes: Vec<Vec<(f64, f64)>> = Vec::with_capacity(dim);
        for j in 0..dim {
            let range = if (top >> j) & 1 == 1 { k..k + 1 } else { 0..k };
            let mut nodes = Vec::new();
            for unit in range {
                for &(x, w) in &rule {
                    let u = unit as f64 + x;
                    let xj = (-u * ln2).exp();
                    nodes.push((xj, w * ln2 * xj));
                }
            }
            axes.push(nodes);
        }
        if axes.iter().any(Vec::is_empty) {
            continue;
        }
        let mut idx = vec![0usize; dim];
        let mut x = vec![0.0; dim];
        loop {
            let mut weight = 1.0;
            for j in 0..dim {
                let (xj, wj) = axes[j][idx[j]];
                x[j] = xj;
                weight *= wj;
            }
            total += weight * f(&x);
            let mut j = 0;
            while j < dim {
                idx[j] += 1;
                if idx[j] < axes[j].len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == dim {
                break;
            }
        }
    }
    total
}

/// Shell contribution of `P^{-s}` near the origin of the unit cube.
pub fn product_shell(p: &LinearFormProduct, s: f64, k: u32) -> f64 {
    log_shell(p.vars(), k, 4, |x| p.evaluate(x).powf(-s))
}

/// Growth of the integral near the worst cell vertex as the excluded
/// neighbourhood shrinks.
#[derive(Clone, Debug, Serialize)]
pub struct DivergenceReport {
    pub local_threshold: Threshold,
    pub vertex_support: Vec<usize>,
    pub deltas: Vec<f64>,
    /// Integral over `{delta < x_e <= rho}` in the vertex chart.
    pub values: Vec<f64>,
    /// Ratio of the last shell contribution to the one at half the depth.
    pub shell_ratio: f64,
    pub diverging: bool,
}

/// Shell ratio at or above which a ladder is declared divergent.
pub const DIVERGENCE_RATIO: f64 = 0.8;

/// Integrates `B^s` near the cell vertex with the smallest local threshold on
/// dyadic shells `2^{-k-1} rho < min x_e <= 2^{-k} rho`, `k < depth`.
pub fn divergence_probe(genus: usize, n: usize, boundary: &[BigRational], s: f64, depth: u32) -> Result<DivergenceReport> {
    check_integral_input(genus, n, boundary, s)?;
    if depth < 2 {
        return Err(Error::Invalid("depth must be at least 2".into()));
    }
    let graphs = enumerate_trivalent(genus, n)?;
    let mut worst: Option<(Threshold, usize, CellVertex)> = None;
    for (k, g) in graphs.iter().enumerate() {
        for v in cell_vertices(g, boundary)? {
            let t = local_threshold(g, boundary, &v)?.value;
            if worst.as_ref().map_or(true, |w| t < w.0) {
                worst = Some((t, k, v));
            }
        }
    }
    let (threshold, k, vertex) = worst.ok_or(Error::NoFullCone)?;
    let g = &graphs[k];
    let form = bvol_form(g)?;
    let rays: Vec<Vec<f64>> = tangent_rays(g, &vertex)?.iter().map(|r| to_f64(r)).collect();
    let base = to_f64(&vertex.lambda);
    let density = ratio_to_f64(&vertex.density);
    let mut rho = f64::INFINITY;
    for &f in &vertex.support {
        let spread: f64 = rays.iter().map(|r| r[f].abs()).sum();
        if spread > 0.0 {
            rho = rho.min(base[f] / (2.0 * spread));
        }
    }
    let rho = if rho.is_finite() { rho.min(1.0) } else { 1.0 };
    let dim = vertex.vanishing.len();
    let mut point = vec![0.0; base.len()];
    let mut shell = |j: u32| {
        let scale = rho.powi(dim as i32) * density;
        scale
            * log_shell(dim, j, 3, |x| {
                point.copy_from_slice(&base);
                for (r, &xi) in rays.iter().zip(x) {
                    for (p, ri) in point.iter_mut().zip(r) {
                        *p += ri * xi * rho;
                    }
                }
                form.evaluate::<f64>(&point).map(|b| power(b, s)).unwrap_or(0.0)
            })
    };
    let increments: Vec<f64> = (0..depth).map(&mut shell).collect();
    let mut values = Vec::with_capacity(increments.len());
    let mut acc = 0.0;
    for inc in &increments {
        acc += inc;
        values.push(acc);
    }
    let deltas = (0..depth).map(|j| rho * 2f64.powi(-(j as i32) - 1)).collect();
    let last = increments[depth as usize - 1];
    let mid = increments[(depth as usize - 1) / 2];
    let shell_ratio = if mid > 0.0 { last / mid } else { 0.0 };
    Ok(DivergenceReport {
        local_threshold: threshold,
        vertex_support: vertex.support,
        deltas,
        values,
        shell_ratio,
        diverging: shell_ratio >= DIVERGENCE_RATIO,
    })
}
