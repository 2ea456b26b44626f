//! Integrability thresholds.
//!
//! Products of linear forms with non-negative coefficients have an exponent
//! `s_hat` below which `P^{-s}` is integrable near the origin of the unit cube.
//! On moduli spaces the same exponent is attached to subgraphs: the number of
//! edges over the dimension of the bordered measured-foliation space of the
//! subsurface they span. The global threshold minimises over cell vertices.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::cells::{is_nonresonant, is_support_set, support_matrix, support_sets, CellVertex};
use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{maximize, LpOutcome};
use crate::ribbon::{enumerate_trivalent_unlabelled, next_permutation, restriction_types, ComponentType, RibbonGraph, SurfaceType};
use crate::scalar::{format_rational, int, ratio};

/// A positive rational exponent or `+infinity`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Threshold {
    Finite(BigRational),
    Infinite,
}

impl Threshold {
    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Threshold::Finite(q) => Some(q),
            Threshold::Infinite => None,
        }
    }
}

impl PartialOrd for Threshold {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Threshold {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Threshold::Finite(a), Threshold::Finite(b)) => a.cmp(b),
            (Threshold::Finite(_), Threshold::Infinite) => Ordering::Less,
            (Threshold::Infinite, Threshold::Finite(_)) => Ordering::Greater,
            (Threshold::Infinite, Threshold::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Finite(q) => f.write_str(&format_rational(q)),
            Threshold::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Product of `d` linear forms in `e` variables, described by the supports of
/// the forms and optional coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearFormProduct {
    vars: usize,
    supports: Vec<u64>,
    coefficients: Option<Vec<Vec<BigRational>>>,
}

impl LinearFormProduct {
    /// From a `d x e` 0/1 adjacency matrix.
    pub fn from_adjacency(adjacency: &[Vec<u8>]) -> Result<Self> {
        let vars = adjacency.first().map_or(0, Vec::len);
        if vars == 0 || vars > 63 || adjacency.iter().any(|r| r.len() != vars) {
            return Err(Error::Invalid("adjacency rows must share a length in 1..=63".into()));
        }
        let supports: Vec<u64> = adjacency
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, &a)| a != 0).fold(0u64, |m, (j, _)| m | 1 << j))
            .collect();
        if supports.iter().any(|&s| s == 0) {
            return Err(Error::Invalid("every form needs a nonzero coefficient".into()));
        }
        Ok(LinearFormProduct { vars, supports, coefficients: None })
    }

    /// From explicit non-negative coefficients.
    pub fn from_coefficients(coefficients: Vec<Vec<BigRational>>) -> Result<Self> {
        if coefficients.iter().flatten().any(|c| c.is_negative()) {
            return Err(Error::Invalid("coefficients must be non-negative".into()));
        }
        let adjacency: Vec<Vec<u8>> =
            coefficients.iter().map(|r| r.iter().map(|c| u8::from(!c.is_zero())).collect()).collect();
        let mut p = Self::from_adjacency(&adjacency)?;
        p.coefficients = Some(coefficients);
        Ok(p)
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn forms(&self) -> usize {
        self.supports.len()
    }

    pub fn supports(&self) -> &[u64] {
        &self.supports
    }

    pub fn adjacency(&self) -> Vec<Vec<u8>> {
        self.supports.iter().map(|&s| (0..self.vars).map(|j| ((s >> j) & 1) as u8).collect()).collect()
    }

    /// Value at `x`, with unit coefficients when none were given.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let mut prod = 1.0;
        for (i, &s) in self.supports.iter().enumerate() {
            let mut sum = 0.0;
            for (j, xj) in x.iter().enumerate().take(self.vars) {
                if (s >> j) & 1 == 1 {
                    let c = self.coefficients.as_ref().map_or(1.0, |c| crate::scalar::ratio_to_f64(&c[i][j]));
                    sum += c * xj;
                }
            }
            prod *= sum;
        }
        prod
    }
}

/// `s_hat = min_J #J / #{i : supp P_i within J}` over `J` with a nonzero count.
pub fn shat_product(p: &LinearFormProduct) -> BigRational {
    let mut best: Option<BigRational> = None;
    for j in 1u64..(1u64 << p.vars) {
        let count = p.supports.iter().filter(|&&s| s & !j == 0).count();
        if count == 0 {
            continue;
        }
        let q = ratio(j.count_ones() as i64, count as i64);
        if best.as_ref().map_or(true, |b| q < *b) {
            best = Some(q);
        }
    }
    best.expect("the full variable set contains every support")
}

/// Literal transcription `1/s = max_J (1/#J) sum_i min_{j in J} A_ij`, which
/// counts forms whose support contains `J`.
pub fn shat_product_literal(p: &LinearFormProduct) -> Threshold {
    let mut best = BigRational::zero();
    for j in 1u64..(1u64 << p.vars) {
        let count = p.supports.iter().filter(|&&s| j & !s == 0).count();
        let q = ratio(count as i64, j.count_ones() as i64);
        if q > best {
            best = q;
        }
    }
    if best.is_zero() {
        Threshold::Infinite
    } else {
        Threshold::Finite(best.recip())
    }
}

/// `s_hat` from the linear program `min_alpha max_j sum_i alpha_ij` with
/// `0 <= alpha_ij <= A_ij` and `sum_j alpha_ij >= 1`.
pub fn shat_product_lp(p: &LinearFormProduct) -> BigRational {
    let pairs: Vec<(usize, usize)> = p
        .supports
        .iter()
        .enumerate()
        .flat_map(|(i, &s)| (0..p.vars).filter(move |&j| (s >> j) & 1 == 1).map(move |j| (i, j)))
        .collect();
    let t = pairs.len();
    let width = t + 1;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for j in 0..p.vars {
        let mut row = vec![BigRational::zero(); width];
        for (k, &(_, jj)) in pairs.iter().enumerate() {
            if jj == j {
                row[k] = BigRational::one();
            }
        }
        row[t] = -BigRational::one();
        a.push(row);
        b.push(BigRational::zero());
    }
    for k in 0..t {
        let mut row = vec![BigRational::zero(); width];
        row[k] = BigRational::one();
        a.push(row);
        b.push(BigRational::one());
    }
    for i in 0..p.forms() {
        let mut row = vec![BigRational::zero(); width];
        for (k, &(ii, _)) in pairs.iter().enumerate() {
            if ii == i {
                row[k] = -BigRational::one();
            }
        }
        a.push(row);
        b.push(-BigRational::one());
    }
    let mut c = vec![BigRational::zero(); width];
    c[t] = -BigRational::one();
    match maximize(&c, &a, &b) {
        LpOutcome::Optimal { value, .. } => (-value).recip(),
        other => unreachable!("bounded feasible program, got {other:?}"),
    }
}

/// Dimension of the bordered measured-foliation space of one component.
pub fn component_dim(genus: usize, boundaries: usize) -> usize {
    match (genus, boundaries) {
        (0, 0) | (0, 1) => 0,
        (0, 2) => 1,
        _ => 6 * genus + 3 * boundaries - 6,
    }
}

/// Sum of [`component_dim`] over the components.
pub fn dim_mf_bullet(t: &SurfaceType) -> usize {
    t.components.iter().map(|c| component_dim(c.genus, c.boundaries)).sum()
}

/// Exponent of a subgraph with its component data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubgraphScore {
    pub edges: Vec<usize>,
    pub components: Vec<(usize, usize)>,
    pub bivalent: Vec<usize>,
    pub dim: usize,
    pub shat: Threshold,
}

fn mask_of(edges: &[usize]) -> u64 {
    edges.iter().fold(0, |m, &e| m | 1 << e)
}

fn edges_of(mask: u64) -> Vec<usize> {
    (0..64).filter(|e| (mask >> e) & 1 == 1).collect()
}

fn score_from(mask: u64, comps: &[ComponentType]) -> SubgraphScore {
    let dim: usize = comps.iter().map(|c| component_dim(c.genus, c.boundaries)).sum();
    let count = mask.count_ones() as i64;
    let shat = if dim == 0 { Threshold::Infinite } else { Threshold::Finite(ratio(count, dim as i64)) };
    SubgraphScore {
        edges: edges_of(mask),
        components: comps.iter().map(|c| (c.genus, c.boundaries)).collect(),
        bivalent: comps.iter().map(|c| c.bivalent).collect(),
        dim,
        shat,
    }
}

/// `#E' / dim` for the subsurface spanned by the edges `subset`.
pub fn shat_subgraph(g: &RibbonGraph, subset: &[usize]) -> Result<SubgraphScore> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    if subset.iter().any(|&e| e >= g.num_edges()) {
        return Err(Error::Invalid("edge index out of range".into()));
    }
    let mask = mask_of(subset);
    Ok(score_from(mask, &restriction_types(g, mask)))
}

/// Closed form for a connected component without univalent vertices:
/// `v2` on a cylinder, `1 + v2 / (6g - 6 + 3n)` otherwise.
pub fn shat_closed_form(c: &ComponentType) -> Option<BigRational> {
    if c.univalent > 0 {
        return None;
    }
    match (c.genus, c.boundaries) {
        (0, 1) => None,
        (0, 2) => Some(int(c.bivalent as i64)),
        (g, n) => Some(BigRational::one() + ratio(c.bivalent as i64, (6 * g + 3 * n - 6) as i64)),
    }
}

/// Per-graph incidence data for fast subgraph filtering.
struct Skeleton {
    vertex_edges: Vec<Vec<usize>>,
    ends: Vec<[usize; 2]>,
}

impl Skeleton {
    fn new(g: &RibbonGraph) -> Self {
        let vertex_edges =
            (0..g.num_vertices()).map(|v| g.vertex_darts(v).iter().map(|&d| g.edge_of(d)).collect()).collect();
        let ends = (0..g.num_edges()).map(|e| g.edge_ends(e)).collect();
        Skeleton { vertex_edges, ends }
    }

    /// Connected with no univalent vertex.
    fn is_relevant(&self, mask: u64) -> bool {
        for edges in &self.vertex_edges {
            if edges.iter().filter(|&&e| (mask >> e) & 1 == 1).count() == 1 {
                return false;
            }
        }
        let nv = self.vertex_edges.len();
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut root = None;
        for (e, &[a, b]) in self.ends.iter().enumerate() {
            if (mask >> e) & 1 == 1 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
                root.get_or_insert(a);
            }
        }
        let Some(r0) = root else { return false };
        let r0 = find(&mut parent, r0);
        self.ends
            .iter()
            .enumerate()
            .filter(|(e, _)| (mask >> e) & 1 == 1)
            .all(|(_, &[a, _])| find(&mut parent, a) == r0)
    }
}

/// Connected subgraphs without univalent vertices and with finite exponent,
/// sorted by exponent then mask.
pub struct SubgraphTable {
    entries: Vec<(BigRational, u64)>,
}

impl SubgraphTable {
    pub fn new(g: &RibbonGraph) -> Self {
        let sk = Skeleton::new(g);
        let mut entries = Vec::new();
        for mask in 1u64..(1u64 << g.num_edges()) {
            if !sk.is_relevant(mask) {
                continue;
            }
            let comps = restriction_types(g, mask);
            let dim: usize = comps.iter().map(|c| component_dim(c.genus, c.boundaries)).sum();
            if dim > 0 {
                entries.push((ratio(mask.count_ones() as i64, dim as i64), mask));
            }
        }
        entries.sort();
        SubgraphTable { entries }
    }

    /// Smallest exponent among subgraphs inside `allowed`, with its mask.
    pub fn best_within(&self, allowed: u64) -> Option<(&BigRational, u64)> {
        self.entries.iter().find(|(_, m)| m & !allowed == 0).map(|(q, m)| (q, *m))
    }
}

/// Local threshold at a vertex together with a minimising subgraph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalThreshold {
    pub value: Threshold,
    pub witness: Option<SubgraphScore>,
}

fn local_from_table(g: &RibbonGraph, table: &SubgraphTable, vanishing: u64) -> LocalThreshold {
    match table.best_within(vanishing) {
        Some((q, mask)) => LocalThreshold {
            value: Threshold::Finite(q.clone()),
            witness: Some(score_from(mask, &restriction_types(g, mask))),
        },
        None => LocalThreshold { value: Threshold::Infinite, witness: None },
    }
}

fn check_vertex(g: &RibbonGraph, boundary: &[BigRational], vertex: &CellVertex) -> Result<()> {
    if !g.is_trivalent() {
        return Err(Error::NotTrivalent);
    }
    if boundary.len() != g.num_faces() {
        return Err(Error::LengthMismatch { expected: g.num_faces(), got: boundary.len() });
    }
    if !is_nonresonant(boundary) {
        return Err(Error::Resonant);
    }
    if !is_support_set(g, &vertex.support) {
        return Err(Error::Invalid("vertex support is not a support set".into()));
    }
    Ok(())
}

/// Minimum exponent over connected subgraphs without univalent vertices inside
/// the vanishing set of `vertex`.
pub fn local_threshold(g: &RibbonGraph, boundary: &[BigRational], vertex: &CellVertex) -> Result<LocalThreshold> {
    check_vertex(g, boundary, vertex)?;
    Ok(local_from_table(g, &SubgraphTable::new(g), mask_of(&vertex.vanishing)))
}

/// Minimum over every nonempty subset of the vanishing set.
pub fn local_threshold_unpruned(g: &RibbonGraph, boundary: &[BigRational], vertex: &CellVertex) -> Result<Threshold> {
    check_vertex(g, boundary, vertex)?;
    let vanishing = mask_of(&vertex.vanishing);
    let mut best = Threshold::Infinite;
    let mut sub = vanishing;
    while sub != 0 {
        let s = score_from(sub, &restriction_types(g, sub)).shat;
        if s < best {
            best = s;
        }
        sub = (sub - 1) & vanishing;
    }
    Ok(best)
}

/// Where a global minimum is attained.
#[derive(Clone, Debug, Serialize)]
pub struct ThresholdWitness {
    /// Face-labelled graph realising the minimum.
    pub graph: RibbonGraph,
    pub support: Vec<usize>,
    pub subgraph: SubgraphScore,
    /// Boundary lengths in face order of `graph`, when a length vector was
    /// given.
    #[serde(serialize_with = "ser_rationals")]
    pub boundary: Option<Vec<BigRational>>,
}

fn ser_rationals<S: serde::Serializer>(v: &Option<Vec<BigRational>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.as_ref().map(|v| v.iter().map(format_rational).collect::<Vec<_>>()).serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct GlobalThreshold {
    pub value: Threshold,
    pub witness: Option<ThresholdWitness>,
}

fn check_type(genus: usize, n: usize) -> Result<()> {
    if n == 0 || 2 * genus + n < 3 {
        return Err(Error::UnstableType(genus, n));
    }
    Ok(())
}

struct Candidate {
    value: Threshold,
    graph: usize,
    support: Vec<usize>,
    subgraph: Option<u64>,
}

fn candidates(graphs: &[RibbonGraph]) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (k, g) in graphs.iter().enumerate() {
        let table = SubgraphTable::new(g);
        let all = (1u64 << g.num_edges()) - 1;
        for s in support_sets(g) {
            let allowed = all & !mask_of(&s);
            let (value, subgraph) = match table.best_within(allowed) {
                Some((q, m)) => (Threshold::Finite(q.clone()), Some(m)),
                None => (Threshold::Infinite, None),
            };
            out.push(Candidate { value, graph: k, support: s, subgraph });
        }
    }
    out.sort_by(|a, b| a.value.cmp(&b.value));
    out
}

fn witness(graphs: &[RibbonGraph], c: &Candidate, boundary: Option<Vec<BigRational>>, labels: Option<&[usize]>) -> Result<ThresholdWitness> {
    let g = &graphs[c.graph];
    let graph = match labels {
        Some(l) => g.relabel_faces(l)?,
        None => g.clone(),
    };
    let mask = c.subgraph.unwrap_or(0);
    let subgraph = if mask == 0 {
        SubgraphScore { edges: vec![], components: vec![], bivalent: vec![], dim: 0, shat: Threshold::Infinite }
    } else {
        score_from(mask, &restriction_types(g, mask))
    };
    Ok(ThresholdWitness { graph, support: c.support.clone(), subgraph, boundary })
}

/// Universal mode: minimum over all trivalent graphs, all support sets and
/// all subgraphs avoiding the support set.
pub fn global_threshold_universal(genus: usize, n: usize) -> Result<GlobalThreshold> {
    check_type(genus, n)?;
    let graphs = enumerate_trivalent_unlabelled(genus, n)?;
    let cands = candidates(&graphs);
    let best = cands.first().ok_or(Error::NoFullCone)?;
    Ok(GlobalThreshold { value: best.value.clone(), witness: Some(witness(&graphs, best, None, None)?) })
}

/// Fixed-length mode: minimum of the local thresholds over all face-labelled
/// trivalent graphs and all vertices of their cells at `boundary`.
pub fn global_threshold_at(genus: usize, n: usize, boundary: &[BigRational]) -> Result<GlobalThreshold> {
    check_type(genus, n)?;
    if boundary.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: boundary.len() });
    }
    if boundary.iter().any(|l| !l.is_positive()) {
        return Err(Error::NonPositiveLength);
    }
    if !is_nonresonant(boundary) {
        return Err(Error::Resonant);
    }
    let graphs = enumerate_trivalent_unlabelled(genus, n)?;
    for c in candidates(&graphs) {
        let g = &graphs[c.graph];
        let m: Vec<Vec<BigRational>> =
            support_matrix(g, &c.support).into_iter().map(|r| r.into_iter().map(int).collect()).collect();
        let inv = linalg::inverse(&m).ok_or_else(|| Error::InvalidGraph("singular support matrix".into()))?;
        let mut perm: Vec<usize> = (0..n).collect();
        loop {
            let rhs: Vec<BigRational> = perm.iter().map(|&i| boundary[i].clone()).collect();
            if linalg::mat_vec(&inv, &rhs).iter().all(|v| v.is_positive()) {
                let labels: Vec<usize> = perm.iter().map(|&i| i + 1).collect();
                let w = witness(&graphs, &c, Some(rhs), Some(&labels))?;
                return Ok(GlobalThreshold { value: c.value, witness: Some(w) });
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }
    Err(Error::Invalid("no cell vertex found".into()))
}

/// The tabulated threshold.
pub fn closed_form_threshold(genus: usize, n: usize) -> Result<Threshold> {
    check_type(genus, n)?;
    let g = genus as i64;
    let value = match (genus, n) {
        (0, 3) => return Ok(Threshold::Infinite),
        (0, 4) | (0, 5) | (1, 1) => int(2),
        (0, _) => ratio(4, 3) + ratio(2, 3) / int(n as i64 / 2 - 2),
        (1, _) => ratio(4, 3),
        (_, 1) => BigRational::one() + ratio(1, 3 * (2 * g - 3)),
        _ => BigRational::one() + ratio(1, 3 * (2 * g - 1)),
    };
    Ok(Threshold::Finite(value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::cell_vertices;
    use crate::ribbon::catalog;

    #[test]
    fn appendix_examples() {
        let x = LinearFormProduct::from_adjacency(&[vec![1]]).unwrap();
        let xy = LinearFormProduct::from_adjacency(&[vec![1, 1]]).unwrap();
        let tri = LinearFormProduct::from_adjacency(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
        assert_eq!(shat_product(&x), int(1));
        assert_eq!(shat_product(&xy), int(2));
        assert_eq!(shat_product(&tri), int(1));
        assert_eq!(shat_product_lp(&xy), int(2));
        assert_eq!(shat_product_lp(&tri), int(1));
        assert_eq!(shat_product_literal(&xy), Threshold::Finite(int(1)));
    }

    #[test]
    fn theta_local() {
        let t = catalog::theta();
        let v = cell_vertices(&t, &[int(6)]).unwrap();
        let loc = local_threshold(&t, &[int(6)], &v[0]).unwrap();
        assert_eq!(loc.value, Threshold::Finite(int(2)));
        assert_eq!(local_threshold_unpruned(&t, &[int(6)], &v[0]).unwrap(), loc.value);
    }

    #[test]
    fn table() {
        assert_eq!(closed_form_threshold(0, 3).unwrap(), Threshold::Infinite);
        assert_eq!(closed_form_threshold(0, 8).unwrap(), Threshold::Finite(ratio(5, 3)));
        assert_eq!(closed_form_threshold(2, 2).unwrap(), Threshold::Finite(ratio(10, 9)));
        assert_eq!(closed_form_threshold(3, 2).unwrap(), Threshold::Finite(ratio(16, 15)));
        assert_eq!(closed_form_threshold(2, 1).unwrap(), Threshold::Finite(ratio(4, 3)));
    }

    #[test]
    fn small_global() {
        assert_eq!(global_threshold_universal(1, 1).unwrap().value, Threshold::Finite(int(2)));
        assert_eq!(global_threshold_universal(0, 3).unwrap().value, Threshold::Infinite);
        assert_eq!(global_threshold_at(0, 4, &crate::cells::default_lengths(4, &int(10))).unwrap().value, Threshold::Finite(int(2)));
    }
}
