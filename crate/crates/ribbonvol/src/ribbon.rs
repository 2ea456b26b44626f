//! Ribbon graphs as dart permutations.
//!
//! A graph on `2E` darts is a rotation `sigma` (cycles are vertices) and a
//! fixed-point-free involution `iota` (cycles are edges). Faces are the orbits
//! of `d -> iota(sigma(d))`. Face labels live on darts and must be constant on
//! each face.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const UNSET: usize = usize::MAX;

/// Largest dart count accepted by the trivalent enumerator.
pub const TRIVALENT_DART_CAP: usize = 30;
/// Largest dart count accepted by the reduced enumerator.
pub const REDUCED_DART_CAP: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Topology {
    vertex_of: Vec<usize>,
    vertices: Vec<Vec<usize>>,
    edge_of: Vec<usize>,
    edges: Vec<[usize; 2]>,
    face_of: Vec<usize>,
    faces: Vec<Vec<usize>>,
}

/// Connected, face-labelled ribbon graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphWire", into = "GraphWire")]
pub struct RibbonGraph {
    sigma: Vec<usize>,
    iota: Vec<usize>,
    face_labels: Vec<usize>,
    topo: Topology,
}

#[derive(Serialize, Deserialize)]
struct GraphWire {
    darts: usize,
    sigma: Vec<usize>,
    iota: Vec<usize>,
    face_labels: Vec<usize>,
}

impl TryFrom<GraphWire> for RibbonGraph {
    type Error = Error;
    fn try_from(w: GraphWire) -> Result<Self> {
        if w.sigma.len() != w.darts {
            return Err(Error::InvalidGraph("dart count disagrees with sigma".into()));
        }
        RibbonGraph::new(w.sigma, w.iota, w.face_labels)
    }
}

impl From<RibbonGraph> for GraphWire {
    fn from(g: RibbonGraph) -> Self {
        GraphWire { darts: g.sigma.len(), sigma: g.sigma, iota: g.iota, face_labels: g.face_labels }
    }
}

fn orbits(perm: &[usize]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut owner = vec![UNSET; perm.len()];
    let mut cycles = Vec::new();
    for start in 0..perm.len() {
        if owner[start] != UNSET {
            continue;
        }
        let mut cycle = Vec::new();
        let mut d = start;
        while owner[d] == UNSET {
            owner[d] = cycles.len();
            cycle.push(d);
            d = perm[d];
        }
        cycles.push(cycle);
    }
    (owner, cycles)
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&x| x < p.len() && !std::mem::replace(&mut seen[x], true))
}

impl RibbonGraph {
    /// Builds and validates a face-labelled graph. `face_labels[d]` is the label
    /// (1-based) of the face containing dart `d`.
    pub fn new(sigma: Vec<usize>, iota: Vec<usize>, face_labels: Vec<usize>) -> Result<Self> {
        let topo = Self::topology(&sigma, &iota)?;
        if face_labels.len() != sigma.len() {
            return Err(Error::InvalidGraph("face label count disagrees with darts".into()));
        }
        let n = topo.faces.len();
        let mut label_of_face = vec![0usize; n];
        for (f, darts) in topo.faces.iter().enumerate() {
            let l = face_labels[darts[0]];
            if darts.iter().any(|&d| face_labels[d] != l) {
                return Err(Error::InvalidGraph("face labels vary along a face".into()));
            }
            label_of_face[f] = l;
        }
        let mut sorted = label_of_face.clone();
        sorted.sort_unstable();
        if sorted != (1..=n).collect::<Vec<_>>() {
            return Err(Error::InvalidGraph("face labels are not a bijection onto 1..n".into()));
        }
        let mut g = RibbonGraph { sigma, iota, face_labels, topo };
        g.order_faces_by_label();
        Ok(g)
    }

    /// Builds a graph whose faces are labelled in order of their smallest dart.
    pub fn unlabelled(sigma: Vec<usize>, iota: Vec<usize>) -> Result<Self> {
        let topo = Self::topology(&sigma, &iota)?;
        let mut labels = vec![0; sigma.len()];
        for (f, darts) in topo.faces.iter().enumerate() {
            for &d in darts {
                labels[d] = f + 1;
            }
        }
        Ok(RibbonGraph { sigma, iota, face_labels: labels, topo })
    }

    /// Same underlying map with labels given per current face index.
    pub fn relabel_faces(&self, label_per_face: &[usize]) -> Result<Self> {
        let labels = (0..self.num_darts()).map(|d| label_per_face[self.face_of(d)]).collect();
        Self::new(self.sigma.clone(), self.iota.clone(), labels)
    }

    fn topology(sigma: &[usize], iota: &[usize]) -> Result<Topology> {
        let m = sigma.len();
        if m == 0 || m % 2 != 0 || iota.len() != m {
            return Err(Error::InvalidGraph("need an even, positive number of darts".into()));
        }
        if !is_permutation(sigma) {
            return Err(Error::InvalidGraph("sigma is not a permutation".into()));
        }
        if (0..m).any(|d| iota[d] >= m || iota[d] == d || iota[iota[d]] != d) {
            return Err(Error::InvalidGraph("iota is not a fixed-point-free involution".into()));
        }
        let mut seen = vec![false; m];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(d) = stack.pop() {
            for x in [sigma[d], iota[d]] {
                if !seen[x] {
                    seen[x] = true;
                    stack.push(x);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidGraph("graph is disconnected".into()));
        }
        let (vertex_of, vertices) = orbits(sigma);
        let mut edge_of = vec![UNSET; m];
        let mut edges = Vec::new();
        for d in 0..m {
            if edge_of[d] == UNSET {
                edge_of[d] = edges.len();
                edge_of[iota[d]] = edges.len();
                edges.push([d, iota[d]]);
            }
        }
        let phi: Vec<usize> = (0..m).map(|d| iota[sigma[d]]).collect();
        let (face_of, faces) = orbits(&phi);
        let topo = Topology { vertex_of, vertices, edge_of, edges, face_of, faces };
        let chi = topo.vertices.len() as i64 - topo.edges.len() as i64 + topo.faces.len() as i64;
        if chi > 2 || (2 - chi) % 2 != 0 {
            return Err(Error::InvalidGraph("Euler characteristic is inconsistent".into()));
        }
        Ok(topo)
    }

    fn order_faces_by_label(&mut self) {
        let n = self.topo.faces.len();
        let mut faces = vec![Vec::new(); n];
        for f in std::mem::take(&mut self.topo.faces) {
            let idx = self.face_labels[f[0]] - 1;
            faces[idx] = f;
        }
        for (i, f) in faces.iter().enumerate() {
            for &d in f {
                self.topo.face_of[d] = i;
            }
        }
        self.topo.faces = faces;
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }
    pub fn iota(&self) -> &[usize] {
        &self.iota
    }
    /// Face label (1-based) of every dart.
    pub fn face_labels(&self) -> &[usize] {
        &self.face_labels
    }
    pub fn num_darts(&self) -> usize {
        self.sigma.len()
    }
    pub fn num_edges(&self) -> usize {
        self.topo.edges.len()
    }
    pub fn num_vertices(&self) -> usize {
        self.topo.vertices.len()
    }
    pub fn num_faces(&self) -> usize {
        self.topo.faces.len()
    }
    pub fn vertex_of(&self, d: usize) -> usize {
        self.topo.vertex_of[d]
    }
    pub fn edge_of(&self, d: usize) -> usize {
        self.topo.edge_of[d]
    }
    /// Zero-based face index; equals the face label minus one.
    pub fn face_of(&self, d: usize) -> usize {
        self.topo.face_of[d]
    }
    /// Darts of a vertex in rotation order.
    pub fn vertex_darts(&self, v: usize) -> &[usize] {
        &self.topo.vertices[v]
    }
    /// Darts of a face in boundary order.
    pub fn face_darts(&self, f: usize) -> &[usize] {
        &self.topo.faces[f]
    }
    /// The two darts of an edge, smaller first.
    pub fn edge_darts(&self, e: usize) -> [usize; 2] {
        self.topo.edges[e]
    }
    /// Endpoints of an edge.
    pub fn edge_ends(&self, e: usize) -> [usize; 2] {
        let [a, b] = self.topo.edges[e];
        [self.vertex_of(a), self.vertex_of(b)]
    }
    pub fn valency(&self, v: usize) -> usize {
        self.topo.vertices[v].len()
    }
    pub fn sigma_inv(&self, d: usize) -> usize {
        let mut x = d;
        loop {
            let nx = self.sigma[x];
            if nx == d {
                return x;
            }
            x = nx;
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    pub fn genus(&self) -> usize {
        ((2 - self.euler_characteristic()) / 2) as usize
    }

    /// `(genus, number of faces)`.
    pub fn graph_type(&self) -> (usize, usize) {
        (self.genus(), self.num_faces())
    }

    pub fn is_trivalent(&self) -> bool {
        self.topo.vertices.iter().all(|v| v.len() == 3)
    }

    pub fn is_reduced(&self) -> bool {
        self.topo.vertices.iter().all(|v| v.len() >= 3)
    }

    /// `a[i][e]`: number of darts of edge `e` on face `i` (0, 1 or 2).
    pub fn incidence(&self) -> Vec<Vec<i64>> {
        let mut a = vec![vec![0i64; self.num_edges()]; self.num_faces()];
        for d in 0..self.num_darts() {
            a[self.face_of(d)][self.edge_of(d)] += 1;
        }
        a
    }

    /// Edge-multiplicity vector of face `i`.
    pub fn face_vector(&self, i: usize) -> Vec<i64> {
        let mut v = vec![0; self.num_edges()];
        for &d in self.face_darts(i) {
            v[self.edge_of(d)] += 1;
        }
        v
    }

    /// Image of every dart under an automorphism candidate sending dart 0 to
    /// `target`, or `None` if no such map commutes with `sigma` and `iota`.
    fn propagate(&self, other: &RibbonGraph, source: usize, target: usize) -> Option<Vec<usize>> {
        let m = self.num_darts();
        if other.num_darts() != m {
            return None;
        }
        let mut map = vec![UNSET; m];
        let mut used = vec![false; m];
        map[source] = target;
        used[target] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(d) = queue.pop_front() {
            let img = map[d];
            for (x, y) in [(self.sigma[d], other.sigma[img]), (self.iota[d], other.iota[img])] {
                if map[x] == UNSET {
                    if used[y] {
                        return None;
                    }
                    map[x] = y;
                    used[y] = true;
                    queue.push_back(x);
                } else if map[x] != y {
                    return None;
                }
            }
        }
        Some(map)
    }

    /// All dart maps commuting with `sigma` and `iota`, optionally also
    /// preserving face labels; sorted lexicographically.
    pub fn dart_automorphisms(&self, preserve_labels: bool) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = (0..self.num_darts())
            .filter_map(|t| self.propagate(self, 0, t))
            .filter(|h| !preserve_labels || (0..h.len()).all(|d| self.face_labels[d] == self.face_labels[h[d]]))
            .collect();
        out.sort();
        out
    }

    /// Whether a label-preserving isomorphism exists.
    pub fn is_isomorphic(&self, other: &RibbonGraph) -> bool {
        if self.num_darts() != other.num_darts() || self.num_faces() != other.num_faces() {
            return false;
        }
        (0..other.num_darts()).any(|t| {
            self.propagate(other, 0, t)
                .is_some_and(|h| (0..h.len()).all(|d| self.face_labels[d] == other.face_labels[h[d]]))
        })
    }

    /// Breadth-first code from `root`: for each dart in discovery order, the
    /// discovery ranks of its `sigma` and `iota` images and its face label (0
    /// when labels are ignored).
    pub fn code_from(&self, root: usize, with_labels: bool) -> Vec<(usize, usize, usize)> {
        let m = self.num_darts();
        let mut rank = vec![UNSET; m];
        let mut order = Vec::with_capacity(m);
        rank[root] = 0;
        order.push(root);
        let mut i = 0;
        let mut code = Vec::with_capacity(m);
        while i < order.len() {
            let d = order[i];
            for x in [self.sigma[d], self.iota[d]] {
                if rank[x] == UNSET {
                    rank[x] = order.len();
                    order.push(x);
                }
            }
            let label = if with_labels { self.face_labels[d] } else { 0 };
            code.push((rank[self.sigma[d]], rank[self.iota[d]], label));
            i += 1;
        }
        code
    }

    /// Isomorphism invariant: the least breadth-first code over all roots.
    pub fn canonical_code(&self, with_labels: bool) -> Vec<(usize, usize, usize)> {
        (0..self.num_darts())
            .map(|r| self.code_from(r, with_labels))
            .min()
            .expect("graph has darts")
    }

    /// Rebuilds the graph in its canonical dart numbering.
    pub fn canonical(&self) -> RibbonGraph {
        let code = self.canonical_code(true);
        let sigma = code.iter().map(|c| c.0).collect();
        let iota = code.iter().map(|c| c.1).collect();
        let labels = code.iter().map(|c| c.2).collect();
        RibbonGraph::new(sigma, iota, labels).expect("canonical relabelling of a valid graph")
    }
}

/// Automorphisms of a face-labelled graph.
#[derive(Clone, Debug, Serialize)]
pub struct AutomorphismGroup {
    pub order: usize,
    pub elements: Vec<Vec<usize>>,
    pub generators: Vec<Vec<usize>>,
    /// Edge permutation induced by each element.
    pub edge_action: Vec<Vec<usize>>,
    pub edge_image_order: usize,
    pub edge_kernel_order: usize,
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&x| a[x]).collect()
}

fn closure(gens: &[Vec<usize>], m: usize) -> std::collections::BTreeSet<Vec<usize>> {
    let mut set = std::collections::BTreeSet::new();
    let id: Vec<usize> = (0..m).collect();
    set.insert(id.clone());
    let mut frontier = vec![id];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = compose(g, &x);
            if set.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    set
}

/// Label-preserving automorphism group with induced edge action.
pub fn automorphism_group(g: &RibbonGraph) -> AutomorphismGroup {
    let elements = g.dart_automorphisms(true);
    let m = g.num_darts();
    let mut generators: Vec<Vec<usize>> = Vec::new();
    let mut span = closure(&generators, m);
    for h in &elements {
        if !span.contains(h) {
            generators.push(h.clone());
            span = closure(&generators, m);
        }
    }
    let edge_action: Vec<Vec<usize>> = elements
        .iter()
        .map(|h| (0..g.num_edges()).map(|e| g.edge_of(h[g.edge_darts(e)[0]])).collect())
        .collect();
    let identity: Vec<usize> = (0..g.num_edges()).collect();
    let mut distinct = edge_action.clone();
    distinct.sort();
    distinct.dedup();
    AutomorphismGroup {
        order: elements.len(),
        edge_kernel_order: edge_action.iter().filter(|a| **a == identity).count(),
        edge_image_order: distinct.len(),
        elements,
        generators,
        edge_action,
    }
}

impl AutomorphismGroup {
    /// Order of the subgroup preserving an edge-length assignment.
    pub fn stabiliser_order<T: PartialEq>(&self, lengths: &[T]) -> usize {
        self.edge_action
            .iter()
            .filter(|act| act.iter().enumerate().all(|(e, &img)| lengths[e] == lengths[img]))
            .count()
    }
}

/// Vertex-degree rule for enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valency {
    Trivalent,
    AtLeastThree,
}

struct Builder {
    cap: usize,
    rule: Valency,
    sigma: Vec<usize>,
    sigma_inv: Vec<usize>,
    iota: Vec<usize>,
    count: usize,
}

impl Builder {
    fn chain_back(&self, d: usize) -> (usize, usize) {
        let mut s = d;
        let mut len = 1;
        while self.sigma_inv[s] != UNSET {
            s = self.sigma_inv[s];
            len += 1;
        }
        (s, len)
    }

    fn chain_forward(&self, d: usize) -> usize {
        let mut t = d;
        let mut len = 1;
        while self.sigma[t] != UNSET {
            t = self.sigma[t];
            len += 1;
        }
        len
    }

    fn run(&mut self, i: usize, emit: &mut dyn FnMut(&[usize], &[usize])) {
        if i == self.count {
            if self.count == self.cap {
                emit(&self.sigma, &self.iota);
            }
            return;
        }
        let (start, len) = self.chain_back(i);
        let closes = match self.rule {
            Valency::Trivalent => len == 3,
            Valency::AtLeastThree => len >= 3,
        };
        let may_grow = |extra: usize| match self.rule {
            Valency::Trivalent => len + extra <= 3,
            Valency::AtLeastThree => true,
        };
        let mut choices = Vec::new();
        if closes {
            choices.push(start);
        }
        if self.rule == Valency::AtLeastThree || !closes {
            for j in 0..self.count {
                if j != start && self.sigma_inv[j] == UNSET && may_grow(self.chain_forward(j)) {
                    choices.push(j);
                }
            }
            if self.count < self.cap && may_grow(1) {
                choices.push(self.count);
            }
        }
        for j in choices {
            let fresh = j == self.count;
            if fresh {
                self.count += 1;
            }
            self.sigma[i] = j;
            self.sigma_inv[j] = i;
            self.pair(i, emit);
            self.sigma[i] = UNSET;
            self.sigma_inv[j] = UNSET;
            if fresh {
                self.count -= 1;
            }
        }
    }

    fn pair(&mut self, i: usize, emit: &mut dyn FnMut(&[usize], &[usize])) {
        if self.iota[i] != UNSET {
            self.run(i + 1, emit);
            return;
        }
        let mut choices: Vec<usize> = (0..self.count).filter(|&j| j != i && self.iota[j] == UNSET).collect();
        if self.count < self.cap {
            choices.push(self.count);
        }
        for j in choices {
            let fresh = j == self.count;
            if fresh {
                self.count += 1;
            }
            self.iota[i] = j;
            self.iota[j] = i;
            self.run(i + 1, emit);
            self.iota[i] = UNSET;
            self.iota[j] = UNSET;
            if fresh {
                self.count -= 1;
            }
        }
    }
}

/// Calls `emit(sigma, iota)` once for every rooted map on `darts` darts obeying
/// `rule`, in breadth-first numbering from the root.
pub fn for_each_rooted_map(darts: usize, rule: Valency, emit: &mut dyn FnMut(&[usize], &[usize])) {
    if darts == 0 || darts % 2 != 0 {
        return;
    }
    let mut b = Builder {
        cap: darts,
        rule,
        sigma: vec![UNSET; darts],
        sigma_inv: vec![UNSET; darts],
        iota: vec![UNSET; darts],
        count: 1,
    };
    b.run(0, emit);
}

/// Whether no other root yields a smaller code than the identity numbering.
fn root_is_minimal(sigma: &[usize], iota: &[usize]) -> bool {
    let m = sigma.len();
    let mut rank = vec![UNSET; m];
    let mut order = Vec::with_capacity(m);
    'roots: for r in 1..m {
        rank.iter_mut().for_each(|x| *x = UNSET);
        order.clear();
        rank[r] = 0;
        order.push(r);
        for i in 0..m {
            let d = order[i];
            for x in [sigma[d], iota[d]] {
                if rank[x] == UNSET {
                    rank[x] = order.len();
                    order.push(x);
                }
            }
            let here = (rank[sigma[d]], rank[iota[d]]);
            let base = (sigma[i], iota[i]);
            if here < base {
                return false;
            }
            if here > base {
                continue 'roots;
            }
        }
    }
    true
}

fn check_stable(g: usize, n: usize) -> Result<()> {
    if n == 0 || 2 * g + n <= 2 {
        return Err(Error::UnstableType(g, n));
    }
    Ok(())
}

/// Face labellings of an unlabelled representative, one per isomorphism class.
fn labelled_versions(base: &RibbonGraph) -> Vec<RibbonGraph> {
    let n = base.num_faces();
    let face_maps: Vec<Vec<usize>> = base
        .dart_automorphisms(false)
        .iter()
        .map(|h| (0..n).map(|f| base.face_of(h[base.face_darts(f)[0]])).collect())
        .collect();
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (1..=n).collect();
    loop {
        let minimal = face_maps.iter().all(|fm| {
            let moved: Vec<usize> = (0..n).map(|f| perm[fm[f]]).collect();
            perm <= moved
        });
        if minimal {
            out.push(base.relabel_faces(&perm).expect("relabelling is a bijection"));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    out
}

/// Advances to the next lexicographic permutation; false after the last.
pub fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Unlabelled maps of type `(g, n)` on `darts` darts, one per class.
fn unlabelled_classes(g: usize, n: usize, darts: usize, rule: Valency) -> Vec<RibbonGraph> {
    let mut reps = Vec::new();
    for_each_rooted_map(darts, rule, &mut |sigma, iota| {
        let phi: Vec<usize> = (0..sigma.len()).map(|d| iota[sigma[d]]).collect();
        let (_, faces) = orbits(&phi);
        if faces.len() != n {
            return;
        }
        let verts = orbits(sigma).1.len() as i64;
        let chi = verts - (darts / 2) as i64 + n as i64;
        if chi != 2 - 2 * g as i64 {
            return;
        }
        if root_is_minimal(sigma, iota) {
            reps.push(RibbonGraph::unlabelled(sigma.to_vec(), iota.to_vec()).expect("generated map is valid"));
        }
    });
    reps
}

/// Trivalent graphs of type `(g, n)` with labelled faces, without repetition.
pub fn enumerate_trivalent(g: usize, n: usize) -> Result<Vec<RibbonGraph>> {
    Ok(enumerate_trivalent_unlabelled(g, n)?.iter().flat_map(labelled_versions).collect())
}

/// Trivalent graphs of type `(g, n)` up to isomorphism ignoring face labels.
pub fn enumerate_trivalent_unlabelled(g: usize, n: usize) -> Result<Vec<RibbonGraph>> {
    check_stable(g, n)?;
    let darts = 2 * (6 * g + 3 * n - 6);
    if darts > TRIVALENT_DART_CAP {
        return Err(Error::TooLarge(format!("{darts} darts for trivalent type ({g},{n})")));
    }
    Ok(unlabelled_classes(g, n, darts, Valency::Trivalent))
}

/// Reduced graphs (all valencies at least three) of type `(g, n)` with labelled
/// faces, ordered by decreasing edge count.
pub fn enumerate_reduced(g: usize, n: usize) -> Result<Vec<RibbonGraph>> {
    Ok(enumerate_reduced_unlabelled(g, n)?.iter().flat_map(labelled_versions).collect())
}

/// Reduced graphs of type `(g, n)` up to isomorphism ignoring face labels.
///
/// Every reduced graph arises from a trivalent one by contracting a forest,
/// and contraction preserves faces, so the classes are the distinct
/// contractions of the trivalent representatives.
pub fn enumerate_reduced_unlabelled(g: usize, n: usize) -> Result<Vec<RibbonGraph>> {
    check_stable(g, n)?;
    let max_edges = 6 * g + 3 * n - 6;
    if 2 * max_edges > REDUCED_DART_CAP {
        return Err(Error::TooLarge(format!("{} darts for reduced type ({g},{n})", 2 * max_edges)));
    }
    let mut classes = std::collections::BTreeMap::new();
    for base in unlabelled_classes(g, n, 2 * max_edges, Valency::Trivalent) {
        for mask in 0u64..1 << max_edges {
            if let Some(c) = contract_forest(&base, mask) {
                classes.entry((std::cmp::Reverse(c.num_edges()), c.canonical_code(false))).or_insert(c);
            }
        }
    }
    Ok(classes.into_values().map(|c| c.canonical()).collect())
}

/// Contracts the edges in `mask`; `None` unless they form a forest.
fn contract_forest(g: &RibbonGraph, mask: u64) -> Option<RibbonGraph> {
    let mut root: Vec<usize> = (0..g.num_vertices()).collect();
    fn find(root: &mut [usize], mut v: usize) -> usize {
        while root[v] != v {
            root[v] = root[root[v]];
            v = root[v];
        }
        v
    }
    let m = g.num_darts();
    let mut sigma = g.sigma().to_vec();
    let mut inv: Vec<usize> = (0..m).map(|d| g.sigma_inv(d)).collect();
    let mut alive = vec![true; m];
    for e in (0..g.num_edges()).filter(|e| mask >> e & 1 == 1) {
        let [x, y] = g.edge_darts(e);
        let (a, b) = (find(&mut root, g.vertex_of(x)), find(&mut root, g.vertex_of(y)));
        if a == b {
            return None;
        }
        root[a] = b;
        // Splice the two rotations, dropping x and y. Valencies stay at least
        // three, so neither dart is fixed by sigma.
        let (px, sx, py, sy) = (inv[x], sigma[x], inv[y], sigma[y]);
        sigma[px] = sy;
        inv[sy] = px;
        sigma[py] = sx;
        inv[sx] = py;
        alive[x] = false;
        alive[y] = false;
    }
    let mut index = vec![UNSET; m];
    let kept: Vec<usize> = (0..m).filter(|&d| alive[d]).collect();
    for (i, &d) in kept.iter().enumerate() {
        index[d] = i;
    }
    let new_sigma = kept.iter().map(|&d| index[sigma[d]]).collect();
    let new_iota = kept.iter().map(|&d| index[g.iota()[d]]).collect();
    Some(RibbonGraph::unlabelled(new_sigma, new_iota).expect("contraction of a forest is a valid map"))
}

/// One connected piece of a restriction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ComponentType {
    pub genus: usize,
    pub boundaries: usize,
    pub edges: usize,
    pub vertices: usize,
    pub univalent: usize,
    pub bivalent: usize,
}

/// Topological type of a possibly disconnected surface with boundary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SurfaceType {
    pub components: Vec<ComponentType>,
}

/// A component of `G` restricted to an edge subset.
#[derive(Clone, Debug)]
pub struct RestrictedComponent {
    pub graph: RibbonGraph,
    /// Original edge index of each edge of `graph`.
    pub edges: Vec<usize>,
    pub kind: ComponentType,
}

fn subset_mask(g: &RibbonGraph, edges: &[usize]) -> Result<u64> {
    if edges.is_empty() {
        return Err(Error::EmptySubset);
    }
    if g.num_edges() > 64 {
        return Err(Error::TooLarge("more than 64 edges".into()));
    }
    let mut mask = 0u64;
    for &e in edges {
        if e >= g.num_edges() {
            return Err(Error::Invalid(format!("edge {e} out of range")));
        }
        mask |= 1 << e;
    }
    Ok(mask)
}

/// Rotation restricted to the darts of edges in `mask`.
fn restricted_sigma(g: &RibbonGraph, mask: u64) -> Vec<usize> {
    let keep = |d: usize| mask >> g.edge_of(d) & 1 == 1;
    let mut s = vec![UNSET; g.num_darts()];
    for d in 0..g.num_darts() {
        if keep(d) {
            let mut x = g.sigma[d];
            while !keep(x) {
                x = g.sigma[x];
            }
            s[d] = x;
        }
    }
    s
}

/// Component types of `G` restricted to the edges in `mask` (bit `e` set keeps
/// edge `e`). Isolated vertices are dropped.
pub fn restriction_types(g: &RibbonGraph, mask: u64) -> Vec<ComponentType> {
    let s = restricted_sigma(g, mask);
    let m = g.num_darts();
    let mut comp = vec![UNSET; m];
    let mut kinds = Vec::new();
    for start in 0..m {
        if s[start] == UNSET || comp[start] != UNSET {
            continue;
        }
        let id = kinds.len();
        let mut stack = vec![start];
        comp[start] = id;
        let mut darts = Vec::new();
        while let Some(d) = stack.pop() {
            darts.push(d);
            for x in [s[d], g.iota[d]] {
                if comp[x] == UNSET {
                    comp[x] = id;
                    stack.push(x);
                }
            }
        }
        let mut seen_v = vec![false; m];
        let mut seen_f = vec![false; m];
        let (mut vertices, mut faces, mut uni, mut bi) = (0, 0, 0, 0);
        for &d in &darts {
            if !seen_v[d] {
                vertices += 1;
                let mut x = d;
                let mut val = 0;
                while !seen_v[x] {
                    seen_v[x] = true;
                    val += 1;
                    x = s[x];
                }
                match val {
                    1 => uni += 1,
                    2 => bi += 1,
                    _ => {}
                }
            }
            if !seen_f[d] {
                faces += 1;
                let mut x = d;
                while !seen_f[x] {
                    seen_f[x] = true;
                    x = g.iota[s[x]];
                }
            }
        }
        let edges = darts.len() / 2;
        let chi = vertices as i64 - edges as i64 + faces as i64;
        kinds.push(ComponentType {
            genus: ((2 - chi) / 2) as usize,
            boundaries: faces,
            edges,
            vertices,
            univalent: uni,
            bivalent: bi,
        });
    }
    kinds
}

/// Restriction of `G` to the edge subset `edges`, split into components.
pub fn restrict(g: &RibbonGraph, edges: &[usize]) -> Result<Vec<RestrictedComponent>> {
    let mask = subset_mask(g, edges)?;
    let s = restricted_sigma(g, mask);
    let kinds = restriction_types(g, mask);
    let m = g.num_darts();
    let mut comp = vec![UNSET; m];
    let mut out = Vec::new();
    for start in 0..m {
        if s[start] == UNSET || comp[start] != UNSET {
            continue;
        }
        let id = out.len();
        let mut stack = vec![start];
        comp[start] = id;
        let mut darts = Vec::new();
        while let Some(d) = stack.pop() {
            darts.push(d);
            for x in [s[d], g.iota[d]] {
                if comp[x] == UNSET {
                    comp[x] = id;
                    stack.push(x);
                }
            }
        }
        darts.sort_unstable();
        let mut local = vec![UNSET; m];
        for (i, &d) in darts.iter().enumerate() {
            local[d] = i;
        }
        let sigma = darts.iter().map(|&d| local[s[d]]).collect();
        let iota = darts.iter().map(|&d| local[g.iota[d]]).collect();
        let graph = RibbonGraph::unlabelled(sigma, iota)?;
        let edge_ids = (0..graph.num_edges()).map(|e| g.edge_of(darts[graph.edge_darts(e)[0]])).collect();
        out.push(RestrictedComponent { graph, edges: edge_ids, kind: kinds[id] });
    }
    Ok(out)
}

/// Surface type of `G` restricted to `edges`.
pub fn restriction_surface(g: &RibbonGraph, edges: &[usize]) -> Result<SurfaceType> {
    let mask = subset_mask(g, edges)?;
    Ok(SurfaceType { components: restriction_types(g, mask) })
}

/// Graphs used throughout tests and examples.
pub mod catalog {
    use super::RibbonGraph;

    /// Two trivalent vertices joined by three edges with opposite rotations:
    /// the unique trivalent graph of type (1,1).
    pub fn theta() -> RibbonGraph {
        RibbonGraph::unlabelled(vec![1, 2, 0, 4, 5, 3], vec![3, 4, 5, 0, 1, 2]).unwrap()
    }

    /// Two trivalent vertices joined by three edges with equal rotations; type (0,3).
    pub fn planar_theta() -> RibbonGraph {
        RibbonGraph::unlabelled(vec![1, 2, 0, 5, 3, 4], vec![3, 4, 5, 0, 1, 2]).unwrap()
    }

    /// One 4-valent vertex carrying two interleaved loops; type (1,1).
    pub fn quadrivalent_torus() -> RibbonGraph {
        RibbonGraph::unlabelled(vec![1, 2, 3, 0], vec![2, 3, 0, 1]).unwrap()
    }

    /// One vertex of valency two with a single loop; type (0,2).
    pub fn single_loop() -> RibbonGraph {
        RibbonGraph::unlabelled(vec![1, 0], vec![1, 0]).unwrap()
    }

    /// Planar chain `loop - a - (double edge) - b - loop` of type (0,4).
    ///
    /// Edge order: 0 loop at the left end, 1 bridge to the double edge, 2 and 3
    /// the two arcs of the double edge, 4 bridge to the right loop, 5 right loop.
    pub fn looped_chain() -> RibbonGraph {
        let sigma = vec![3, 0, 4, 1, 6, 7, 2, 8, 5, 11, 9, 10];
        let iota = vec![1, 0, 3, 2, 5, 4, 7, 6, 9, 8, 11, 10];
        RibbonGraph::unlabelled(sigma, iota).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_types() {
        assert_eq!(catalog::theta().graph_type(), (1, 1));
        assert_eq!(catalog::planar_theta().graph_type(), (0, 3));
        assert_eq!(catalog::quadrivalent_torus().graph_type(), (1, 1));
        assert_eq!(catalog::single_loop().graph_type(), (0, 2));
        let chain = catalog::looped_chain();
        assert_eq!(chain.graph_type(), (0, 4));
        assert!(chain.is_trivalent());
    }

    #[test]
    fn rejects_invalid() {
        assert!(RibbonGraph::unlabelled(vec![0, 1], vec![0, 1]).is_err());
        assert!(RibbonGraph::unlabelled(vec![0, 0], vec![1, 0]).is_err());
        assert!(RibbonGraph::unlabelled(vec![0, 1, 2, 3], vec![1, 0, 3, 2]).is_err());
        let t = catalog::theta();
        assert!(RibbonGraph::new(t.sigma().to_vec(), t.iota().to_vec(), vec![2; 6]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = catalog::looped_chain().relabel_faces(&[3, 1, 4, 2]).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        let back: RibbonGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        assert!(text.starts_with("{\"darts\":12"));
    }

    #[test]
    fn theta_symmetry() {
        let aut = automorphism_group(&catalog::theta());
        assert_eq!(aut.order, 6);
        assert_eq!(aut.edge_image_order, 3);
        assert_eq!(aut.edge_kernel_order, 2);
        assert_eq!(automorphism_group(&catalog::quadrivalent_torus()).order, 4);
    }

    #[test]
    fn enumeration_small() {
        assert_eq!(enumerate_trivalent(1, 1).unwrap().len(), 1);
        assert_eq!(enumerate_reduced(1, 1).unwrap().len(), 2);
        assert!(enumerate_trivalent(0, 2).is_err());
        assert!(enumerate_trivalent(3, 3).is_err());
    }

    #[test]
    fn restriction_of_theta() {
        let t = catalog::theta();
        let two = restrict(&t, &[0, 1]).unwrap();
        assert_eq!(two.len(), 1);
        assert_eq!((two[0].kind.genus, two[0].kind.boundaries, two[0].kind.bivalent), (0, 2, 2));
        let one = restrict(&t, &[2]).unwrap();
        assert_eq!((one[0].kind.genus, one[0].kind.boundaries, one[0].kind.univalent), (0, 1, 2));
        let all = restrict(&t, &[0, 1, 2]).unwrap();
        assert_eq!(all[0].graph.graph_type(), (1, 1));
        assert!(restrict(&t, &[]).is_err());
    }

    #[test]
    fn permutation_stepper() {
        let mut v = vec![1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut v) {
            count += 1;
        }
        assert_eq!(count, 6);
    }
}
