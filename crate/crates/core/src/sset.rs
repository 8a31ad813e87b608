//! Finite, dimension-truncated semi-simplicial sets and maps between them.
//!
//! A simplex is addressed by `(level, id)` where `id` indexes into the
//! level. Ids are local to one object; comparisons across objects go through
//! vertex labels (when the object sits inside a known ambient complex) or an
//! explicit isomorphism search.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of an ambient product of ordinals, e.g. `[v]` inside `Δⁿ` or
/// `[a, b]` inside `Δᵐ ⊗ Δⁿ`.
pub type Point = Vec<usize>;

/// Default cap on search nodes for map enumeration.
pub const DEFAULT_BUDGET: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SSet {
    truncation: usize,
    /// When set, levels above `truncation` exist but are not represented.
    truncated: bool,
    /// `faces[k][id]` lists `d_0, ..., d_k` of the simplex (empty at level 0).
    faces: Vec<Vec<Vec<usize>>>,
    vertex_labels: Option<Vec<Point>>,
}

/// One broken structural rule found by [`SSet::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    FaceCount {
        level: usize,
        simplex: usize,
        found: usize,
    },
    DanglingFace {
        level: usize,
        simplex: usize,
        i: usize,
        face: usize,
    },
    /// `d_i d_j σ != d_{j-1} d_i σ` for `i < j`.
    Identity {
        level: usize,
        simplex: usize,
        i: usize,
        j: usize,
    },
    BadLabels {
        reason: String,
    },
}

impl SSet {
    /// An object with the given face table. `faces.len()` fixes the truncation.
    pub fn from_faces(faces: Vec<Vec<Vec<usize>>>, truncated: bool) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::rejected("a semi-simplicial set needs level 0"));
        }
        let s = SSet {
            truncation: faces.len() - 1,
            truncated,
            faces,
            vertex_labels: None,
        };
        let report = s.validate();
        if report.is_empty() {
            Ok(s)
        } else {
            Err(Error::rejected(format!("invalid face data: {report:?}")))
        }
    }

    /// Like [`SSet::from_faces`] but without running `validate`.
    pub fn from_faces_unchecked(faces: Vec<Vec<Vec<usize>>>, truncated: bool) -> Self {
        SSet {
            truncation: faces.len().saturating_sub(1),
            truncated,
            faces,
            vertex_labels: None,
        }
    }

    pub fn empty(truncation: usize) -> Self {
        SSet {
            truncation,
            truncated: false,
            faces: vec![Vec::new(); truncation + 1],
            vertex_labels: Some(Vec::new()),
        }
    }

    pub fn with_vertex_labels(mut self, labels: Vec<Point>) -> Result<Self> {
        if labels.len() != self.level_len(0) {
            return Err(Error::rejected("one label per vertex required"));
        }
        self.vertex_labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.vertex_labels = None;
        self
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Whether level `k` is known (either stored, or empty by finiteness).
    pub fn knows_level(&self, k: usize) -> bool {
        k <= self.truncation || !self.truncated
    }

    pub fn level_len(&self, k: usize) -> usize {
        self.faces.get(k).map_or(0, Vec::len)
    }

    pub fn try_level_len(&self, k: usize) -> Result<usize> {
        if self.knows_level(k) {
            Ok(self.level_len(k))
        } else {
            Err(Error::LevelUnavailable {
                needed: k,
                available: self.truncation,
            })
        }
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.faces.iter().map(Vec::len).collect()
    }

    /// Highest nonempty level, `None` for the empty object.
    pub fn dim(&self) -> Option<usize> {
        self.faces.iter().rposition(|l| !l.is_empty())
    }

    pub fn faces_of(&self, k: usize, id: usize) -> &[usize] {
        &self.faces[k][id]
    }

    pub fn face(&self, k: usize, id: usize, i: usize) -> usize {
        self.faces[k][id][i]
    }

    pub fn face_table(&self) -> &[Vec<Vec<usize>>] {
        &self.faces
    }

    pub fn vertex_labels(&self) -> Option<&[Point]> {
        self.vertex_labels.as_deref()
    }

    /// Restrict a `k`-simplex along the injection whose image is `keep`
    /// (strictly increasing vertex positions).
    pub fn restrict(&self, k: usize, id: usize, keep: &[usize]) -> usize {
        let mut level = k;
        let mut cur = id;
        // delete missing positions from the top so lower indices stay valid
        for pos in (0..=k).rev() {
            if keep.binary_search(&pos).is_err() {
                cur = self.faces[level][cur][pos];
                level -= 1;
            }
        }
        cur
    }

    /// The vertices `0, ..., k` of a `k`-simplex.
    pub fn vertices(&self, k: usize, id: usize) -> Vec<usize> {
        (0..=k).map(|j| self.restrict(k, id, &[j])).collect()
    }

    /// The edge `{a, b}` (`a < b`) of a `k`-simplex.
    pub fn edge(&self, k: usize, id: usize, a: usize, b: usize) -> usize {
        self.restrict(k, id, &[a, b])
    }

    /// Source (vertex 0, i.e. `d_1`) and target (vertex 1, i.e. `d_0`) of an edge.
    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        let f = &self.faces[1][edge];
        (f[1], f[0])
    }

    /// Vertex-label chain of a simplex, if labels are present.
    pub fn chain(&self, k: usize, id: usize) -> Option<Vec<Point>> {
        let labels = self.vertex_labels.as_ref()?;
        Some(
            self.vertices(k, id)
                .into_iter()
                .map(|v| labels[v].clone())
                .collect(),
        )
    }

    /// Every broken semi-simplicial identity or dangling reference.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (k, level) in self.faces.iter().enumerate() {
            for (id, fs) in level.iter().enumerate() {
                let expected = if k == 0 { 0 } else { k + 1 };
                if fs.len() != expected {
                    out.push(Violation::FaceCount {
                        level: k,
                        simplex: id,
                        found: fs.len(),
                    });
                    continue;
                }
                for (i, &f) in fs.iter().enumerate() {
                    if f >= self.level_len(k - 1) {
                        out.push(Violation::DanglingFace {
                            level: k,
                            simplex: id,
                            i,
                            face: f,
                        });
                    }
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        for k in 2..self.faces.len() {
            for (id, fs) in self.faces[k].iter().enumerate() {
                for j in 0..=k {
                    for i in 0..j {
                        let lhs = self.faces[k - 1][fs[j]][i];
                        let rhs = self.faces[k - 1][fs[i]][j - 1];
                        if lhs != rhs {
                            out.push(Violation::Identity {
                                level: k,
                                simplex: id,
                                i,
                                j,
                            });
                        }
                    }
                }
            }
        }
        if let Some(labels) = &self.vertex_labels {
            if labels.len() != self.level_len(0) {
                out.push(Violation::BadLabels {
                    reason: format!("{} labels for {} vertices", labels.len(), self.level_len(0)),
                });
            }
        }
        out
    }

    /// True when no two simplices of a level share a vertex tuple.
    pub fn is_vertex_determined(&self) -> bool {
        (1..self.faces.len()).all(|k| {
            let mut seen = std::collections::HashSet::new();
            (0..self.level_len(k)).all(|id| seen.insert(self.vertices(k, id)))
        })
    }

    /// Sorted vertex-label chains per level. Two labeled, vertex-determined
    /// objects are equal as subobjects of their ambient iff these agree.
    pub fn labeled_form(&self) -> Option<Vec<Vec<Vec<Point>>>> {
        self.vertex_labels.as_ref()?;
        if !self.is_vertex_determined() {
            return None;
        }
        let mut out = Vec::with_capacity(self.faces.len());
        for k in 0..self.faces.len() {
            let mut level: Vec<_> = (0..self.level_len(k))
                .map(|id| self.chain(k, id).unwrap())
                .collect();
            level.sort();
            out.push(level);
        }
        Some(out)
    }

    /// Lookup table from vertex-label chain to simplex id, per level.
    pub fn chain_index(&self) -> Option<Vec<HashMap<Vec<Point>, usize>>> {
        self.vertex_labels.as_ref()?;
        let mut out = Vec::with_capacity(self.faces.len());
        for k in 0..self.faces.len() {
            let mut m = HashMap::new();
            for id in 0..self.level_len(k) {
                if m.insert(self.chain(k, id).unwrap(), id).is_some() {
                    return None;
                }
            }
            out.push(m);
        }
        Some(out)
    }

    /// Isomorphism invariant: per level, the sorted list of per-simplex
    /// coface-count profiles.
    pub fn signature(&self) -> Vec<Vec<Vec<usize>>> {
        let mut cofaces: Vec<Vec<usize>> = self.faces.iter().map(|l| vec![0; l.len()]).collect();
        for k in 1..self.faces.len() {
            for fs in &self.faces[k] {
                for &f in fs {
                    cofaces[k - 1][f] += 1;
                }
            }
        }
        let mut out = Vec::new();
        for k in 0..self.faces.len() {
            let mut level: Vec<Vec<usize>> = (0..self.level_len(k))
                .map(|id| {
                    let mut p = vec![cofaces[k][id]];
                    if k > 0 {
                        let mut fc: Vec<usize> =
                            self.faces[k][id].iter().map(|&f| cofaces[k - 1][f]).collect();
                        fc.sort_unstable();
                        p.extend(fc);
                    }
                    p
                })
                .collect();
            level.sort();
            out.push(level);
        }
        out
    }

    /// Whether every labeled simplex of `self` also occurs in `other`.
    pub fn is_labeled_subobject_of(&self, other: &SSet) -> Option<bool> {
        let theirs = other.chain_index()?;
        self.vertex_labels.as_ref()?;
        for k in 0..self.faces.len() {
            for id in 0..self.level_len(k) {
                let c = self.chain(k, id).unwrap();
                if !theirs.get(k).is_some_and(|m| m.contains_key(&c)) {
                    return Some(false);
                }
            }
        }
        Some(true)
    }

    /// DOT rendering of the 1-skeleton, edges drawn source -> target.
    pub fn to_dot(&self, marked: Option<&std::collections::BTreeSet<usize>>) -> String {
        let mut s = String::from("digraph sset {\n");
        for v in 0..self.level_len(0) {
            let label = match &self.vertex_labels {
                Some(l) => format!("{:?}", l[v]),
                None => v.to_string(),
            };
            let _ = writeln!(s, "  v{v} [label=\"{label}\"];");
        }
        for e in 0..self.level_len(1) {
            let (a, b) = self.endpoints(e);
            let style = if marked.is_some_and(|m| m.contains(&e)) {
                " [style=bold]"
            } else {
                ""
            };
            let _ = writeln!(s, "  v{a} -> v{b}{style};");
        }
        s.push_str("}\n");
        s
    }
}

// ---------------------------------------------------------------------------
// Construction from chains in an ambient poset
// ---------------------------------------------------------------------------

/// Build the subobject spanned by a face-closed family of chains. Each chain
/// is a strictly increasing list of ambient points; levels are sorted
/// lexicographically by chain.
pub fn from_chains(truncation: usize, chains: impl IntoIterator<Item = Vec<Point>>) -> Result<SSet> {
    let mut by_level: Vec<Vec<Vec<Point>>> = vec![Vec::new(); truncation + 1];
    for c in chains {
        if c.is_empty() || c.len() > truncation + 1 {
            return Err(Error::rejected(format!("chain {c:?} outside truncation {truncation}")));
        }
        by_level[c.len() - 1].push(c);
    }
    for level in by_level.iter_mut() {
        level.sort();
        level.dedup();
    }
    let index: Vec<HashMap<&Vec<Point>, usize>> = by_level
        .iter()
        .map(|l| l.iter().enumerate().map(|(i, c)| (c, i)).collect())
        .collect();
    let mut faces = Vec::with_capacity(truncation + 1);
    for (k, level) in by_level.iter().enumerate() {
        let mut lf = Vec::with_capacity(level.len());
        for c in level {
            if k == 0 {
                lf.push(Vec::new());
                continue;
            }
            let mut fs = Vec::with_capacity(k + 1);
            for i in 0..=k {
                let mut d = c.clone();
                d.remove(i);
                match index[k - 1].get(&d) {
                    Some(&id) => fs.push(id),
                    None => {
                        return Err(Error::rejected(format!(
                            "chain family not closed under faces: {d:?} missing"
                        )))
                    }
                }
            }
            lf.push(fs);
        }
        faces.push(lf);
    }
    let labels = by_level[0].iter().map(|c| c[0].clone()).collect();
    Ok(SSet {
        truncation,
        truncated: false,
        faces,
        vertex_labels: Some(labels),
    })
}

/// All nonempty subsets of `vertices` (sorted), as singleton-coordinate chains.
fn subsets_as_chains(vertices: &[usize], max_size: usize) -> Vec<Vec<Point>> {
    let mut out = Vec::new();
    let n = vertices.len();
    for mask in 1u64..(1u64 << n) {
        if (mask.count_ones() as usize) > max_size {
            continue;
        }
        out.push(
            (0..n)
                .filter(|b| mask & (1 << b) != 0)
                .map(|b| vec![vertices[b]])
                .collect(),
        );
    }
    out
}

/// The standard simplex `Δⁿ`.
pub fn standard(n: usize) -> SSet {
    let verts: Vec<usize> = (0..=n).collect();
    from_chains(n, subsets_as_chains(&verts, n + 1)).expect("simplex is face closed")
}

/// `∂Δⁿ`: every proper face. Truncation stays `n`.
pub fn boundary(n: usize) -> SSet {
    let verts: Vec<usize> = (0..=n).collect();
    from_chains(n, subsets_as_chains(&verts, n)).expect("boundary is face closed")
}

/// `Λⁿᵢ`: all proper faces except the facet opposite `i`.
pub fn horn(n: usize, i: usize) -> Result<SSet> {
    if i > n {
        return Err(Error::rejected(format!("horn index {i} outside [{n}]")));
    }
    let verts: Vec<usize> = (0..=n).collect();
    let chains = subsets_as_chains(&verts, n)
        .into_iter()
        .filter(|c| !(c.len() == n && !c.contains(&vec![i])));
    from_chains(n, chains)
}

/// `Spⁿ`: vertices and consecutive edges.
pub fn spine(n: usize) -> SSet {
    let mut chains: Vec<Vec<Point>> = (0..=n).map(|v| vec![vec![v]]).collect();
    chains.extend((0..n).map(|v| vec![vec![v], vec![v + 1]]));
    from_chains(n, chains).expect("spine is face closed")
}

/// `Δᴵ ⊆ Δⁿ` for a nonempty vertex subset `I`.
pub fn sub_simplex(n: usize, subset: &[usize]) -> Result<SSet> {
    let mut verts = subset.to_vec();
    verts.sort_unstable();
    verts.dedup();
    if verts.is_empty() {
        return Err(Error::rejected("vertex subset must be nonempty"));
    }
    if verts.iter().any(|&v| v > n) {
        return Err(Error::rejected(format!("{subset:?} is not a subset of [{n}]")));
    }
    let size = verts.len();
    from_chains(n, subsets_as_chains(&verts, size))
}

/// The subcomplex of `Δⁿ` generated by the given vertex sets (and all their faces).
pub fn generated_subcomplex(n: usize, generators: &[Vec<usize>]) -> Result<SSet> {
    let mut chains = Vec::new();
    for g in generators {
        let mut g = g.clone();
        g.sort_unstable();
        g.dedup();
        if g.iter().any(|&v| v > n) {
            return Err(Error::rejected(format!("{g:?} is not a subset of [{n}]")));
        }
        chains.extend(subsets_as_chains(&g, g.len()));
    }
    from_chains(n, chains)
}

/// `cosk₀` of a finite set: level `k` is all `(k+1)`-tuples of points.
pub fn coskeleton0(points: usize, depth: usize) -> SSet {
    let mut faces = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let count = points.pow((k + 1) as u32);
        let mut level = Vec::with_capacity(count);
        for id in 0..count {
            if k == 0 {
                level.push(Vec::new());
                continue;
            }
            // base-`points` digits, most significant first
            let digits = to_digits(id, points, k + 1);
            let fs = (0..=k)
                .map(|i| {
                    let mut d = digits.clone();
                    d.remove(i);
                    from_digits(&d, points)
                })
                .collect();
            level.push(fs);
        }
        faces.push(level);
    }
    SSet {
        truncation: depth,
        truncated: points > 0,
        faces,
        vertex_labels: Some((0..points).map(|p| vec![p]).collect()),
    }
}

fn to_digits(mut x: usize, base: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut().rev() {
        *slot = x % base;
        x /= base;
    }
    d
}

fn from_digits(d: &[usize], base: usize) -> usize {
    d.iter().fold(0, |acc, &x| acc * base + x)
}

// ---------------------------------------------------------------------------
// Maps
// ---------------------------------------------------------------------------

/// Objects that carry an underlying semi-simplicial set.
pub trait Underlying {
    fn sset(&self) -> &SSet;
}

impl Underlying for SSet {
    fn sset(&self) -> &SSet {
        self
    }
}

/// A levelwise function between two objects.
#[derive(Debug, Clone)]
pub struct Map<O> {
    pub source: Arc<O>,
    pub target: Arc<O>,
    pub level_fns: Vec<Vec<usize>>,
}

pub type SSetMap = Map<SSet>;

impl<O: Underlying> Map<O> {
    /// Checks shape and face commutation; returns a description of the first problem.
    pub fn check(&self) -> std::result::Result<(), String> {
        let (x, y) = (self.source.sset(), self.target.sset());
        for k in 0..x.faces.len() {
            let n = x.level_len(k);
            let f = self.level_fns.get(k).map_or(&[][..], Vec::as_slice);
            if f.len() != n {
                return Err(format!("level {k}: {} images for {n} simplices", f.len()));
            }
            if n > 0 && !y.knows_level(k) {
                return Err(format!("target does not know level {k}"));
            }
            for (id, &img) in f.iter().enumerate() {
                if img >= y.level_len(k) {
                    return Err(format!("level {k}: simplex {id} sent to missing {img}"));
                }
                if k > 0 {
                    for i in 0..=k {
                        let lhs = self.level_fns[k - 1][x.face(k, id, i)];
                        let rhs = y.face(k, img, i);
                        if lhs != rhs {
                            return Err(format!(
                                "level {k}: simplex {id} does not commute with d_{i}"
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.check().is_ok()
    }

    pub fn apply(&self, k: usize, id: usize) -> usize {
        self.level_fns[k][id]
    }

    pub fn is_injective(&self) -> bool {
        self.level_fns.iter().all(|l| {
            let mut seen = std::collections::HashSet::new();
            l.iter().all(|x| seen.insert(*x))
        })
    }

    pub fn is_bijective(&self) -> bool {
        let y = self.target.sset();
        let levels = self.level_fns.len().max(y.faces.len());
        self.is_injective()
            && (0..levels).all(|k| self.level_fns.get(k).map_or(0, Vec::len) == y.level_len(k))
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Map<O>) -> Result<Map<O>> {
        if self.level_fns.iter().enumerate().any(|(k, l)| {
            l.iter().any(|&i| i >= other.level_fns.get(k).map_or(0, Vec::len))
        }) {
            return Err(Error::rejected("maps are not composable"));
        }
        Ok(Map {
            source: self.source.clone(),
            target: other.target.clone(),
            level_fns: self
                .level_fns
                .iter()
                .enumerate()
                .map(|(k, l)| l.iter().map(|&i| other.level_fns[k][i]).collect())
                .collect(),
        })
    }

    pub fn identity(obj: Arc<O>) -> Map<O> {
        let level_fns = obj
            .sset()
            .faces
            .iter()
            .map(|l| (0..l.len()).collect())
            .collect();
        Map {
            source: obj.clone(),
            target: obj,
            level_fns,
        }
    }
}

// ---------------------------------------------------------------------------
// Exhaustive map search
// ---------------------------------------------------------------------------

type Allow<'a> = dyn Fn(usize, usize, usize) -> bool + Sync + 'a;

/// Backtracking search for face-commuting level functions.
///
/// Source simplices are assigned right after their last vertex, so edge
/// constraints prune vertex choices early. Every visited node counts
/// against `budget`.
pub struct MapSearch<'a> {
    source: &'a SSet,
    target: &'a SSet,
    budget: u64,
    fixed: Option<&'a [Vec<Option<usize>>]>,
    allow: Option<&'a Allow<'a>>,
    injective: bool,
    stage: &'a str,
}

impl<'a> MapSearch<'a> {
    pub fn new(source: &'a SSet, target: &'a SSet) -> Self {
        MapSearch {
            source,
            target,
            budget: DEFAULT_BUDGET,
            fixed: None,
            allow: None,
            injective: false,
            stage: "map enumeration",
        }
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// Pin some source simplices to given targets.
    pub fn fixed(mut self, fixed: &'a [Vec<Option<usize>>]) -> Self {
        self.fixed = Some(fixed);
        self
    }

    /// Extra admissibility test `(level, source id, target id)`.
    pub fn allow(mut self, allow: &'a Allow<'a>) -> Self {
        self.allow = Some(allow);
        self
    }

    pub fn injective(mut self, injective: bool) -> Self {
        self.injective = injective;
        self
    }

    pub fn stage(mut self, stage: &'a str) -> Self {
        self.stage = stage;
        self
    }

    fn order(&self) -> Vec<(usize, usize)> {
        let x = self.source;
        let mut keyed: Vec<(usize, usize, usize)> = Vec::new();
        for k in 0..x.faces.len() {
            for id in 0..x.level_len(k) {
                let last = if k == 0 { id } else { *x.vertices(k, id).iter().max().unwrap() };
                keyed.push((last, k, id));
            }
        }
        keyed.sort_unstable();
        keyed.into_iter().map(|(_, k, id)| (k, id)).collect()
    }

    /// Calls `visit` on every solution until it returns `false`.
    pub fn run(&self, mut visit: impl FnMut(&[Vec<usize>]) -> bool) -> Result<()> {
        let (x, y) = (self.source, self.target);
        for k in 0..x.faces.len() {
            if x.level_len(k) > 0 && !y.knows_level(k) {
                return Err(Error::LevelUnavailable {
                    needed: k,
                    available: y.truncation,
                });
            }
        }
        let order = self.order();
        // target index: face tuple -> ids
        let mut index: Vec<HashMap<&[usize], Vec<usize>>> = Vec::new();
        for k in 0..x.faces.len() {
            let mut m: HashMap<&[usize], Vec<usize>> = HashMap::new();
            if k > 0 {
                for id in 0..y.level_len(k) {
                    m.entry(y.faces[k][id].as_slice()).or_default().push(id);
                }
            }
            index.push(m);
        }
        let all_vertices: Vec<usize> = (0..y.level_len(0)).collect();
        let mut assign: Vec<Vec<usize>> =
            (0..x.faces.len()).map(|k| vec![usize::MAX; x.level_len(k)]).collect();
        let mut used: Vec<Vec<bool>> = if self.injective {
            (0..x.faces.len()).map(|k| vec![false; y.level_len(k)]).collect()
        } else {
            Vec::new()
        };
        let mut nodes = 0u64;
        let mut stop = false;
        self.descend(
            0,
            &order,
            &index,
            &all_vertices,
            &mut assign,
            &mut used,
            &mut nodes,
            &mut stop,
            &mut visit,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &self,
        pos: usize,
        order: &[(usize, usize)],
        index: &[HashMap<&[usize], Vec<usize>>],
        all_vertices: &[usize],
        assign: &mut Vec<Vec<usize>>,
        used: &mut Vec<Vec<bool>>,
        nodes: &mut u64,
        stop: &mut bool,
        visit: &mut impl FnMut(&[Vec<usize>]) -> bool,
    ) -> Result<()> {
        if *stop {
            return Ok(());
        }
        if pos == order.len() {
            if !visit(assign) {
                *stop = true;
            }
            return Ok(());
        }
        let (k, id) = order[pos];
        let x = self.source;
        let key: Vec<usize>;
        let candidates: &[usize] = if k == 0 {
            all_vertices
        } else {
            key = x.faces[k][id].iter().map(|&f| assign[k - 1][f]).collect();
            match index[k].get(key.as_slice()) {
                Some(c) => c,
                None => return Ok(()),
            }
        };
        let pinned = self.fixed.and_then(|f| f.get(k).and_then(|l| l.get(id)).copied().flatten());
        for &c in candidates {
            if pinned.is_some_and(|p| p != c) {
                continue;
            }
            if self.injective && used[k][c] {
                continue;
            }
            if let Some(allow) = self.allow {
                if !allow(k, id, c) {
                    continue;
                }
            }
            *nodes += 1;
            if *nodes > self.budget {
                return Err(Error::budget(self.stage, self.budget));
            }
            assign[k][id] = c;
            if self.injective {
                used[k][c] = true;
            }
            self.descend(pos + 1, order, index, all_vertices, assign, used, nodes, stop, visit)?;
            if self.injective {
                used[k][c] = false;
            }
            if *stop {
                break;
            }
        }
        assign[k][id] = usize::MAX;
        Ok(())
    }

    pub fn collect(&self) -> Result<Vec<Vec<Vec<usize>>>> {
        let mut out = Vec::new();
        self.run(|a| {
            out.push(a.to_vec());
            true
        })?;
        Ok(out)
    }

    pub fn first(&self) -> Result<Option<Vec<Vec<usize>>>> {
        let mut out = None;
        self.run(|a| {
            out = Some(a.to_vec());
            false
        })?;
        Ok(out)
    }
}

/// Every map `X -> Y`, in search order.
pub fn enumerate_maps(x: &Arc<SSet>, y: &Arc<SSet>, budget: u64) -> Result<Vec<SSetMap>> {
    let sols = MapSearch::new(x, y).budget(budget).collect()?;
    Ok(sols
        .into_iter()
        .map(|level_fns| Map {
            source: x.clone(),
            target: y.clone(),
            level_fns,
        })
        .collect())
}

/// An isomorphism `X -> Y` if one exists.
pub fn find_isomorphism(x: &Arc<SSet>, y: &Arc<SSet>, budget: u64) -> Result<Option<SSetMap>> {
    if x.faces.len() != y.faces.len() || x.truncated != y.truncated {
        // compare known levels only when both agree on truncation semantics
        let dims_match = x.dim() == y.dim() && !x.truncated && !y.truncated;
        if !dims_match {
            return Ok(None);
        }
    }
    let levels = x.faces.len().max(y.faces.len());
    for k in 0..levels {
        if x.level_len(k) != y.level_len(k) {
            return Ok(None);
        }
    }
    if x.signature().iter().filter(|l| !l.is_empty()).collect::<Vec<_>>()
        != y.signature().iter().filter(|l| !l.is_empty()).collect::<Vec<_>>()
    {
        return Ok(None);
    }
    let sol = MapSearch::new(x, y)
        .budget(budget)
        .injective(true)
        .stage("isomorphism search")
        .first()?;
    Ok(sol.map(|level_fns| Map {
        source: x.clone(),
        target: y.clone(),
        level_fns,
    }))
}

pub fn is_isomorphic(x: &SSet, y: &SSet) -> Result<bool> {
    Ok(find_isomorphism(&Arc::new(x.clone()), &Arc::new(y.clone()), DEFAULT_BUDGET)?.is_some())
}

// ---------------------------------------------------------------------------
// Pushouts
// ---------------------------------------------------------------------------

/// Result of gluing `B` and `X` along `A`.
#[derive(Debug, Clone)]
pub struct Pushout {
    pub object: SSet,
    /// `B -> P`, as level functions.
    pub from_b: Vec<Vec<usize>>,
    /// `X -> P`, as level functions.
    pub from_x: Vec<Vec<usize>>,
}

/// Levelwise pushout of `X <- A -> B` along an injective `f : A -> B`.
pub fn pushout(f: &SSetMap, g: &SSetMap) -> Result<Pushout> {
    if !Arc::ptr_eq(&f.source, &g.source) && *f.source != *g.source {
        return Err(Error::rejected("pushout legs must share their source"));
    }
    f.check().map_err(Error::Rejected)?;
    g.check().map_err(Error::Rejected)?;
    if !f.is_injective() {
        return Err(Error::rejected("only pushouts along injective maps are supported"));
    }
    let (a, b, x) = (&*f.source, &*f.target, &*g.target);
    let levels = b.faces.len().max(x.faces.len());
    if b.truncated || x.truncated {
        if b.faces.len() != x.faces.len() {
            return Err(Error::rejected("truncated pushout legs must share their truncation"));
        }
    }
    // preimage of B-simplices under f
    let mut pre: Vec<Vec<Option<usize>>> = (0..levels).map(|k| vec![None; b.level_len(k)]).collect();
    for k in 0..a.faces.len() {
        for (ai, &bi) in f.level_fns[k].iter().enumerate() {
            pre[k][bi] = Some(ai);
        }
    }
    let mut faces: Vec<Vec<Vec<usize>>> = Vec::with_capacity(levels);
    let mut from_b: Vec<Vec<usize>> = Vec::with_capacity(levels);
    let mut from_x: Vec<Vec<usize>> = Vec::with_capacity(levels);
    for k in 0..levels {
        let mut level: Vec<Vec<usize>> = x.faces.get(k).cloned().unwrap_or_default();
        from_x.push((0..x.level_len(k)).collect());
        let mut fb = vec![usize::MAX; b.level_len(k)];
        for bi in 0..b.level_len(k) {
            if let Some(ai) = pre[k][bi] {
                fb[bi] = g.level_fns[k][ai];
            } else {
                let fs = if k == 0 {
                    Vec::new()
                } else {
                    b.faces[k][bi].iter().map(|&d| from_b[k - 1][d]).collect()
                };
                fb[bi] = level.len();
                level.push(fs);
            }
        }
        from_b.push(fb);
        faces.push(level);
    }
    let object = SSet {
        truncation: levels - 1,
        truncated: b.truncated || x.truncated,
        faces,
        vertex_labels: None,
    };
    debug_assert!(object.validate().is_empty());
    Ok(Pushout {
        object,
        from_b,
        from_x,
    })
}

/// The inclusion of one labeled subobject into another, matched by chains.
pub fn labeled_inclusion(sub: &Arc<SSet>, sup: &Arc<SSet>) -> Result<SSetMap> {
    let idx = sup
        .chain_index()
        .ok_or_else(|| Error::rejected("target lacks vertex labels or is not vertex-determined"))?;
    let mut level_fns = Vec::new();
    for k in 0..sub.faces.len() {
        let mut l = Vec::with_capacity(sub.level_len(k));
        for id in 0..sub.level_len(k) {
            let c = sub
                .chain(k, id)
                .ok_or_else(|| Error::rejected("source lacks vertex labels"))?;
            match idx.get(k).and_then(|m| m.get(&c)) {
                Some(&t) => l.push(t),
                None => return Err(Error::rejected(format!("{c:?} is not in the target"))),
            }
        }
        level_fns.push(l);
    }
    Ok(Map {
        source: sub.clone(),
        target: sup.clone(),
        level_fns,
    })
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

/// Wire form: `{"truncation": D, "levels": [[ids...]...], "faces": {id: [ids...]}}`.
///
/// Ids are global across levels. `truncated` and `vertex_labels` are
/// optional extensions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SSetJson {
    pub truncation: usize,
    pub levels: Vec<Vec<u64>>,
    pub faces: BTreeMap<String, Vec<u64>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_labels: Option<BTreeMap<String, Point>>,
}

impl SSet {
    /// Global id of `(level, id)` in the wire form.
    pub fn global_id(&self, k: usize, id: usize) -> u64 {
        (self.faces[..k].iter().map(Vec::len).sum::<usize>() + id) as u64
    }

    pub fn to_json(&self) -> SSetJson {
        let mut levels = Vec::new();
        let mut faces = BTreeMap::new();
        let mut offset = 0u64;
        let mut offsets = Vec::new();
        for level in &self.faces {
            offsets.push(offset);
            offset += level.len() as u64;
        }
        for (k, level) in self.faces.iter().enumerate() {
            levels.push((0..level.len() as u64).map(|i| offsets[k] + i).collect());
            if k > 0 {
                for (i, fs) in level.iter().enumerate() {
                    faces.insert(
                        (offsets[k] + i as u64).to_string(),
                        fs.iter().map(|&f| offsets[k - 1] + f as u64).collect(),
                    );
                }
            }
        }
        let vertex_labels = self.vertex_labels.as_ref().map(|labels| {
            labels
                .iter()
                .enumerate()
                .map(|(i, l)| (i.to_string(), l.clone()))
                .collect()
        });
        SSetJson {
            truncation: self.truncation,
            levels,
            faces,
            truncated: self.truncated,
            vertex_labels,
        }
    }

    /// Parse the wire form; the id -> (level, index) mapping follows the
    /// order of ids inside each `levels` entry.
    pub fn from_json(j: &SSetJson) -> Result<(SSet, HashMap<u64, (usize, usize)>)> {
        if j.levels.len() != j.truncation + 1 {
            return Err(Error::Parse(format!(
                "{} levels listed for truncation {}",
                j.levels.len(),
                j.truncation
            )));
        }
        let mut where_is: HashMap<u64, (usize, usize)> = HashMap::new();
        for (k, ids) in j.levels.iter().enumerate() {
            for (i, &id) in ids.iter().enumerate() {
                if where_is.insert(id, (k, i)).is_some() {
                    return Err(Error::Parse(format!("duplicate id {id}")));
                }
            }
        }
        let mut faces: Vec<Vec<Vec<usize>>> = Vec::new();
        for (k, ids) in j.levels.iter().enumerate() {
            let mut level = Vec::with_capacity(ids.len());
            for &id in ids {
                if k == 0 {
                    if j.faces.get(&id.to_string()).is_some_and(|f| !f.is_empty()) {
                        return Err(Error::Parse(format!("vertex {id} lists faces")));
                    }
                    level.push(Vec::new());
                    continue;
                }
                let fs = j
                    .faces
                    .get(&id.to_string())
                    .ok_or_else(|| Error::Parse(format!("no faces for simplex {id}")))?;
                let mut local = Vec::with_capacity(fs.len());
                for f in fs {
                    match where_is.get(f) {
                        Some(&(fk, fi)) if fk + 1 == k => local.push(fi),
                        _ => {
                            return Err(Error::Parse(format!(
                                "face {f} of simplex {id} does not resolve in level {}",
                                k - 1
                            )))
                        }
                    }
                }
                level.push(local);
            }
            faces.push(level);
        }
        let vertex_labels = match &j.vertex_labels {
            None => None,
            Some(m) => {
                let mut labels = vec![None; j.levels[0].len()];
                for (id, p) in m {
                    let gid: u64 = id
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad label key {id}")))?;
                    match where_is.get(&gid) {
                        Some(&(0, i)) => labels[i] = Some(p.clone()),
                        _ => return Err(Error::Parse(format!("label for non-vertex {id}"))),
                    }
                }
                Some(
                    labels
                        .into_iter()
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| Error::Parse("some vertices lack labels".into()))?,
                )
            }
        };
        Ok((
            SSet {
                truncation: j.truncation,
                truncated: j.truncated,
                faces,
                vertex_labels,
            },
            where_is,
        ))
    }
}

impl Serialize for SSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SSetJson::deserialize(d)?;
        SSet::from_json(&j)
            .map(|(s, _)| s)
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(s: SSet) -> Arc<SSet> {
        Arc::new(s)
    }

    #[test]
    fn standard_complexes_have_expected_levels() {
        assert_eq!(standard(2).level_sizes(), vec![3, 3, 1]);
        assert_eq!(horn(2, 1).unwrap().level_sizes(), vec![3, 2, 0]);
        assert_eq!(horn(2, 1).unwrap().labeled_form(), spine(2).labeled_form());
        assert_eq!(boundary(3).level_sizes()[..3], [4, 6, 4]);
        assert_eq!(spine(4).level_sizes()[..2], [5, 4]);
        assert!(horn(3, 4).is_err());
        assert!(sub_simplex(3, &[]).is_err());
        assert_eq!(
            sub_simplex(3, &[0, 1, 2, 3]).unwrap().labeled_form(),
            standard(3).labeled_form()
        );
    }

    #[test]
    fn horn_omits_the_right_facet() {
        let h = horn(3, 2).unwrap();
        let form = h.labeled_form().unwrap();
        let facets: Vec<Vec<usize>> = form[2]
            .iter()
            .map(|c| c.iter().map(|p| p[0]).collect())
            .collect();
        assert_eq!(facets, vec![vec![0, 1, 2], vec![0, 2, 3], vec![1, 2, 3]]);
    }

    #[test]
    fn inclusion_chain() {
        for n in 2..=4 {
            let st = standard(n);
            let bd = boundary(n);
            let sp = spine(n);
            for i in 0..=n {
                let h = horn(n, i).unwrap();
                // the outer 2-horns miss one spine edge
                let outer2 = n == 2 && (i == 0 || i == 2);
                assert_eq!(sp.is_labeled_subobject_of(&h), Some(!outer2));
                assert_eq!(h.is_labeled_subobject_of(&bd), Some(true));
                assert_eq!(bd.is_labeled_subobject_of(&st), Some(true));
            }
        }
    }

    #[test]
    fn validate_catches_swapped_face() {
        assert!(standard(3).validate().is_empty());
        let mut faces = standard(2).face_table().to_vec();
        faces[2][0].swap(0, 1);
        let bad = SSet::from_faces_unchecked(faces, false);
        let report = bad.validate();
        assert!(!report.is_empty());
        assert!(report
            .iter()
            .any(|v| matches!(v, Violation::Identity { level: 2, simplex: 0, .. })));
    }

    #[test]
    fn coskeleton_levels() {
        assert_eq!(coskeleton0(1, 3).level_sizes(), vec![1, 1, 1, 1]);
        assert_eq!(coskeleton0(2, 2).level_sizes(), vec![2, 4, 8]);
        assert!(coskeleton0(3, 3).validate().is_empty());
    }

    #[test]
    fn maps_from_a_point_pick_vertices() {
        let x = arc(standard(3));
        let maps = enumerate_maps(&arc(standard(0)), &x, DEFAULT_BUDGET).unwrap();
        assert_eq!(maps.len(), 4);
    }

    #[test]
    fn maps_between_edges() {
        // without degeneracies an edge can only go to an edge
        let e = arc(standard(1));
        let maps = enumerate_maps(&e, &e, DEFAULT_BUDGET).unwrap();
        assert_eq!(maps.len(), 1);
        assert!(maps[0].is_valid());
    }

    #[test]
    fn maps_from_spine_count_composable_edge_pairs() {
        let sp = arc(spine(2));
        let st = arc(standard(2));
        let maps = enumerate_maps(&sp, &st, DEFAULT_BUDGET).unwrap();
        // oracle: ordered edge pairs (e1, e2) with target(e1) == source(e2)
        let mut pairs = 0;
        for e1 in 0..st.level_len(1) {
            for e2 in 0..st.level_len(1) {
                if st.endpoints(e1).1 == st.endpoints(e2).0 {
                    pairs += 1;
                }
            }
        }
        assert_eq!(maps.len(), pairs);
        assert!(maps.iter().all(|m| m.is_valid()));
    }

    #[test]
    fn map_search_respects_budget() {
        let x = arc(coskeleton0(3, 1));
        let y = arc(coskeleton0(3, 1));
        let err = enumerate_maps(&x, &y, 10).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
    }

    #[test]
    fn maps_compose_into_maps() {
        let x = arc(spine(2));
        let y = arc(horn(2, 0).unwrap());
        let z = arc(standard(2));
        let xy = enumerate_maps(&x, &y, DEFAULT_BUDGET).unwrap();
        let yz = enumerate_maps(&y, &z, DEFAULT_BUDGET).unwrap();
        let xz: Vec<_> = enumerate_maps(&x, &z, DEFAULT_BUDGET)
            .unwrap()
            .into_iter()
            .map(|m| m.level_fns)
            .collect();
        for f in &xy {
            for g in &yz {
                let c = f.then(g).unwrap();
                assert!(c.is_valid());
                assert!(xz.contains(&c.level_fns));
            }
        }
    }

    fn inclusion(a: &Arc<SSet>, b: &Arc<SSet>) -> SSetMap {
        labeled_inclusion(a, b).unwrap()
    }

    #[test]
    fn pushout_along_identity_is_trivial() {
        let x = arc(standard(2));
        let id = SSetMap::identity(x.clone());
        let p = pushout(&id, &id).unwrap();
        assert!(is_isomorphic(&p.object, &x).unwrap());
    }

    #[test]
    fn gluing_two_edges_gives_the_spine() {
        let pt = arc(standard(0));
        let e = arc(standard(1));
        // vertex 0 -> target of first edge, vertex 0 -> source of second
        let f = Map {
            source: pt.clone(),
            target: e.clone(),
            level_fns: vec![vec![1]],
        };
        let g = Map {
            source: pt.clone(),
            target: e.clone(),
            level_fns: vec![vec![0]],
        };
        let p = pushout(&f, &g).unwrap();
        assert!(p.object.validate().is_empty());
        assert!(is_isomorphic(&p.object, &spine(2)).unwrap());
    }

    #[test]
    fn filling_the_inner_horn() {
        let h = arc(horn(2, 1).unwrap());
        let st = arc(standard(2));
        let sp = arc(spine(2));
        let f = inclusion(&h, &st);
        let g = inclusion(&h, &sp);
        let p = pushout(&f, &g).unwrap();
        assert_eq!(p.object.level_sizes(), vec![3, 3, 1]);
        assert!(is_isomorphic(&p.object, &st).unwrap());
    }

    #[test]
    fn pushout_rejects_non_injective_leg() {
        let e = arc(standard(1));
        let pt = arc(standard(0));
        let x = arc(coskeleton0(1, 1));
        let collapse = Map {
            source: e.clone(),
            target: x.clone(),
            level_fns: vec![vec![0, 0], vec![0]],
        };
        let into_pt = Map {
            source: e.clone(),
            target: e.clone(),
            level_fns: vec![vec![0, 1], vec![0]],
        };
        let _ = pt;
        assert!(pushout(&collapse, &into_pt).is_err());
    }

    #[test]
    fn isomorphism_search_distinguishes() {
        // reversing vertex order is not a face-preserving map
        assert!(!is_isomorphic(&horn(3, 0).unwrap(), &horn(3, 3).unwrap()).unwrap());
        assert!(!is_isomorphic(&horn(3, 0).unwrap(), &horn(3, 1).unwrap()).unwrap());
        let glued = sub_simplex(3, &[0, 1, 2]).unwrap();
        assert!(is_isomorphic(&glued, &generated_subcomplex(3, &[vec![1, 2, 3]]).unwrap()).unwrap());
        assert!(!is_isomorphic(&spine(3), &boundary(2)).unwrap());
    }

    #[test]
    fn json_round_trip_and_schema() {
        let h = horn(3, 1).unwrap();
        let j = serde_json::to_value(&h).unwrap();
        assert_eq!(j["truncation"], 3);
        assert!(j["faces"].is_object());
        let back: SSet = serde_json::from_value(j).unwrap();
        assert_eq!(back, h);
        let bad = r#"{"truncation":1,"levels":[[0],[1]],"faces":{"1":[0,7]}}"#;
        assert!(serde_json::from_str::<SSet>(bad).is_err());
    }

    #[test]
    fn dot_lists_directed_edges() {
        let dot = spine(2).to_dot(None);
        assert!(dot.contains("v0 -> v1"));
        assert!(dot.contains("v1 -> v2"));
    }
}
