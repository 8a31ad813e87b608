//! Marked semi-simplicial sets: a distinguished set of edges on top of an
//! [`SSet`], closure operators on markings, and the marked tensor product.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordinal::{enumerate_shuffles, Shuffle};
use crate::sset::{self, Map, MapSearch, Point, SSet, SSetJson, Underlying, DEFAULT_BUDGET};

/// Largest tensor truncation built without an explicit cap.
pub const DEFAULT_TENSOR_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedSSet {
    underlying: SSet,
    marking: BTreeSet<usize>,
}

pub type MarkedMap = Map<MarkedSSet>;

impl Underlying for MarkedSSet {
    fn sset(&self) -> &SSet {
        &self.underlying
    }
}

impl MarkedSSet {
    pub fn new(underlying: SSet, marking: impl IntoIterator<Item = usize>) -> Result<Self> {
        let marking: BTreeSet<usize> = marking.into_iter().collect();
        if let Some(&e) = marking.iter().find(|&&e| e >= underlying.level_len(1)) {
            return Err(Error::rejected(format!("marked edge {e} does not exist")));
        }
        Ok(MarkedSSet {
            underlying,
            marking,
        })
    }

    pub fn underlying(&self) -> &SSet {
        &self.underlying
    }

    pub fn into_underlying(self) -> SSet {
        self.underlying
    }

    pub fn marking(&self) -> &BTreeSet<usize> {
        &self.marking
    }

    pub fn is_marked(&self, edge: usize) -> bool {
        self.marking.contains(&edge)
    }

    /// Marks the edges with the given vertex-label endpoints.
    pub fn with_marked_chains(underlying: SSet, edges: &[(Point, Point)]) -> Result<Self> {
        let idx = underlying
            .chain_index()
            .ok_or_else(|| Error::rejected("marking by labels needs a labeled, vertex-determined object"))?;
        let mut marking = BTreeSet::new();
        for (a, b) in edges {
            let key = vec![a.clone(), b.clone()];
            match idx.get(1).and_then(|m| m.get(&key)) {
                Some(&e) => {
                    marking.insert(e);
                }
                None => return Err(Error::rejected(format!("no edge {a:?} -> {b:?}"))),
            }
        }
        MarkedSSet::new(underlying, marking)
    }

    /// Marks edges of a subcomplex of `Δⁿ` given as vertex pairs.
    pub fn with_marked_pairs(underlying: SSet, pairs: &[(usize, usize)]) -> Result<Self> {
        let chains: Vec<(Point, Point)> = pairs.iter().map(|&(a, b)| (vec![a], vec![b])).collect();
        MarkedSSet::with_marked_chains(underlying, &chains)
    }

    /// Marked edges as sorted vertex-label pairs.
    pub fn marked_chains(&self) -> Option<Vec<Vec<Point>>> {
        let mut out = Vec::with_capacity(self.marking.len());
        for &e in &self.marking {
            out.push(self.underlying.chain(1, e)?);
        }
        out.sort();
        Some(out)
    }

    /// Labeled canonical form: simplices plus marked edges, both by label chain.
    pub fn labeled_form(&self) -> Option<(Vec<Vec<Vec<Point>>>, Vec<Vec<Point>>)> {
        Some((self.underlying.labeled_form()?, self.marked_chains()?))
    }

    /// Marked edges `x -> y` for the given vertices.
    pub fn marked_out_of(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.marking
            .iter()
            .copied()
            .filter(move |&e| self.underlying.endpoints(e).0 == v)
    }

    pub fn to_dot(&self) -> String {
        self.underlying.to_dot(Some(&self.marking))
    }
}

/// Nothing marked.
pub fn flat(x: SSet) -> MarkedSSet {
    MarkedSSet {
        underlying: x,
        marking: BTreeSet::new(),
    }
}

/// Every edge marked.
pub fn sharp(x: SSet) -> MarkedSSet {
    let marking = (0..x.level_len(1)).collect();
    MarkedSSet {
        underlying: x,
        marking,
    }
}

/// The largest subobject all of whose simplices have only marked edges.
pub fn tilde(w: &MarkedSSet) -> MarkedSSet {
    let x = &w.underlying;
    let mut keep: Vec<Vec<usize>> = Vec::new();
    let mut new_id: Vec<Vec<usize>> = Vec::new();
    for k in 0..=x.truncation() {
        let mut ids = Vec::new();
        let mut renum = vec![usize::MAX; x.level_len(k)];
        for id in 0..x.level_len(k) {
            let ok = (0..=k).all(|a| (a + 1..=k).all(|b| w.is_marked(x.edge(k, id, a, b))));
            if ok {
                renum[id] = ids.len();
                ids.push(id);
            }
        }
        keep.push(ids);
        new_id.push(renum);
    }
    let faces: Vec<Vec<Vec<usize>>> = keep
        .iter()
        .enumerate()
        .map(|(k, ids)| {
            ids.iter()
                .map(|&id| {
                    x.faces_of(k, id)
                        .iter()
                        .map(|&f| new_id[k - 1][f])
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut sub = SSet::from_faces_unchecked(faces, x.is_truncated());
    if let Some(labels) = x.vertex_labels() {
        sub = sub
            .with_vertex_labels(labels.to_vec())
            .expect("tilde keeps every vertex");
    }
    sharp(sub)
}

/// Edges `{0,1}, {1,2}, {0,2}` of a triangle.
fn triangle_edges(x: &SSet, t: usize) -> [usize; 3] {
    let f = x.faces_of(2, t);
    [f[2], f[0], f[1]]
}

/// Least marking closed under 2-out-of-3 on triangles.
pub fn closure_2of3(w: &MarkedSSet) -> MarkedSSet {
    let mut out = w.clone();
    if out.underlying.truncation() < 2 {
        return out;
    }
    loop {
        let mut changed = false;
        for t in 0..out.underlying.level_len(2) {
            let es = triangle_edges(&out.underlying, t);
            let marked = es.iter().filter(|e| out.marking.contains(e)).count();
            if marked == 2 {
                for e in es {
                    changed |= out.marking.insert(e);
                }
            }
        }
        if !changed {
            return out;
        }
    }
}

/// Least marking closed under 2-out-of-3 and under 2-out-of-6 on
/// 3-simplices (`{0,2}` and `{1,3}` marked forces all six edges).
pub fn closure_2of6(w: &MarkedSSet) -> MarkedSSet {
    let mut out = closure_2of3(w);
    if out.underlying.truncation() < 3 {
        return out;
    }
    loop {
        let mut changed = false;
        let x = &out.underlying;
        let mut add = Vec::new();
        for s in 0..x.level_len(3) {
            if out.marking.contains(&x.edge(3, s, 0, 2)) && out.marking.contains(&x.edge(3, s, 1, 3)) {
                for a in 0..4 {
                    for b in a + 1..4 {
                        add.push(x.edge(3, s, a, b));
                    }
                }
            }
        }
        for e in add {
            changed |= out.marking.insert(e);
        }
        if !changed {
            return out;
        }
        out = closure_2of3(&out);
    }
}

// ---------------------------------------------------------------------------
// Tensor product
// ---------------------------------------------------------------------------

/// Addressing data for a simplex of `X ⊗ Y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TensorSimplex {
    pub shuffle: Shuffle,
    pub x: usize,
    pub y: usize,
}

/// `X ⊗ Y` with the generating data of each simplex.
#[derive(Debug, Clone)]
pub struct Tensor {
    pub object: MarkedSSet,
    pub simplices: Vec<Vec<TensorSimplex>>,
}

pub fn tensor(x: &MarkedSSet, y: &MarkedSSet) -> Result<MarkedSSet> {
    tensor_capped(x, y, DEFAULT_TENSOR_CAP).map(|t| t.object)
}

/// Builds `X ⊗ Y`. Level `k` is the disjoint union over `(a, b)` of
/// `P^{a,b}_k × X_a × Y_b`, ordered by `(a, b)`, shuffle, `x`, `y`.
pub fn tensor_capped(x: &MarkedSSet, y: &MarkedSSet, cap: usize) -> Result<Tensor> {
    let (xs, ys) = (&x.underlying, &y.underlying);
    let finite_top = xs.truncation() + ys.truncation();
    let truncation = match (xs.is_truncated(), ys.is_truncated()) {
        (false, false) => finite_top,
        (true, false) => xs.truncation(),
        (false, true) => ys.truncation(),
        (true, true) => xs.truncation().min(ys.truncation()),
    };
    if truncation > cap {
        return Err(Error::budget(format!("tensor truncation {truncation}"), cap as u64));
    }
    let truncated = xs.is_truncated() || ys.is_truncated();

    let mut simplices: Vec<Vec<TensorSimplex>> = Vec::with_capacity(truncation + 1);
    let mut index: Vec<HashMap<TensorSimplex, usize>> = Vec::with_capacity(truncation + 1);
    let mut faces: Vec<Vec<Vec<usize>>> = Vec::with_capacity(truncation + 1);
    for k in 0..=truncation {
        let mut level = Vec::new();
        for a in 0..=k.min(xs.truncation()) {
            for b in 0..=k.min(ys.truncation()) {
                if a + b < k {
                    continue;
                }
                let (na, nb) = (xs.level_len(a), ys.level_len(b));
                if na == 0 || nb == 0 {
                    continue;
                }
                for s in enumerate_shuffles(a, b, k) {
                    for xi in 0..na {
                        for yi in 0..nb {
                            level.push(TensorSimplex {
                                shuffle: s.clone(),
                                x: xi,
                                y: yi,
                            });
                        }
                    }
                }
            }
        }
        let idx: HashMap<TensorSimplex, usize> =
            level.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let mut lf = Vec::with_capacity(level.len());
        for s in &level {
            if k == 0 {
                lf.push(Vec::new());
                continue;
            }
            let mut fs = Vec::with_capacity(k + 1);
            for i in 0..=k {
                let face = s.shuffle.face(i).expect("k >= 1");
                let (a, b) = (s.shuffle.n(), s.shuffle.m());
                let fx = face.missed_first.map_or(s.x, |u| xs.face(a, s.x, u));
                let fy = face.missed_second.map_or(s.y, |w| ys.face(b, s.y, w));
                let key = TensorSimplex {
                    shuffle: face.shuffle,
                    x: fx,
                    y: fy,
                };
                fs.push(index[k - 1][&key]);
            }
            lf.push(fs);
        }
        faces.push(lf);
        simplices.push(level);
        index.push(idx);
    }

    let mut object = SSet::from_faces_unchecked(faces, truncated);
    if let (Some(lx), Some(ly)) = (xs.vertex_labels(), ys.vertex_labels()) {
        let labels = simplices[0]
            .iter()
            .map(|s| {
                let mut p = lx[s.x].clone();
                p.extend_from_slice(&ly[s.y]);
                p
            })
            .collect();
        object = object.with_vertex_labels(labels)?;
    }

    // C = (A × Y₀) ⊔ (X₀ × B) ⊔ (A × B)
    let mut marking = BTreeSet::new();
    if truncation >= 1 {
        for (e, s) in simplices[1].iter().enumerate() {
            let marked = match (s.shuffle.n(), s.shuffle.m()) {
                (1, 0) => x.is_marked(s.x),
                (0, 1) => y.is_marked(s.y),
                (1, 1) => x.is_marked(s.x) && y.is_marked(s.y),
                _ => unreachable!("an edge has one of three shapes"),
            };
            if marked {
                marking.insert(e);
            }
        }
    }
    Ok(Tensor {
        object: MarkedSSet {
            underlying: object,
            marking,
        },
        simplices,
    })
}

// ---------------------------------------------------------------------------
// Marked horns
// ---------------------------------------------------------------------------

/// Marked horn data `(Λⁿᵢ, A) ⊆ (Δⁿ, A)`, marking given as vertex pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedHornSpec {
    pub n: usize,
    pub i: usize,
    pub marking: BTreeSet<(usize, usize)>,
}

impl MarkedHornSpec {
    pub fn new(n: usize, i: usize, marking: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n < 2 || i > n {
            return Err(Error::rejected(format!("no marked horn ({n}, {i})")));
        }
        Ok(MarkedHornSpec {
            n,
            i,
            marking: marking.into_iter().collect(),
        })
    }
}

pub fn is_admissible(h: &MarkedHornSpec) -> bool {
    let (n, i) = (h.n, h.i);
    if n < 2 || i > n {
        return false;
    }
    if 0 < i && i < n {
        h.marking.is_empty()
    } else if i == 0 {
        h.marking.len() == 1 && h.marking.contains(&(0, 1))
    } else {
        h.marking.len() == 1 && h.marking.contains(&(n - 1, n))
    }
}

// ---------------------------------------------------------------------------
// Marked maps
// ---------------------------------------------------------------------------

impl Map<MarkedSSet> {
    /// Underlying check plus marking preservation.
    pub fn check_marked(&self) -> std::result::Result<(), String> {
        self.check()?;
        for &e in &self.source.marking {
            if !self.target.is_marked(self.level_fns[1][e]) {
                return Err(format!("marked edge {e} sent to an unmarked edge"));
            }
        }
        Ok(())
    }
}

/// All maps `X -> Y` carrying marked edges to marked edges.
pub fn enumerate_marked_maps(
    x: &Arc<MarkedSSet>,
    y: &Arc<MarkedSSet>,
    budget: u64,
) -> Result<Vec<MarkedMap>> {
    let allow = |k: usize, s: usize, t: usize| k != 1 || !x.is_marked(s) || y.is_marked(t);
    let sols = MapSearch::new(&x.underlying, &y.underlying)
        .budget(budget)
        .allow(&allow)
        .stage("marked map enumeration")
        .collect()?;
    Ok(sols
        .into_iter()
        .map(|level_fns| Map {
            source: x.clone(),
            target: y.clone(),
            level_fns,
        })
        .collect())
}

/// An isomorphism preserving and reflecting markings, if one exists.
pub fn find_marked_isomorphism(
    x: &Arc<MarkedSSet>,
    y: &Arc<MarkedSSet>,
    budget: u64,
) -> Result<Option<MarkedMap>> {
    if x.marking.len() != y.marking.len() {
        return Ok(None);
    }
    let (ux, uy) = (Arc::new(x.underlying.clone()), Arc::new(y.underlying.clone()));
    // cheap rejections first
    if sset::find_isomorphism(&ux, &uy, 0).is_ok_and(|r| r.is_none()) {
        return Ok(None);
    }
    let allow = |k: usize, s: usize, t: usize| k != 1 || x.is_marked(s) == y.is_marked(t);
    let sol = MapSearch::new(&x.underlying, &y.underlying)
        .budget(budget)
        .injective(true)
        .allow(&allow)
        .stage("marked isomorphism search")
        .first()?;
    Ok(sol.map(|level_fns| Map {
        source: x.clone(),
        target: y.clone(),
        level_fns,
    }))
}

pub fn is_marked_isomorphic(x: &MarkedSSet, y: &MarkedSSet) -> Result<bool> {
    Ok(find_marked_isomorphism(&Arc::new(x.clone()), &Arc::new(y.clone()), DEFAULT_BUDGET)?.is_some())
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

/// SSet wire form plus `"marking": [global edge ids]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkedJson {
    #[serde(flatten)]
    pub sset: SSetJson,
    #[serde(default)]
    pub marking: Vec<u64>,
}

impl Serialize for MarkedSSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let marking = self
            .marking
            .iter()
            .map(|&e| self.underlying.global_id(1, e))
            .collect();
        MarkedJson {
            sset: self.underlying.to_json(),
            marking,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MarkedSSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MarkedJson::deserialize(d)?;
        let (underlying, where_is) = SSet::from_json(&j.sset).map_err(serde::de::Error::custom)?;
        let mut marking = BTreeSet::new();
        for id in j.marking {
            match where_is.get(&id) {
                Some(&(1, e)) => {
                    marking.insert(e);
                }
                _ => {
                    return Err(serde::de::Error::custom(format!(
                        "marked id {id} is not an edge"
                    )))
                }
            }
        }
        Ok(MarkedSSet {
            underlying,
            marking,
        })
    }
}
