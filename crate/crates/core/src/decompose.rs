//! Decompositions of marked inclusions into admissible horn pushouts and
//! triangle remarkings, with a replaying verifier.
//!
//! Certificates work on labeled subobjects of a fixed ambient complex
//! (`Δⁿ` with points `[v]`, or `Δᵐ ⊗ Δⁿ` with points `[a, b]`). A simplex
//! is named by its chain of ambient points, so replay never depends on ids.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marked::{self, is_admissible, MarkedHornSpec, MarkedSSet};
use crate::ordinal::{binomial, enumerate_maps, sections_of, MapClass, OrdinalMap};
use crate::sset::{self, from_chains, Point};

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

/// How a step names its simplex inside the ambient complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SimplexImage {
    /// A simplex of `Δᵐ ⊗ Δⁿ` as a jointly injective pair `(f, g)`.
    Pair { f: OrdinalMap, g: OrdinalMap },
    /// A simplex of `Δⁿ` as an injective map `[k] -> [n]`.
    Subset(OrdinalMap),
}

impl SimplexImage {
    pub fn chain(&self) -> Vec<Point> {
        match self {
            SimplexImage::Subset(h) => h.values().iter().map(|&v| vec![v]).collect(),
            SimplexImage::Pair { f, g } => f
                .values()
                .iter()
                .zip(g.values())
                .map(|(&a, &b)| vec![a, b])
                .collect(),
        }
    }

    pub fn from_chain(chain: &[Point], ambient: &[usize]) -> Result<Self> {
        match ambient {
            [n] => Ok(SimplexImage::Subset(OrdinalMap::new(
                *n,
                chain.iter().map(|p| p[0]).collect(),
            )?)),
            [m, n] => Ok(SimplexImage::Pair {
                f: OrdinalMap::new(*m, chain.iter().map(|p| p[0]).collect())?,
                g: OrdinalMap::new(*n, chain.iter().map(|p| p[1]).collect())?,
            }),
            _ => Err(Error::rejected("ambient must be Δⁿ or Δᵐ ⊗ Δⁿ")),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SimplexImage::Subset(h) => h.domain_size(),
            SimplexImage::Pair { f, .. } => f.domain_size(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Step {
    /// Pushout along `(Λᵏᵥ, B) ⊆ (Δᵏ, B)`; adds the simplex and its `v`-th face.
    Horn {
        simplex: SimplexImage,
        v: usize,
        /// `B`, as vertex pairs of `Δᵏ`.
        #[serde(default)]
        marking: BTreeSet<(usize, usize)>,
    },
    /// Marks the third edge of a triangle with exactly two marked edges.
    Remark { triangle: SimplexImage },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PushoutCertificate {
    pub start: MarkedSSet,
    pub target: MarkedSSet,
    pub steps: Vec<Step>,
}

/// First problem found while replaying a certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    /// `None` for problems with the start or final object.
    pub step: Option<usize>,
    pub clause: String,
    pub detail: String,
}

/// Result of [`verify`]; `issues` is empty iff the certificate holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub steps: usize,
    pub outer_steps: usize,
    pub issues: Vec<Issue>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Labeled subobject under construction during replay.
#[derive(Debug, Clone)]
struct State {
    truncation: usize,
    simplices: Vec<HashSet<Vec<Point>>>,
    marked: HashSet<Vec<Point>>,
}

impl State {
    fn from_marked(w: &MarkedSSet) -> std::result::Result<Self, String> {
        let x = w.underlying();
        if x.vertex_labels().is_none() || !x.is_vertex_determined() {
            return Err("object is not a labeled, vertex-determined subobject".into());
        }
        let simplices = (0..=x.truncation())
            .map(|k| (0..x.level_len(k)).map(|id| x.chain(k, id).unwrap()).collect())
            .collect();
        let marked = w.marking().iter().map(|&e| x.chain(1, e).unwrap()).collect();
        Ok(State {
            truncation: x.truncation(),
            simplices,
            marked,
        })
    }

    fn has(&self, chain: &[Point]) -> bool {
        let k = chain.len() - 1;
        k <= self.truncation && self.simplices[k].contains(chain)
    }

    fn same_as(&self, other: &State) -> bool {
        let levels = self.simplices.len().max(other.simplices.len());
        let empty = HashSet::new();
        (0..levels).all(|k| {
            self.simplices.get(k).unwrap_or(&empty) == other.simplices.get(k).unwrap_or(&empty)
        }) && self.marked == other.marked
    }

    fn to_marked(&self) -> Result<MarkedSSet> {
        let chains = self.simplices.iter().flatten().cloned();
        let x = from_chains(self.truncation, chains)?;
        let edges: Vec<(Point, Point)> = self
            .marked
            .iter()
            .map(|c| (c[0].clone(), c[1].clone()))
            .collect();
        MarkedSSet::with_marked_chains(x, &edges)
    }
}

fn is_strictly_increasing(chain: &[Point]) -> bool {
    chain.windows(2).all(|w| {
        w[0] != w[1] && w[0].iter().zip(&w[1]).all(|(a, b)| a <= b)
    })
}

fn drop_vertex(chain: &[Point], v: usize) -> Vec<Point> {
    let mut c = chain.to_vec();
    c.remove(v);
    c
}

fn issue(step: Option<usize>, clause: &str, detail: impl Into<String>) -> Issue {
    Issue {
        step,
        clause: clause.into(),
        detail: detail.into(),
    }
}

/// Replays `cert` and reports the first violated clause, if any.
pub fn verify(cert: &PushoutCertificate) -> Report {
    replay(cert).0
}

/// Replays `cert`; on success also returns the final object.
pub fn replay(cert: &PushoutCertificate) -> (Report, Option<MarkedSSet>) {
    let mut report = Report {
        steps: cert.steps.len(),
        outer_steps: 0,
        issues: Vec::new(),
    };
    for (name, obj) in [("start", &cert.start), ("target", &cert.target)] {
        let v = obj.underlying().validate();
        if !v.is_empty() {
            report
                .issues
                .push(issue(None, "invalid-object", format!("{name}: {v:?}")));
            return (report, None);
        }
    }
    let mut state = match State::from_marked(&cert.start) {
        Ok(s) => s,
        Err(e) => {
            report.issues.push(issue(None, "unlabeled", format!("start: {e}")));
            return (report, None);
        }
    };
    let target = match State::from_marked(&cert.target) {
        Ok(s) => s,
        Err(e) => {
            report.issues.push(issue(None, "unlabeled", format!("target: {e}")));
            return (report, None);
        }
    };
    for (si, step) in cert.steps.iter().enumerate() {
        let at = Some(si);
        match step {
            Step::Horn { simplex, v, marking } => {
                let chain = simplex.chain();
                let k = chain.len() - 1;
                let v = *v;
                if !is_strictly_increasing(&chain) {
                    report.issues.push(issue(at, "not-a-simplex", format!("{chain:?}")));
                    break;
                }
                if k < 2 || v > k {
                    report
                        .issues
                        .push(issue(at, "inadmissible", format!("no horn ({k}, {v})")));
                    break;
                }
                if k > state.truncation {
                    report
                        .issues
                        .push(issue(at, "beyond-truncation", format!("dimension {k}")));
                    break;
                }
                if state.has(&chain) {
                    report
                        .issues
                        .push(issue(at, "already-present", format!("{chain:?}")));
                    break;
                }
                if let Some(i) = (0..=k).find(|&i| i != v && !state.has(&drop_vertex(&chain, i))) {
                    report.issues.push(issue(
                        at,
                        "non-horn-attachment",
                        format!("face d_{i} of {chain:?} is missing"),
                    ));
                    break;
                }
                let missing = drop_vertex(&chain, v);
                if state.has(&missing) {
                    report.issues.push(issue(
                        at,
                        "non-horn-attachment",
                        format!("face d_{v} of {chain:?} is already present"),
                    ));
                    break;
                }
                if let Some(&(a, b)) = marking.iter().find(|&&(a, b)| {
                    !(a < b && b <= k && state.marked.contains(&vec![chain[a].clone(), chain[b].clone()]))
                }) {
                    report.issues.push(issue(
                        at,
                        "marking-not-present",
                        format!("edge {{{a},{b}}} of {chain:?} is not marked"),
                    ));
                    break;
                }
                let spec = MarkedHornSpec {
                    n: k,
                    i: v,
                    marking: marking.clone(),
                };
                if !is_admissible(&spec) {
                    report.issues.push(issue(
                        at,
                        "inadmissible",
                        format!("horn ({k}, {v}) with marking {marking:?}"),
                    ));
                    break;
                }
                if v == 0 || v == k {
                    report.outer_steps += 1;
                }
                state.simplices[k - 1].insert(missing);
                state.simplices[k].insert(chain);
            }
            Step::Remark { triangle } => {
                let chain = triangle.chain();
                if chain.len() != 3 || !state.has(&chain) {
                    report
                        .issues
                        .push(issue(at, "no-such-triangle", format!("{chain:?}")));
                    break;
                }
                let edges = [(0, 1), (1, 2), (0, 2)]
                    .map(|(a, b)| vec![chain[a].clone(), chain[b].clone()]);
                let marked = edges.iter().filter(|e| state.marked.contains(*e)).count();
                if marked != 2 {
                    report.issues.push(issue(
                        at,
                        "remark-needs-two-marked",
                        format!("{chain:?} has {marked} marked edges"),
                    ));
                    break;
                }
                for e in edges {
                    state.marked.insert(e);
                }
            }
        }
    }
    if !report.issues.is_empty() {
        return (report, None);
    }
    if !state.same_as(&target) {
        report
            .issues
            .push(issue(None, "target-mismatch", "replay does not end at the target"));
        return (report, None);
    }
    match state.to_marked() {
        Ok(w) => {
            let v = w.underlying().validate();
            if !v.is_empty() {
                report
                    .issues
                    .push(issue(None, "invalid-object", format!("replayed object: {v:?}")));
                return (report, None);
            }
            (report, Some(w))
        }
        Err(e) => {
            report.issues.push(issue(None, "invalid-object", e.to_string()));
            (report, None)
        }
    }
}

/// Horn marking data `B` for a `k`-simplex at vertex `v`, read off the
/// current marking: the end edge next to an outer horn vertex.
fn horn_marking(chain: &[Point], v: usize, marked: &dyn Fn(&[Point]) -> bool) -> BTreeSet<(usize, usize)> {
    let k = chain.len() - 1;
    let mut b = BTreeSet::new();
    if v == k && marked(&[chain[k - 1].clone(), chain[k].clone()]) {
        b.insert((k - 1, k));
    } else if v == 0 && marked(&[chain[0].clone(), chain[1].clone()]) {
        b.insert((0, 1));
    }
    b
}

// ---------------------------------------------------------------------------
// Spread decomposition
// ---------------------------------------------------------------------------

/// The split `A = {0..j-1} ∪ {i}`, `B = {j..n} ∪ {i}` and its marking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpreadSplit {
    pub a: BTreeSet<usize>,
    pub b: BTreeSet<usize>,
    /// Edges `{i, x}` for `x ∈ A, x > i` and `{x, i}` for `x ∈ B, x < i`.
    pub marking: Vec<(usize, usize)>,
}

pub fn spread_split(n: usize, i: usize, j: usize) -> Result<SpreadSplit> {
    if n < 2 || i > n || j > n {
        return Err(Error::rejected(format!("no spread split for ({n}, {i}, {j})")));
    }
    let mut a: BTreeSet<usize> = (0..j).collect();
    a.insert(i);
    let mut b: BTreeSet<usize> = (j..=n).collect();
    b.insert(i);
    let mut marking: Vec<(usize, usize)> = a.iter().filter(|&&x| x > i).map(|&x| (i, x)).collect();
    marking.extend(b.iter().filter(|&&x| x < i).map(|&x| (x, i)));
    marking.sort_unstable();
    Ok(SpreadSplit { a, b, marking })
}

/// `J ∋ i`, `|J| ≥ 3`, meeting both `A \ {i}` and `B \ {i}`.
pub fn is_spread(split: &SpreadSplit, i: usize, j_set: &[usize]) -> bool {
    j_set.len() >= 3
        && j_set.contains(&i)
        && j_set.iter().any(|&x| x != i && split.a.contains(&x))
        && j_set.iter().any(|&x| x != i && split.b.contains(&x))
}

/// Certificate building `(Λⁿᵢ, M)` from `Δᴬ ∪ Δᴮ` by adding spread simplices.
///
/// Splits where `A` or `B` is all of `[n]` put the whole simplex into the
/// start, which is never inside the horn; those are rejected.
pub fn spread_decomposition(n: usize, i: usize, j: usize) -> Result<PushoutCertificate> {
    let split = spread_split(n, i, j)?;
    if split.a.len() == n + 1 || split.b.len() == n + 1 {
        return Err(Error::rejected(format!(
            "split ({n}, {i}, {j}) puts all of Δ{n} into the start, which is not inside the horn"
        )));
    }
    let av: Vec<usize> = split.a.iter().copied().collect();
    let bv: Vec<usize> = split.b.iter().copied().collect();
    let start_x = sset::generated_subcomplex(n, &[av, bv])?;
    let start = MarkedSSet::with_marked_pairs(start_x, &split.marking)?;
    let target_x = sset::horn(n, i)?;
    let target = MarkedSSet::with_marked_pairs(target_x, &split.marking)?;

    let marked: HashSet<Vec<Point>> = split
        .marking
        .iter()
        .map(|&(a, b)| vec![vec![a], vec![b]])
        .collect();
    let is_marked = |e: &[Point]| marked.contains(e);
    let mut steps = Vec::new();
    for size in 3..=n {
        for h in enumerate_maps(size - 1, n, MapClass::Injective) {
            if !is_spread(&split, i, h.values()) {
                continue;
            }
            let v = h.values().iter().position(|&x| x == i).unwrap();
            let chain: Vec<Point> = h.values().iter().map(|&x| vec![x]).collect();
            let marking = horn_marking(&chain, v, &is_marked);
            steps.push(Step::Horn {
                simplex: SimplexImage::Subset(h),
                v,
                marking,
            });
        }
    }
    Ok(PushoutCertificate {
        start,
        target,
        steps,
    })
}

/// The splits of `(n, i, j)` for which the start already contains `Δⁿ`.
pub fn is_degenerate_split(n: usize, i: usize, j: usize) -> bool {
    j == 0 || (i == 0 && j == 1) || (i == n && j == n)
}

// ---------------------------------------------------------------------------
// Shuffle filtration
// ---------------------------------------------------------------------------

/// full / special / index of a simplex `(f, g)` of `Δᵐ ⊗ Δⁿ` relative to `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiltrationTag {
    pub full: bool,
    pub special: bool,
    pub index: i64,
}

pub fn classify(f: &OrdinalMap, g: &OrdinalMap, m: usize, n: usize, l: usize) -> Result<FiltrationTag> {
    if l == 0 || l > n {
        return Err(Error::rejected(format!("l = {l} outside 0 < l <= {n}")));
    }
    if f.codomain_size() != m || g.codomain_size() != n || f.domain_size() != g.domain_size() {
        return Err(Error::rejected("(f, g) is not a simplex of Δᵐ ⊗ Δⁿ"));
    }
    let k = f.domain_size();
    let gv = g.values();
    let fiber_l: Vec<usize> = (0..=k).filter(|&t| gv[t] == l).collect();
    let full = f.is_surjective() && (0..=n).all(|q| q == l || gv.contains(&q));
    let special = full
        && !fiber_l.is_empty()
        && {
            let below = (0..=k).filter(|&t| gv[t] == l - 1).max();
            below.is_some_and(|b| f.apply(fiber_l[0]) == f.apply(b))
        };
    let index = (k + 1) as i64 - n as i64 - fiber_l.len() as i64;
    Ok(FiltrationTag {
        full,
        special,
        index,
    })
}

/// Chains of `[m] × [n]` with `k + 1` points, lexicographic.
pub fn grid_chains(m: usize, n: usize, k: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    let mut buf: Vec<(usize, usize)> = Vec::with_capacity(k + 1);
    fn walk(m: usize, n: usize, k: usize, buf: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if buf.len() == k + 1 {
            out.push(buf.clone());
            return;
        }
        let (a0, b0) = buf.last().copied().unwrap_or((0, 0));
        for a in a0..=m {
            for b in 0..=n {
                if let Some(&(pa, pb)) = buf.last() {
                    if b < pb || (a, b) == (pa, pb) {
                        continue;
                    }
                } else if b < b0 {
                    continue;
                }
                buf.push((a, b));
                walk(m, n, k, buf, out);
                buf.pop();
            }
        }
    }
    walk(m, n, k, &mut buf, &mut out);
    out
}

fn pair_of(points: &[(usize, usize)], m: usize, n: usize) -> (OrdinalMap, OrdinalMap) {
    let f = OrdinalMap::new(m, points.iter().map(|p| p.0).collect()).expect("chain projections are monotone");
    let g = OrdinalMap::new(n, points.iter().map(|p| p.1).collect()).expect("chain projections are monotone");
    (f, g)
}

/// The marking `A` of the admissible horn `Λⁿₗ`.
pub fn horn_marking_for(n: usize, l: usize) -> Vec<(usize, usize)> {
    if l == n {
        vec![(n - 1, n)]
    } else if l == 0 {
        vec![(0, 1)]
    } else {
        Vec::new()
    }
}

/// `(Δᵐ)♭ ⊗ (Δⁿ, A)` with labels `[a, b]`.
pub fn marked_prism(m: usize, n: usize, l: usize) -> Result<MarkedSSet> {
    let y = MarkedSSet::with_marked_pairs(sset::standard(n), &horn_marking_for(n, l))?;
    marked::tensor(&marked::flat(sset::standard(m)), &y)
}

/// Certificate building `(Δᵐ)♭ ⊗ (Δⁿ, A)` from the pushout corner by
/// adding special simplices, ordered by dimension, then index, then
/// lexicographically. `l = 0` is handled by reversing both factors.
pub fn shuffle_filtration(m: usize, n: usize, l: usize) -> Result<PushoutCertificate> {
    if n < 2 || l > n {
        return Err(Error::rejected(format!(
            "shuffle filtration needs n >= 2, 0 <= l <= n; got ({m}, {n}, {l})"
        )));
    }
    if l == 0 {
        return shuffle_filtration(m, n, n).and_then(|c| reverse_certificate(&c, m, n));
    }
    let target = marked_prism(m, n, l)?;
    let tx = target.underlying();
    let mut start_chains = Vec::new();
    let mut special: Vec<(usize, i64, Vec<(usize, usize)>)> = Vec::new();
    for k in 0..=tx.truncation() {
        for id in 0..tx.level_len(k) {
            let chain = tx.chain(k, id).unwrap();
            let points: Vec<(usize, usize)> = chain.iter().map(|p| (p[0], p[1])).collect();
            let (f, g) = pair_of(&points, m, n);
            let tag = classify(&f, &g, m, n, l)?;
            if !tag.full {
                start_chains.push(chain);
            } else if tag.special {
                special.push((k, tag.index, points));
            }
        }
    }
    special.sort();
    let start_x = from_chains(tx.truncation(), start_chains)?;
    let marked_edges: Vec<(Point, Point)> = target
        .marked_chains()
        .unwrap()
        .into_iter()
        .map(|c| (c[0].clone(), c[1].clone()))
        .collect();
    let start = MarkedSSet::with_marked_chains(start_x, &marked_edges)?;
    let marked: HashSet<Vec<Point>> = marked_edges.iter().map(|(a, b)| vec![a.clone(), b.clone()]).collect();
    let is_marked = |e: &[Point]| marked.contains(e);

    let mut steps = Vec::with_capacity(special.len());
    for (_, _, points) in special {
        let (f, g) = pair_of(&points, m, n);
        let v = g.values().iter().position(|&q| q == l).expect("special simplices meet l");
        let chain: Vec<Point> = points.iter().map(|&(a, b)| vec![a, b]).collect();
        let marking = horn_marking(&chain, v, &is_marked);
        steps.push(Step::Horn {
            simplex: SimplexImage::Pair { f, g },
            v,
            marking,
        });
    }
    Ok(PushoutCertificate {
        start,
        target,
        steps,
    })
}

/// Applies `(a, b) ↦ (m − a, n − b)` to every chain (reversing order).
fn reverse_certificate(c: &PushoutCertificate, m: usize, n: usize) -> Result<PushoutCertificate> {
    let flip_chain = |chain: &[Point]| -> Vec<Point> {
        chain.iter().rev().map(|p| vec![m - p[0], n - p[1]]).collect()
    };
    let flip_obj = |w: &MarkedSSet| -> Result<MarkedSSet> {
        let x = w.underlying();
        let mut chains = Vec::new();
        for k in 0..=x.truncation() {
            for id in 0..x.level_len(k) {
                chains.push(flip_chain(&x.chain(k, id).unwrap()));
            }
        }
        let y = from_chains(x.truncation(), chains)?;
        let edges: Vec<(Point, Point)> = w
            .marked_chains()
            .unwrap()
            .iter()
            .map(|e| {
                let f = flip_chain(e);
                (f[0].clone(), f[1].clone())
            })
            .collect();
        MarkedSSet::with_marked_chains(y, &edges)
    };
    let mut steps = Vec::with_capacity(c.steps.len());
    for s in &c.steps {
        steps.push(match s {
            Step::Horn { simplex, v, marking } => {
                let chain = flip_chain(&simplex.chain());
                let k = chain.len() - 1;
                Step::Horn {
                    simplex: SimplexImage::from_chain(&chain, &[m, n])?,
                    v: k - v,
                    marking: marking.iter().map(|&(a, b)| (k - b, k - a)).collect(),
                }
            }
            Step::Remark { triangle } => Step::Remark {
                triangle: SimplexImage::from_chain(&flip_chain(&triangle.chain()), &[m, n])?,
            },
        });
    }
    Ok(PushoutCertificate {
        start: flip_obj(&c.start)?,
        target: flip_obj(&c.target)?,
        steps,
    })
}

/// Filtration block `(dimension, index)` of a shuffle-filtration step.
pub fn step_block(step: &Step, m: usize, n: usize, l: usize) -> Option<(usize, i64)> {
    match step {
        Step::Horn {
            simplex: SimplexImage::Pair { f, g },
            ..
        } => {
            let (f, g, l) = if l == 0 {
                // blocks of the reversed filtration
                let k = f.domain_size();
                let rf = (0..=k).map(|t| m - f.apply(k - t)).collect();
                let rg = (0..=k).map(|t| n - g.apply(k - t)).collect();
                (OrdinalMap::new(m, rf).ok()?, OrdinalMap::new(n, rg).ok()?, n)
            } else {
                (f.clone(), g.clone(), l)
            };
            let tag = classify(&f, &g, m, n, l).ok()?;
            Some((f.domain_size(), tag.index))
        }
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Section pairs and T(h1, h2)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionPairGraph {
    pub sections: Vec<OrdinalMap>,
    /// Vertices: indices into `sections`, as `(h1, h2)`.
    pub pairs: Vec<(usize, usize)>,
    /// Neighbour edges between indices into `pairs`.
    pub edges: Vec<(usize, usize)>,
    pub connected: bool,
}

fn l1(a: &OrdinalMap, b: &OrdinalMap) -> usize {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| x.abs_diff(y))
        .sum()
}

/// Pairs of sections of `f`, joined when their total L1 distance is 1.
pub fn section_pair_graph(f: &OrdinalMap) -> Result<SectionPairGraph> {
    let sections = sections_of(f)?;
    let s = sections.len();
    let pairs: Vec<(usize, usize)> = (0..s).flat_map(|a| (0..s).map(move |b| (a, b))).collect();
    let dist: Vec<Vec<usize>> = sections
        .iter()
        .map(|a| sections.iter().map(|b| l1(a, b)).collect())
        .collect();
    let mut edges = Vec::new();
    let mut adj = vec![Vec::new(); pairs.len()];
    for p in 0..pairs.len() {
        for q in p + 1..pairs.len() {
            let (a1, a2) = pairs[p];
            let (b1, b2) = pairs[q];
            if dist[a1][b1] + dist[a2][b2] == 1 {
                edges.push((p, q));
                adj[p].push(q);
                adj[q].push(p);
            }
        }
    }
    let mut seen = vec![false; pairs.len()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(p) = queue.pop_front() {
        for &q in &adj[p] {
            if !seen[q] {
                seen[q] = true;
                queue.push_back(q);
            }
        }
    }
    Ok(SectionPairGraph {
        connected: seen.iter().all(|&x| x),
        sections,
        pairs,
        edges,
    })
}

/// `M_f`: spine edges `{t, t+1}` of the domain with `f(t) = f(t+1)` or
/// `{f(t), f(t+1)} ∈ M`.
pub fn m_f(f: &OrdinalMap, spine_marking: &BTreeSet<(usize, usize)>) -> BTreeSet<(usize, usize)> {
    let n = f.domain_size();
    (0..n)
        .filter(|&t| {
            let (a, b) = (f.apply(t), f.apply(t + 1));
            a == b || spine_marking.contains(&(a, b))
        })
        .map(|t| (t, t + 1))
        .collect()
}

/// `T(h1, h2) ⊆ (Δⁿ, M̃_f)`: the fibre spines plus edges `{h1(i), h2(i+1)}`,
/// marked as induced from the 2-out-of-3 closure of `M_f`.
pub fn build_t(
    h1: &OrdinalMap,
    h2: &OrdinalMap,
    f: &OrdinalMap,
    spine_marking: &BTreeSet<(usize, usize)>,
) -> Result<MarkedSSet> {
    let n = f.domain_size();
    let k = f.codomain_size();
    for h in [h1, h2] {
        let is_section = h.domain_size() == k
            && h.codomain_size() == n
            && (0..=k).all(|i| f.apply(h.apply(i)) == i);
        if !is_section {
            return Err(Error::rejected(format!("{h} is not a section of {f}")));
        }
    }
    if let Some(e) = spine_marking.iter().find(|&&(a, b)| b != a + 1 || b > k) {
        return Err(Error::rejected(format!("{e:?} is not a spine edge of Δ{k}")));
    }
    let closure = closed_marking(n, &m_f(f, spine_marking));
    let mut edges: BTreeSet<(usize, usize)> =
        (0..n).filter(|&t| f.apply(t) == f.apply(t + 1)).map(|t| (t, t + 1)).collect();
    for i in 0..k {
        edges.insert((h1.apply(i), h2.apply(i + 1)));
    }
    let mut chains: Vec<Vec<Point>> = (0..=n).map(|v| vec![vec![v]]).collect();
    chains.extend(edges.iter().map(|&(a, b)| vec![vec![a], vec![b]]));
    let x = from_chains(n, chains)?;
    let marked: Vec<(usize, usize)> = edges.into_iter().filter(|e| closure.contains(e)).collect();
    MarkedSSet::with_marked_pairs(x, &marked)
}

/// 2-out-of-3 closure of a marking on `Δⁿ`, as vertex pairs.
pub fn closed_marking(n: usize, pairs: &BTreeSet<(usize, usize)>) -> BTreeSet<(usize, usize)> {
    let pairs: Vec<_> = pairs.iter().copied().collect();
    let w = MarkedSSet::with_marked_pairs(sset::standard(n), &pairs).expect("edges of Δⁿ");
    marked::closure_2of3(&w)
        .marked_chains()
        .unwrap()
        .into_iter()
        .map(|c| (c[0][0], c[1][0]))
        .collect()
}

/// `(Spⁿ, M_f)` as a labeled marked object.
pub fn spine_with_m_f(f: &OrdinalMap, spine_marking: &BTreeSet<(usize, usize)>) -> Result<MarkedSSet> {
    let pairs: Vec<_> = m_f(f, spine_marking).into_iter().collect();
    MarkedSSet::with_marked_pairs(sset::spine(f.domain_size()), &pairs)
}

/// `h_max(i) = max f⁻¹(i)` and `h_min(i) = min f⁻¹(i)`.
pub fn extreme_sections(f: &OrdinalMap) -> Result<(OrdinalMap, OrdinalMap)> {
    if !f.is_surjective() {
        return Err(Error::rejected(format!("{f} is not surjective")));
    }
    let k = f.codomain_size();
    let n = f.domain_size();
    let hmax = OrdinalMap::new(n, (0..=k).map(|i| f.fiber(i).end - 1).collect())?;
    let hmin = OrdinalMap::new(n, (0..=k).map(|i| f.fiber(i).start).collect())?;
    Ok((hmax, hmin))
}

/// Count of spread subsets of sizes `3..=n` for the given split.
pub fn spread_census(n: usize, i: usize, j: usize) -> Result<usize> {
    let split = spread_split(n, i, j)?;
    let mut count = 0;
    for mask in 0u32..(1 << (n + 1)) {
        let set: Vec<usize> = (0..=n).filter(|b| mask & (1 << b) != 0).collect();
        if set.len() <= n && is_spread(&split, i, &set) {
            count += 1;
        }
    }
    Ok(count)
}

/// Multiset of `(dimension, index)` over special simplices of `Δᵐ ⊗ Δⁿ`.
pub fn special_census(m: usize, n: usize, l: usize) -> Result<HashMap<(usize, i64), usize>> {
    let mut out = HashMap::new();
    for k in 0..=m + n {
        for points in grid_chains(m, n, k) {
            let (f, g) = pair_of(&points, m, n);
            let tag = classify(&f, &g, m, n, l)?;
            if tag.special {
                *out.entry((k, tag.index)).or_insert(0) += 1;
            }
        }
    }
    Ok(out)
}

/// Number of surjections `[m] ↠ [n]` (compositions of `m + 1` into `n + 1` parts).
pub fn surjection_count(m: usize, n: usize) -> usize {
    if n > m {
        0
    } else {
        binomial(m, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinal::Shuffle;

    fn ok(cert: &PushoutCertificate) {
        let r = verify(cert);
        assert!(r.ok(), "{:?}", r.issues);
    }

    #[test]
    fn spread_small_cases() {
        let c = spread_decomposition(2, 1, 1).unwrap();
        assert!(c.steps.is_empty());
        ok(&c);
        assert_eq!(c.start.labeled_form(), c.target.labeled_form());

        let c = spread_decomposition(3, 1, 1).unwrap();
        ok(&c);
        let added: Vec<Vec<Point>> = c
            .steps
            .iter()
            .map(|s| match s {
                Step::Horn { simplex, v, .. } => {
                    assert_eq!(*v, 1);
                    simplex.chain()
                }
                _ => panic!("no remarks expected"),
            })
            .collect();
        assert_eq!(
            added,
            vec![
                vec![vec![0], vec![1], vec![2]],
                vec![vec![0], vec![1], vec![3]],
            ]
        );
    }

    #[test]
    fn spread_step_counts_match_census() {
        for n in 2..=5 {
            for i in 0..=n {
                for j in 0..=n {
                    if is_degenerate_split(n, i, j) {
                        assert!(spread_decomposition(n, i, j).is_err());
                        continue;
                    }
                    let c = spread_decomposition(n, i, j).unwrap();
                    assert_eq!(c.steps.len(), spread_census(n, i, j).unwrap());
                }
            }
        }
    }

    #[test]
    fn spread_verifies_for_nondegenerate_splits() {
        for n in 2..=5 {
            for i in 0..=n {
                for j in 0..=n {
                    if is_degenerate_split(n, i, j) {
                        continue;
                    }
                    let c = spread_decomposition(n, i, j).unwrap();
                    let r = verify(&c);
                    assert!(r.ok(), "({n},{i},{j}) {:?}", r.issues);
                    assert_eq!(
                        c.target.underlying().labeled_form(),
                        sset::horn(n, i).unwrap().labeled_form()
                    );
                }
            }
        }
    }

    #[test]
    fn degenerate_splits_put_the_simplex_in_the_start() {
        for n in 2..=5 {
            let bad: Vec<(usize, usize)> = (0..=n)
                .flat_map(|i| (0..=n).map(move |j| (i, j)))
                .filter(|&(i, j)| is_degenerate_split(n, i, j))
                .collect();
            assert_eq!(bad.len(), n + 3);
            for (i, j) in bad {
                let s = spread_split(n, i, j).unwrap();
                assert!(s.a.len() == n + 1 || s.b.len() == n + 1);
            }
        }
    }

    #[test]
    fn verifier_rejects_swapped_dependency() {
        let mut c = spread_decomposition(4, 2, 2).unwrap();
        // the last step is 3-dimensional and needs earlier triangles
        let last = c.steps.len() - 1;
        c.steps.swap(0, last);
        let r = verify(&c);
        assert_eq!(r.issues[0].clause, "non-horn-attachment");
        assert_eq!(r.issues[0].step, Some(0));
    }

    #[test]
    fn verifier_rejects_bad_remark() {
        let mut c = spread_decomposition(3, 1, 1).unwrap();
        c.steps.push(Step::Remark {
            triangle: SimplexImage::Subset(OrdinalMap::new(3, vec![0, 1, 2]).unwrap()),
        });
        let r = verify(&c);
        assert_eq!(r.issues[0].clause, "remark-needs-two-marked");
    }

    #[test]
    fn verifier_accepts_remark_with_two_marked_edges() {
        let x = sset::standard(2);
        let start = MarkedSSet::with_marked_pairs(x.clone(), &[(0, 1), (1, 2)]).unwrap();
        let target = marked::sharp(x);
        let cert = PushoutCertificate {
            start,
            target,
            steps: vec![Step::Remark {
                triangle: SimplexImage::Subset(OrdinalMap::identity(2)),
            }],
        };
        ok(&cert);
    }

    #[test]
    fn verifier_rejects_inadmissible_outer_horn() {
        // Λ²₀ ⊆ Δ² with nothing marked
        let start = marked::flat(sset::horn(2, 0).unwrap());
        let target = marked::flat(sset::standard(2));
        let cert = PushoutCertificate {
            start,
            target,
            steps: vec![Step::Horn {
                simplex: SimplexImage::Subset(OrdinalMap::identity(2)),
                v: 0,
                marking: BTreeSet::new(),
            }],
        };
        assert_eq!(verify(&cert).issues[0].clause, "inadmissible");
    }

    #[test]
    fn classify_against_clauses() {
        // independent evaluation for m = 1, n = 2, l = 2
        let (m, n, l) = (1, 2, 2);
        for k in 0..=3 {
            for pts in grid_chains(m, n, k) {
                let (f, g) = pair_of(&pts, m, n);
                let tag = classify(&f, &g, m, n, l).unwrap();
                let fs: BTreeSet<usize> = pts.iter().map(|p| p.0).collect();
                let gs: BTreeSet<usize> = pts.iter().map(|p| p.1).collect();
                let full = fs.len() == m + 1 && (0..=n).filter(|&q| q != l).all(|q| gs.contains(&q));
                let first_l = pts.iter().position(|p| p.1 == l);
                let last_below = pts.iter().rposition(|p| p.1 == l - 1);
                let special = full
                    && match (first_l, last_below) {
                        (Some(a), Some(b)) => pts[a].0 == pts[b].0,
                        _ => false,
                    };
                assert_eq!(tag.full, full, "{pts:?}");
                assert_eq!(tag.special, special, "{pts:?}");
                assert!(!tag.special || tag.full);
            }
        }
    }

    #[test]
    fn top_simplices_are_special() {
        for m in 1..=3 {
            for n in 1..=3 {
                for l in 1..=n {
                    for s in crate::ordinal::enumerate_shuffles(m, n, m + n) {
                        let (f, g) = (s.first(), s.second());
                        let tag = classify(&f, &g, m, n, l).unwrap();
                        assert!(tag.special, "{s:?}");
                        assert!(tag.index >= 0 && tag.index <= m as i64);
                    }
                }
            }
        }
        let _ = Shuffle::new(1, 1, vec![(0, 0), (1, 1)]).unwrap();
    }

    #[test]
    fn classify_rejects_bad_l() {
        let f = OrdinalMap::identity(1);
        assert!(classify(&f, &f, 1, 1, 0).is_err());
        assert!(classify(&f, &f, 1, 1, 2).is_err());
    }

    #[test]
    fn shuffle_filtration_small_cases() {
        let c = shuffle_filtration(1, 2, 1).unwrap();
        ok(&c);
        let census: usize = special_census(1, 2, 1).unwrap().values().sum();
        assert_eq!(c.steps.len(), census);

        let c = shuffle_filtration(1, 2, 2).unwrap();
        let r = verify(&c);
        assert!(r.ok(), "{:?}", r.issues);
        assert!(r.outer_steps >= 1);
        assert!(c.steps.iter().any(|s| matches!(s, Step::Horn { simplex, v, marking }
            if *v == simplex.dim() && marking.len() == 1)));

        let c = shuffle_filtration(2, 2, 1).unwrap();
        let (_, fin) = replay(&c);
        let expected = marked::tensor(
            &marked::flat(sset::standard(2)),
            &marked::flat(sset::standard(2)),
        )
        .unwrap();
        assert_eq!(fin.unwrap().labeled_form(), expected.labeled_form());
    }

    #[test]
    fn start_is_the_pushout_corner() {
        for (m, n, l) in [(1, 2, 1), (1, 2, 2), (2, 2, 1), (1, 3, 3), (2, 3, 2)] {
            let c = shuffle_filtration(m, n, l).unwrap();
            let a = horn_marking_for(n, l);
            let full_y = MarkedSSet::with_marked_pairs(sset::standard(n), &a).unwrap();
            let horn_y = MarkedSSet::with_marked_pairs(sset::horn(n, l).unwrap(), &a).unwrap();
            let left = marked::tensor(&marked::flat(sset::boundary(m)), &full_y).unwrap();
            let right = marked::tensor(&marked::flat(sset::standard(m)), &horn_y).unwrap();
            let (lf, lm) = left.labeled_form().unwrap();
            let (rf, rm) = right.labeled_form().unwrap();
            let (sf, sm) = c.start.labeled_form().unwrap();
            for k in 0..sf.len() {
                let mut union: Vec<_> = lf.get(k).into_iter().flatten().chain(rf.get(k).into_iter().flatten()).cloned().collect();
                union.sort();
                union.dedup();
                assert_eq!(sf[k], union, "({m},{n},{l}) level {k}");
            }
            let mut marks: Vec<_> = lm.into_iter().chain(rm).collect();
            marks.sort();
            marks.dedup();
            assert_eq!(sm, marks);
        }
    }

    #[test]
    fn reversed_filtration_verifies() {
        for (m, n) in [(1, 2), (2, 2), (1, 3)] {
            let c = shuffle_filtration(m, n, 0).unwrap();
            let r = verify(&c);
            assert!(r.ok(), "({m},{n}) {:?}", r.issues);
            assert_eq!(c.target.labeled_form(), marked_prism(m, n, 0).unwrap().labeled_form());
        }
    }

    #[test]
    fn point_times_horn_is_one_step() {
        for l in 0..=3 {
            let c = shuffle_filtration(0, 3, l).unwrap();
            assert_eq!(c.steps.len(), 1);
            assert!(verify(&c).ok());
        }
    }

    #[test]
    fn shuffle_filtration_rejects_bad_parameters() {
        assert!(shuffle_filtration(1, 1, 1).is_err());
        assert!(shuffle_filtration(1, 2, 3).is_err());
    }

    #[test]
    fn certificates_are_deterministic_and_round_trip() {
        let a = serde_json::to_string(&shuffle_filtration(1, 2, 2).unwrap()).unwrap();
        let b = serde_json::to_string(&shuffle_filtration(1, 2, 2).unwrap()).unwrap();
        assert_eq!(a, b);
        let back: PushoutCertificate = serde_json::from_str(&a).unwrap();
        ok(&back);
        assert_eq!(serde_json::to_string(&back).unwrap(), a);
    }

    #[test]
    fn section_graphs() {
        let id = OrdinalMap::identity(2);
        let g = section_pair_graph(&id).unwrap();
        assert_eq!(g.pairs.len(), 1);
        assert!(g.connected);

        let f = OrdinalMap::new(1, vec![0, 0, 1, 1]).unwrap();
        let g = section_pair_graph(&f).unwrap();
        assert_eq!(g.sections.len(), 4);
        assert_eq!(g.pairs.len(), 16);
        assert!(g.connected);
        assert!(section_pair_graph(&OrdinalMap::new(2, vec![0, 2]).unwrap()).is_err());
    }

    #[test]
    fn t_of_extreme_sections_is_the_marked_spine() {
        for m in 1..=5 {
            for k in 0..=m {
                for f in enumerate_maps(m, k, MapClass::Surjective) {
                    let (hmax, hmin) = extreme_sections(&f).unwrap();
                    let spine_edges: Vec<(usize, usize)> = (0..k).map(|i| (i, i + 1)).collect();
                    for mask in 0u32..(1 << k) {
                        let mk: BTreeSet<_> = spine_edges
                            .iter()
                            .enumerate()
                            .filter(|(b, _)| mask & (1 << b) != 0)
                            .map(|(_, &e)| e)
                            .collect();
                        let t = build_t(&hmax, &hmin, &f, &mk).unwrap();
                        let sp = spine_with_m_f(&f, &mk).unwrap();
                        assert_eq!(t.labeled_form(), sp.labeled_form(), "{f} {mk:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn t_marking_matches_the_stated_formula() {
        // N = all edges of S plus {h1(i), h2(i+1)} whenever {i, i+1} ∈ M
        let f = OrdinalMap::new(2, vec![0, 0, 1, 1, 2]).unwrap();
        let mk: BTreeSet<_> = [(1, 2)].into_iter().collect();
        for h1 in sections_of(&f).unwrap() {
            for h2 in sections_of(&f).unwrap() {
                let t = build_t(&h1, &h2, &f, &mk).unwrap();
                let mut expected: Vec<Vec<Point>> = (0..4)
                    .filter(|&t| f.apply(t) == f.apply(t + 1))
                    .map(|t| vec![vec![t], vec![t + 1]])
                    .collect();
                for i in 0..2 {
                    if mk.contains(&(i, i + 1)) {
                        expected.push(vec![vec![h1.apply(i)], vec![h2.apply(i + 1)]]);
                    }
                }
                expected.sort();
                expected.dedup();
                assert_eq!(t.marked_chains().unwrap(), expected);
            }
        }
        assert!(build_t(&OrdinalMap::identity(2), &OrdinalMap::identity(2), &f, &mk).is_err());
    }

    #[test]
    fn grid_chain_counts() {
        // k = m + n chains are the maximal lattice paths
        for m in 0..=3 {
            for n in 0..=3 {
                assert_eq!(grid_chains(m, n, m + n).len(), binomial(m + n, m));
                assert_eq!(grid_chains(m, n, 0).len(), (m + 1) * (n + 1));
            }
        }
    }
}
