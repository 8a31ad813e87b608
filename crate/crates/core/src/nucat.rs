//! Finite non-unital categories: composition tables, nerves, quasi-units,
//! invertible morphisms, Segal checks and discrete DK-equivalences.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, RwLock};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marked::{closure_2of3, MarkedMap, MarkedSSet};
use crate::sset::SSet;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Morphism {
    pub name: String,
    pub src: usize,
    pub tgt: usize,
}

/// A finite category without identities: objects, morphisms and a total,
/// associative composition on composable pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NuCat {
    objects: Vec<String>,
    morphs: Vec<Morphism>,
    /// `hom[x][y]`: morphism ids `x -> y`, ascending.
    hom: Vec<Vec<Vec<usize>>>,
    /// `comp[g * M + f] = g ∘ f`, `NONE` if not composable.
    comp: Vec<usize>,
}

/// A broken rule of a composition table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CatViolation {
    Missing { g: String, f: String },
    IllTyped { g: String, f: String, h: String },
    NonAssociative { h: String, g: String, f: String },
}

impl NuCat {
    /// Build from parts; `comp` maps `(g, f)` to `g ∘ f`.
    pub fn new(
        objects: Vec<String>,
        morphs: Vec<Morphism>,
        comp: &HashMap<(usize, usize), usize>,
    ) -> Result<Self> {
        let c = Self::unchecked(objects, morphs, comp)?;
        let v = c.violations();
        if v.is_empty() {
            Ok(c)
        } else {
            Err(Error::rejected(format!("invalid composition table: {v:?}")))
        }
    }

    /// Build without checking totality or associativity (see [`NuCat::violations`]).
    pub fn unchecked(
        objects: Vec<String>,
        morphs: Vec<Morphism>,
        comp: &HashMap<(usize, usize), usize>,
    ) -> Result<Self> {
        let o = objects.len();
        let m = morphs.len();
        if morphs.iter().any(|f| f.src >= o || f.tgt >= o) {
            return Err(Error::rejected("morphism endpoint outside the objects"));
        }
        let mut hom = vec![vec![Vec::new(); o]; o];
        for (i, f) in morphs.iter().enumerate() {
            hom[f.src][f.tgt].push(i);
        }
        let mut table = vec![NONE; m * m];
        for (&(g, f), &h) in comp {
            if g >= m || f >= m || h >= m {
                return Err(Error::rejected("composition refers to a missing morphism"));
            }
            table[g * m + f] = h;
        }
        Ok(NuCat {
            objects,
            morphs,
            hom,
            comp: table,
        })
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_morphisms(&self) -> usize {
        self.morphs.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn morphism(&self, i: usize) -> &Morphism {
        &self.morphs[i]
    }

    pub fn morphisms(&self) -> &[Morphism] {
        &self.morphs
    }

    pub fn hom(&self, x: usize, y: usize) -> &[usize] {
        &self.hom[x][y]
    }

    /// `g ∘ f`, when `tgt f = src g`.
    pub fn compose(&self, g: usize, f: usize) -> Option<usize> {
        let h = self.comp[g * self.morphs.len() + f];
        (h != NONE).then_some(h)
    }

    fn name(&self, i: usize) -> String {
        self.morphs[i].name.clone()
    }

    /// Every missing, ill-typed or non-associative entry.
    pub fn violations(&self) -> Vec<CatViolation> {
        let m = self.morphs.len();
        let mut out = Vec::new();
        for g in 0..m {
            for f in 0..m {
                let composable = self.morphs[f].tgt == self.morphs[g].src;
                let h = self.comp[g * m + f];
                match (composable, h == NONE) {
                    (true, true) => out.push(CatViolation::Missing {
                        g: self.name(g),
                        f: self.name(f),
                    }),
                    (false, false) => out.push(CatViolation::IllTyped {
                        g: self.name(g),
                        f: self.name(f),
                        h: self.name(h),
                    }),
                    (true, false) => {
                        let hm = &self.morphs[h];
                        if hm.src != self.morphs[f].src || hm.tgt != self.morphs[g].tgt {
                            out.push(CatViolation::IllTyped {
                                g: self.name(g),
                                f: self.name(f),
                                h: self.name(h),
                            });
                        }
                    }
                    (false, true) => {}
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        for f in 0..m {
            for g in &self.hom_out(self.morphs[f].tgt) {
                for h in &self.hom_out(self.morphs[*g].tgt) {
                    let hg = self.comp[h * m + g];
                    let gf = self.comp[g * m + f];
                    if self.comp[hg * m + f] != self.comp[h * m + gf] {
                        out.push(CatViolation::NonAssociative {
                            h: self.name(*h),
                            g: self.name(*g),
                            f: self.name(f),
                        });
                    }
                }
            }
        }
        out
    }

    /// Morphisms with source `x`.
    pub fn hom_out(&self, x: usize) -> Vec<usize> {
        (0..self.objects.len()).flat_map(|y| self.hom[x][y].iter().copied()).collect()
    }

    /// Morphisms with target `y`.
    pub fn hom_in(&self, y: usize) -> Vec<usize> {
        (0..self.objects.len()).flat_map(|x| self.hom[x][y].iter().copied()).collect()
    }

    // ---- invertibles and quasi-units ----

    /// `f : x -> y` such that `f ∘ -` and `- ∘ f` are bijections on every hom-set.
    pub fn is_invertible(&self, f: usize) -> bool {
        let Morphism { src: x, tgt: y, .. } = self.morphs[f];
        (0..self.objects.len()).all(|z| {
            let post: BTreeSet<usize> = self.hom[z][x].iter().map(|&g| self.compose(f, g).unwrap()).collect();
            let pre: BTreeSet<usize> = self.hom[y][z].iter().map(|&h| self.compose(h, f).unwrap()).collect();
            self.hom[z][x].len() == self.hom[z][y].len()
                && post.len() == self.hom[z][y].len()
                && self.hom[y][z].len() == self.hom[x][z].len()
                && pre.len() == self.hom[x][z].len()
        })
    }

    /// Endomorphisms `q` with `q ∘ g = g` and `h ∘ q = h` whenever defined.
    pub fn is_quasi_unit(&self, q: usize) -> bool {
        let Morphism { src: x, tgt: y, .. } = self.morphs[q];
        x == y
            && self.hom_in(x).iter().all(|&g| self.compose(q, g) == Some(g))
            && self.hom_out(x).iter().all(|&h| self.compose(h, q) == Some(h))
    }

    pub fn invertibles(&self) -> BTreeSet<usize> {
        (0..self.morphs.len()).filter(|&f| self.is_invertible(f)).collect()
    }

    pub fn quasi_units(&self) -> BTreeSet<usize> {
        (0..self.morphs.len()).filter(|&f| self.is_quasi_unit(f)).collect()
    }

    pub fn quasi_units_at(&self, x: usize) -> Vec<usize> {
        self.hom[x][x].iter().copied().filter(|&q| self.is_quasi_unit(q)).collect()
    }

    pub fn is_quasi_unital(&self) -> bool {
        (0..self.objects.len()).all(|x| !self.quasi_units_at(x).is_empty())
    }

    /// Per object: has a quasi-unit ⇔ has an invertible morphism out of it.
    pub fn check_l_qu_inv(&self) -> Vec<QuInvViolation> {
        let inv = self.invertibles();
        (0..self.objects.len())
            .filter_map(|x| {
                let has_qu = !self.quasi_units_at(x).is_empty();
                let has_inv_out = self.hom_out(x).iter().any(|f| inv.contains(f));
                (has_qu != has_inv_out).then(|| QuInvViolation {
                    object: self.objects[x].clone(),
                    has_qu,
                    has_inv_out,
                })
            })
            .collect()
    }

    /// Identity per object, if the category is unital.
    pub fn identities(&self) -> Option<Vec<usize>> {
        (0..self.objects.len())
            .map(|x| self.quasi_units_at(x).first().copied())
            .collect()
    }

    /// Unital with identities as the only invertible morphisms.
    pub fn is_gaunt(&self) -> bool {
        match self.identities() {
            Some(ids) => {
                let ids: BTreeSet<usize> = ids.into_iter().collect();
                self.invertibles() == ids
            }
            None => false,
        }
    }

    // ---- nerves ----

    /// Composable strings `(f_1, ..., f_k)` with `f_{i+1}` after `f_i`.
    pub(crate) fn strings(&self, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return Vec::new();
        }
        let mut out: Vec<Vec<usize>> = (0..self.morphs.len()).map(|f| vec![f]).collect();
        for _ in 1..k {
            let mut next = Vec::new();
            for s in &out {
                let y = self.morphs[*s.last().unwrap()].tgt;
                for g in self.hom_out(y) {
                    let mut t = s.clone();
                    t.push(g);
                    next.push(t);
                }
            }
            next.sort();
            out = next;
        }
        out
    }

    /// Face `d_i` of a string of length `k ≥ 2`.
    fn string_face(&self, s: &[usize], i: usize) -> Vec<usize> {
        let k = s.len();
        if i == 0 {
            s[1..].to_vec()
        } else if i == k {
            s[..k - 1].to_vec()
        } else {
            let mut t = s[..i - 1].to_vec();
            t.push(self.compose(s[i], s[i - 1]).expect("strings are composable"));
            t.extend_from_slice(&s[i + 1..]);
            t
        }
    }

    /// Levels `0..=depth` of the nerve; higher levels exist but are not stored.
    pub fn nerve(&self, depth: usize) -> SSet {
        let mut faces: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); self.objects.len()]];
        let mut prev_index: HashMap<Vec<usize>, usize> = HashMap::new();
        for k in 1..=depth {
            let strings = self.strings(k);
            let mut level = Vec::with_capacity(strings.len());
            for s in &strings {
                let fs = if k == 1 {
                    let f = &self.morphs[s[0]];
                    vec![f.tgt, f.src]
                } else {
                    (0..=k).map(|i| prev_index[&self.string_face(s, i)]).collect()
                };
                level.push(fs);
            }
            prev_index = strings.into_iter().enumerate().map(|(i, s)| (s, i)).collect();
            faces.push(level);
        }
        SSet::from_faces_unchecked(faces, true)
    }

    pub fn marked_nerve(&self, rule: &MarkingRule, depth: usize) -> Result<MarkedSSet> {
        let marking: BTreeSet<usize> = match rule {
            MarkingRule::Invertibles => self.invertibles(),
            MarkingRule::QuasiUnits => self.quasi_units(),
            MarkingRule::Custom(s) => s.clone(),
        };
        if depth == 0 && !marking.is_empty() {
            return Err(Error::rejected("a marking needs level 1"));
        }
        MarkedSSet::new(self.nerve(depth.max(1)), marking)
    }

    // ---- constructors ----

    /// Poset on `0..n` with identities, morphisms `x -> y` for `x ≤ y`.
    pub fn poset(n: usize, leq: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let objects = (0..n).map(|x| x.to_string()).collect();
        let mut morphs = Vec::new();
        let mut id = HashMap::new();
        for x in 0..n {
            for y in 0..n {
                if x == y || leq(x, y) {
                    id.insert((x, y), morphs.len());
                    morphs.push(Morphism {
                        name: format!("{x}<={y}"),
                        src: x,
                        tgt: y,
                    });
                }
            }
        }
        let mut comp = HashMap::new();
        for (&(x, y), &f) in &id {
            for z in 0..n {
                if let Some(&g) = id.get(&(y, z)) {
                    let h = *id
                        .get(&(x, z))
                        .ok_or_else(|| Error::rejected("relation is not transitive"))?;
                    comp.insert((g, f), h);
                }
            }
        }
        NuCat::new(objects, morphs, &comp)
    }

    /// The cyclic group of order `n` as a one-object category.
    pub fn cyclic_group(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::rejected("a group needs an element"));
        }
        let morphs = (0..n)
            .map(|i| Morphism {
                name: format!("g{i}"),
                src: 0,
                tgt: 0,
            })
            .collect();
        let comp = (0..n)
            .flat_map(|a| (0..n).map(move |b| ((a, b), (a + b) % n)))
            .collect();
        NuCat::new(vec!["*".into()], morphs, &comp)
    }

    /// One object, `a ∘ a = b`, `b` absorbing.
    pub fn null_semigroup() -> Self {
        let morphs = vec![
            Morphism { name: "a".into(), src: 0, tgt: 0 },
            Morphism { name: "b".into(), src: 0, tgt: 0 },
        ];
        let comp = [((0, 0), 1), ((0, 1), 1), ((1, 0), 1), ((1, 1), 1)].into_iter().collect();
        NuCat::new(vec!["*".into()], morphs, &comp).expect("null semigroup is associative")
    }

    /// One object and one idempotent morphism.
    pub fn idempotent() -> Self {
        let morphs = vec![Morphism { name: "e".into(), src: 0, tgt: 0 }];
        let comp = [((0, 0), 0)].into_iter().collect();
        NuCat::new(vec!["*".into()], morphs, &comp).expect("idempotent is associative")
    }

    pub fn empty() -> Self {
        NuCat::unchecked(Vec::new(), Vec::new(), &HashMap::new()).expect("empty")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuInvViolation {
    pub object: String,
    pub has_qu: bool,
    pub has_inv_out: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkingRule {
    Invertibles,
    QuasiUnits,
    Custom(BTreeSet<usize>),
}

// ---------------------------------------------------------------------------
// Lazy nerves
// ---------------------------------------------------------------------------

/// A nerve whose levels are built on demand and cached.
#[derive(Debug)]
pub struct LazyNerve {
    cat: Arc<NuCat>,
    marking: BTreeSet<usize>,
    cache: RwLock<Option<Arc<MarkedSSet>>>,
}

impl LazyNerve {
    pub fn new(cat: Arc<NuCat>, rule: &MarkingRule) -> Self {
        let marking = match rule {
            MarkingRule::Invertibles => cat.invertibles(),
            MarkingRule::QuasiUnits => cat.quasi_units(),
            MarkingRule::Custom(s) => s.clone(),
        };
        LazyNerve {
            cat,
            marking,
            cache: RwLock::new(None),
        }
    }

    pub fn category(&self) -> &NuCat {
        &self.cat
    }

    /// The marked nerve through level `depth` (at least 1).
    pub fn up_to(&self, depth: usize) -> Arc<MarkedSSet> {
        let depth = depth.max(1);
        if let Some(c) = self.cache.read().unwrap().as_ref() {
            if c.underlying().truncation() >= depth {
                return c.clone();
            }
        }
        let mut w = self.cache.write().unwrap();
        if let Some(c) = w.as_ref() {
            if c.underlying().truncation() >= depth {
                return c.clone();
            }
        }
        let built = Arc::new(
            MarkedSSet::new(self.cat.nerve(depth), self.marking.iter().copied())
                .expect("marking lists morphisms, which are the edges"),
        );
        *w = Some(built.clone());
        built
    }
}

// ---------------------------------------------------------------------------
// Functors
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NuFunctor {
    pub source: Arc<NuCat>,
    pub target: Arc<NuCat>,
    pub objects: Vec<usize>,
    pub morphisms: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preservation {
    pub preserves_qu: bool,
    pub preserves_inv: bool,
}

impl NuFunctor {
    pub fn identity(c: Arc<NuCat>) -> Self {
        NuFunctor {
            objects: (0..c.num_objects()).collect(),
            morphisms: (0..c.num_morphisms()).collect(),
            source: c.clone(),
            target: c,
        }
    }

    pub fn is_valid(&self) -> bool {
        let (c, d) = (&self.source, &self.target);
        if self.objects.len() != c.num_objects() || self.morphisms.len() != c.num_morphisms() {
            return false;
        }
        let typed = (0..c.num_morphisms()).all(|f| {
            let (m, fm) = (c.morphism(f), d.morphism(self.morphisms[f]));
            fm.src == self.objects[m.src] && fm.tgt == self.objects[m.tgt]
        });
        typed
            && (0..c.num_morphisms()).all(|f| {
                c.hom_out(c.morphism(f).tgt).into_iter().all(|g| {
                    let gf = c.compose(g, f).unwrap();
                    d.compose(self.morphisms[g], self.morphisms[f]) == Some(self.morphisms[gf])
                })
            })
    }
}

pub fn functor_preservation(f: &NuFunctor) -> Result<Preservation> {
    if !f.source.is_quasi_unital() || !f.target.is_quasi_unital() {
        return Err(Error::rejected("both categories must be quasi-unital"));
    }
    if !f.is_valid() {
        return Err(Error::rejected("not a functor"));
    }
    let (c, d) = (&f.source, &f.target);
    let preserves_qu = c.quasi_units().iter().all(|&q| d.is_quasi_unit(f.morphisms[q]));
    let preserves_inv = c.invertibles().iter().all(|&g| d.is_invertible(f.morphisms[g]));
    Ok(Preservation {
        preserves_qu,
        preserves_inv,
    })
}

/// Every functor `C -> D`, objects first, then morphisms in id order.
pub fn enumerate_functors(c: &Arc<NuCat>, d: &Arc<NuCat>, budget: u64) -> Result<Vec<NuFunctor>> {
    let mut out = Vec::new();
    let mut nodes = 0u64;
    let mut objects = Vec::with_capacity(c.num_objects());
    fn objs(
        c: &Arc<NuCat>,
        d: &Arc<NuCat>,
        objects: &mut Vec<usize>,
        nodes: &mut u64,
        budget: u64,
        out: &mut Vec<NuFunctor>,
    ) -> Result<()> {
        if objects.len() == c.num_objects() {
            let mut morphs = Vec::with_capacity(c.num_morphisms());
            return morphisms(c, d, objects, &mut morphs, nodes, budget, out);
        }
        for y in 0..d.num_objects() {
            objects.push(y);
            objs(c, d, objects, nodes, budget, out)?;
            objects.pop();
        }
        Ok(())
    }
    fn morphisms(
        c: &Arc<NuCat>,
        d: &Arc<NuCat>,
        objects: &[usize],
        morphs: &mut Vec<usize>,
        nodes: &mut u64,
        budget: u64,
        out: &mut Vec<NuFunctor>,
    ) -> Result<()> {
        let f = morphs.len();
        if f == c.num_morphisms() {
            out.push(NuFunctor {
                source: c.clone(),
                target: d.clone(),
                objects: objects.to_vec(),
                morphisms: morphs.clone(),
            });
            return Ok(());
        }
        let m = c.morphism(f);
        'cand: for &cand in d.hom(objects[m.src], objects[m.tgt]) {
            *nodes += 1;
            if *nodes > budget {
                return Err(Error::budget("functor enumeration", budget));
            }
            morphs.push(cand);
            // composites among already assigned morphisms
            for a in 0..=f {
                for b in 0..=f {
                    if let Some(ab) = c.compose(a, b) {
                        if ab <= f && (a == f || b == f || ab == f) {
                            if d.compose(morphs[a], morphs[b]) != Some(morphs[ab]) {
                                morphs.pop();
                                continue 'cand;
                            }
                        }
                    }
                }
            }
            morphisms(c, d, objects, morphs, nodes, budget, out)?;
            morphs.pop();
        }
        Ok(())
    }
    objs(c, d, &mut objects, &mut nodes, budget, &mut out)?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Segal condition and categories from semi-simplicial sets
// ---------------------------------------------------------------------------

/// `(n, m)` with `n, m ≥ 1`, `n + m ≤ depth` where
/// `X_{n+m} -> X_n ×_{X_0} X_m` is not a bijection.
pub fn segal_defect(x: &SSet, depth: usize) -> Result<Vec<(usize, usize)>> {
    for k in 0..=depth {
        x.try_level_len(k)?;
    }
    let mut out = Vec::new();
    for total in 2..=depth {
        for n in 1..total {
            let m = total - n;
            // fibre product size
            let mut by_first: HashMap<usize, usize> = HashMap::new();
            for b in 0..x.level_len(m) {
                *by_first.entry(x.restrict(m, b, &[0])).or_insert(0) += 1;
            }
            let fibre: usize = (0..x.level_len(n))
                .map(|a| by_first.get(&x.restrict(n, a, &[n])).copied().unwrap_or(0))
                .sum();
            let front: Vec<usize> = (0..=n).collect();
            let back: Vec<usize> = (n..=total).collect();
            let mut images = BTreeSet::new();
            for s in 0..x.level_len(total) {
                images.insert((x.restrict(total, s, &front), x.restrict(total, s, &back)));
            }
            let injective = images.len() == x.level_len(total);
            if !(injective && images.len() == fibre) {
                out.push((n, m));
            }
        }
    }
    Ok(out)
}

/// Reads a category off a strictly Segal object: objects are vertices,
/// morphisms edges, and `g ∘ f` the long edge of the triangle `(f, g)`.
pub fn category_from_sset(x: &SSet) -> Result<NuCat> {
    let defect = segal_defect(x, 3)?;
    if !defect.is_empty() {
        return Err(Error::rejected(format!("Segal defect at {defect:?}")));
    }
    let objects = (0..x.level_len(0)).map(|v| v.to_string()).collect();
    let morphs = (0..x.level_len(1))
        .map(|e| {
            let (s, t) = x.endpoints(e);
            Morphism {
                name: format!("e{e}"),
                src: s,
                tgt: t,
            }
        })
        .collect();
    let mut comp = HashMap::new();
    for t in 0..x.level_len(2) {
        let fs = x.faces_of(2, t);
        comp.insert((fs[0], fs[2]), fs[1]);
    }
    NuCat::new(objects, morphs, &comp)
}

// ---------------------------------------------------------------------------
// Equivalence classes, DK-equivalences, completeness
// ---------------------------------------------------------------------------

/// Class index per vertex for the equivalence relation generated by
/// marked edges; classes numbered by smallest member.
pub fn eq_classes(w: &MarkedSSet) -> Vec<usize> {
    let x = w.underlying();
    let n = x.level_len(0);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], a: usize) -> usize {
        let mut r = a;
        while p[r] != r {
            r = p[r];
        }
        let mut c = a;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    for &e in w.marking() {
        let (a, b) = x.endpoints(e);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            parent[hi] = lo;
        }
    }
    let mut number = HashMap::new();
    (0..n)
        .map(|v| {
            let r = find(&mut parent, v);
            let next = number.len();
            *number.entry(r).or_insert(next)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DkReport {
    pub dk: bool,
    /// First `(x, y)` whose hom comparison is not bijective.
    pub failing_hom: Option<(usize, usize)>,
    pub failing_marked_hom: Option<(usize, usize)>,
    pub surjective_on_classes: bool,
}

/// Fully faithful on homs and marked homs, and surjective on `≃`-classes.
pub fn is_dk_equivalence(f: &MarkedMap) -> Result<DkReport> {
    f.check_marked().map_err(Error::Rejected)?;
    let (w, z) = (&*f.source, &*f.target);
    let (x, y) = (w.underlying(), z.underlying());
    let hom = |s: &SSet, a: usize, b: usize, only: Option<&BTreeSet<usize>>| -> Vec<usize> {
        (0..s.level_len(1))
            .filter(|&e| s.endpoints(e) == (a, b) && only.is_none_or(|m| m.contains(&e)))
            .collect()
    };
    let mut failing_hom = None;
    let mut failing_marked_hom = None;
    'outer: for a in 0..x.level_len(0) {
        for b in 0..x.level_len(0) {
            let (fa, fb) = (f.level_fns[0][a], f.level_fns[0][b]);
            for (marked_only, slot) in [(false, &mut failing_hom), (true, &mut failing_marked_hom)] {
                if slot.is_some() {
                    continue;
                }
                let src = hom(x, a, b, marked_only.then(|| w.marking()));
                let tgt = hom(y, fa, fb, marked_only.then(|| z.marking()));
                let image: BTreeSet<usize> = src.iter().map(|&e| f.level_fns[1][e]).collect();
                if image.len() != src.len() || image.len() != tgt.len() {
                    *slot = Some((a, b));
                }
            }
            if failing_hom.is_some() && failing_marked_hom.is_some() {
                break 'outer;
            }
        }
    }
    let cz = eq_classes(z);
    let hit: BTreeSet<usize> = f.level_fns[0].iter().map(|&v| cz[v]).collect();
    let all: BTreeSet<usize> = cz.iter().copied().collect();
    let surjective_on_classes = hit == all;
    Ok(DkReport {
        dk: failing_hom.is_none() && failing_marked_hom.is_none() && surjective_on_classes,
        failing_hom,
        failing_marked_hom,
        surjective_on_classes,
    })
}

/// Discrete marked-semiSegal checks: strict Segal through level 3, marking
/// inside the invertibles, marking closed under 2-out-of-3.
pub fn marked_segal_violations(w: &MarkedSSet) -> Result<Vec<String>> {
    let x = w.underlying();
    let mut out = Vec::new();
    let defect = segal_defect(x, 3)?;
    if !defect.is_empty() {
        out.push(format!("segal: defect at {defect:?}"));
        return Ok(out);
    }
    let cat = category_from_sset(x)?;
    let inv = cat.invertibles();
    if !w.marking().is_subset(&inv) {
        out.push("marking: some marked edge is not invertible".into());
    }
    if closure_2of3(w).marking() != w.marking() {
        out.push("marking: not closed under 2-out-of-3".into());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub complete: bool,
    /// Failed marked-semiSegal preconditions.
    pub precondition: Vec<String>,
    /// Failed completeness clauses.
    pub clauses: Vec<String>,
}

/// Marking equals the invertibles, and `d₀, d₁ : M -> X₀` are bijections.
pub fn is_complete_discrete(w: &MarkedSSet) -> Result<CompletenessReport> {
    let precondition = marked_segal_violations(w)?;
    let mut clauses = Vec::new();
    if precondition.is_empty() {
        let x = w.underlying();
        let inv = category_from_sset(x)?.invertibles();
        if &inv != w.marking() {
            clauses.push("marking differs from the invertible edges".into());
        }
        let n = x.level_len(0);
        let sources: BTreeSet<usize> = w.marking().iter().map(|&e| x.endpoints(e).0).collect();
        let targets: BTreeSet<usize> = w.marking().iter().map(|&e| x.endpoints(e).1).collect();
        if sources.len() != n || w.marking().len() != n {
            clauses.push("d1 restricted to marked edges is not a bijection".into());
        }
        if targets.len() != n || w.marking().len() != n {
            clauses.push("d0 restricted to marked edges is not a bijection".into());
        }
    }
    Ok(CompletenessReport {
        complete: precondition.is_empty() && clauses.is_empty(),
        precondition,
        clauses,
    })
}

/// Definition of quasi-unitality for a marked object, computed directly:
/// every vertex is the source of a marked edge, every invertible edge is marked.
pub fn is_quasi_unital_marked(w: &MarkedSSet) -> Result<bool> {
    let x = w.underlying();
    let cat = category_from_sset(x)?;
    let sources: BTreeSet<usize> = w.marking().iter().map(|&e| x.endpoints(e).0).collect();
    Ok(sources.len() == x.level_len(0) && cat.invertibles().is_subset(w.marking()))
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

/// `{"objects": [...], "homs": {"x,y": [...]}, "comp": {"g,f": "h"}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NuCatJson {
    pub objects: Vec<String>,
    pub homs: BTreeMap<String, Vec<String>>,
    pub comp: BTreeMap<String, String>,
}

impl NuCat {
    pub fn to_json(&self) -> NuCatJson {
        let mut homs = BTreeMap::new();
        for x in 0..self.objects.len() {
            for y in 0..self.objects.len() {
                if !self.hom[x][y].is_empty() {
                    homs.insert(
                        format!("{},{}", self.objects[x], self.objects[y]),
                        self.hom[x][y].iter().map(|&f| self.name(f)).collect(),
                    );
                }
            }
        }
        let m = self.morphs.len();
        let mut comp = BTreeMap::new();
        for g in 0..m {
            for f in 0..m {
                if let Some(h) = self.compose(g, f) {
                    comp.insert(format!("{},{}", self.name(g), self.name(f)), self.name(h));
                }
            }
        }
        NuCatJson {
            objects: self.objects.clone(),
            homs,
            comp,
        }
    }

    /// Parses without checking the table; pair with [`NuCat::violations`].
    pub fn from_json_unchecked(j: &NuCatJson) -> Result<Self> {
        let obj: HashMap<&str, usize> = j.objects.iter().enumerate().map(|(i, o)| (o.as_str(), i)).collect();
        if obj.len() != j.objects.len() {
            return Err(Error::Parse("duplicate object names".into()));
        }
        let mut morphs = Vec::new();
        let mut by_name = HashMap::new();
        for (key, names) in &j.homs {
            let (a, b) = key
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("hom key {key} is not \"x,y\"")))?;
            let (&x, &y) = match (obj.get(a), obj.get(b)) {
                (Some(x), Some(y)) => (x, y),
                _ => return Err(Error::Parse(format!("hom key {key} names unknown objects"))),
            };
            for n in names {
                if by_name.insert(n.clone(), morphs.len()).is_some() {
                    return Err(Error::Parse(format!("morphism name {n} repeated")));
                }
                morphs.push(Morphism {
                    name: n.clone(),
                    src: x,
                    tgt: y,
                });
            }
        }
        let mut comp = HashMap::new();
        for (key, h) in &j.comp {
            let (g, f) = key
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("comp key {key} is not \"g,f\"")))?;
            let look = |n: &str| {
                by_name
                    .get(n)
                    .copied()
                    .ok_or_else(|| Error::Parse(format!("unknown morphism {n}")))
            };
            comp.insert((look(g)?, look(f)?), look(h)?);
        }
        NuCat::unchecked(j.objects.clone(), morphs, &comp)
    }
}

impl Serialize for NuCat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for NuCat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = NuCatJson::deserialize(d)?;
        let c = NuCat::from_json_unchecked(&j).map_err(serde::de::Error::custom)?;
        let v = c.violations();
        if v.is_empty() {
            Ok(c)
        } else {
            Err(serde::de::Error::custom(format!("invalid composition table: {v:?}")))
        }
    }
}

// ---------------------------------------------------------------------------
// Corpus generation
// ---------------------------------------------------------------------------

/// Objects and morphisms of a table being searched.
struct Skeleton {
    objects: usize,
    morphs: Vec<Morphism>,
    hom: Vec<Vec<Vec<usize>>>,
    /// composable `(g, f)` pairs in search order
    pairs: Vec<(usize, usize)>,
}

impl Skeleton {
    fn new(sizes: &[Vec<usize>]) -> Self {
        let objects = sizes.len();
        let mut morphs = Vec::new();
        let mut hom = vec![vec![Vec::new(); objects]; objects];
        for x in 0..objects {
            for y in 0..objects {
                for i in 0..sizes[x][y] {
                    hom[x][y].push(morphs.len());
                    morphs.push(Morphism {
                        name: format!("m{x}{y}{}", (b'a' + i as u8) as char),
                        src: x,
                        tgt: y,
                    });
                }
            }
        }
        let mut pairs = Vec::new();
        for g in 0..morphs.len() {
            for f in 0..morphs.len() {
                if morphs[f].tgt == morphs[g].src {
                    pairs.push((g, f));
                }
            }
        }
        Skeleton {
            objects,
            morphs,
            hom,
            pairs,
        }
    }

    fn build(&self, table: &[usize]) -> NuCat {
        let m = self.morphs.len();
        let mut comp = HashMap::new();
        for &(g, f) in &self.pairs {
            comp.insert((g, f), table[g * m + f]);
        }
        NuCat::unchecked(
            (0..self.objects).map(|x| format!("x{x}")).collect(),
            self.morphs.clone(),
            &comp,
        )
        .expect("skeleton morphisms are well typed")
    }
}

/// Backtracking over composition tables with associativity pruning.
struct TableSearch<'a> {
    sk: &'a Skeleton,
    table: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl<'a> TableSearch<'a> {
    fn new(sk: &'a Skeleton, budget: u64) -> Self {
        let m = sk.morphs.len();
        TableSearch {
            sk,
            table: vec![NONE; m * m],
            nodes: 0,
            budget,
        }
    }

    fn get(&self, g: usize, f: usize) -> usize {
        self.table[g * self.sk.morphs.len() + f]
    }

    /// `None` when some entry of the triple is still open.
    fn triple_ok(&self, h: usize, g: usize, f: usize) -> Option<bool> {
        let hg = self.get(h, g);
        let gf = self.get(g, f);
        if hg == NONE || gf == NONE {
            return None;
        }
        let (l, r) = (self.get(hg, f), self.get(h, gf));
        if l == NONE || r == NONE {
            return None;
        }
        Some(l == r)
    }

    /// Checks every triple touching the freshly set entry `(g, f)`.
    fn consistent(&self, g: usize, f: usize) -> bool {
        let sk = self.sk;
        let m = sk.morphs.len();
        let src_f = sk.morphs[f].src;
        let tgt_g = sk.morphs[g].tgt;
        // (g, f) as the (h, g') entry or as the (g', f') entry
        for x in 0..sk.objects {
            for &e in &sk.hom[x][src_f] {
                if self.triple_ok(g, f, e) == Some(false) {
                    return false;
                }
            }
            for &h in &sk.hom[tgt_g][x] {
                if self.triple_ok(h, g, f) == Some(false) {
                    return false;
                }
            }
        }
        // (g, f) as a derived entry: (hg', f) with hg' = g, or (g, g'f') with g'f' = f
        for &(a, b) in &sk.pairs {
            let v = self.table[a * m + b];
            if v == g && self.triple_ok(a, b, f) == Some(false) {
                return false;
            }
            if v == f && self.triple_ok(g, a, b) == Some(false) {
                return false;
            }
        }
        true
    }

    fn all(&mut self, pos: usize, out: &mut Vec<Vec<usize>>) -> Result<()> {
        let sk = self.sk;
        if pos == sk.pairs.len() {
            out.push(self.table.clone());
            return Ok(());
        }
        let (g, f) = sk.pairs[pos];
        let m = sk.morphs.len();
        let (x, z) = (sk.morphs[f].src, sk.morphs[g].tgt);
        if self.table[g * m + f] != NONE {
            // preset entry
            return self.all(pos + 1, out);
        }
        for &h in &sk.hom[x][z] {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::budget("composition table search", self.budget));
            }
            self.table[g * m + f] = h;
            if self.consistent(g, f) {
                self.all(pos + 1, out)?;
            }
        }
        self.table[g * m + f] = NONE;
        Ok(())
    }

    fn first_random(&mut self, pos: usize, rng: &mut ChaCha8Rng) -> Result<bool> {
        let sk = self.sk;
        if pos == sk.pairs.len() {
            return Ok(true);
        }
        let (g, f) = sk.pairs[pos];
        let m = sk.morphs.len();
        if self.table[g * m + f] != NONE {
            return self.first_random(pos + 1, rng);
        }
        let (x, z) = (sk.morphs[f].src, sk.morphs[g].tgt);
        let mut cands = sk.hom[x][z].clone();
        cands.shuffle(rng);
        for h in cands {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::budget("random table search", self.budget));
            }
            self.table[g * m + f] = h;
            if self.consistent(g, f) && self.first_random(pos + 1, rng)? {
                return Ok(true);
            }
        }
        self.table[g * m + f] = NONE;
        Ok(false)
    }
}

/// Hom-size patterns for `objects` objects with sizes `0..=max_hom`.
fn size_patterns(objects: usize, max_hom: usize) -> Vec<Vec<Vec<usize>>> {
    let cells = objects * objects;
    let total = (max_hom + 1).pow(cells as u32);
    (0..total)
        .map(|mut code| {
            let mut sizes = vec![vec![0; objects]; objects];
            for c in 0..cells {
                sizes[c / objects][c % objects] = code % (max_hom + 1);
                code /= max_hom + 1;
            }
            sizes
        })
        .collect()
}

/// Every associative composition table with at most `max_obj` objects and
/// hom-sets of size at most `max_hom`, in a fixed order.
pub fn corpus(max_obj: usize, max_hom: usize, budget: u64) -> Result<Vec<NuCat>> {
    let mut patterns = Vec::new();
    for o in 0..=max_obj {
        patterns.extend(size_patterns(o, max_hom));
    }
    let chunks: Vec<Result<Vec<NuCat>>> = patterns
        .par_iter()
        .map(|sizes| {
            let sk = Skeleton::new(sizes);
            let mut search = TableSearch::new(&sk, budget);
            let mut tables = Vec::new();
            search.all(0, &mut tables)?;
            Ok(tables.iter().map(|t| sk.build(t)).collect())
        })
        .collect();
    let mut out = Vec::new();
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// `count` seeded random associative tables on three objects. Half of the
/// draws preset identities on some objects, so quasi-units actually occur.
pub fn sample_three_object(seed: u64, count: usize, max_hom: usize) -> Result<Vec<NuCat>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > count * 50 + 100 {
            return Err(Error::budget("three-object sampling", (count * 50 + 100) as u64));
        }
        let mut sizes = vec![vec![0; 3]; 3];
        for row in sizes.iter_mut() {
            for s in row.iter_mut() {
                *s = rng.gen_range(0..=max_hom);
            }
        }
        let with_ids = rng.gen_bool(0.5);
        if with_ids {
            for (x, row) in sizes.iter_mut().enumerate() {
                if rng.gen_bool(0.7) {
                    row[x] = row[x].max(1);
                }
            }
        }
        let sk = Skeleton::new(&sizes);
        let mut search = TableSearch::new(&sk, 20_000);
        if with_ids {
            let m = sk.morphs.len();
            for x in 0..3 {
                if let Some(&id) = sk.hom[x][x].first() {
                    if !rng.gen_bool(0.7) {
                        continue;
                    }
                    for &f in &sk.hom_in(x) {
                        search.table[id * m + f] = f;
                    }
                    for &h in &sk.hom_out(x) {
                        search.table[h * m + id] = h;
                    }
                }
            }
        }
        match search.first_random(0, &mut rng) {
            Ok(true) => {
                let c = sk.build(&search.table);
                if c.violations().is_empty() {
                    out.push(c);
                }
            }
            Ok(false) | Err(_) => {}
        }
    }
    Ok(out)
}

impl Skeleton {
    fn hom_in(&self, y: usize) -> Vec<usize> {
        (0..self.objects).flat_map(|x| self.hom[x][y].iter().copied()).collect()
    }

    fn hom_out(&self, x: usize) -> Vec<usize> {
        (0..self.objects).flat_map(|y| self.hom[x][y].iter().copied()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sset::{boundary, coskeleton0};

    fn chain2() -> NuCat {
        NuCat::poset(2, |x, y| x <= y).unwrap()
    }

    #[test]
    fn nerve_levels() {
        assert_eq!(NuCat::empty().nerve(2).level_sizes(), vec![0, 0, 0]);
        assert_eq!(NuCat::idempotent().nerve(3).level_sizes(), vec![1, 1, 1, 1]);
        // weakly increasing (n+1)-tuples in {0, 1}
        assert_eq!(chain2().nerve(4).level_sizes(), vec![2, 3, 4, 5, 6]);
        for c in [chain2(), NuCat::cyclic_group(3).unwrap(), NuCat::null_semigroup()] {
            assert!(c.nerve(4).validate().is_empty());
        }
    }

    #[test]
    fn invertibles_and_quasi_units() {
        let g = NuCat::cyclic_group(4).unwrap();
        assert_eq!(g.invertibles().len(), 4);
        assert_eq!(g.quasi_units(), [0].into_iter().collect());
        let n = NuCat::null_semigroup();
        assert!(n.invertibles().is_empty());
        assert!(n.quasi_units().is_empty());
        let p = NuCat::poset(3, |x, y| x <= y).unwrap();
        let ids: BTreeSet<usize> = p.identities().unwrap().into_iter().collect();
        assert_eq!(p.invertibles(), ids);
        assert_eq!(p.quasi_units(), ids);
        assert!(p.is_gaunt());
        assert!(!g.is_gaunt());
    }

    #[test]
    fn quasi_unit_checks() {
        let g = NuCat::cyclic_group(2).unwrap();
        assert!(g.is_quasi_unital());
        assert!(g.check_l_qu_inv().is_empty());
        let n = NuCat::null_semigroup();
        assert!(!n.is_quasi_unital());
        assert!(n.check_l_qu_inv().is_empty());
    }

    #[test]
    fn violations_name_the_triple() {
        // one object, {a, b}, a∘a = b, everything else a: not associative
        let morphs = vec![
            Morphism { name: "a".into(), src: 0, tgt: 0 },
            Morphism { name: "b".into(), src: 0, tgt: 0 },
        ];
        let comp = [((0, 0), 1), ((0, 1), 0), ((1, 0), 0), ((1, 1), 0)].into_iter().collect();
        let c = NuCat::unchecked(vec!["*".into()], morphs, &comp).unwrap();
        let v = c.violations();
        assert!(v.iter().any(|x| matches!(x, CatViolation::NonAssociative { .. })));
        assert!(NuCat::new(c.objects.clone(), c.morphs.clone(), &comp).is_err());
    }

    #[test]
    fn segal_defects() {
        for c in [chain2(), NuCat::cyclic_group(2).unwrap(), NuCat::null_semigroup()] {
            assert!(segal_defect(&c.nerve(4), 4).unwrap().is_empty());
        }
        assert!(segal_defect(&coskeleton0(2, 3), 3).unwrap().is_empty());
        let d = segal_defect(&boundary(2), 2).unwrap();
        assert_eq!(d, vec![(1, 1)]);
        assert!(category_from_sset(&boundary(2)).is_err());
        assert!(segal_defect(&chain2().nerve(2), 3).unwrap_err().is_resource());
    }

    #[test]
    fn category_round_trip_through_nerve() {
        let c = NuCat::poset(3, |x, y| x <= y).unwrap();
        let back = category_from_sset(&c.nerve(3)).unwrap();
        assert_eq!(back.num_morphisms(), c.num_morphisms());
        assert_eq!(back.invertibles().len(), c.invertibles().len());
    }

    #[test]
    fn qu_at_most_one_per_object() {
        for c in corpus(1, 2, 1_000_000).unwrap() {
            for x in 0..c.num_objects() {
                assert!(c.quasi_units_at(x).len() <= 1);
            }
        }
    }

    #[test]
    fn one_object_corpus_counts_semigroups() {
        // labeled semigroups on at most two elements: 1 + 1 + 8, plus the empty one-object
        // category and the empty category
        let c = corpus(1, 2, 1_000_000).unwrap();
        assert_eq!(c.len(), 1 + 1 + 1 + 8);
        assert!(c.iter().all(|x| x.violations().is_empty()));
    }

    #[test]
    fn sampler_is_deterministic() {
        let a = sample_three_object(7, 20, 2).unwrap();
        let b = sample_three_object(7, 20, 2).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|c| c.violations().is_empty() && c.num_objects() == 3));
    }

    #[test]
    fn functors() {
        let g = Arc::new(NuCat::cyclic_group(2).unwrap());
        let id = NuFunctor::identity(g.clone());
        assert_eq!(
            functor_preservation(&id).unwrap(),
            Preservation { preserves_qu: true, preserves_inv: true }
        );
        // homomorphisms Z/2 -> Z/2 preserving composition: trivial and identity
        assert_eq!(enumerate_functors(&g, &g, 1000).unwrap().len(), 2);
        let p = Arc::new(chain2());
        let to_one = Arc::new(NuCat::cyclic_group(1).unwrap());
        let fs = enumerate_functors(&p, &to_one, 1000).unwrap();
        assert_eq!(fs.len(), 1);
        assert!(fs[0].is_valid());
        let pres = functor_preservation(&fs[0]).unwrap();
        assert_eq!(pres.preserves_qu, pres.preserves_inv);
        let n = Arc::new(NuCat::null_semigroup());
        assert!(functor_preservation(&NuFunctor::identity(n)).is_err());
    }

    #[test]
    fn eq_classes_and_dk() {
        let g = NuCat::cyclic_group(2).unwrap();
        let w = Arc::new(g.marked_nerve(&MarkingRule::Invertibles, 3).unwrap());
        let id = crate::sset::Map::identity(w.clone());
        assert!(is_dk_equivalence(&id).unwrap().dk);

        // full subcategory {0} of the codiscrete groupoid on two objects
        let two = coskeleton0(2, 3);
        let all_marked = crate::marked::sharp(two);
        let z = Arc::new(all_marked);
        assert_eq!(eq_classes(&z), vec![0, 0]);
        let one = Arc::new(crate::marked::sharp(coskeleton0(1, 3)));
        let maps = crate::marked::enumerate_marked_maps(&one, &z, 10_000).unwrap();
        assert_eq!(maps.len(), 2);
        assert!(is_dk_equivalence(&maps[0]).unwrap().dk);

        // the discrete two-object category into the chain is not full
        let disc = NuCat::poset(2, |x, y| x == y).unwrap();
        let wd = Arc::new(disc.marked_nerve(&MarkingRule::Invertibles, 3).unwrap());
        let wc = Arc::new(chain2().marked_nerve(&MarkingRule::Invertibles, 3).unwrap());
        let incl: Vec<_> = crate::marked::enumerate_marked_maps(&wd, &wc, 100_000)
            .unwrap()
            .into_iter()
            .filter(|m| m.level_fns[0] == vec![0, 1])
            .collect();
        assert_eq!(incl.len(), 1);
        let r = is_dk_equivalence(&incl[0]).unwrap();
        assert!(!r.dk);
        assert_eq!(r.failing_hom, Some((0, 1)));
    }

    #[test]
    fn completeness() {
        let p = NuCat::poset(3, |x, y| x <= y).unwrap();
        let w = p.marked_nerve(&MarkingRule::Invertibles, 3).unwrap();
        assert!(is_complete_discrete(&w).unwrap().complete);
        let g = NuCat::cyclic_group(2).unwrap();
        let w = g.marked_nerve(&MarkingRule::Invertibles, 3).unwrap();
        let r = is_complete_discrete(&w).unwrap();
        assert!(!r.complete);
        assert!(r.precondition.is_empty());
        let sharp = crate::marked::sharp(chain2().nerve(3));
        let r = is_complete_discrete(&sharp).unwrap();
        assert!(!r.complete);
        assert!(!r.precondition.is_empty());
    }

    #[test]
    fn invertibles_closed_under_two_of_three() {
        for c in corpus(2, 1, 1_000_000).unwrap() {
            let w = c.marked_nerve(&MarkingRule::Invertibles, 2).unwrap();
            assert_eq!(closure_2of3(&w), w);
        }
    }

    #[test]
    fn lazy_nerve_grows() {
        let lazy = LazyNerve::new(Arc::new(chain2()), &MarkingRule::Invertibles);
        assert_eq!(lazy.up_to(2).underlying().level_sizes(), vec![2, 3, 4]);
        assert_eq!(lazy.up_to(1).underlying().truncation(), 2);
        assert_eq!(lazy.up_to(4).underlying().level_sizes(), vec![2, 3, 4, 5, 6]);
        assert_eq!(lazy.up_to(4).marking().len(), 2);
    }

    #[test]
    fn json_round_trip() {
        let c = NuCat::poset(2, |x, y| x <= y).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: NuCat = serde_json::from_str(&s).unwrap();
        assert_eq!(back.num_morphisms(), 3);
        assert_eq!(back.invertibles().len(), 2);
        let bad = r#"{"objects":["*"],"homs":{"*,*":["a","b"]},"comp":{"a,a":"b","a,b":"a","b,a":"a","b,b":"a"}}"#;
        assert!(serde_json::from_str::<NuCat>(bad).is_err());
    }
}
