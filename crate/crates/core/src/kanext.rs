//! Simplicial sets with degeneracies, the marked forgetful functor, the
//! objects `X^f_m`, and truncated right Kan extension levels over the grid
//! of surjections.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marked::MarkedSSet;
use crate::nucat::{category_from_sset, NuCat};
use crate::ordinal::{compose, enumerate_maps, sections_of, MapClass, OrdinalMap};
use crate::sset::{standard, SSet};

/// A truncated simplicial set: faces on every level, degeneracies
/// `s_i : X_k -> X_{k+1}` for `k < truncation`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpSet {
    sset: SSet,
    /// `degens[k][id][i] = s_i(id)`
    degens: Vec<Vec<Vec<usize>>>,
}

/// A failed simplicial identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityViolation {
    pub level: usize,
    pub simplex: usize,
    pub rule: String,
}

impl SimpSet {
    pub fn new(sset: SSet, degens: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let x = SimpSet { sset, degens };
        let v = x.validate();
        if v.is_empty() {
            Ok(x)
        } else {
            Err(Error::rejected(format!("simplicial identities fail: {:?}", &v[..v.len().min(3)])))
        }
    }

    pub fn underlying(&self) -> &SSet {
        &self.sset
    }

    pub fn degeneracy(&self, k: usize, id: usize, i: usize) -> usize {
        self.degens[k][id][i]
    }

    /// Shape, face identities, and the mixed and degeneracy identities.
    pub fn validate(&self) -> Vec<IdentityViolation> {
        let x = &self.sset;
        let mut out: Vec<IdentityViolation> = x
            .validate()
            .into_iter()
            .map(|v| IdentityViolation {
                level: 0,
                simplex: 0,
                rule: format!("{v:?}"),
            })
            .collect();
        let d = x.truncation();
        if self.degens.len() != d {
            out.push(IdentityViolation {
                level: 0,
                simplex: 0,
                rule: format!("degeneracies on {} levels, expected {d}", self.degens.len()),
            });
            return out;
        }
        for k in 0..d {
            if self.degens[k].len() != x.level_len(k)
                || self.degens[k].iter().any(|s| s.len() != k + 1 || s.iter().any(|&t| t >= x.level_len(k + 1)))
            {
                out.push(IdentityViolation {
                    level: k,
                    simplex: 0,
                    rule: "degeneracy table has the wrong shape".into(),
                });
                return out;
            }
        }
        let s = |k: usize, id: usize, i: usize| self.degens[k][id][i];
        let f = |k: usize, id: usize, i: usize| x.face(k, id, i);
        let mut bad = |level, simplex, rule: String| out.push(IdentityViolation { level, simplex, rule });
        for k in 0..d {
            for id in 0..x.level_len(k) {
                // d_i s_j on X_k
                for j in 0..=k {
                    let sj = s(k, id, j);
                    for i in 0..=k + 1 {
                        let lhs = f(k + 1, sj, i);
                        let ok = if i == j || i == j + 1 {
                            lhs == id
                        } else if i < j {
                            lhs == s(k - 1, f(k, id, i), j - 1)
                        } else {
                            lhs == s(k - 1, f(k, id, i - 1), j)
                        };
                        if !ok {
                            bad(k, id, format!("d_{i} s_{j}"));
                        }
                    }
                }
                // s_i s_j = s_{j+1} s_i for i <= j
                if k + 1 < d {
                    for j in 0..=k {
                        for i in 0..=j {
                            if s(k + 1, s(k, id, j), i) != s(k + 1, s(k, id, i), j + 1) {
                                bad(k, id, format!("s_{i} s_{j}"));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Degenerate edges `s_0(v)`.
    pub fn degenerate_edges(&self) -> BTreeSet<usize> {
        if self.degens.is_empty() {
            return BTreeSet::new();
        }
        self.degens[0].iter().map(|s| s[0]).collect()
    }
}

/// Nerve of a unital category through level `depth`, with degeneracies
/// inserting identities.
pub fn simplicial_nerve(c: &NuCat, depth: usize) -> Result<SimpSet> {
    let ids = c
        .identities()
        .ok_or_else(|| Error::rejected("the category has an object without identity"))?;
    let sset = c.nerve(depth);
    let mut index: Vec<HashMap<Vec<usize>, usize>> = vec![HashMap::new()];
    for k in 1..=depth {
        index.push(c.strings(k).into_iter().enumerate().map(|(i, s)| (s, i)).collect());
    }
    let mut degens = Vec::with_capacity(depth);
    for k in 0..depth {
        let level: Vec<Vec<usize>> = if k == 0 {
            (0..c.num_objects()).map(|x| vec![index[1][&vec![ids[x]]]]).collect()
        } else {
            c.strings(k)
                .into_iter()
                .map(|s| {
                    let objs: Vec<usize> = std::iter::once(c.morphism(s[0]).src)
                        .chain(s.iter().map(|&f| c.morphism(f).tgt))
                        .collect();
                    (0..=k)
                        .map(|i| {
                            let mut t = s[..i].to_vec();
                            t.push(ids[objs[i]]);
                            t.extend_from_slice(&s[i..]);
                            index[k + 1][&t]
                        })
                        .collect()
                })
                .collect()
        };
        degens.push(level);
    }
    SimpSet::new(sset, degens)
}

/// `F⁺`: the underlying semi-simplicial set, degenerate edges marked.
pub fn forget_plus(x: &SimpSet) -> MarkedSSet {
    MarkedSSet::new(x.sset.clone(), x.degenerate_edges()).expect("degenerate edges are edges")
}

/// `F^♮`: mark the invertible edges of a strictly Segal simplicial set.
pub fn f_natural(x: &SimpSet) -> Result<MarkedSSet> {
    let inv = category_from_sset(&x.sset)?.invertibles();
    MarkedSSet::new(x.sset.clone(), inv)
}

fn check_surjection(f: &OrdinalMap) -> Result<()> {
    if f.is_surjective() {
        Ok(())
    } else {
        Err(Error::rejected(format!("{f} is not surjective")))
    }
}

/// `(Δᵐ, A_f)`: edges whose endpoints share an `f`-image are marked.
pub fn degenerate_marked_simplex(f: &OrdinalMap) -> Result<MarkedSSet> {
    check_surjection(f)?;
    let m = f.domain_size();
    let pairs: Vec<(usize, usize)> = (0..=m)
        .flat_map(|a| (a + 1..=m).map(move |b| (a, b)))
        .filter(|&(a, b)| f.apply(a) == f.apply(b))
        .collect();
    MarkedSSet::with_marked_pairs(standard(m), &pairs)
}

/// `X^f_m`: the `m`-simplices whose `f`-degenerate edges are all marked.
pub fn x_f_m(x: &MarkedSSet, f: &OrdinalMap) -> Result<Vec<usize>> {
    check_surjection(f)?;
    let m = f.domain_size();
    let u = x.underlying();
    let len = u.try_level_len(m)?;
    let pairs: Vec<(usize, usize)> = (0..=m)
        .flat_map(|a| (a + 1..=m).map(move |b| (a, b)))
        .filter(|&(a, b)| f.apply(a) == f.apply(b))
        .collect();
    Ok((0..len)
        .filter(|&s| pairs.iter().all(|&(a, b)| x.is_marked(u.edge(m, s, a, b))))
        .collect())
}

/// Surjections `[m] ↠ [n]` for `n ≤ m ≤ max_m`, ordered by `m`, then values.
pub fn surjection_index(n: usize, max_m: usize) -> Vec<OrdinalMap> {
    (n..=max_m)
        .flat_map(|m| enumerate_maps(m, n, MapClass::Surjective))
        .collect()
}

/// Fibre sizes of a surjection: a tuple of nonempty linear orders.
pub fn fiber_sizes(f: &OrdinalMap) -> Vec<usize> {
    (0..=f.codomain_size()).map(|i| f.fiber(i).len()).collect()
}

/// A truncated level of the right Kan extension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RkLevel {
    pub n: usize,
    pub max_m: usize,
    pub index: Vec<OrdinalMap>,
    /// One row per compatible family: the simplex chosen at each index entry.
    pub families: Vec<Vec<usize>>,
    pub stabilized: bool,
    /// Set when some `X^f_m` is empty, which forces the limit to be empty.
    pub empty_factor: Option<String>,
}

impl RkLevel {
    /// The `n`-simplex of each family (its component at the identity).
    pub fn projection(&self) -> Vec<usize> {
        self.families.iter().map(|fam| fam[0]).collect()
    }

    /// Does the projection biject onto `X_n`?
    pub fn bijects_with_level(&self, x: &SSet) -> bool {
        let p: BTreeSet<usize> = self.projection().into_iter().collect();
        p.len() == self.families.len() && p.len() == x.level_len(self.n)
    }
}

/// Compatible families over every surjection onto `[n]` with domain at most
/// `[max_m]`, under restriction along injections over `[n]`.
pub fn rk_plus_level(x: &MarkedSSet, n: usize, max_m: usize, budget: u64) -> Result<RkLevel> {
    if max_m < n {
        return Err(Error::rejected(format!("max_m = {max_m} is below n = {n}")));
    }
    for m in 0..=max_m {
        x.underlying().try_level_len(m)?;
    }
    let families = families(x, n, max_m, budget)?;
    let index = surjection_index(n, max_m);
    if let Err(diag) = families {
        return Ok(RkLevel {
            n,
            max_m,
            index,
            families: Vec::new(),
            stabilized: true,
            empty_factor: Some(diag),
        });
    }
    let families = families.unwrap();
    let stabilized = if max_m == n {
        false
    } else {
        let lower_len = surjection_index(n, max_m - 1).len();
        match self::families(x, n, max_m - 1, budget)? {
            Ok(lower) => {
                let projected: BTreeSet<&[usize]> = families.iter().map(|f| &f[..lower_len]).collect();
                let lower: BTreeSet<&[usize]> = lower.iter().map(Vec::as_slice).collect();
                projected.len() == families.len() && projected == lower
            }
            Err(_) => false,
        }
    };
    Ok(RkLevel {
        n,
        max_m,
        index,
        families,
        stabilized,
        empty_factor: None,
    })
}

/// Inner result `Err` carries the empty-factor diagnostic.
fn families(x: &MarkedSSet, n: usize, max_m: usize, budget: u64) -> Result<std::result::Result<Vec<Vec<usize>>, String>> {
    let index = surjection_index(n, max_m);
    let pos: HashMap<&OrdinalMap, usize> = index.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let mut comps = Vec::with_capacity(index.len());
    for f in &index {
        let c = x_f_m(x, f)?;
        if c.is_empty() {
            return Ok(Err(format!("X^f_m is empty for f = {f}")));
        }
        comps.push(c);
    }
    let u = x.underlying();
    // for each top surjection: every (object, injection) below it
    let tops: Vec<usize> = (0..index.len()).filter(|&i| index[i].domain_size() == max_m).collect();
    let mut below: Vec<Vec<(usize, Vec<usize>)>> = Vec::with_capacity(tops.len());
    for &t in &tops {
        let big = &index[t];
        let mut v = Vec::new();
        for m in n..=max_m {
            for h in enumerate_maps(m, max_m, MapClass::Injective) {
                let g = compose(&h, big)?;
                if let Some(&gi) = pos.get(&g) {
                    v.push((gi, h.values().to_vec()));
                }
            }
        }
        below.push(v);
    }

    struct Search<'a> {
        u: &'a SSet,
        max_m: usize,
        comps: &'a [Vec<usize>],
        tops: &'a [usize],
        below: &'a [Vec<(usize, Vec<usize>)>],
        assign: Vec<Option<usize>>,
        out: Vec<Vec<usize>>,
        nodes: u64,
        budget: u64,
    }
    impl Search<'_> {
        fn go(&mut self, t: usize) -> Result<()> {
            if t == self.tops.len() {
                self.out.push(self.assign.iter().map(|a| a.expect("every object lies below a top")).collect());
                return Ok(());
            }
            let top = self.tops[t];
            for &cand in &self.comps[top] {
                self.nodes += 1;
                if self.nodes > self.budget {
                    return Err(Error::budget("Kan extension families", self.budget));
                }
                let mut set = Vec::new();
                let mut ok = true;
                for (g, h) in &self.below[t] {
                    let y = self.u.restrict(self.max_m, cand, h);
                    match self.assign[*g] {
                        Some(prev) if prev != y => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            self.assign[*g] = Some(y);
                            set.push(*g);
                        }
                    }
                }
                if ok {
                    self.go(t + 1)?;
                }
                for g in set {
                    self.assign[g] = None;
                }
            }
            Ok(())
        }
    }
    let mut s = Search {
        u,
        max_m,
        comps: &comps,
        tops: &tops,
        below: &below,
        assign: vec![None; index.len()],
        out: Vec::new(),
        nodes: 0,
        budget,
    };
    s.go(0)?;
    let mut out = s.out;
    // lower components must lie in their X^g, which restriction guarantees
    debug_assert!(out.iter().all(|fam| fam.iter().zip(&comps).all(|(c, set)| set.contains(c))));
    out.sort();
    Ok(Ok(out))
}

/// A failed section check in the counit verification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounitFailure {
    pub f: OrdinalMap,
    pub h: OrdinalMap,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounitReport {
    pub n: usize,
    pub max_m: usize,
    pub checks: usize,
    pub failures: Vec<CounitFailure>,
}

impl CounitReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// For `X = F^♮(N C)`: every section `h` of every surjection `f : [m] ↠ [n]`,
/// `m ≤ max_m`, restricts `X^f_m` bijectively onto `X_n`.
pub fn verify_counit_gaunt(c: &NuCat, n: usize, max_m: usize) -> Result<CounitReport> {
    if !c.is_gaunt() {
        return Err(Error::rejected("the category is not gaunt"));
    }
    if max_m < n {
        return Err(Error::rejected(format!("max_m = {max_m} is below n = {n}")));
    }
    let x = f_natural(&simplicial_nerve(c, max_m.max(3))?)?;
    let u = x.underlying();
    let mut checks = 0;
    let mut failures = Vec::new();
    for f in surjection_index(n, max_m) {
        let xf = x_f_m(&x, &f)?;
        for h in sections_of(&f)? {
            checks += 1;
            let image: BTreeSet<usize> = xf.iter().map(|&s| u.restrict(f.domain_size(), s, h.values())).collect();
            let reason = if image.len() != xf.len() {
                Some("not injective")
            } else if image.len() != u.level_len(n) {
                Some("not surjective")
            } else {
                None
            };
            if let Some(r) = reason {
                failures.push(CounitFailure {
                    f: f.clone(),
                    h,
                    reason: r.into(),
                });
            }
        }
    }
    Ok(CounitReport {
        n,
        max_m,
        checks,
        failures,
    })
}

/// Partial orders on `0..k` refining the usual order (every poset up to
/// isomorphism appears), as `leq[x][y]`.
pub fn natural_posets(k: usize) -> Vec<Vec<Vec<bool>>> {
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|x| (x + 1..k).map(move |y| (x, y))).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let mut leq = vec![vec![false; k]; k];
        for (x, row) in leq.iter_mut().enumerate() {
            row[x] = true;
        }
        for (b, &(x, y)) in pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                leq[x][y] = true;
            }
        }
        let transitive = (0..k).all(|a| {
            (0..k).all(|b| (0..k).all(|c| !(leq[a][b] && leq[b][c]) || leq[a][c]))
        });
        if transitive {
            out.push(leq);
        }
    }
    out
}

pub fn poset_category(leq: &[Vec<bool>]) -> Result<NuCat> {
    NuCat::poset(leq.len(), |x, y| leq[x][y])
}

/// Kan extension levels computed from a lazily grown nerve.
pub fn rk_plus_of_category(c: &Arc<NuCat>, n: usize, max_m: usize, budget: u64) -> Result<RkLevel> {
    let x = f_natural(&simplicial_nerve(c, max_m.max(3))?)?;
    rk_plus_level(&x, n, max_m, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked::{enumerate_marked_maps, flat};
    use crate::nucat::MarkingRule;

    fn chain2() -> NuCat {
        NuCat::poset(2, |x, y| x <= y).unwrap()
    }

    #[test]
    fn nerve_satisfies_simplicial_identities() {
        for c in [chain2(), NuCat::cyclic_group(3).unwrap(), NuCat::poset(3, |x, y| x <= y).unwrap()] {
            let x = simplicial_nerve(&c, 4).unwrap();
            assert!(x.validate().is_empty());
        }
        assert!(simplicial_nerve(&NuCat::null_semigroup(), 2).is_err());
    }

    #[test]
    fn broken_degeneracy_is_caught() {
        let x = simplicial_nerve(&chain2(), 2).unwrap();
        let mut degens = x.degens.clone();
        degens[0][0][0] = degens[0][1][0];
        assert!(SimpSet::new(x.sset.clone(), degens).is_err());
    }

    #[test]
    fn forget_plus_examples() {
        let one = simplicial_nerve(&NuCat::cyclic_group(1).unwrap(), 2).unwrap();
        assert_eq!(forget_plus(&one).marking().len(), 1);
        let x = simplicial_nerve(&chain2(), 3).unwrap();
        let fp = forget_plus(&x);
        assert_eq!(fp.marking().len(), 2);
        assert_eq!(fp.underlying().level_len(1), 3);
        assert_eq!(fp.underlying(), x.underlying());
        let nat = f_natural(&x).unwrap();
        assert!(fp.marking().is_subset(nat.marking()));
        let g = simplicial_nerve(&NuCat::cyclic_group(2).unwrap(), 3).unwrap();
        assert_eq!(f_natural(&g).unwrap().marking().len(), 2);
    }

    #[test]
    fn x_f_m_matches_marked_maps() {
        let x = Arc::new(f_natural(&simplicial_nerve(&NuCat::poset(3, |a, b| a <= b).unwrap(), 4).unwrap()).unwrap());
        for m in 0..=3 {
            for n in 0..=m {
                for f in enumerate_maps(m, n, MapClass::Surjective) {
                    let direct = x_f_m(&x, &f).unwrap();
                    let d = Arc::new(degenerate_marked_simplex(&f).unwrap());
                    let maps = enumerate_marked_maps(&d, &x, 1_000_000).unwrap();
                    let mut via: Vec<usize> = maps.iter().map(|mp| mp.level_fns[m][0]).collect();
                    via.sort();
                    assert_eq!(direct, via, "{f}");
                }
            }
        }
    }

    #[test]
    fn x_f_m_examples() {
        let x = f_natural(&simplicial_nerve(&chain2(), 3).unwrap()).unwrap();
        assert_eq!(x_f_m(&x, &OrdinalMap::identity(2)).unwrap().len(), x.underlying().level_len(2));
        let f = OrdinalMap::new(1, vec![0, 0, 1]).unwrap();
        // strings x ≤ y ≤ z with x = y
        assert_eq!(x_f_m(&x, &f).unwrap().len(), 3);
        let bare = flat(x.underlying().clone());
        assert!(x_f_m(&bare, &f).unwrap().is_empty());
        assert!(x_f_m(&x, &OrdinalMap::new(2, vec![0, 2]).unwrap()).is_err());
        assert!(x_f_m(&x, &OrdinalMap::identity(4)).unwrap_err().is_resource());
    }

    #[test]
    fn grid_count() {
        for m in 0..=5 {
            for n in 0..=m {
                let maps = enumerate_maps(m, n, MapClass::Surjective);
                assert_eq!(maps.len(), crate::ordinal::binomial(m, n));
                let tuples: BTreeSet<Vec<usize>> = maps.iter().map(fiber_sizes).collect();
                assert_eq!(tuples.len(), maps.len());
                assert!(tuples.iter().all(|t| t.iter().all(|&s| s > 0) && t.iter().sum::<usize>() == m + 1));
            }
        }
    }

    #[test]
    fn rk_of_gaunt_bijects() {
        let c = Arc::new(NuCat::poset(3, |x, y| x <= y).unwrap());
        for n in 0..=2 {
            let r = rk_plus_of_category(&c, n, 4, 10_000_000).unwrap();
            assert!(r.stabilized, "n = {n}");
            assert!(r.bijects_with_level(&c.nerve(n.max(1))), "n = {n}");
        }
    }

    #[test]
    fn rk_with_empty_factor() {
        // a poset nerve with no marked edges: degenerate factors are empty
        let x = flat(chain2().nerve(3));
        let r = rk_plus_level(&x, 1, 3, 1_000_000).unwrap();
        assert!(r.families.is_empty());
        assert!(r.stabilized);
        assert!(r.empty_factor.is_some());
        let m = chain2().marked_nerve(&MarkingRule::Invertibles, 2).unwrap();
        assert!(rk_plus_level(&m, 1, 3, 1000).unwrap_err().is_resource());
    }

    #[test]
    fn counit_examples() {
        assert!(verify_counit_gaunt(&chain2(), 1, 4).unwrap().ok());
        for leq in natural_posets(3) {
            let c = poset_category(&leq).unwrap();
            assert!(verify_counit_gaunt(&c, 0, 4).unwrap().ok());
        }
        assert!(verify_counit_gaunt(&NuCat::cyclic_group(2).unwrap(), 1, 3).is_err());
    }

    #[test]
    fn poset_counts() {
        // naturally labeled posets: 1, 1, 2, 7, 40
        let counts: Vec<usize> = (0..=4).map(|k| natural_posets(k).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 7, 40]);
    }
}
