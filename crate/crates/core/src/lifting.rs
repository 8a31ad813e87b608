//! Right lifting properties between finite marked maps, decided by
//! exhaustive search, and the three generators of quasi-unitality.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marked::{sharp, MarkedMap, MarkedSSet};
use crate::nucat::{is_quasi_unital_marked, marked_segal_violations};
use crate::sset::{standard, sub_simplex, Map, MapSearch, SSet, DEFAULT_BUDGET};

/// A commuting square `top: A -> W`, `bottom: B -> Z` over `g` and `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Square {
    pub top: Vec<Vec<usize>>,
    pub bottom: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Rlp {
    /// Every square lifts; lift counts range over `min_lifts..=max_lifts`.
    Holds {
        squares: usize,
        min_lifts: usize,
        max_lifts: usize,
    },
    /// The first square without a lift, in search order.
    Fails { square: Square },
}

impl Rlp {
    pub fn holds(&self) -> bool {
        matches!(self, Rlp::Holds { .. })
    }
}

/// `C₀ : Δ^{0} -> (Δ¹)♯`, `C₁ : Δ^{1} -> (Δ¹)♯` and
/// `C₂ : (Δ³, {02, 13}) -> (Δ³)♯`.
pub fn q_generators() -> [MarkedMap; 3] {
    let target1 = Arc::new(sharp(standard(1)));
    let vertex = |v: usize| {
        let src = Arc::new(MarkedSSet::new(sub_simplex(1, &[v]).expect("vertex"), []).expect("no marking"));
        Map {
            source: src,
            target: target1.clone(),
            level_fns: vec![vec![v], vec![]],
        }
    };
    let c2_src = MarkedSSet::with_marked_pairs(standard(3), &[(0, 2), (1, 3)]).expect("edges of Δ³");
    let c2_tgt = sharp(standard(3));
    let c2 = Map::identity(Arc::new(c2_src.clone()));
    let c2 = Map {
        source: Arc::new(c2_src),
        target: Arc::new(c2_tgt),
        level_fns: c2.level_fns,
    };
    [vertex(0), vertex(1), c2]
}

/// One simplex in every level `0..=depth`, its edge marked.
pub fn terminal(depth: usize) -> MarkedSSet {
    let mut faces = vec![vec![vec![]]];
    for k in 1..=depth {
        faces.push(vec![vec![0; k + 1]]);
    }
    let t = SSet::from_faces_unchecked(faces, true);
    if depth == 0 {
        return MarkedSSet::new(t, []).expect("no edges");
    }
    MarkedSSet::new(t, [0]).expect("one edge")
}

/// The unique map `W -> T`.
pub fn terminal_map(w: &Arc<MarkedSSet>) -> MarkedMap {
    let x = w.underlying();
    let d = x.truncation().max(1);
    Map {
        source: w.clone(),
        target: Arc::new(terminal(d)),
        level_fns: x.level_sizes().into_iter().map(|n| vec![0; n]).collect(),
    }
}

fn marked_allow<'a>(
    x: &'a MarkedSSet,
    y: &'a MarkedSSet,
) -> impl Fn(usize, usize, usize) -> bool + Sync + 'a {
    move |k, s, t| k != 1 || !x.is_marked(s) || y.is_marked(t)
}

/// Does `p : W -> Z` have the right lifting property against `g : A -> B`?
pub fn has_rlp(p: &MarkedMap, g: &MarkedMap, budget: u64) -> Result<Rlp> {
    p.check_marked().map_err(Error::Rejected)?;
    g.check_marked().map_err(Error::Rejected)?;
    let (a, b) = (&*g.source, &*g.target);
    let (w, z) = (&*p.source, &*p.target);
    let mut spent = 0u64;
    let mut charge = |n: u64| -> Result<u64> {
        spent += n;
        if spent > budget {
            Err(Error::budget("lifting squares", budget))
        } else {
            Ok(budget - spent)
        }
    };

    let bottom_allow = marked_allow(b, z);
    let bottoms = MapSearch::new(b.underlying(), z.underlying())
        .budget(budget)
        .allow(&bottom_allow)
        .stage("lifting squares")
        .collect()?;
    charge(bottoms.len() as u64)?;

    let (mut squares, mut min_lifts, mut max_lifts) = (0usize, usize::MAX, 0usize);
    for v in &bottoms {
        let top_allow = |k: usize, s: usize, t: usize| {
            marked_allow(a, w)(k, s, t) && p.level_fns[k][t] == v[k][g.level_fns[k][s]]
        };
        let left = charge(0)?;
        let tops = MapSearch::new(a.underlying(), w.underlying())
            .budget(left)
            .allow(&top_allow)
            .stage("lifting squares")
            .collect()?;
        charge(tops.len() as u64)?;
        for u in tops {
            squares += 1;
            let lifts = count_lifts(p, g, &u, v, charge(0)?)?;
            charge(lifts as u64 + 1)?;
            if lifts == 0 {
                return Ok(Rlp::Fails {
                    square: Square {
                        top: u,
                        bottom: v.clone(),
                    },
                });
            }
            min_lifts = min_lifts.min(lifts);
            max_lifts = max_lifts.max(lifts);
        }
    }
    if squares == 0 {
        min_lifts = 0;
    }
    Ok(Rlp::Holds {
        squares,
        min_lifts,
        max_lifts,
    })
}

/// Lifts `l : B -> W` with `l ∘ g = u` and `p ∘ l = v`.
fn count_lifts(p: &MarkedMap, g: &MarkedMap, u: &[Vec<usize>], v: &[Vec<usize>], budget: u64) -> Result<usize> {
    let (b, w) = (&*g.target, &*p.source);
    let levels = b.underlying().level_sizes();
    let mut fixed: Vec<Vec<Option<usize>>> = levels.iter().map(|&n| vec![None; n]).collect();
    for (k, img) in g.level_fns.iter().enumerate() {
        for (s, &t) in img.iter().enumerate() {
            match fixed[k][t] {
                Some(prev) if prev != u[k][s] => return Ok(0),
                _ => fixed[k][t] = Some(u[k][s]),
            }
        }
    }
    let allow = |k: usize, s: usize, t: usize| marked_allow(b, w)(k, s, t) && p.level_fns[k][t] == v[k][s];
    let mut count = 0usize;
    MapSearch::new(b.underlying(), w.underlying())
        .budget(budget)
        .fixed(&fixed)
        .allow(&allow)
        .stage("lifting squares")
        .run(|_| {
            count += 1;
            true
        })?;
    Ok(count)
}

/// Per-generator outcome of the quasi-unitality lifting test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuRlpReport {
    pub c0: Rlp,
    pub c1: Rlp,
    pub c2: Rlp,
}

impl QuRlpReport {
    pub fn holds(&self) -> bool {
        self.c0.holds() && self.c1.holds() && self.c2.holds()
    }
}

/// `W -> T` against `C₀, C₁, C₂`, for a discrete marked semiSegal `W`.
pub fn qu_rlp_report(w: &Arc<MarkedSSet>, budget: u64) -> Result<QuRlpReport> {
    let v = marked_segal_violations(w)?;
    if let Some(first) = v.first() {
        return Err(Error::rejected(format!("not marked semiSegal: {first}")));
    }
    let t = terminal_map(w);
    let [c0, c1, c2] = q_generators();
    Ok(QuRlpReport {
        c0: has_rlp(&t, &c0, budget)?,
        c1: has_rlp(&t, &c1, budget)?,
        c2: has_rlp(&t, &c2, budget)?,
    })
}

pub fn is_quasi_unital_via_rlp(w: &MarkedSSet) -> Result<bool> {
    Ok(qu_rlp_report(&Arc::new(w.clone()), DEFAULT_BUDGET)?.holds())
}

/// Markings of a category's nerve worth testing: every subset of the
/// invertibles closed under 2-out-of-3, when there are at most `max_inv`
/// invertibles; otherwise the natural marking and the closure of the quasi-units.
pub fn candidate_markings(c: &crate::nucat::NuCat, max_inv: usize) -> Vec<BTreeSet<usize>> {
    use crate::marked::closure_2of3;
    let inv: Vec<usize> = c.invertibles().into_iter().collect();
    let nerve = c.nerve(2);
    let closed = |m: &BTreeSet<usize>| {
        let w = MarkedSSet::new(nerve.clone(), m.iter().copied()).expect("edges");
        closure_2of3(&w).marking() == m
    };
    let mut out = Vec::new();
    if inv.len() <= max_inv {
        for mask in 0u32..(1 << inv.len()) {
            let m: BTreeSet<usize> = (0..inv.len()).filter(|i| mask >> i & 1 == 1).map(|i| inv[i]).collect();
            if closed(&m) {
                out.push(m);
            }
        }
    } else {
        let natural: BTreeSet<usize> = inv.iter().copied().collect();
        let w = MarkedSSet::new(nerve.clone(), c.quasi_units()).expect("edges");
        let qu = closure_2of3(&w).marking().clone();
        out.push(natural.clone());
        if qu != natural && qu.is_subset(&natural) {
            out.push(qu);
        }
        out.push(BTreeSet::new());
    }
    out
}

/// Both sides of the quasi-unitality comparison for one marked nerve.
pub fn compare_qu(w: &MarkedSSet) -> Result<(bool, bool)> {
    Ok((is_quasi_unital_via_rlp(w)?, is_quasi_unital_marked(w)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marked::flat;
    use crate::nucat::{corpus, MarkingRule, NuCat};

    #[test]
    fn generators_shape() {
        let [c0, c1, c2] = q_generators();
        assert_eq!(c0.source.underlying().level_sizes(), vec![1, 0]);
        assert_eq!(c1.source.underlying().level_sizes(), vec![1, 0]);
        assert_eq!(c1.level_fns[0], vec![1]);
        assert_eq!(c2.source.marking().len(), 2);
        assert_eq!(c2.target.marking().len(), 6);
        for c in [&c0, &c1, &c2] {
            assert!(c.check_marked().is_ok());
            assert!(c.is_injective());
        }
    }

    #[test]
    fn isomorphisms_lift() {
        let g = Map::identity(Arc::new(sharp(standard(2))));
        let w = Arc::new(NuCat::cyclic_group(2).unwrap().marked_nerve(&MarkingRule::Invertibles, 3).unwrap());
        let p = terminal_map(&w);
        assert!(has_rlp(&p, &g, 100_000).unwrap().holds());
        let [c0, ..] = q_generators();
        let iso = Map::identity(Arc::new(terminal(3)));
        assert!(has_rlp(&iso, &c0, 1000).unwrap().holds());
    }

    #[test]
    fn idempotent_and_null_semigroup() {
        let [c0, ..] = q_generators();
        let e = Arc::new(NuCat::idempotent().marked_nerve(&MarkingRule::QuasiUnits, 3).unwrap());
        assert_eq!(
            has_rlp(&terminal_map(&e), &c0, 1000).unwrap(),
            Rlp::Holds { squares: 1, min_lifts: 1, max_lifts: 1 }
        );
        let n = Arc::new(NuCat::null_semigroup().marked_nerve(&MarkingRule::Invertibles, 3).unwrap());
        assert!(matches!(has_rlp(&terminal_map(&n), &c0, 1000).unwrap(), Rlp::Fails { .. }));
        assert!(!is_quasi_unital_via_rlp(&n).unwrap());
    }

    #[test]
    fn spec_examples() {
        let g = NuCat::cyclic_group(3).unwrap().marked_nerve(&MarkingRule::Invertibles, 3).unwrap();
        assert!(is_quasi_unital_via_rlp(&g).unwrap());
        let p = NuCat::poset(3, |x, y| x <= y).unwrap();
        let w = p.marked_nerve(&MarkingRule::QuasiUnits, 3).unwrap();
        assert!(is_quasi_unital_via_rlp(&w).unwrap());
        // a sharp nerve with non-invertible edges fails the precondition
        let s = sharp(p.nerve(3));
        assert!(is_quasi_unital_via_rlp(&s).is_err());
    }

    #[test]
    fn agrees_with_definition_on_small_corpus() {
        for c in corpus(2, 1, 1_000_000).unwrap() {
            for m in candidate_markings(&c, 8) {
                let w = MarkedSSet::new(c.nerve(3), m).unwrap();
                let (a, b) = compare_qu(&w).unwrap();
                assert_eq!(a, b, "{:?}", c.to_json());
            }
        }
    }

    #[test]
    fn composition_of_right_maps_and_left_maps() {
        // p, q both lift against C₀ and C₁, so q ∘ p does too
        let g = NuCat::cyclic_group(2).unwrap();
        let w = Arc::new(g.marked_nerve(&MarkingRule::Invertibles, 3).unwrap());
        let id = Map::identity(w.clone());
        let t = terminal_map(&w);
        let comp = id.then(&t).unwrap();
        for c in q_generators() {
            assert_eq!(has_rlp(&t, &c, 100_000).unwrap().holds(), has_rlp(&comp, &c, 100_000).unwrap().holds());
        }
        // lifting against Δ⁰ -> Δ¹♭ -> Δ¹♯ implies lifting against the composite
        let a = Arc::new(MarkedSSet::new(sub_simplex(1, &[0]).unwrap(), []).unwrap());
        let b = Arc::new(flat(standard(1)));
        let c = Arc::new(sharp(standard(1)));
        let g1 = Map { source: a, target: b.clone(), level_fns: vec![vec![0], vec![]] };
        let g2 = Map { source: b, target: c, level_fns: vec![vec![0, 1], vec![0]] };
        let g21 = g1.then(&g2).unwrap();
        let h1 = has_rlp(&t, &g1, 100_000).unwrap().holds();
        let h2 = has_rlp(&t, &g2, 100_000).unwrap().holds();
        assert!(!(h1 && h2) || has_rlp(&t, &g21, 100_000).unwrap().holds());
    }

    #[test]
    fn budget_is_reported() {
        let w = Arc::new(NuCat::cyclic_group(3).unwrap().marked_nerve(&MarkingRule::Invertibles, 3).unwrap());
        let [_, _, c2] = q_generators();
        assert!(has_rlp(&terminal_map(&w), &c2, 3).unwrap_err().is_resource());
    }
}
