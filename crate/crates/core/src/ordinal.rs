//! Monotone maps between finite ordinals `[m] = {0, ..., m}` and shuffles.
//!
//! Everything here is enumerated in a fixed lexicographic order so that
//! downstream certificates come out byte-for-byte reproducible.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A weakly increasing map `[m] -> [n]`, stored as its value sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawOrdinalMap")]
pub struct OrdinalMap {
    n: usize,
    values: Vec<usize>,
}

#[derive(Deserialize)]
struct RawOrdinalMap {
    n: usize,
    values: Vec<usize>,
}

impl TryFrom<RawOrdinalMap> for OrdinalMap {
    type Error = Error;

    fn try_from(raw: RawOrdinalMap) -> Result<Self> {
        OrdinalMap::new(raw.n, raw.values)
    }
}

/// Which monotone maps [`enumerate_maps`] should list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapClass {
    All,
    Injective,
    Surjective,
}

impl OrdinalMap {
    pub fn new(n: usize, values: Vec<usize>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::rejected("an ordinal map needs at least one value"));
        }
        if values.iter().any(|&v| v > n) {
            return Err(Error::rejected(format!("values {values:?} leave [{n}]")));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::rejected(format!("values {values:?} are not monotone")));
        }
        Ok(OrdinalMap { n, values })
    }

    pub fn identity(n: usize) -> Self {
        OrdinalMap {
            n,
            values: (0..=n).collect(),
        }
    }

    /// The coface `d^i : [n-1] -> [n]` skipping `i`.
    pub fn coface(n: usize, i: usize) -> Result<Self> {
        if n == 0 || i > n {
            return Err(Error::rejected(format!("no coface d^{i} into [{n}]")));
        }
        let values = (0..n).map(|t| if t < i { t } else { t + 1 }).collect();
        Ok(OrdinalMap { n, values })
    }

    /// The codegeneracy `s^i : [n+1] -> [n]` hitting `i` twice.
    pub fn codegeneracy(n: usize, i: usize) -> Result<Self> {
        if i > n {
            return Err(Error::rejected(format!("no codegeneracy s^{i} onto [{n}]")));
        }
        let values = (0..=n + 1).map(|t| if t <= i { t } else { t - 1 }).collect();
        Ok(OrdinalMap { n, values })
    }

    /// The `m` of the domain `[m]`.
    pub fn domain_size(&self) -> usize {
        self.values.len() - 1
    }

    /// The `n` of the codomain `[n]`.
    pub fn codomain_size(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn apply(&self, i: usize) -> usize {
        self.values[i]
    }

    pub fn is_injective(&self) -> bool {
        self.values.windows(2).all(|w| w[0] < w[1])
    }

    pub fn is_surjective(&self) -> bool {
        // Monotone, so surjective iff it starts at 0, ends at n and never jumps.
        self.values[0] == 0
            && *self.values.last().unwrap() == self.n
            && self.values.windows(2).all(|w| w[1] - w[0] <= 1)
    }

    /// Preimage of `i` as a contiguous range of the domain.
    pub fn fiber(&self, i: usize) -> std::ops::Range<usize> {
        let lo = self.values.partition_point(|&v| v < i);
        let hi = self.values.partition_point(|&v| v <= i);
        lo..hi
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &OrdinalMap) -> Result<OrdinalMap> {
        compose(self, g)
    }
}

impl fmt::Display for OrdinalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]->[{}]{:?}", self.domain_size(), self.n, self.values)
    }
}

/// `g ∘ f` for `f : [m] -> [k]` and `g : [k] -> [n]`.
pub fn compose(f: &OrdinalMap, g: &OrdinalMap) -> Result<OrdinalMap> {
    if f.codomain_size() != g.domain_size() {
        return Err(Error::rejected(format!(
            "cannot compose {f} with {g}: codomain [{}] vs domain [{}]",
            f.codomain_size(),
            g.domain_size()
        )));
    }
    Ok(OrdinalMap {
        n: g.n,
        values: f.values.iter().map(|&v| g.values[v]).collect(),
    })
}

/// All monotone maps `[m] -> [n]` of the given class, lexicographically.
pub fn enumerate_maps(m: usize, n: usize, class: MapClass) -> Vec<OrdinalMap> {
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(m + 1);
    fill_monotone(m, n, class, &mut buf, &mut out);
    out
}

fn fill_monotone(
    m: usize,
    n: usize,
    class: MapClass,
    buf: &mut Vec<usize>,
    out: &mut Vec<OrdinalMap>,
) {
    let pos = buf.len();
    if pos == m + 1 {
        let map = OrdinalMap {
            n,
            values: buf.clone(),
        };
        if class != MapClass::Surjective || map.is_surjective() {
            out.push(map);
        }
        return;
    }
    let lo = match (buf.last(), class) {
        (None, _) => 0,
        (Some(&p), MapClass::Injective) => p + 1,
        (Some(&p), _) => p,
    };
    let remaining = m - pos; // slots after this one
    for v in lo..=n {
        match class {
            MapClass::Injective if v + remaining > n => break,
            MapClass::Surjective => {
                if let Some(&p) = buf.last() {
                    if v > p + 1 {
                        break;
                    }
                } else if v > 0 {
                    break;
                }
                // must still be able to reach n
                if n - v > remaining {
                    continue;
                }
            }
            _ => {}
        }
        buf.push(v);
        fill_monotone(m, n, class, buf, out);
        buf.pop();
    }
}

/// Every monotone `h` with `f ∘ h = id`, in lexicographic order.
pub fn sections_of(f: &OrdinalMap) -> Result<Vec<OrdinalMap>> {
    if !f.is_surjective() {
        return Err(Error::rejected(format!("{f} is not surjective")));
    }
    let k = f.codomain_size();
    let fibers: Vec<_> = (0..=k).map(|i| f.fiber(i)).collect();
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(k + 1);
    fn walk(
        fibers: &[std::ops::Range<usize>],
        n: usize,
        buf: &mut Vec<usize>,
        out: &mut Vec<OrdinalMap>,
    ) {
        if buf.len() == fibers.len() {
            out.push(OrdinalMap {
                n,
                values: buf.clone(),
            });
            return;
        }
        for v in fibers[buf.len()].clone() {
            buf.push(v);
            walk(fibers, n, buf, out);
            buf.pop();
        }
    }
    walk(&fibers, f.domain_size(), &mut buf, &mut out);
    Ok(out)
}

/// An injective monotone map `[k] -> [n] x [m]` with both projections onto.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawShuffle")]
pub struct Shuffle {
    n: usize,
    m: usize,
    points: Vec<(usize, usize)>,
}

#[derive(Deserialize)]
struct RawShuffle {
    n: usize,
    m: usize,
    points: Vec<(usize, usize)>,
}

impl TryFrom<RawShuffle> for Shuffle {
    type Error = Error;

    fn try_from(raw: RawShuffle) -> Result<Self> {
        Shuffle::new(raw.n, raw.m, raw.points)
    }
}

/// Outcome of deleting one point of a shuffle: the renormalized shuffle
/// plus the value (if any) each projection stopped hitting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShuffleFace {
    pub shuffle: Shuffle,
    pub missed_first: Option<usize>,
    pub missed_second: Option<usize>,
}

impl Shuffle {
    pub fn new(n: usize, m: usize, points: Vec<(usize, usize)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::rejected("a shuffle needs at least one point"));
        }
        if !is_strict_chain(&points) {
            return Err(Error::rejected(format!(
                "{points:?} is not strictly increasing in the product order"
            )));
        }
        let s = Shuffle { n, m, points };
        if !s.first().is_surjective() || !s.second().is_surjective() {
            return Err(Error::rejected(format!(
                "{:?} does not project onto [{n}] x [{m}]",
                s.points
            )));
        }
        Ok(s)
    }

    pub fn k(&self) -> usize {
        self.points.len() - 1
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn points(&self) -> &[(usize, usize)] {
        &self.points
    }

    /// Projection onto `[n]`.
    pub fn first(&self) -> OrdinalMap {
        OrdinalMap {
            n: self.n,
            values: self.points.iter().map(|p| p.0).collect(),
        }
    }

    /// Projection onto `[m]`.
    pub fn second(&self) -> OrdinalMap {
        OrdinalMap {
            n: self.m,
            values: self.points.iter().map(|p| p.1).collect(),
        }
    }

    /// Delete point `i`, then reindex whichever projection lost a value.
    pub fn face(&self, i: usize) -> Option<ShuffleFace> {
        if self.points.len() < 2 || i >= self.points.len() {
            return None;
        }
        let (a, b) = self.points[i];
        let mut rest = self.points.clone();
        rest.remove(i);
        let missed_first = (!rest.iter().any(|p| p.0 == a)).then_some(a);
        let missed_second = (!rest.iter().any(|p| p.1 == b)).then_some(b);
        for p in rest.iter_mut() {
            if missed_first.is_some_and(|u| p.0 > u) {
                p.0 -= 1;
            }
            if missed_second.is_some_and(|w| p.1 > w) {
                p.1 -= 1;
            }
        }
        let shuffle = Shuffle {
            n: self.n - missed_first.is_some() as usize,
            m: self.m - missed_second.is_some() as usize,
            points: rest,
        };
        Some(ShuffleFace {
            shuffle,
            missed_first,
            missed_second,
        })
    }
}

pub(crate) fn is_strict_chain(points: &[(usize, usize)]) -> bool {
    points
        .windows(2)
        .all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1 && w[0] != w[1])
}

/// The set `P^{n,m}_k` of shuffles, lexicographic on the point sequence.
pub fn enumerate_shuffles(n: usize, m: usize, k: usize) -> Vec<Shuffle> {
    let mut out = Vec::new();
    if k > n + m || k < n.max(m) {
        return out;
    }
    let mut buf: Vec<(usize, usize)> = Vec::with_capacity(k + 1);
    fn walk(n: usize, m: usize, k: usize, buf: &mut Vec<(usize, usize)>, out: &mut Vec<Shuffle>) {
        if buf.len() == k + 1 {
            if buf.last() == Some(&(n, m)) {
                out.push(Shuffle {
                    n,
                    m,
                    points: buf.clone(),
                });
            }
            return;
        }
        let &(a, b) = buf.last().unwrap();
        // Surjective projections force unit steps in each coordinate.
        for (da, db) in [(0, 1), (1, 0), (1, 1)] {
            let p = (a + da, b + db);
            if p.0 > n || p.1 > m {
                continue;
            }
            let left = k - buf.len(); // points still to place after p
            let need = (n - p.0).max(m - p.1);
            let most = (n - p.0) + (m - p.1);
            if need > left || most < left {
                continue;
            }
            buf.push(p);
            walk(n, m, k, buf, out);
            buf.pop();
        }
    }
    buf.push((0, 0));
    // (1,1) sorts after (1,0) and (0,1) sorts first, so the step order above
    // already yields lexicographic output.
    walk(n, m, k, &mut buf, &mut out);
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
