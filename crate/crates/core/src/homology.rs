//! Exact integral homology of finite semi-simplicial sets via Smith normal form.
//!
//! Boundaries use `∂ = Σ (-1)^i d_i`; the rows of `∂_k` are indexed by
//! `X_{k-1}`, the columns by `X_k`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sset::SSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::rejected("ragged matrix"));
        }
        Ok(IntMatrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().map(|&x| BigInt::from(x)).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    fn at(&mut self, r: usize, c: usize) -> &mut BigInt {
        &mut self.data[r * self.cols + c]
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::rejected("shape mismatch in product"));
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        *out.at(i, j) += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for r in 0..self.rows {
                self.data.swap(r * self.cols + a, r * self.cols + b);
            }
        }
    }

    /// row `dst` += q * row `src`
    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        for c in 0..self.cols {
            let v = self.get(src, c) * q;
            if !v.is_zero() {
                *self.at(dst, c) += v;
            }
        }
    }

    /// col `dst` += q * col `src`
    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for r in 0..self.rows {
            let v = self.get(r, src) * q;
            if !v.is_zero() {
                *self.at(r, dst) += v;
            }
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = -std::mem::take(self.at(r, c));
            *self.at(r, c) = v;
        }
    }
}

/// `U · M · V = D` with `D` diagonal and each entry dividing the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snf {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

impl Snf {
    /// Nonzero diagonal entries.
    pub fn invariants(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols))
            .map(|i| self.d.get(i, i).clone())
            .take_while(|x| !x.is_zero())
            .collect()
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> Snf {
    let mut d = m.clone();
    let mut u = Some(IntMatrix::identity(m.rows));
    let mut v = Some(IntMatrix::identity(m.cols));
    reduce(&mut d, &mut u, &mut v);
    Snf {
        d,
        u: u.unwrap(),
        v: v.unwrap(),
    }
}

/// Nonzero diagonal of the Smith form, without the transforms.
pub fn smith_invariants(m: &IntMatrix) -> Vec<BigInt> {
    let mut d = m.clone();
    reduce(&mut d, &mut None, &mut None);
    (0..d.rows.min(d.cols))
        .map(|i| d.get(i, i).clone())
        .take_while(|x| !x.is_zero())
        .collect()
}

fn reduce(d: &mut IntMatrix, u: &mut Option<IntMatrix>, v: &mut Option<IntMatrix>) {
    let (rows, cols) = (d.rows, d.cols);
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for r in t..rows {
            for c in t..cols {
                let x = d.get(r, c);
                if !x.is_zero() && best.is_none_or(|(br, bc)| x.abs() < d.get(br, bc).abs()) {
                    best = Some((r, c));
                    if x.abs().is_one() {
                        break;
                    }
                }
            }
        }
        let Some((pr, pc)) = best else { break };
        d.swap_rows(t, pr);
        if let Some(u) = u.as_mut() {
            u.swap_rows(t, pr);
        }
        d.swap_cols(t, pc);
        if let Some(v) = v.as_mut() {
            v.swap_cols(t, pc);
        }
        loop {
            let p = d.get(t, t).clone();
            let mut dirty = false;
            for r in t + 1..rows {
                if d.get(r, t).is_zero() {
                    continue;
                }
                let q = -(d.get(r, t) / &p);
                d.add_row(r, t, &q);
                if let Some(u) = u.as_mut() {
                    u.add_row(r, t, &q);
                }
                if !d.get(r, t).is_zero() {
                    dirty = true;
                }
            }
            for c in t + 1..cols {
                if d.get(t, c).is_zero() {
                    continue;
                }
                let q = -(d.get(t, c) / &p);
                d.add_col(c, t, &q);
                if let Some(v) = v.as_mut() {
                    v.add_col(c, t, &q);
                }
                if !d.get(t, c).is_zero() {
                    dirty = true;
                }
            }
            if !dirty {
                // divisibility: fold in any entry the pivot does not divide
                let mut fix = None;
                'scan: for r in t + 1..rows {
                    for c in t + 1..cols {
                        if !(d.get(r, c) % &p).is_zero() {
                            fix = Some(r);
                            break 'scan;
                        }
                    }
                }
                match fix {
                    Some(r) => {
                        let one = BigInt::one();
                        d.add_row(t, r, &one);
                        if let Some(u) = u.as_mut() {
                            u.add_row(t, r, &one);
                        }
                        continue;
                    }
                    None => break,
                }
            }
            // move the smallest entry of row/column t onto the pivot
            let mut best = (t, t);
            for r in t..rows {
                let x = d.get(r, t);
                if !x.is_zero() && x.abs() < d.get(best.0, best.1).abs() {
                    best = (r, t);
                }
            }
            for c in t..cols {
                let x = d.get(t, c);
                if !x.is_zero() && x.abs() < d.get(best.0, best.1).abs() {
                    best = (t, c);
                }
            }
            d.swap_rows(t, best.0);
            if let Some(u) = u.as_mut() {
                u.swap_rows(t, best.0);
            }
            d.swap_cols(t, best.1);
            if let Some(v) = v.as_mut() {
                v.swap_cols(t, best.1);
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            if let Some(u) = u.as_mut() {
                u.negate_row(t);
            }
        }
        t += 1;
    }
}

/// `∂_k : C_k -> C_{k-1}`.
pub fn boundary_matrix(x: &SSet, k: usize) -> Result<IntMatrix> {
    if k == 0 {
        return Err(Error::rejected("boundary matrices start at k = 1"));
    }
    let cols = x.try_level_len(k)?;
    let rows = x.level_len(k - 1);
    let mut m = IntMatrix::zeros(rows, cols);
    for s in 0..cols {
        for i in 0..=k {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            *m.at(x.face(k, s, i), s) += sign;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeHomology {
    pub k: usize,
    pub betti: usize,
    #[serde(with = "bigint_list")]
    pub torsion: Vec<BigInt>,
}

pub type HomologyProfile = Vec<DegreeHomology>;

/// Homology in every degree the input determines: all of `0..=dim` for
/// a complete object, only degrees below the cap for a truncated one.
pub fn homology(x: &SSet) -> Result<HomologyProfile> {
    let top = if x.is_truncated() {
        if x.truncation() == 0 {
            return Ok(Vec::new());
        }
        x.truncation() - 1
    } else {
        x.truncation()
    };
    // invariants of ∂_k for k = 1..=top+1 (∂_{top+1} is zero when complete)
    let invariants: Vec<Vec<BigInt>> = (1..=top + 1)
        .into_par_iter()
        .map(|k| {
            if x.knows_level(k) {
                boundary_matrix(x, k).map(|m| smith_invariants(&m))
            } else {
                Ok(Vec::new())
            }
        })
        .collect::<Result<_>>()?;
    let rank = |k: usize| if k == 0 { 0 } else { invariants[k - 1].len() };
    Ok((0..=top)
        .map(|k| DegreeHomology {
            k,
            betti: x.level_len(k) - rank(k) - rank(k + 1),
            torsion: invariants[k].iter().filter(|d| !d.is_one()).cloned().collect(),
        })
        .collect())
}

pub fn point_profile(top: usize) -> HomologyProfile {
    (0..=top)
        .map(|k| DegreeHomology {
            k,
            betti: usize::from(k == 0),
            torsion: Vec::new(),
        })
        .collect()
}

/// `S^d` reported through degree `top`.
pub fn sphere_profile(d: usize, top: usize) -> HomologyProfile {
    (0..=top)
        .map(|k| DegreeHomology {
            k,
            betti: usize::from(k == 0) + usize::from(k == d),
            torsion: Vec::new(),
        })
        .collect()
}

pub fn is_point(p: &HomologyProfile) -> bool {
    p.iter().all(|h| h.torsion.is_empty() && h.betti == usize::from(h.k == 0))
}

mod bigint_list {
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Small(u64),
        Big(String),
    }

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|x| x.to_u64().map_or_else(|| Entry::Big(x.to_string()), Entry::Small))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<Entry>::deserialize(d)?
            .into_iter()
            .map(|e| match e {
                Entry::Small(x) => Ok(BigInt::from(x)),
                Entry::Big(s) => s.parse().map_err(serde::de::Error::custom),
            })
            .collect()
    }
}
