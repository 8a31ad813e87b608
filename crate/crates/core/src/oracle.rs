//! Reference computations that share no code with the modules they check.

/// Strictly increasing chains `p_0 < ... < p_k` in the product order on
/// `[n] × [m]`, counted by dynamic programming over end points.
pub fn strict_chain_count(n: usize, m: usize, k: usize) -> u64 {
    let pts: Vec<(usize, usize)> = (0..=n).flat_map(|a| (0..=m).map(move |b| (a, b))).collect();
    let lt = |p: (usize, usize), q: (usize, usize)| p != q && p.0 <= q.0 && p.1 <= q.1;
    // ending[i] = chains of the current length ending at pts[i]
    let mut ending = vec![1u64; pts.len()];
    for _ in 0..k {
        ending = pts
            .iter()
            .map(|&q| pts.iter().zip(&ending).filter(|(&p, _)| lt(p, q)).map(|(_, c)| c).sum())
            .collect();
    }
    ending.iter().sum()
}

/// The same count by listing every `(k+1)`-subset of the grid and keeping
/// the totally ordered ones; only for small grids.
pub fn strict_chain_count_naive(n: usize, m: usize, k: usize) -> u64 {
    let pts: Vec<(usize, usize)> = (0..=n).flat_map(|a| (0..=m).map(move |b| (a, b))).collect();
    let comparable = |p: (usize, usize), q: (usize, usize)| (p.0 <= q.0 && p.1 <= q.1) || (q.0 <= p.0 && q.1 <= p.1);
    fn subsets(start: usize, left: usize, len: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if left == 0 {
            f(cur);
            return;
        }
        for i in start..len {
            cur.push(i);
            subsets(i + 1, left - 1, len, cur, f);
            cur.pop();
        }
    }
    let mut count = 0;
    subsets(0, k + 1, pts.len(), &mut Vec::new(), &mut |s| {
        if s.iter().all(|&a| s.iter().all(|&b| comparable(pts[a], pts[b]))) {
            count += 1;
        }
    });
    count
}

/// Homology ranks of a simplex boundary, `S^{n-1}`, by formula.
pub fn sphere_betti(n: usize, k: usize) -> usize {
    let d = n - 1;
    match (d, k) {
        (0, 0) => 2,
        (_, 0) => 1,
        (d, k) if k == d => 1,
        _ => 0,
    }
}

/// 64-bit FNV-1a, for stable artifact digests.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_counts_agree() {
        for n in 0..=3 {
            for m in 0..=3 {
                for k in 0..=n + m + 1 {
                    assert_eq!(strict_chain_count(n, m, k), strict_chain_count_naive(n, m, k));
                }
            }
        }
        // maximal chains of the square are the two lattice paths
        assert_eq!(strict_chain_count(1, 1, 2), 2);
        assert_eq!(strict_chain_count(1, 1, 3), 0);
    }
}
