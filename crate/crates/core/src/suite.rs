//! The acceptance suite: one exact check per criterion, timed, with
//! deterministic JSON artifacts.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::decompose::{
    build_t, extreme_sections, is_degenerate_split, replay, section_pair_graph, shuffle_filtration, special_census,
    spine_with_m_f, spread_decomposition, spread_split, step_block, horn_marking_for, Step,
};
use crate::error::Result;
use crate::homology::{homology, is_point, sphere_profile};
use crate::kanext::{natural_posets, poset_category, rk_plus_of_category, verify_counit_gaunt};
use crate::lifting::{candidate_markings, compare_qu};
use crate::marked::{flat, is_admissible, tensor, MarkedHornSpec, MarkedSSet};
use crate::nucat::{corpus, enumerate_functors, functor_preservation, sample_three_object, NuCat};
use crate::ordinal::{enumerate_maps, MapClass};
use crate::oracle::{fnv1a, strict_chain_count};
use crate::sset::{self, SSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub quick: bool,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { quick: false, seed: 1 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub title: &'static str,
    /// Exact condition met and within the time limit.
    pub pass: bool,
    /// The failure matches the recorded analysis of an unattainable case.
    pub known_unattainable: bool,
    pub detail: Value,
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub limit: Duration,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let status = match (self.pass, self.known_unattainable) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known unattainable)",
            (false, false) => "FAIL",
        };
        format!(
            "{status:<26} [{:>2}] {:<28} {:>9.3}s / limit {:>4}s",
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs()
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub quick: bool,
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
}

impl SuiteReport {
    /// Every criterion passes or fails exactly as analysed.
    pub fn ok(&self) -> bool {
        self.criteria.iter().all(|c| c.pass || c.known_unattainable)
    }

    /// Canonical artifact text: criterion details without timings.
    pub fn artifacts(&self) -> String {
        let map: BTreeMap<String, &Value> = self
            .criteria
            .iter()
            .filter(|c| c.id != 10)
            .map(|c| (format!("{:02}", c.id), &c.detail))
            .collect();
        serde_json::to_string_pretty(&map).expect("json values serialize")
    }
}

pub const TITLES: [&str; 10] = [
    "shuffle/tensor counts",
    "semi-simplicial identities",
    "spread decomposition",
    "shuffle filtration",
    "homology oracle",
    "quasi-unit theory",
    "RLP generators",
    "counit on posets",
    "section-pair graph",
    "determinism",
];

const LIMITS: [u64; 10] = [1, 10, 30, 120, 60, 300, 300, 120, 10, 900];

/// Runs criterion `id` (1 to 10).
pub fn criterion(id: usize, cfg: &SuiteConfig) -> Result<CriterionResult> {
    let start = Instant::now();
    let (exact, known, detail) = match id {
        1 => c1_tensor_counts(cfg)?,
        2 => c2_identities(cfg)?,
        3 => c3_spread(cfg)?,
        4 => c4_shuffle(cfg)?,
        5 => c5_homology(cfg)?,
        6 => c6_quasi_units(cfg)?,
        7 => c7_rlp(cfg)?,
        8 => c8_counit(cfg)?,
        9 => c9_sections(cfg)?,
        10 => c10_determinism(cfg)?,
        _ => return Err(crate::Error::rejected(format!("no criterion {id}"))),
    };
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(LIMITS[id - 1]);
    Ok(CriterionResult {
        id,
        title: TITLES[id - 1],
        pass: exact && elapsed <= limit,
        known_unattainable: !exact && known,
        detail,
        elapsed,
        limit,
    })
}

pub fn run(cfg: &SuiteConfig) -> Result<SuiteReport> {
    run_only(cfg, &(1..=10).collect::<Vec<_>>())
}

pub fn run_only(cfg: &SuiteConfig, ids: &[usize]) -> Result<SuiteReport> {
    let criteria = ids.iter().map(|&i| criterion(i, cfg)).collect::<Result<_>>()?;
    Ok(SuiteReport {
        quick: cfg.quick,
        seed: cfg.seed,
        criteria,
    })
}

type Outcome = (bool, bool, Value);

fn digest<T: Serialize>(x: &T) -> String {
    format!("{:016x}", fnv1a(serde_json::to_string(x).expect("serializable").as_bytes()))
}

fn c1_tensor_counts(_cfg: &SuiteConfig) -> Result<Outcome> {
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for n in 0..=3 {
        for m in 0..=3 {
            let t = tensor(&flat(sset::standard(n)), &flat(sset::standard(m)))?;
            let sizes = t.underlying().level_sizes();
            for k in 0..=n + m + 1 {
                checked += 1;
                let got = sizes.get(k).copied().unwrap_or(0) as u64;
                let want = strict_chain_count(n, m, k);
                if got != want {
                    mismatches.push(json!({"n": n, "m": m, "k": k, "tensor": got, "chains": want}));
                }
            }
        }
    }
    Ok((mismatches.is_empty(), false, json!({"checked": checked, "mismatches": mismatches})))
}

fn c2_identities(cfg: &SuiteConfig) -> Result<Outcome> {
    let mut objects: Vec<(String, SSet)> = Vec::new();
    let top = if cfg.quick { 4 } else { 5 };
    for n in 0..=top {
        objects.push((format!("standard({n})"), sset::standard(n)));
        objects.push((format!("boundary({n})"), sset::boundary(n)));
        objects.push((format!("spine({n})"), sset::spine(n)));
        for i in 0..=n {
            if n >= 1 {
                objects.push((format!("horn({n},{i})"), sset::horn(n, i)?));
            }
        }
    }
    for p in 1..=3 {
        objects.push((format!("coskeleton0({p},4)"), sset::coskeleton0(p, 4)));
    }
    objects.push(("sub_simplex(4,[0,2,3])".into(), sset::sub_simplex(4, &[0, 2, 3])?));
    for n in 0..=3 {
        for m in 0..=3 {
            let t = tensor(&flat(sset::standard(n)), &flat(sset::standard(m)))?;
            objects.push((format!("tensor({n},{m})"), t.into_underlying()));
        }
    }
    for c in [NuCat::poset(3, |x, y| x <= y)?, NuCat::cyclic_group(3)?, NuCat::null_semigroup()] {
        objects.push(("nerve".into(), c.nerve(4)));
    }
    let mut replays = 0;
    let mut replay_failures = Vec::new();
    let mut certs = Vec::new();
    for n in 2..=top {
        for i in 0..=n {
            for j in 0..=n {
                if !is_degenerate_split(n, i, j) {
                    certs.push((format!("spread({n},{i},{j})"), spread_decomposition(n, i, j)?));
                }
            }
        }
    }
    for (m, n) in [(1, 2), (2, 2), (1, 3)] {
        for l in 0..=n {
            certs.push((format!("shuffle({m},{n},{l})"), shuffle_filtration(m, n, l)?));
        }
    }
    for (name, c) in &certs {
        replays += 1;
        let (report, fin) = replay(c);
        match fin {
            Some(x) if report.ok() => objects.push((format!("final {name}"), x.into_underlying())),
            _ => replay_failures.push(name.clone()),
        }
    }
    let bad: Vec<Value> = objects
        .iter()
        .filter_map(|(name, x)| {
            let v = x.validate();
            (!v.is_empty()).then(|| json!({"object": name, "violations": format!("{v:?}")}))
        })
        .collect();
    let ok = bad.is_empty() && replay_failures.is_empty();
    Ok((
        ok,
        false,
        json!({"objects": objects.len(), "replays": replays, "violations": bad, "replay_failures": replay_failures}),
    ))
}

fn c3_spread(cfg: &SuiteConfig) -> Result<Outcome> {
    let top = if cfg.quick { 4 } else { 5 };
    let mut verified = 0;
    let mut failures: Vec<(usize, usize, usize, String)> = Vec::new();
    let mut digests = Vec::new();
    for n in 2..=top {
        for i in 0..=n {
            for j in 0..=n {
                match spread_decomposition(n, i, j) {
                    Ok(c) => {
                        let split = spread_split(n, i, j)?;
                        let want = MarkedSSet::with_marked_pairs(sset::horn(n, i)?, &split.marking)?;
                        let report = replay(&c).0;
                        if report.ok() && c.target.labeled_form() == want.labeled_form() {
                            verified += 1;
                            digests.push(digest(&c));
                        } else {
                            failures.push((n, i, j, format!("{:?}", report.issues.first())));
                        }
                    }
                    Err(e) => failures.push((n, i, j, e.to_string())),
                }
            }
        }
    }
    // the analysed unattainable set: splits whose start already holds Δⁿ
    let failed: BTreeSet<(usize, usize, usize)> = failures.iter().map(|f| (f.0, f.1, f.2)).collect();
    let degenerate: BTreeSet<(usize, usize, usize)> = (2..=top)
        .flat_map(|n| (0..=n).flat_map(move |i| (0..=n).map(move |j| (n, i, j))))
        .filter(|&(n, i, j)| is_degenerate_split(n, i, j))
        .collect();
    let known = failed == degenerate;
    Ok((
        failures.is_empty(),
        known,
        json!({
            "verified": verified,
            "failed": failures.len(),
            "failed_triples": failed,
            "reason": "one of A, B is all of [n]; the start contains Δⁿ, which is not inside the horn",
            "certificates": digest(&digests),
        }),
    ))
}

fn c4_shuffle(cfg: &SuiteConfig) -> Result<Outcome> {
    let (mtop, ntop) = if cfg.quick { (2, 2) } else { (3, 3) };
    let cases: Vec<(usize, usize, usize)> = (0..=mtop)
        .flat_map(|m| (2..=ntop).flat_map(move |n| (0..=n).map(move |l| (m, n, l))))
        .collect();
    let results: Vec<Result<(bool, Value, String)>> = cases
        .par_iter()
        .map(|&(m, n, l)| {
            let cert = shuffle_filtration(m, n, l)?;
            let report = replay(&cert).0;
            let horn_marking = horn_marking_for(n, l);
            let y = MarkedSSet::with_marked_pairs(sset::standard(n), &horn_marking)?;
            let want = tensor(&flat(sset::standard(m)), &y)?;
            let target_ok = cert.target.labeled_form() == want.labeled_form();
            let mut admissible = true;
            let mut steps: BTreeMap<(usize, i64), usize> = BTreeMap::new();
            for s in &cert.steps {
                if let Step::Horn { simplex, v, marking } = s {
                    let spec = MarkedHornSpec::new(simplex.dim(), *v, marking.iter().copied())?;
                    admissible &= is_admissible(&spec);
                }
                match step_block(s, m, n, l) {
                    Some(b) => *steps.entry(b).or_insert(0) += 1,
                    None => admissible = false,
                }
            }
            // the l = 0 filtration is the l = n one reflected
            let census: BTreeMap<(usize, i64), usize> =
                special_census(m, n, if l == 0 { n } else { l })?.into_iter().collect();
            let census_ok = census == steps;
            let ok = report.ok() && target_ok && admissible && census_ok;
            Ok((
                ok,
                json!({"m": m, "n": n, "l": l, "steps": cert.steps.len(), "outer": report.outer_steps,
                       "verified": report.ok(), "target": target_ok, "admissible": admissible, "census": census_ok}),
                digest(&cert),
            ))
        })
        .collect();
    let mut all = true;
    let mut rows = Vec::new();
    let mut digests = Vec::new();
    for r in results {
        let (ok, row, d) = r?;
        all &= ok;
        rows.push(row);
        digests.push(d);
    }
    Ok((all, false, json!({"cases": rows, "certificates": digest(&digests)})))
}

fn c5_homology(_cfg: &SuiteConfig) -> Result<Outcome> {
    let mut bad = Vec::new();
    let mut checked = 0;
    for m in 0..=3 {
        for n in 0..=3 {
            checked += 1;
            let t = tensor(&flat(sset::standard(m)), &flat(sset::standard(n)))?;
            if !is_point(&homology(t.underlying())?) {
                bad.push(format!("tensor({m},{n})"));
            }
        }
    }
    for n in 1..=4 {
        for i in 0..=n {
            checked += 1;
            if !is_point(&homology(&sset::horn(n, i)?)?) {
                bad.push(format!("horn({n},{i})"));
            }
        }
        checked += 1;
        let b = sset::boundary(n);
        if homology(&b)? != sphere_profile(n - 1, b.truncation()) {
            bad.push(format!("boundary({n})"));
        }
    }
    Ok((bad.is_empty(), false, json!({"checked": checked, "failures": bad})))
}

/// The corpus behind criteria 6 and 7.
pub fn qu_corpus(cfg: &SuiteConfig) -> Result<(Vec<NuCat>, Vec<NuCat>)> {
    let (hom, samples) = if cfg.quick { (1, 100) } else { (2, 1000) };
    Ok((corpus(2, hom, u64::MAX)?, sample_three_object(cfg.seed, samples, 2)?))
}

fn c6_quasi_units(cfg: &SuiteConfig) -> Result<Outcome> {
    let (small, sampled) = qu_corpus(cfg)?;
    let all: Vec<&NuCat> = small.iter().chain(&sampled).collect();
    let qu_inv: usize = all.par_iter().map(|c| c.check_l_qu_inv().len()).sum();
    let qu_unique: usize = all
        .par_iter()
        .map(|c| (0..c.num_objects()).filter(|&x| c.quasi_units_at(x).len() > 1).count())
        .sum();
    // functors: each quasi-unital category to itself and a few fixed partners
    let qu: Vec<Arc<NuCat>> = all.iter().filter(|c| c.is_quasi_unital()).map(|c| Arc::new((*c).clone())).collect();
    let partners = if cfg.quick { 2 } else { 4 };
    let results: Vec<Result<(usize, usize)>> = (0..qu.len())
        .into_par_iter()
        .map(|i| {
            let (mut count, mut unequal) = (0, 0);
            for j in 0..=partners {
                let d = &qu[(i + j * 37) % qu.len()];
                for f in enumerate_functors(&qu[i], d, 1_000_000)? {
                    count += 1;
                    let p = functor_preservation(&f)?;
                    if p.preserves_qu != p.preserves_inv {
                        unequal += 1;
                    }
                }
            }
            Ok((count, unequal))
        })
        .collect();
    let (mut functors, mut unequal) = (0, 0);
    for r in results {
        let (c, u) = r?;
        functors += c;
        unequal += u;
    }
    let ok = qu_inv == 0 && qu_unique == 0 && unequal == 0 && functors > 0;
    Ok((
        ok,
        false,
        json!({
            "exhaustive_categories": small.len(),
            "sampled_categories": sampled.len(),
            "quasi_unital": qu.len(),
            "l_qu_inv_violations": qu_inv,
            "objects_with_two_quasi_units": qu_unique,
            "functors": functors,
            "preservation_mismatches": unequal,
            "corpus": digest(&all.iter().map(|c| c.to_json()).collect::<Vec<_>>()),
        }),
    ))
}

fn c7_rlp(cfg: &SuiteConfig) -> Result<Outcome> {
    let (small, sampled) = qu_corpus(cfg)?;
    let all: Vec<&NuCat> = small.iter().chain(&sampled).collect();
    let results: Vec<Result<(usize, usize, usize)>> = all
        .par_iter()
        .map(|c| {
            let (mut n, mut bad, mut yes) = (0, 0, 0);
            for m in candidate_markings(c, 6) {
                let w = MarkedSSet::new(c.nerve(3), m)?;
                let (a, b) = compare_qu(&w)?;
                n += 1;
                yes += usize::from(b);
                bad += usize::from(a != b);
            }
            Ok((n, bad, yes))
        })
        .collect();
    let (mut n, mut bad, mut yes) = (0, 0, 0);
    for r in results {
        let (a, b, c) = r?;
        n += a;
        bad += b;
        yes += c;
    }
    Ok((
        bad == 0 && n > 0,
        false,
        json!({"marked_nerves": n, "quasi_unital": yes, "disagreements": bad}),
    ))
}

fn c8_counit(cfg: &SuiteConfig) -> Result<Outcome> {
    let (ptop, ntop, mmax) = if cfg.quick { (3, 2, 4) } else { (4, 3, 5) };
    let posets: Vec<Vec<Vec<bool>>> = (0..=ptop).flat_map(natural_posets).collect();
    let results: Vec<Result<Vec<Value>>> = posets
        .par_iter()
        .map(|leq| {
            let c = Arc::new(poset_category(leq)?);
            let mut bad = Vec::new();
            for n in 0..=ntop {
                let report = verify_counit_gaunt(&c, n, mmax)?;
                let rk = rk_plus_of_category(&c, n, mmax, 50_000_000)?;
                let nerve = c.nerve(n.max(1));
                if !report.ok() || !rk.stabilized || !rk.bijects_with_level(&nerve) {
                    bad.push(json!({"poset": leq, "n": n, "counit_failures": report.failures.len(),
                                    "stabilized": rk.stabilized, "families": rk.families.len(),
                                    "level": nerve.level_len(n)}));
                }
            }
            Ok(bad)
        })
        .collect();
    let mut bad = Vec::new();
    for r in results {
        bad.extend(r?);
    }
    Ok((bad.is_empty(), false, json!({"posets": posets.len(), "n_max": ntop, "m_max": mmax, "failures": bad})))
}

fn c9_sections(cfg: &SuiteConfig) -> Result<Outcome> {
    let top = if cfg.quick { 4 } else { 5 };
    let mut bad = Vec::new();
    let mut surjections = 0;
    let mut t_checks = 0;
    for m in 0..=top {
        for n in 0..=m {
            for f in enumerate_maps(m, n, MapClass::Surjective) {
                surjections += 1;
                if !section_pair_graph(&f)?.connected {
                    bad.push(format!("graph of {f} disconnected"));
                }
                let (hmax, hmin) = extreme_sections(&f)?;
                for mask in 0u32..(1 << n) {
                    let spine_marking: BTreeSet<(usize, usize)> =
                        (0..n).filter(|t| mask >> t & 1 == 1).map(|t| (t, t + 1)).collect();
                    t_checks += 1;
                    let t = build_t(&hmax, &hmin, &f, &spine_marking)?;
                    let want = spine_with_m_f(&f, &spine_marking)?;
                    if t.labeled_form() != want.labeled_form() {
                        bad.push(format!("T(h_max, h_min) of {f} with {spine_marking:?}"));
                    }
                }
            }
        }
    }
    Ok((bad.is_empty(), false, json!({"surjections": surjections, "t_checks": t_checks, "failures": bad})))
}

fn c10_determinism(cfg: &SuiteConfig) -> Result<Outcome> {
    let ids: Vec<usize> = (1..=9).collect();
    let a = run_only(cfg, &ids)?.artifacts();
    let b = run_only(cfg, &ids)?.artifacts();
    Ok((
        a == b,
        false,
        json!({"bytes": a.len(), "digest_first": format!("{:016x}", fnv1a(a.as_bytes())),
               "digest_second": format!("{:016x}", fnv1a(b.as_bytes()))}),
    ))
}
