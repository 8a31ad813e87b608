use std::collections::HashMap;
use std::io::Read as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use msset::decompose::{replay, shuffle_filtration, spread_decomposition, PushoutCertificate};
use msset::homology::homology;
use msset::kanext::{rk_plus_level, simplicial_nerve, f_natural, verify_counit_gaunt};
use msset::lifting::{has_rlp, qu_rlp_report};
use msset::marked::{self, MarkedJson, MarkedMap, MarkedSSet};
use msset::nucat::{corpus, is_quasi_unital_marked, sample_three_object, MarkingRule, NuCat, NuCatJson};
use msset::sset::{self, Map, SSet, DEFAULT_BUDGET};
use msset::suite::{run_only, SuiteConfig};
use msset::Error;

#[derive(Parser, Debug)]
#[command(name = "msset", version, about = "Marked semi-simplicial sets at finite scale")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Cap on enumeration nodes for exhaustive searches.
    #[arg(long, global = true, env = "MSSET_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Pretty,
    Dot,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a standard object.
    Build(BuildArgs),
    /// Tensor product of two marked objects.
    Tensor {
        left: PathBuf,
        right: PathBuf,
        /// Largest total dimension to build.
        #[arg(long, default_value_t = marked::DEFAULT_TENSOR_CAP)]
        cap: usize,
    },
    /// Produce or check anodyne certificates.
    #[command(subcommand)]
    Decompose(DecomposeCmd),
    /// Replay a certificate (file or `-`).
    Verify { file: PathBuf },
    /// Lifting properties.
    #[command(subcommand)]
    Lift(LiftCmd),
    /// Non-unital categories.
    #[command(subcommand)]
    Cat(CatCmd),
    /// Kan extension and counit checks.
    #[command(subcommand)]
    Kan(KanCmd),
    /// Integral homology profile.
    Homology { file: PathBuf },
    /// Run the acceptance suite.
    Suite {
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<usize>>,
        /// Write `report.json` and `artifacts.json` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[arg(value_enum)]
    kind: BuildKind,
    /// Dimension, then the horn index or the vertex list where needed.
    args: Vec<usize>,
    /// Stored depth for coskeleta.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Mark every edge.
    #[arg(long)]
    sharp: bool,
    /// Mark the edge between two vertices of the ambient simplex, as `a:b`.
    #[arg(long = "mark", value_parser = parse_pair)]
    marks: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BuildKind {
    Standard,
    Boundary,
    Horn,
    Spine,
    SubSimplex,
    Cosk0,
}

#[derive(Subcommand, Debug)]
enum DecomposeCmd {
    /// Horn from the union of two faces by spread simplices.
    Spread { n: usize, i: usize, j: usize },
    /// Prism over an admissible horn by shuffle simplices.
    Shuffle { m: usize, n: usize, l: usize },
    /// Replay a certificate (file or `-`).
    Verify { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum LiftCmd {
    /// Right lifting property of `--right` against `--left`.
    Check {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    /// Quasi-unitality of a marked object via the three generators.
    Qu { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum CatCmd {
    /// Validate a composition table and report invertibles and quasi-units.
    Check { file: PathBuf },
    /// Nerve through a given depth.
    Nerve {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = Marking::None)]
        marking: Marking,
    },
    /// All composition tables up to the given sizes, plus seeded samples.
    Corpus {
        #[arg(long, default_value_t = 2)]
        max_obj: usize,
        #[arg(long, default_value_t = 2)]
        max_hom: usize,
        /// Three-object samples to add.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Print every table, not only the summary.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Marking {
    None,
    Invertibles,
    QuasiUnits,
}

#[derive(Subcommand, Debug)]
enum KanCmd {
    /// Counit check on a gaunt category.
    Counit {
        #[arg(long)]
        cat: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        mmax: usize,
    },
    /// Truncated Kan extension level of a marked object or a category.
    Rk {
        #[arg(long, conflicts_with = "cat", required_unless_present = "cat")]
        object: Option<PathBuf>,
        #[arg(long)]
        cat: Option<PathBuf>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        mmax: usize,
    },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s}"))?;
    let p = |x: &str| x.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok((p(a)?, p(b)?))
}

/// What a command produced: a value and whether it counts as a pass.
struct Outcome {
    value: Value,
    ok: bool,
    dot: Option<String>,
}

impl Outcome {
    fn pass(value: Value) -> Self {
        Outcome { value, ok: true, dot: None }
    }
}

fn read_input(path: &PathBuf) -> Result<String, Error> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::Parse(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Error> {
    Ok(serde_json::from_str(&read_input(path)?)?)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn object_outcome(w: &MarkedSSet) -> Outcome {
    Outcome {
        value: to_value(w),
        ok: true,
        dot: Some(w.to_dot()),
    }
}

fn build(a: &BuildArgs) -> Result<Outcome, Error> {
    let need = |k: usize| -> Result<(), Error> {
        if a.args.len() < k {
            Err(Error::Rejected(format!("{:?} needs {k} numeric arguments", a.kind)))
        } else {
            Ok(())
        }
    };
    need(1)?;
    let n = a.args[0];
    let x: SSet = match a.kind {
        BuildKind::Standard => sset::standard(n),
        BuildKind::Boundary => sset::boundary(n),
        BuildKind::Horn => {
            need(2)?;
            sset::horn(n, a.args[1])?
        }
        BuildKind::Spine => sset::spine(n),
        BuildKind::SubSimplex => sset::sub_simplex(n, &a.args[1..])?,
        BuildKind::Cosk0 => sset::coskeleton0(n, a.depth),
    };
    let w = if a.sharp {
        marked::sharp(x)
    } else {
        MarkedSSet::with_marked_pairs(x, &a.marks)?
    };
    Ok(object_outcome(&w))
}

fn certificate_outcome(c: &PushoutCertificate) -> Outcome {
    Outcome::pass(to_value(c))
}

fn verify_file(file: &PathBuf) -> Result<Outcome, Error> {
    let cert: PushoutCertificate = read_json(file)?;
    let (report, _) = replay(&cert);
    Ok(Outcome {
        ok: report.ok(),
        value: to_value(&report),
        dot: None,
    })
}

/// `{"source": obj, "target": obj, "map": {"src id": tgt id}}` with wire ids.
fn read_map(path: &PathBuf) -> Result<MarkedMap, Error> {
    let v: Value = read_json(path)?;
    let part = |key: &str| -> Result<(MarkedSSet, HashMap<u64, (usize, usize)>), Error> {
        let j: MarkedJson = serde_json::from_value(v.get(key).cloned().ok_or_else(|| Error::Parse(format!("map has no {key}")))?)?;
        let (_, ids) = SSet::from_json(&j.sset)?;
        let obj: MarkedSSet = serde_json::from_value(v[key].clone())?;
        Ok((obj, ids))
    };
    let (src, src_ids) = part("source")?;
    let (tgt, tgt_ids) = part("target")?;
    let pairs: HashMap<String, u64> = serde_json::from_value(v.get("map").cloned().unwrap_or(json!({})))?;
    let mut level_fns: Vec<Vec<usize>> = src.underlying().level_sizes().into_iter().map(|n| vec![usize::MAX; n]).collect();
    for (s, t) in pairs {
        let s: u64 = s.parse().map_err(|_| Error::Parse(format!("map key {s} is not an id")))?;
        let (&(k, i), &(tk, ti)) = match (src_ids.get(&s), tgt_ids.get(&t)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Parse(format!("map entry {s} -> {t} names unknown ids"))),
        };
        if k != tk {
            return Err(Error::Parse(format!("map entry {s} -> {t} changes level")));
        }
        level_fns[k][i] = ti;
    }
    if level_fns.iter().flatten().any(|&x| x == usize::MAX) {
        return Err(Error::Parse("map does not cover every source simplex".into()));
    }
    let m = Map {
        source: Arc::new(src),
        target: Arc::new(tgt),
        level_fns,
    };
    m.check_marked().map_err(Error::Rejected)?;
    Ok(m)
}

fn read_cat(path: &PathBuf) -> Result<(NuCat, Vec<Value>), Error> {
    let j: NuCatJson = read_json(path)?;
    let c = NuCat::from_json_unchecked(&j)?;
    let v = c.violations().iter().map(to_value).collect();
    Ok((c, v))
}

fn checked_cat(path: &PathBuf) -> Result<NuCat, Error> {
    let (c, v) = read_cat(path)?;
    if v.is_empty() {
        Ok(c)
    } else {
        Err(Error::Rejected(format!("invalid composition table: {}", Value::Array(v))))
    }
}

fn names(c: &NuCat, ids: impl IntoIterator<Item = usize>) -> Vec<String> {
    ids.into_iter().map(|i| c.morphism(i).name.clone()).collect()
}

fn cat(cmd: &CatCmd) -> Result<Outcome, Error> {
    match cmd {
        CatCmd::Check { file } => {
            let (c, violations) = read_cat(file)?;
            if !violations.is_empty() {
                return Ok(Outcome {
                    ok: false,
                    value: json!({"valid": false, "violations": violations}),
                    dot: None,
                });
            }
            let qu_inv = c.check_l_qu_inv();
            Ok(Outcome {
                ok: qu_inv.is_empty(),
                value: json!({
                    "valid": true,
                    "invertibles": names(&c, c.invertibles()),
                    "quasi_units": names(&c, c.quasi_units()),
                    "quasi_unital": c.is_quasi_unital(),
                    "gaunt": c.is_gaunt(),
                    "l_qu_inv_violations": qu_inv,
                }),
                dot: None,
            })
        }
        CatCmd::Nerve { file, depth, marking } => {
            let c = checked_cat(file)?;
            let rule = match marking {
                Marking::None => MarkingRule::Custom(Default::default()),
                Marking::Invertibles => MarkingRule::Invertibles,
                Marking::QuasiUnits => MarkingRule::QuasiUnits,
            };
            Ok(object_outcome(&c.marked_nerve(&rule, *depth)?))
        }
        CatCmd::Corpus { max_obj, max_hom, samples, seed, list } => {
            let mut all = corpus(*max_obj, *max_hom, u64::MAX)?;
            let exhaustive = all.len();
            if *samples > 0 {
                all.extend(sample_three_object(*seed, *samples, *max_hom)?);
            }
            let violations: usize = all.iter().map(|c| c.check_l_qu_inv().len()).sum();
            let mut value = json!({
                "exhaustive": exhaustive,
                "sampled": all.len() - exhaustive,
                "quasi_unital": all.iter().filter(|c| c.is_quasi_unital()).count(),
                "l_qu_inv_violations": violations,
            });
            if *list {
                value["categories"] = Value::Array(all.iter().map(|c| to_value(&c.to_json())).collect());
            }
            Ok(Outcome {
                ok: violations == 0,
                value,
                dot: None,
            })
        }
    }
}

fn kan(cmd: &KanCmd, budget: u64) -> Result<Outcome, Error> {
    match cmd {
        KanCmd::Counit { cat, n, mmax } => {
            let c = checked_cat(cat)?;
            let r = verify_counit_gaunt(&c, *n, *mmax)?;
            Ok(Outcome {
                ok: r.ok(),
                value: to_value(&r),
                dot: None,
            })
        }
        KanCmd::Rk { object, cat, n, mmax } => {
            let x = match (object, cat) {
                (Some(o), _) => read_json::<MarkedSSet>(o)?,
                (None, Some(c)) => {
                    let c = checked_cat(c)?;
                    f_natural(&simplicial_nerve(&c, (*mmax).max(3))?)?
                }
                (None, None) => return Err(Error::Rejected("give --object or --cat".into())),
            };
            let r = rk_plus_level(&x, *n, *mmax, budget)?;
            Ok(Outcome::pass(to_value(&r)))
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let budget = cli.budget;
    match &cli.command {
        Command::Build(a) => build(a),
        Command::Tensor { left, right, cap } => {
            let (a, b): (MarkedSSet, MarkedSSet) = (read_json(left)?, read_json(right)?);
            let t = marked::tensor_capped(&a, &b, *cap)?;
            Ok(object_outcome(&t.object))
        }
        Command::Decompose(DecomposeCmd::Spread { n, i, j }) => Ok(certificate_outcome(&spread_decomposition(*n, *i, *j)?)),
        Command::Decompose(DecomposeCmd::Shuffle { m, n, l }) => Ok(certificate_outcome(&shuffle_filtration(*m, *n, *l)?)),
        Command::Decompose(DecomposeCmd::Verify { file }) | Command::Verify { file } => verify_file(file),
        Command::Lift(LiftCmd::Check { left, right }) => {
            let (g, p) = (read_map(left)?, read_map(right)?);
            let r = has_rlp(&p, &g, budget)?;
            Ok(Outcome {
                ok: r.holds(),
                value: to_value(&r),
                dot: None,
            })
        }
        Command::Lift(LiftCmd::Qu { file }) => {
            let w = Arc::new(read_json::<MarkedSSet>(file)?);
            let r = qu_rlp_report(&w, budget)?;
            let direct = is_quasi_unital_marked(&w)?;
            Ok(Outcome {
                ok: r.holds() == direct,
                value: json!({"via_rlp": r.holds(), "direct": direct, "generators": r}),
                dot: None,
            })
        }
        Command::Cat(c) => cat(c),
        Command::Kan(k) => kan(k, budget),
        Command::Homology { file } => {
            let x: MarkedSSet = read_json(file)?;
            Ok(Outcome::pass(to_value(&homology(x.underlying())?)))
        }
        Command::Suite { quick, seed, only, out } => {
            let cfg = SuiteConfig { quick: *quick, seed: *seed };
            let ids = only.clone().unwrap_or_else(|| (1..=10).collect());
            if ids.iter().any(|&i| !(1..=10).contains(&i)) {
                return Err(Error::Rejected("criteria are numbered 1 to 10".into()));
            }
            let report = run_only(&cfg, &ids)?;
            for c in &report.criteria {
                eprintln!("{}", c.line());
            }
            if let Some(dir) = out {
                let write = |name: &str, body: String| {
                    std::fs::create_dir_all(dir)
                        .and_then(|_| std::fs::write(dir.join(name), body))
                        .map_err(|e| Error::Parse(format!("{}: {e}", dir.display())))
                };
                write("artifacts.json", report.artifacts())?;
                write("report.json", serde_json::to_string_pretty(&report)?)?;
            }
            Ok(Outcome {
                ok: report.ok(),
                value: to_value(&report),
                dot: None,
            })
        }
    }
}

fn error_value(e: &Error) -> Value {
    match e {
        Error::Budget { stage, limit } => json!({"error": "budget", "stage": stage, "limit": limit, "message": e.to_string()}),
        Error::LevelUnavailable { needed, available } => {
            json!({"error": "level_unavailable", "needed": needed, "available": available, "message": e.to_string()})
        }
        Error::Rejected(_) => json!({"error": "rejected", "message": e.to_string()}),
        Error::Parse(_) => json!({"error": "parse", "message": e.to_string()}),
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn print(value: &Value, format: Format) {
    match format {
        Format::Pretty => emit(&format!("{}\n", serde_json::to_string_pretty(value).expect("json"))),
        _ => emit(&format!("{value}\n")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            emit(&format!("{}\n", json!({"error": "usage", "message": e.to_string().trim()})));
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(out) => {
            match (cli.format, out.dot) {
                (Format::Dot, Some(d)) => emit(&d),
                (Format::Dot, None) => {
                    emit(&format!("{}\n", json!({"error": "usage", "message": "this command has no dot output"})));
                    return ExitCode::from(2);
                }
                (f, _) => print(&out.value, f),
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            print(&error_value(&e), cli.format);
            ExitCode::from(2)
        }
    }
}
