//! `mcop`: JSON front end for the mcop library.
//!
//! Exit codes: 0 when every check passes, 1 on a verification failure, 2 on a
//! usage error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mcop::acceptance::{self, Profile};
use mcop::algebra::{self, Algebra, Equality};
use mcop::cox::{self, Cox};
use mcop::degeneration::Degeneration;
use mcop::geometry::{rat_str, Rat, DIM_CAP, NODE_BUDGET};
use mcop::marked_poset::{basic_pi1, basic_pi2, gt_type_a, gt_type_c, MarkedPoset};
use mcop::mco::{self, Chart, Transfer};
use mcop::polyptych::Polyptych;
use mcop::semialgebra::Comparator;
use mcop::{Code, Error};

#[derive(Parser)]
#[command(name = "mcop", version, about = "Marked chain-order polytopes and their polyptych lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the marked-poset invariants.
    Validate(PosetArgs),
    /// Level-by-level classification of the double levels.
    Classify(PosetArgs),
    /// H-representation, lattice points or count of a dilated chart polytope.
    Polytope {
        #[command(flatten)]
        poset: PosetArgs,
        #[arg(long, default_value = "")]
        chart: String,
        #[arg(long, default_value_t = 1)]
        dilate: i64,
        #[arg(long, value_enum, default_value_t = PolytopeEmit::Count)]
        emit: PolytopeEmit,
        /// Use the translated polytope (shifted by the transfer of u).
        #[arg(long)]
        hat: bool,
    },
    /// Apply a transfer map, or verify the lattice-point bijection onto every chart.
    Transfer {
        #[command(flatten)]
        poset: PosetArgs,
        #[arg(long, default_value = "")]
        chart: String,
        #[arg(long, default_value_t = 1)]
        dilate: i64,
        /// Point in the order polytope to transfer; omit to run the bijection check.
        #[arg(long, allow_hyphen_values = true)]
        vec: Option<String>,
    },
    /// Apply the mutation between two charts to a rational vector.
    Mutate {
        #[command(flatten)]
        poset: PosetArgs,
        #[arg(long, default_value = "")]
        from: String,
        #[arg(long, default_value = "")]
        to: String,
        #[arg(long, allow_hyphen_values = true)]
        vec: String,
    },
    /// Compare graded-piece dimensions with lattice-point counts of every chart.
    Hilbert {
        #[command(flatten)]
        poset: PosetArgs,
        #[arg(long, default_value_t = 2)]
        kmax: i64,
        /// Largest degree for the degree-one generation check.
        #[arg(long, default_value_t = 2)]
        gen_max: i64,
        #[arg(long, value_enum, default_value_t = TableEmit::Table)]
        emit: TableEmit,
    },
    /// Strict dual pairing on seeded pairs.
    Dualcheck {
        #[command(flatten)]
        poset: PosetArgs,
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// Multiplicativity of the valuation on seeded sparse pairs.
    Valcheck {
        #[command(flatten)]
        poset: PosetArgs,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = EqMode::Exact)]
        mode: EqMode,
        /// Sampling radius in sampled mode.
        #[arg(long, default_value_t = 4)]
        radius: i64,
    },
    /// Valuation value sets against chart lattice points.
    Nobody {
        #[command(flatten)]
        poset: PosetArgs,
        #[arg(long, default_value = "")]
        chart: String,
        #[arg(long, default_value_t = 2)]
        kmax: i64,
    },
    /// Cox ring counts, semigroup generators, or the elimination presentation.
    Cox {
        #[command(flatten)]
        poset: PosetArgs,
        #[arg(long, value_enum, default_value_t = CoxEmit::Counts)]
        emit: CoxEmit,
    },
    /// Run the acceptance suite.
    Acceptance {
        #[arg(long, value_enum, default_value_t = ProfileArg::Quick)]
        profile: ProfileArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = NODE_BUDGET)]
        budget: u64,
        /// Comma-separated criterion ids.
        #[arg(long)]
        only: Option<String>,
    },
}

#[derive(Args, Clone)]
struct PosetArgs {
    /// Poset JSON file.
    #[arg(long, conflicts_with = "family")]
    poset: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated marking for the builder families.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Node budget for lattice-point enumeration.
    #[arg(long, default_value_t = NODE_BUDGET)]
    budget: u64,
    /// Refuse posets with more coordinates than this.
    #[arg(long, default_value_t = DIM_CAP)]
    dim_cap: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    #[value(name = "gtA")]
    GtA,
    #[value(name = "gtC")]
    GtC,
    #[value(name = "pi1")]
    Pi1,
    #[value(name = "pi2")]
    Pi2,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolytopeEmit {
    Hrep,
    Points,
    Count,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableEmit {
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoxEmit {
    Counts,
    Generators,
    Presentation,
}

#[derive(Clone, Copy, ValueEnum)]
enum EqMode {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Quick,
    Full,
}

enum Fail {
    /// The caller's fault; exits with 2.
    Usage(String),
    /// A check or construction failed; exits with 1.
    Check(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e.code {
            Code::BadInput | Code::Unsupported => Fail::Usage(e.to_string()),
            _ => Fail::Check(e),
        }
    }
}

struct Outcome {
    pass: bool,
    result: Value,
}

fn parse_ints(s: &str, what: &str) -> Result<Vec<i64>, Fail> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().map_err(|_| Fail::Usage(format!("{what}: {t:?} is not an integer"))))
        .collect()
}

fn parse_rats(s: &str) -> Result<Vec<Rat>, Fail> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<Rat>().map_err(|_| Fail::Usage(format!("vec: {t:?} is not a rational number"))))
        .collect()
}

fn load_poset(a: &PosetArgs) -> Result<MarkedPoset, Fail> {
    let poset = match (&a.poset, a.family) {
        (Some(path), None) => {
            if a.lambda.is_some() || a.n.is_some() {
                return Err(Fail::Usage("--n and --lambda apply to --family only".into()));
            }
            let text = std::fs::read_to_string(path).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?;
            MarkedPoset::from_json(&v)?
        }
        (None, Some(f)) => {
            let n = a.n.ok_or_else(|| Fail::Usage("--family needs --n".into()))?;
            if n == 0 {
                return Err(Fail::Usage("--n must be positive".into()));
            }
            let lambda = a.lambda.as_deref().map(|s| parse_ints(s, "lambda")).transpose()?;
            match f {
                FamilyArg::GtA => {
                    let l = lambda.unwrap_or_else(|| (0..=n as i64).map(|i| 2 * i).collect());
                    gt_type_a(n, &l)?
                }
                FamilyArg::GtC => {
                    let l = lambda.unwrap_or_else(|| (1..=n as i64).map(|i| 2 * i).collect());
                    gt_type_c(n, &l)?
                }
                FamilyArg::Pi1 => {
                    if lambda.is_some() {
                        return Err(Fail::Usage("pi1 has a fixed marking".into()));
                    }
                    basic_pi1(n)?
                }
                FamilyArg::Pi2 => match lambda.as_deref() {
                    None => basic_pi2(n, 1)?,
                    Some([l]) => basic_pi2(n, *l)?,
                    Some(_) => return Err(Fail::Usage("pi2 takes a single marking value".into())),
                },
            }
        }
        _ => return Err(Fail::Usage("give exactly one of --poset or --family".into())),
    };
    if poset.dim() > a.dim_cap {
        return Err(Fail::Usage(format!("{} coordinates exceed --dim-cap {}", poset.dim(), a.dim_cap)));
    }
    Ok(poset)
}

fn chart(poset: &MarkedPoset, s: &str) -> Result<Chart, Fail> {
    Ok(Chart::parse(poset, s)?)
}

fn points_json(pts: &[Vec<i64>]) -> Value {
    json!(pts)
}

fn done(pass: bool, result: impl serde::Serialize) -> Outcome {
    Outcome { pass, result: serde_json::to_value(result).expect("reports serialize") }
}

fn run(cmd: &Command) -> Result<(Value, Outcome), Fail> {
    let (echo, outcome) = match cmd {
        Command::Validate(a) => {
            let poset = load_poset(a)?;
            let v = poset.validate();
            (json!({ "dim": poset.dim(), "family": poset.family() }), done(v.pass, v))
        }
        Command::Classify(a) => {
            let poset = load_poset(a)?;
            let c = poset.classify_spade()?;
            (json!({ "family": poset.family() }), done(true, c.to_json(&poset)))
        }
        Command::Polytope { poset: a, chart: c, dilate, emit, hat } => {
            let poset = load_poset(a)?;
            let ch = chart(&poset, c)?;
            if *dilate < 0 {
                return Err(Fail::Usage("--dilate must be non-negative".into()));
            }
            let echo = json!({ "chart": ch.names(&poset), "dilate": dilate, "hat": hat });
            let u = poset.choose_u(true)?.coords(&poset);
            let result = match emit {
                PolytopeEmit::Hrep => {
                    let h = if *hat { mco::hat_delta(&poset, &u, ch) } else { mco::build_mco(&poset, ch) };
                    h.dilate(*dilate).to_json()
                }
                PolytopeEmit::Points | PolytopeEmit::Count => {
                    let pts = if *hat {
                        mco::hat_points(&poset, &u, ch, *dilate, a.budget)?
                    } else {
                        mco::mco_points(&poset, ch, *dilate, a.budget)?
                    };
                    if matches!(emit, PolytopeEmit::Count) {
                        json!({ "count": pts.len() })
                    } else {
                        json!({ "count": pts.len(), "points": points_json(&pts) })
                    }
                }
            };
            (echo, done(true, result))
        }
        Command::Transfer { poset: a, chart: c, dilate, vec } => {
            let poset = load_poset(a)?;
            match vec {
                Some(v) => {
                    let ch = chart(&poset, c)?;
                    let x = parse_ints(v, "vec")?;
                    if x.len() != poset.dim() {
                        return Err(Fail::Usage(format!("vec has {} entries, expected {}", x.len(), poset.dim())));
                    }
                    let tr = Transfer::new(&poset);
                    let y = tr.transfer(ch, &x);
                    let back = tr.transfer_inverse(ch, &y);
                    let inside = mco::build_mco(&poset, Chart::EMPTY).contains_int(&x);
                    let lands = mco::build_mco(&poset, ch).contains_int(&y);
                    let echo = json!({ "chart": ch.names(&poset), "vec": x });
                    let result = json!({ "image": y, "inverse_recovers": back == x, "source_inside": inside, "image_inside": lands });
                    (echo, done(back == x && inside == lands, result))
                }
                None => {
                    let u = poset.choose_u(true)?.coords(&poset);
                    let rep = mco::verify_transfer_bijection(&poset, &u, *dilate, a.budget)?;
                    (json!({ "dilate": dilate, "u": u }), done(rep.pass, rep))
                }
            }
        }
        Command::Mutate { poset: a, from, to, vec } => {
            let poset = load_poset(a)?;
            let (c1, c2) = (chart(&poset, from)?, chart(&poset, to)?);
            let x = parse_rats(vec)?;
            if x.len() != poset.dim() {
                return Err(Fail::Usage(format!("vec has {} entries, expected {}", x.len(), poset.dim())));
            }
            let tr = Transfer::new(&poset);
            let y = tr.mu_between(c1, c2, &x);
            let back = tr.mu_between(c2, c1, &y);
            let strs = |v: &[Rat]| v.iter().map(rat_str).collect::<Vec<_>>();
            let echo = json!({ "from": c1.names(&poset), "to": c2.names(&poset), "vec": strs(&x) });
            (echo, done(back == x, json!({ "image": strs(&y), "inverse_recovers": back == x })))
        }
        Command::Hilbert { poset: a, kmax, gen_max, emit: _ } => {
            let poset = load_poset(a)?;
            let alg = Algebra::new(&poset)?;
            let deg = Degeneration::new(alg, a.budget)?;
            let rep = deg.hilbert_vs_ehrhart(*kmax, *gen_max)?;
            (json!({ "kmax": kmax, "gen_max": gen_max }), done(rep.pass, rep))
        }
        Command::Dualcheck { poset: a, samples } => {
            let poset = load_poset(a)?;
            let m = Polyptych::new(&poset);
            let rep = m.verify_strict_dual(a.seed, *samples)?;
            (json!({ "seed": a.seed, "samples": samples }), done(rep.pass, rep))
        }
        Command::Valcheck { poset: a, samples, mode, radius } => {
            let poset = load_poset(a)?;
            let alg = Algebra::new(&poset)?;
            let m = Polyptych::new(&poset);
            let cmp;
            let eq = match mode {
                EqMode::Exact => {
                    cmp = Comparator::new(&m)?;
                    Equality::Exact(&cmp)
                }
                EqMode::Sampled => Equality::Sampled(&m, *radius),
            };
            let rep = algebra::verify_valuation(&alg, &m, &eq, a.seed, *samples)?;
            let ids = algebra::epsilon_identities(&alg, &m, &eq)?;
            let pass = rep.pass && ids.iter().all(|e| e.pass);
            let echo = json!({ "seed": a.seed, "samples": samples, "mode": eq.name() });
            (echo, done(pass, json!({ "valuation": rep, "epsilon_identities": ids })))
        }
        Command::Nobody { poset: a, chart: c, kmax } => {
            let poset = load_poset(a)?;
            let ch = chart(&poset, c)?;
            let alg = Algebra::new(&poset)?;
            let deg = Degeneration::new(alg, a.budget)?;
            let rep = deg.no_body_sample(ch, *kmax)?;
            (json!({ "chart": ch.names(&poset), "kmax": kmax }), done(rep.pass, rep))
        }
        Command::Cox { poset: a, emit } => {
            let poset = load_poset(a)?;
            match emit {
                CoxEmit::Counts => {
                    let c = cox::cox_counts(&poset)?;
                    let expected = cox::expected_variables(poset.family());
                    let pass = expected.is_none_or(|e| e == c.variables);
                    (json!({ "emit": "counts" }), done(pass, json!({ "counts": c, "expected_variables": expected })))
                }
                CoxEmit::Generators => {
                    let m = Polyptych::new(&poset);
                    let cx = Cox::new(&m)?;
                    let k = m.dual()?.hat_circ.len();
                    let mut reps = Vec::new();
                    for s in cox::sign_vectors(k) {
                        reps.push(cx.semigroup_generators(&s)?);
                    }
                    let pass = reps.iter().all(|r| r.pass);
                    (json!({ "emit": "generators" }), done(pass, reps))
                }
                CoxEmit::Presentation => {
                    let m = Polyptych::new(&poset);
                    let cx = Cox::new(&m)?;
                    let pres = cx.presentation()?;
                    let eta = cx.eta_unit_check()?;
                    let pass = pres.pass && eta.pass;
                    (json!({ "emit": "presentation" }), done(pass, json!({ "presentation": pres, "eta": eta })))
                }
            }
        }
        Command::Acceptance { profile, seed, budget, only } => {
            let profile = match profile {
                ProfileArg::Quick => Profile::Quick,
                ProfileArg::Full => Profile::Full,
            };
            let cfg = acceptance::Config { seed: *seed, profile, budget: *budget };
            let report = match only {
                None => acceptance::run(&cfg),
                Some(s) => {
                    let ids: Vec<u32> = parse_ints(s, "only")?
                        .into_iter()
                        .map(|i| u32::try_from(i).ok().filter(|i| (1..=14).contains(i)))
                        .collect::<Option<_>>()
                        .ok_or_else(|| Fail::Usage("--only takes criterion ids 1 to 14".into()))?;
                    acceptance::run_only(&cfg, &ids)
                }
            };
            (Value::Null, done(report.pass, report))
        }
    };
    Ok((echo, outcome))
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Validate(_) => "validate",
        Command::Classify(_) => "classify",
        Command::Polytope { .. } => "polytope",
        Command::Transfer { .. } => "transfer",
        Command::Mutate { .. } => "mutate",
        Command::Hilbert { .. } => "hilbert",
        Command::Dualcheck { .. } => "dualcheck",
        Command::Valcheck { .. } => "valcheck",
        Command::Nobody { .. } => "nobody",
        Command::Cox { .. } => "cox",
        Command::Acceptance { .. } => "acceptance",
    }
}

fn repro() -> String {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let quoted: Vec<String> = args
        .iter()
        .map(|a| if a.is_empty() || a.contains([' ', '{', '}']) { format!("'{a}'") } else { a.clone() })
        .collect();
    format!("mcop {}", quoted.join(" "))
}

/// Writes the report; a closed pipe downstream is not an error.
fn emit(v: &Value) {
    let mut out = std::io::stdout().lock();
    if serde_json::to_writer_pretty(&mut out, v).is_ok() {
        let _ = writeln!(out);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    let mut report = json!({
        "tool": "mcop",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
    });
    let pass = match run(&cli.command) {
        Ok((_, Outcome { pass, result })) if name == "acceptance" => {
            // The suite report is self-describing and carries its own repro lines.
            emit(&result);
            return ExitCode::from(if pass { 0 } else { 1 });
        }
        Ok((echo, Outcome { pass, result })) => {
            report["config"] = echo;
            report["pass"] = json!(pass);
            report["result"] = result;
            pass
        }
        Err(Fail::Usage(msg)) => {
            eprintln!("mcop {name}: {msg}");
            return ExitCode::from(2);
        }
        Err(Fail::Check(err)) => {
            eprintln!("mcop {name}: {err}");
            report["pass"] = json!(false);
            report["error"] = json!(err);
            false
        }
    };
    if !pass {
        report["repro"] = json!(repro());
    }
    emit(&report);
    ExitCode::from(if pass { 0 } else { 1 })
}
