//! `probt`: check, evaluate, sample and transform probabilistic System T
//! programs. Results go to stdout as JSON, diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 unresolved mass above epsilon, 2 user error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use probt::dist::{tv_bounds, Dist};
use probt::eval::{self, Budget, Mode};
use probt::multistep::exact_eval_plus;
use probt::prob::{self, Prob};
use probt::syntax::{parse_term, print_term, typecheck, Term, TypeEnv};
use probt::transforms::Pass;

#[derive(Parser)]
#[command(name = "probt", version, about = "Interpreter and transformer for System T with probabilistic choice")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the type of a closed term.
    Check { file: PathBuf },
    /// Evaluate to a value distribution.
    Eval {
        file: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Lockstep)]
        mode: ModeArg,
        #[command(flatten)]
        args: ApplyArgs,
    },
    /// Monte-Carlo estimate of the value distribution.
    Sample {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[command(flatten)]
        args: ApplyArgs,
    },
    /// Run a source-to-source pass and write the result in surface syntax.
    Transform {
        file: PathBuf,
        #[arg(long)]
        pass: Pass,
        /// Output file (the term is included in the JSON when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Bound function for derandomizing programs that use rand, in
        /// surface syntax, e.g. '\x:Nat. 4'.
        #[arg(long)]
        h: Option<String>,
    },
    /// Lower bound on the average reduction length.
    Avlength {
        file: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        args: ApplyArgs,
    },
    /// Total-variation distance between two programs' distributions.
    Compare {
        file1: PathBuf,
        file2: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Lockstep)]
        mode: ModeArg,
        #[command(flatten)]
        args: ApplyArgs,
    },
}

#[derive(Args)]
struct BudgetArgs {
    /// Stop once the unresolved mass is at most this (p/q, integer or 2^-k).
    #[arg(long, default_value = "2^-20")]
    eps: String,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
    /// Fixed number of rand outcomes per expansion (default: from --eps).
    #[arg(long)]
    rand_width: Option<u32>,
}

#[derive(Args)]
struct ApplyArgs {
    /// Apply the program to this numeral first (repeatable), e.g. the
    /// precision of an approximant.
    #[arg(long = "arg", value_name = "N")]
    apply: Vec<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Lockstep,
    Worklist,
    ExactTree,
}

/// A user-facing failure: message for stderr plus exit code 2.
struct UserError(String);

impl<E: std::fmt::Display> From<E> for UserError {
    fn from(e: E) -> Self {
        UserError(e.to_string())
    }
}

type Res<T> = Result<T, UserError>;

fn load(path: &Path) -> Res<Term> {
    let src = fs::read_to_string(path).map_err(|e| UserError(format!("{}: {e}", path.display())))?;
    let t = parse_term(&src).map_err(|e| UserError(format!("{}:{e}", path.display())))?;
    if !t.is_closed() {
        let names: Vec<_> = t.free_names().into_iter().collect();
        return Err(UserError(format!("{}: unbound variables: {}", path.display(), names.join(", "))));
    }
    typecheck(&TypeEnv::new(), &t).map_err(|e| UserError(format!("{}: {e}", path.display())))?;
    Ok(t)
}

fn load_applied(path: &Path, args: &ApplyArgs) -> Res<Term> {
    let t = Term::apps(load(path)?, args.apply.iter().map(|&n| Term::num(n)));
    typecheck(&TypeEnv::new(), &t).map_err(|e| UserError(format!("{} applied to --arg: {e}", path.display())))?;
    Ok(t)
}

impl BudgetArgs {
    fn budget(&self) -> Res<Budget> {
        let b = Budget { max_steps: self.max_steps, epsilon: prob::parse(&self.eps)?, rand_width: self.rand_width };
        b.validate()?;
        Ok(b)
    }
}

struct Evaluated {
    dist: Dist,
    residual: Prob,
    steps: u64,
    avlength_lower: Prob,
}

fn evaluate(t: &Term, b: &Budget, mode: ModeArg) -> Res<Evaluated> {
    Ok(match mode {
        ModeArg::ExactTree => {
            let r = exact_eval_plus(t)?;
            Evaluated {
                dist: r.exact_dist,
                residual: prob::zero(),
                steps: r.max_depth,
                avlength_lower: r.expected_steps,
            }
        }
        ModeArg::Lockstep | ModeArg::Worklist => {
            let m = if matches!(mode, ModeArg::Lockstep) { Mode::Lockstep } else { Mode::Worklist };
            let r = eval::evaluate(t, b, m)?;
            Evaluated {
                dist: r.value_dist,
                residual: r.residual,
                steps: r.steps_taken,
                avlength_lower: r.avlength_lower,
            }
        }
    })
}

fn dist_json(d: &Dist) -> Value {
    serde_json::to_value(d.to_json()).expect("serializable")
}

/// JSON output plus whether the unresolved mass stayed within epsilon.
fn run(cmd: Cmd) -> Res<(Value, bool)> {
    match cmd {
        Cmd::Check { file } => {
            let t = load(&file)?;
            let ty = typecheck(&TypeEnv::new(), &t)?;
            Ok((json!({ "type": ty.to_string() }), true))
        }
        Cmd::Eval { file, budget, mode, args } => {
            let t = load_applied(&file, &args)?;
            let b = budget.budget()?;
            let r = evaluate(&t, &b, mode)?;
            let mut out = dist_json(&r.dist);
            let norm = r.dist.norm();
            out["success"] = json!({ "lower": prob::render(&norm), "upper": prob::render(&(&norm + &r.residual)) });
            out["avlength_lower"] = json!(prob::render(&r.avlength_lower));
            out["steps"] = json!(r.steps);
            Ok((out, r.residual <= b.epsilon))
        }
        Cmd::Sample { file, seed, trials, args } => {
            if trials == 0 {
                return Err(UserError("--trials must be at least 1".into()));
            }
            let t = load_applied(&file, &args)?;
            let d = eval::sample_many(&t, seed, trials)?;
            let mut out = dist_json(&d);
            out["seed"] = json!(seed);
            out["trials"] = json!(trials);
            // capped trajectories land in the residual
            let ok = *d.residual() == prob::zero();
            Ok((out, ok))
        }
        Cmd::Transform { file, pass, out, h } => {
            let t = load(&file)?;
            let h = h.map(|src| parse_term(&src).map_err(|e| UserError(format!("--h: {e}")))).transpose()?;
            let result = pass.apply(&t, h.as_ref())?;
            let ty = typecheck(&TypeEnv::new(), &result)?;
            let text = print_term(&result);
            let mut json = json!({ "pass": pass.name(), "type": ty.to_string(), "size": result.size() });
            match out {
                Some(path) => {
                    fs::write(&path, format!("{text}\n")).map_err(|e| UserError(format!("{}: {e}", path.display())))?;
                    json["out"] = json!(path.display().to_string());
                }
                None => json["term"] = json!(text),
            }
            Ok((json, true))
        }
        Cmd::Avlength { file, budget, args } => {
            let t = load_applied(&file, &args)?;
            let b = budget.budget()?;
            let r = eval::evaluate(&t, &b, Mode::Lockstep)?;
            let (lower, hint) = eval::av_length(&t, &b)?;
            let out = json!({
                "avlength_lower": prob::render(&lower),
                "approx": prob::to_f64(&lower),
                "diverging_hint": hint,
                "residual": prob::render(&r.residual),
                "steps": r.steps_taken,
            });
            // a divergence verdict is the answer here, not an exhaustion
            Ok((out, true))
        }
        Cmd::Compare { file1, file2, budget, mode, args } => {
            let b = budget.budget()?;
            let r1 = evaluate(&load_applied(&file1, &args)?, &b, mode)?;
            let r2 = evaluate(&load_applied(&file2, &args)?, &b, mode)?;
            let (lower, upper) = tv_bounds(&r1.dist, &r2.dist);
            let out = json!({
                "tv_distance": prob::render(&upper),
                "tv_lower": prob::render(&lower),
                "tv_upper": prob::render(&upper),
                "approx": prob::to_f64(&upper),
                "residuals": [prob::render(&r1.residual), prob::render(&r2.residual)],
            });
            Ok((out, r1.residual <= b.epsilon && r2.residual <= b.epsilon))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok((out, within)) => {
            // a closed pipe (e.g. `| head`) is not worth a panic
            let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&out).expect("serializable"));
            if within {
                ExitCode::SUCCESS
            } else {
                eprintln!("probt: unresolved mass exceeds epsilon; raise --max-steps or --eps");
                ExitCode::from(1)
            }
        }
        Err(UserError(msg)) => {
            eprintln!("probt: {msg}");
            ExitCode::from(2)
        }
    }
}
