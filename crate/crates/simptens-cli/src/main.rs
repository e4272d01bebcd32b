//! Command-line front end: validation, classification, the construction
//! pipelines, verification, and the acceptance suite.
//!
//! Exit codes: 0 = success / verified, 1 = a verification or semantic check
//! failed, 2 = the input could not be read or is structurally invalid.
//!
//! Action files do not embed their complex; commands that need one accept
//! either a bundle file `{"complex": …, "action": …}` or a bare action file
//! plus `--complex`.

use clap::{Args, Parser, Subcommand};
use simptens::complex::{SimplexSet, Wsc};
use simptens::construct::{
    change_complex_cayley, change_complex_constant, change_group, from_power,
    invariantize_blending, invariantize_free, invariantize_strong_blending, to_power,
};
use simptens::decomp::{contract, from_elementary, verify, Decomposition};
use simptens::formats::{
    from_json, to_json, ActionDto, DecompositionDto, GroupDto, MatrixDecompositionDto,
    PsdFamilyDto, ReportDto, TensorDto, WscDto,
};
use simptens::group::{is_blending, is_free, is_strongly_blending, free_refinement, Action, Group};
use simptens::positivity::{
    evaluate_psd_decomp, nn_to_sep, purification_to_psd, purify_separable, sqrt_purification,
    SqrtRoute,
};
use simptens::suite::run_suite;
use simptens::tensor::basis_expansion;
use simptens::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "simptens", version, about = "Tensor decompositions on weighted simplicial complexes")]
struct Cli {
    /// Comparison tolerance for verifications and semantic checks.
    #[arg(long, global = true, default_value_t = simptens::DEFAULT_TOL)]
    tol: f64,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Contraction budget in scalar multiply-adds.
    #[arg(long, global = true, default_value_t = simptens::DEFAULT_BUDGET)]
    budget: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the complex axioms of a complex file.
    Validate { complex: PathBuf },
    /// Check that an action file is a valid group action on its complex.
    ValidateAction {
        action: PathBuf,
        #[command(flatten)]
        ctx: ComplexContext,
    },
    /// Report the free / blending / strongly-blending classification.
    Classify {
        action: PathBuf,
        #[command(flatten)]
        ctx: ComplexContext,
    },
    /// Scale facet weights by the group order so the action becomes free.
    RefineFree {
        action: PathBuf,
        #[command(flatten)]
        ctx: ComplexContext,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Expand a tensor into a decomposition seeded from its nonzero entries.
    Seed {
        tensor: PathBuf,
        #[arg(long)]
        complex: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Turn a plain decomposition of an invariant tensor into a symmetric one.
    Invariantize {
        decomposition: PathBuf,
        #[arg(long, value_parser = ["free", "blending", "strong"])]
        mode: String,
        /// Action file (bundle or bare) describing the symmetry to impose.
        #[arg(long)]
        action: PathBuf,
        #[arg(long)]
        complex: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Move a subgroup-symmetric decomposition to the whole group.
    ChangeGroup {
        decomposition: PathBuf,
        /// Full-group action file (bundle or bare).
        #[arg(long)]
        action: PathBuf,
        #[arg(long)]
        complex: Option<PathBuf>,
        /// Comma-separated subgroup element ids, e.g. "0,2,4".
        #[arg(long)]
        subgroup: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Move a plain decomposition to another complex.
    ChangeComplex {
        decomposition: PathBuf,
        /// Target complex file (required for constant, optional for power:m,
        /// ignored for cayley:S where the target is built from S).
        #[arg(long)]
        target: Option<PathBuf>,
        /// One of: constant, power:m, cayley:S (S = comma-separated target
        /// generator ids).
        #[arg(long)]
        mode: String,
        /// Group file for cayley mode.
        #[arg(long)]
        group: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Purify a separable matrix decomposition.
    Purify {
        separable: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Decompose the psd square root of an invariant operator tensor.
    SqrtPurify {
        sigma: PathBuf,
        action: PathBuf,
        #[arg(long)]
        complex: Option<PathBuf>,
        /// free or blending; default picks by classifying the action.
        #[arg(long)]
        route: Option<String>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Nonnegative-decomposition conversions and psd evaluation.
    #[command(subcommand)]
    Nn(NnCmd),
    /// Contract a decomposition and compare against a tensor file.
    Verify {
        decomposition: PathBuf,
        #[arg(long)]
        against: PathBuf,
    },
    /// Run the acceptance matrix and optionally write the report.
    Suite {
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum NnCmd {
    /// Convert a nonnegative decomposition to separable or psd form.
    Convert {
        decomposition: PathBuf,
        #[arg(long, value_parser = ["sep", "psd"])]
        to: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Evaluate a psd family back to the tensor it represents.
    Evaluate {
        family: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ComplexContext {
    /// Complex file for a bare action file (bundles carry their own).
    #[arg(long)]
    complex: Option<PathBuf>,
}

#[derive(serde::Serialize)]
struct Bundle {
    complex: WscDto,
    action: ActionDto,
}

#[derive(serde::Serialize)]
struct Classification {
    free: bool,
    blending: bool,
    strongly_blending: bool,
}

/// An error carrying the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }

    fn unverified(message: impl Into<String>) -> Failure {
        Failure { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::NotFree { .. }
            | Error::NotBlending
            | Error::NotInvariant { .. }
            | Error::NotSubgroup(_)
            | Error::NotNormal
            | Error::NotPsd { .. }
            | Error::SearchFailed { .. } => 1,
            Error::InvalidComplex(_)
            | Error::InvalidGroup(_)
            | Error::InvalidAction(_)
            | Error::InvalidDecomposition(_)
            | Error::DimMismatch(_)
            | Error::BudgetExceeded { .. }
            | Error::Parse(_)
            | Error::Unsupported(_) => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))
}

fn read_dto<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    from_json(&read_text(path)?)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text)
        .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display())))
}

fn write_dto<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_text(path, &format!("{}\n", to_json(value)))
}

/// Loads an action from either a bundle file `{"complex": …, "action": …}`
/// or a bare action file paired with `--complex`.
fn load_action(action_path: &Path, complex_path: Option<&PathBuf>) -> CliResult<Action> {
    let text = read_text(action_path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::invalid(format!("{}: {e}", action_path.display())))?;
    let bad = |e: serde_json::Error| Failure::invalid(format!("{}: {e}", action_path.display()));
    if value.get("complex").is_some() {
        let complex: WscDto =
            serde_json::from_value(value["complex"].clone()).map_err(bad)?;
        let action: ActionDto = serde_json::from_value(
            value
                .get("action")
                .cloned()
                .ok_or_else(|| Failure::invalid("bundle file lacks an \"action\" field"))?,
        )
        .map_err(bad)?;
        return Ok(action.to_action(complex.to_wsc()?)?);
    }
    let action: ActionDto = serde_json::from_value(value).map_err(bad)?;
    let complex_path = complex_path.ok_or_else(|| {
        Failure::invalid("this action file has no embedded complex; pass --complex")
    })?;
    let wsc = read_dto::<WscDto>(complex_path)?.to_wsc()?;
    Ok(action.to_action(wsc)?)
}

fn action_bundle(a: &Action) -> Bundle {
    Bundle { complex: WscDto::from_wsc(&a.complex), action: ActionDto::from_action(a) }
}

fn parse_ids(text: &str, what: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Failure::invalid(format!("bad {what} element {part:?}")))
        })
        .collect()
}

/// Reconstructs a generating set from a Cayley complex: each pair {identity,
/// a} of weight two contributes a and a⁻¹, each pair of weight one the
/// smaller of the two.
fn infer_generators(grp: &Group, complex: &Wsc) -> CliResult<Vec<usize>> {
    let mut gens = Vec::new();
    for a in 1..grp.order() {
        let edge = SimplexSet::new([0, a])?;
        match complex.weight(&edge) {
            0 => {}
            2 => gens.push(a),
            1 => {
                if a <= grp.inv(a) {
                    gens.push(a);
                }
            }
            w => {
                return Err(Failure::invalid(format!(
                    "edge {{0, {a}}} has weight {w}; not a Cayley complex"
                )))
            }
        }
    }
    let rebuilt = Wsc::cayley(grp.mul_table(), &gens)?;
    if &rebuilt != complex {
        return Err(Failure::invalid(
            "the decomposition's complex is not the Cayley complex of any generating set \
             of the given group",
        ));
    }
    Ok(gens)
}

fn load_decomposition(path: &Path) -> CliResult<Decomposition> {
    Ok(read_dto::<DecompositionDto>(path)?.to_decomposition()?)
}

fn run(cli: Cli) -> CliResult<()> {
    let tol = cli.tol;
    let budget = cli.budget;
    match cli.cmd {
        Cmd::Validate { complex } => {
            let wsc = read_dto::<WscDto>(&complex)?.to_wsc()?;
            let report = wsc.validate();
            if report.is_valid() {
                println!("valid; facet copies: {}", wsc.facet_multiset().len());
                Ok(())
            } else {
                print!("{report}");
                Err(Failure::unverified("complex axioms violated"))
            }
        }
        Cmd::ValidateAction { action, ctx } => {
            let a = load_action(&action, ctx.complex.as_ref())?;
            println!("valid action of a group of order {}", a.group.order());
            Ok(())
        }
        Cmd::Classify { action, ctx } => {
            let a = load_action(&action, ctx.complex.as_ref())?;
            let value = Classification {
                free: is_free(&a),
                blending: is_blending(&a),
                strongly_blending: is_strongly_blending(&a),
            };
            println!("{}", to_json(&value));
            Ok(())
        }
        Cmd::RefineFree { action, ctx, out } => {
            let a = load_action(&action, ctx.complex.as_ref())?;
            let refined = free_refinement(&a)?;
            write_dto(&out, &action_bundle(&refined))?;
            println!("refined action written to {}", out.display());
            Ok(())
        }
        Cmd::Seed { tensor, complex, out } => {
            let v = read_dto::<TensorDto>(&tensor)?.to_tensor()?;
            let wsc = read_dto::<WscDto>(&complex)?.to_wsc()?;
            let d = from_elementary(&wsc, &basis_expansion(&v))?;
            write_dto(&out, &DecompositionDto::from_decomposition(&d))?;
            println!("seeded decomposition of size {} written to {}", d.r, out.display());
            Ok(())
        }
        Cmd::Invariantize { decomposition, mode, action, complex, out } => {
            let d = load_decomposition(&decomposition)?;
            let a = load_action(&action, complex.as_ref())?;
            let result = match mode.as_str() {
                "free" => invariantize_free(&a, &d, tol, budget)?,
                "blending" => {
                    let v = contract(&d, budget)?;
                    invariantize_blending(&a, &v, tol)?
                }
                "strong" => invariantize_strong_blending(&a, &d, None, tol, budget)?,
                other => return Err(Failure::invalid(format!("unknown mode {other}"))),
            };
            write_dto(&out, &DecompositionDto::from_decomposition(&result))?;
            println!("symmetric decomposition of size {} written to {}", result.r, out.display());
            Ok(())
        }
        Cmd::ChangeGroup { decomposition, action, complex, subgroup, out } => {
            let d = load_decomposition(&decomposition)?;
            let a = load_action(&action, complex.as_ref())?;
            let h = parse_ids(&subgroup, "subgroup")?;
            let result = change_group(&a, &h, &d, tol, budget)?;
            write_dto(&out, &DecompositionDto::from_decomposition(&result))?;
            println!("whole-group decomposition of size {} written to {}", result.r, out.display());
            Ok(())
        }
        Cmd::ChangeComplex { decomposition, target, mode, group, out } => {
            let d = load_decomposition(&decomposition)?;
            let result = if mode == "constant" {
                let target = target.ok_or_else(|| {
                    Failure::invalid("constant mode needs --target")
                })?;
                let t = read_dto::<WscDto>(&target)?.to_wsc()?;
                change_complex_constant(&d, &t)?
            } else if let Some(m) = mode.strip_prefix("power:") {
                let m: usize = m
                    .parse()
                    .map_err(|_| Failure::invalid(format!("bad power {m:?}")))?;
                match target {
                    // With a target the move goes from the scaled complex
                    // back down to the target; without one it scales up.
                    Some(target) => {
                        let t = read_dto::<WscDto>(&target)?.to_wsc()?;
                        from_power(&d, &t, m)?
                    }
                    None => to_power(&d, m)?,
                }
            } else if let Some(s) = mode.strip_prefix("cayley:") {
                let group = group.ok_or_else(|| {
                    Failure::invalid("cayley mode needs --group")
                })?;
                let grp = read_dto::<GroupDto>(&group)?.to_group()?;
                let tgt_gens = parse_ids(s, "generator")?;
                let src_gens = infer_generators(&grp, &d.action.complex)?;
                change_complex_cayley(&d, &grp, &src_gens, &tgt_gens)?
            } else {
                return Err(Failure::invalid(format!(
                    "unknown mode {mode:?}; use constant, power:m, or cayley:S"
                )));
            };
            write_dto(&out, &DecompositionDto::from_decomposition(&result))?;
            println!("transferred decomposition of size {} written to {}", result.r, out.display());
            Ok(())
        }
        Cmd::Purify { separable, out } => {
            let md = read_dto::<MatrixDecompositionDto>(&separable)?.to_matrix_decomposition()?;
            let xi = purify_separable(&md, tol)?;
            write_dto(&out, &MatrixDecompositionDto::from_matrix_decomposition(&xi))?;
            println!("purification of size {} written to {}", xi.r, out.display());
            Ok(())
        }
        Cmd::SqrtPurify { sigma, action, complex, route, out } => {
            let v = read_dto::<TensorDto>(&sigma)?.to_tensor()?;
            let a = load_action(&action, complex.as_ref())?;
            let route = match route.as_deref() {
                Some("free") => SqrtRoute::Free,
                Some("blending") => SqrtRoute::Blending,
                Some(other) => {
                    return Err(Failure::invalid(format!("unknown route {other:?}")))
                }
                None => {
                    if is_free(&a) {
                        SqrtRoute::Free
                    } else {
                        SqrtRoute::Blending
                    }
                }
            };
            let xi = sqrt_purification(&a, &v, route, tol, budget)?;
            write_dto(&out, &MatrixDecompositionDto::from_matrix_decomposition(&xi))?;
            println!("square-root purification of size {} written to {}", xi.r, out.display());
            Ok(())
        }
        Cmd::Nn(NnCmd::Convert { decomposition, to, out }) => {
            let d = load_decomposition(&decomposition)?;
            match to.as_str() {
                "sep" => {
                    let sep = nn_to_sep(&d, tol)?;
                    write_dto(&out, &MatrixDecompositionDto::from_matrix_decomposition(&sep))?;
                    println!("separable decomposition of size {} written to {}", sep.r, out.display());
                }
                "psd" => {
                    let sep = nn_to_sep(&d, tol)?;
                    let xi = purify_separable(&sep, tol)?;
                    let fam = purification_to_psd(&xi)?;
                    write_dto(&out, &PsdFamilyDto::from_psd_family(&fam))?;
                    println!("psd family of size {} written to {}", fam.r, out.display());
                }
                other => return Err(Failure::invalid(format!("unknown target {other}"))),
            }
            Ok(())
        }
        Cmd::Nn(NnCmd::Evaluate { family, out }) => {
            let fam = read_dto::<PsdFamilyDto>(&family)?.to_psd_family()?;
            let v = evaluate_psd_decomp(&fam, budget)?;
            write_dto(&out, &TensorDto::from_tensor(&v))?;
            println!("evaluated tensor written to {}", out.display());
            Ok(())
        }
        Cmd::Verify { decomposition, against } => {
            let d = load_decomposition(&decomposition)?;
            let v = read_dto::<TensorDto>(&against)?.to_tensor()?;
            let (ok, dev) = verify(&d, &v, tol, budget)?;
            if ok {
                println!("verified: max deviation {dev:.3e} within {tol:.1e}");
                Ok(())
            } else {
                Err(Failure::unverified(format!(
                    "deviation {dev:.3e} exceeds tolerance {tol:.1e}"
                )))
            }
        }
        Cmd::Suite { out } => {
            let report = run_suite(cli.seed);
            for c in &report.checks {
                println!("[{}] {} — {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.name, c.detail);
            }
            if let Some(path) = out {
                write_dto(&path, &ReportDto::from_report(&report))?;
                println!("report written to {}", path.display());
            }
            if report.all_pass() {
                Ok(())
            } else {
                Err(Failure::unverified(format!(
                    "{} of {} checks failed",
                    report.failed().len(),
                    report.checks.len()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
