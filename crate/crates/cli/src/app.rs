//! Command-line front end. [`run`] parses arguments, executes one command
//! and returns the exit code with everything that would be printed, so the
//! binary and the tests share one code path.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cochain_core::poincare::{annihilated_by_hessian, coefficient_rank, solve_field_potential};
use cochain_core::random::{random_g_element, random_k_element, PolynomialShape};
use cochain_core::spacetime::{check_harmonic, table_report, verify_potential};
use cochain_core::{
    affine_kernel_basis, d_g, d_g1_explicit, d_k, is_member, phi, psi, reconstruction_residual,
    CheckRecord, EqualityPolicy, Error as CoreError, Polynomial, ScalarFunction, Space,
    TensorCheck, VerificationReport, Witness,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::doc::{build_metric, emit_tensor, parse_metric_doc, parse_tensor, DocError, MetricArgs};

pub const EXIT_VERIFIED: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

pub const SEED_ENV: &str = "COCHAIN_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "cochain",
    version,
    about = "Check tensor cochain identities, solve for potentials, and verify isotropic-metric field strengths"
)]
pub struct Cli {
    /// Output format for reports.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Randomized identity suite on the K and G complexes.
    CheckComplex(CheckComplexArgs),
    /// Solve d_K A = T for a closed K(q) tensor document.
    Poincare {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Affine basis of the kernel of the Hessian.
    Kernel {
        #[arg(long)]
        dim: usize,
    },
    /// Isotropic static metrics.
    #[command(subcommand)]
    Spacetime(SpacetimeCommand),
}

#[derive(Debug, Args)]
pub struct CheckComplexArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub grade: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Corrupt one entry of the first psi/phi round trip.
    #[arg(long)]
    pub inject_fault: bool,
}

#[derive(Debug, Subcommand)]
pub enum SpacetimeCommand {
    /// Check F = d_G A at seeded sample points.
    Verify(SpacetimeArgs),
    /// Compare the computed Christoffel symbols and F with their closed-form tables.
    Table(SpacetimeArgs),
    /// Evaluate the spatial Laplacian of H.
    Harmonic(SpacetimeArgs),
}

#[derive(Debug, Args)]
pub struct SpacetimeArgs {
    /// mp, extreme_rn, schwarzschild, flat or custom.
    #[arg(long, default_value = "mp")]
    pub metric: String,
    /// H as an s-expression in x1 x2 x3.
    #[arg(long = "H")]
    pub h: Option<String>,
    /// f as an s-expression in H.
    #[arg(long)]
    pub f: Option<String>,
    /// g as an s-expression in H.
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long)]
    pub mass: Option<String>,
    #[arg(long)]
    pub omega: Option<String>,
    /// Metric JSON document; replaces the other metric options.
    #[arg(long, conflicts_with_all = ["h", "f", "g", "mass", "omega"])]
    pub metric_file: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Exit code and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn input_error(message: impl std::fmt::Display) -> Self {
        Outcome {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

/// Run one command line. `env_seed` is the value of `COCHAIN_SEED`, which
/// overrides any `--seed`.
pub fn run<I, T>(args: I, env_seed: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: EXIT_VERIFIED,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let seed_override = match env_seed.map(|s| s.trim().parse::<u64>()) {
        None => None,
        Some(Ok(s)) => Some(s),
        Some(Err(_)) => {
            return Outcome::input_error(format!("{SEED_ENV} must be an unsigned integer"))
        }
    };
    let format = cli.format;
    match cli.command {
        Command::CheckComplex(mut a) => {
            a.seed = seed_override.unwrap_or(a.seed);
            check_complex(&a).map_or_else(|e| e, |r| finish(&r, format, None))
        }
        Command::Poincare { input, out } => poincare(&input, &out, format),
        Command::Kernel { dim } => kernel(dim, format),
        Command::Spacetime(sub) => spacetime(sub, seed_override, format),
    }
}

#[derive(Serialize)]
struct WithPayload<'a, T: Serialize> {
    #[serde(flatten)]
    payload: T,
    report: &'a VerificationReport,
}

fn finish(report: &VerificationReport, format: Format, text_prefix: Option<String>) -> Outcome {
    let stdout = match format {
        Format::Text => format!("{}{report}\n", text_prefix.unwrap_or_default()),
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(report).expect("reports serialize")
        ),
    };
    Outcome {
        code: if report.passed() {
            EXIT_VERIFIED
        } else {
            EXIT_VIOLATION
        },
        stdout,
        stderr: String::new(),
    }
}

/// Worst result of one named check across trials.
struct Tally {
    name: &'static str,
    record: Option<(TensorCheck, usize)>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, record: None }
    }

    fn add(&mut self, check: TensorCheck, trial: usize) {
        let replace = match &self.record {
            None => true,
            Some((old, _)) => {
                (old.zero && !check.zero)
                    || (old.zero == check.zero && check.worst_residual > old.worst_residual)
            }
        };
        if replace {
            self.record = Some((check, trial));
        }
    }

    fn into_record(self) -> CheckRecord {
        match self.record {
            None => CheckRecord::new(self.name, true, 0.0, None),
            Some((check, trial)) => CheckRecord::from_tensor_check(self.name, &check, Some(trial)),
        }
    }
}

const MAX_DIM: usize = 6;
const MAX_GRADE: usize = 4;

fn check_complex(a: &CheckComplexArgs) -> Result<VerificationReport, Outcome> {
    if a.dim == 0 || a.dim > MAX_DIM {
        return Err(Outcome::input_error(format!(
            "--dim must be between 1 and {MAX_DIM}"
        )));
    }
    if a.grade > MAX_GRADE {
        return Err(Outcome::input_error(format!(
            "--grade must be at most {MAX_GRADE}"
        )));
    }
    if a.trials == 0 {
        return Err(Outcome::input_error("--trials must be at least 1"));
    }
    let (dim, q) = (a.dim, a.grade);
    let policy = EqualityPolicy {
        seed: a.seed,
        ..EqualityPolicy::default()
    };
    let shape = PolynomialShape::default();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut square = Tally::new("d_K d_K = 0");
    let mut lands = Tally::new("d_K maps K(q) into K(q+1)");
    let mut psi_phi = Tally::new("psi(phi(E)) = E");
    let mut phi_psi = Tally::new("phi(psi(S)) = S");
    let mut g_square = Tally::new("d_G d_G = 0");
    let mut rebuilt = Tally::new("G(q) member rebuilt from its alternation");
    let mut explicit = Tally::new("d_G on G(1) matches the explicit formula");
    let run_err = |e: CoreError| Outcome::input_error(e);
    for trial in 0..a.trials {
        let e = random_k_element(&mut rng, dim, q, shape).map_err(run_err)?;
        let s = random_g_element(&mut rng, dim, q, shape).map_err(run_err)?;
        let de = d_k(&e).map_err(run_err)?;
        square.add(
            d_k(&de)
                .map_err(run_err)?
                .tensor()
                .check_zero(&policy)
                .map_err(run_err)?,
            trial,
        );
        let membership = is_member(de.tensor(), Space::K(q + 1), &policy).map_err(run_err)?;
        for c in membership.checks {
            lands.add(c.result, trial);
        }
        let mut round_trip = psi(&phi(&e).map_err(run_err)?)
            .map_err(run_err)?
            .into_tensor();
        if a.inject_fault && trial == 0 {
            let n = round_trip.entries().len();
            let idx = round_trip.index_of(rng.random_range(0..n));
            let bumped = round_trip.get(&idx).plus(&Polynomial::one(dim));
            round_trip.set(&idx, bumped);
        }
        psi_phi.add(
            round_trip
                .minus(e.tensor())
                .check_zero(&policy)
                .map_err(run_err)?,
            trial,
        );
        let back = phi(&psi(&s).map_err(run_err)?).map_err(run_err)?;
        phi_psi.add(
            back.tensor()
                .minus(s.tensor())
                .check_zero(&policy)
                .map_err(run_err)?,
            trial,
        );
        let ds = d_g(&s).map_err(run_err)?;
        g_square.add(
            d_g(&ds)
                .map_err(run_err)?
                .tensor()
                .check_zero(&policy)
                .map_err(run_err)?,
            trial,
        );
        if q >= 2 {
            rebuilt.add(
                reconstruction_residual(&s)
                    .map_err(run_err)?
                    .check_zero(&policy)
                    .map_err(run_err)?,
                trial,
            );
        }
        if q == 1 {
            let closed_form = d_g1_explicit(&s).map_err(run_err)?;
            explicit.add(
                closed_form
                    .tensor()
                    .minus(ds.tensor())
                    .check_zero(&policy)
                    .map_err(run_err)?,
                trial,
            );
        }
    }
    let mut report = VerificationReport::new(format!(
        "check-complex dim {dim} grade {q} trials {} seed {}",
        a.trials, a.seed
    ));
    let mut tallies = vec![square, lands, psi_phi, phi_psi, g_square];
    if q >= 2 {
        tallies.push(rebuilt);
    }
    if q == 1 {
        tallies.push(explicit);
    }
    for t in tallies {
        report.push(t.into_record());
    }
    Ok(report)
}

fn read(path: &PathBuf) -> Result<String, Outcome> {
    std::fs::read_to_string(path)
        .map_err(|e| Outcome::input_error(format!("cannot read {}: {e}", path.display())))
}

fn poincare(input: &PathBuf, out: &PathBuf, format: Format) -> Outcome {
    let text = match read(input) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let subject = format!("poincare {}", input.display());
    let parsed = match parse_tensor(&text) {
        Ok(p) => p,
        Err(DocError::Membership(CoreError::InvalidMember {
            space,
            check,
            index,
            residual,
        })) => {
            let mut report = VerificationReport::new(subject);
            let witness = Witness {
                trial: None,
                index,
                point: None,
            };
            report.push(CheckRecord::new(
                format!("input in {space}: {check}"),
                false,
                residual,
                Some(witness),
            ));
            return finish(&report, format, None);
        }
        Err(e) => return Outcome::input_error(format!("{}: {e}", input.display())),
    };
    let element = match parsed.element {
        Some(e) if matches!(e.space(), Space::K(q) if q >= 1) => e,
        _ => {
            return Outcome::input_error(
                "poincare needs a document with space K and grade at least 1",
            )
        }
    };
    let q = element.grade();
    let mut report = VerificationReport::new(subject);
    let solved = match solve_field_potential(&element) {
        Ok(s) => s,
        Err(CoreError::NotClosed { index, residual }) => {
            let witness = Witness {
                trial: None,
                index,
                point: None,
            };
            report.push(CheckRecord::new(
                format!("input closed (d_K T = 0 in K({}))", q + 1),
                false,
                residual,
                Some(witness),
            ));
            return finish(&report, format, None);
        }
        Err(e) => return Outcome::input_error(e),
    };
    report.push(CheckRecord::new(
        format!("input closed (d_K T = 0 in K({}))", q + 1),
        true,
        0.0,
        None,
    ));
    report.push(CheckRecord::new(
        format!("potential in K({})", q - 1),
        true,
        0.0,
        None,
    ));
    report.push(CheckRecord::new(
        "d_K A = T",
        solved.residual == 0.0,
        solved.residual,
        None,
    ));
    let doc = emit_tensor(solved.potential.tensor(), Some(solved.potential.space()));
    if let Err(e) = std::fs::write(out, format!("{doc}\n")) {
        return Outcome::input_error(format!("cannot write {}: {e}", out.display()));
    }
    finish(&report, format, None)
}

fn kernel(dim: usize, format: Format) -> Outcome {
    if dim == 0 || dim > MAX_DIM {
        return Outcome::input_error(format!("--dim must be between 1 and {MAX_DIM}"));
    }
    let basis = affine_kernel_basis(dim);
    let mut report = VerificationReport::new(format!("kernel dim {dim}"));
    let annihilated = match annihilated_by_hessian(&basis) {
        Ok(b) => b,
        Err(e) => return Outcome::input_error(e),
    };
    report.push(CheckRecord::new(
        "hessian annihilates every basis element",
        annihilated,
        0.0,
        None,
    ));
    let rank = coefficient_rank(&basis);
    report.push(CheckRecord::new(
        format!("basis is independent (rank {rank} of {})", dim + 1),
        rank == dim + 1,
        (dim + 1 - rank) as f64,
        None,
    ));
    let rendered: Vec<String> = basis.iter().map(|b| b.to_string()).collect();
    match format {
        Format::Text => {
            let listing: String = rendered.iter().map(|b| format!("  {b}\n")).collect();
            finish(
                &report,
                format,
                Some(format!("basis of ker(d_K on K(0)), dim {dim}:\n{listing}")),
            )
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Basis {
                dim: usize,
                basis: Vec<String>,
            }
            let body = WithPayload {
                payload: Basis {
                    dim,
                    basis: rendered,
                },
                report: &report,
            };
            Outcome {
                code: if report.passed() {
                    EXIT_VERIFIED
                } else {
                    EXIT_VIOLATION
                },
                stdout: format!(
                    "{}\n",
                    serde_json::to_string_pretty(&body).expect("reports serialize")
                ),
                stderr: String::new(),
            }
        }
    }
}

type SpacetimeAction =
    fn(&cochain_core::IsotropicMetric, &EqualityPolicy) -> cochain_core::Result<VerificationReport>;

fn spacetime(sub: SpacetimeCommand, seed_override: Option<u64>, format: Format) -> Outcome {
    let (args, action): (SpacetimeArgs, SpacetimeAction) = match sub {
        SpacetimeCommand::Verify(a) => (a, verify_potential),
        SpacetimeCommand::Table(a) => (a, table_report),
        SpacetimeCommand::Harmonic(a) => (a, |m, p| check_harmonic(&m.h_field(), p)),
    };
    let metric_args = match &args.metric_file {
        Some(path) => match read(path).map(|t| parse_metric_doc(&t)) {
            Ok(Ok(m)) => m,
            Ok(Err(e)) => return Outcome::input_error(format!("{}: {e}", path.display())),
            Err(o) => return o,
        },
        None => MetricArgs {
            name: args.metric.clone(),
            h: args.h.clone(),
            f: args.f.clone(),
            g: args.g.clone(),
            mass: args.mass.clone(),
            omega: args.omega.clone(),
        },
    };
    let metric = match build_metric(&metric_args) {
        Ok(m) => m,
        Err(e) => return Outcome::input_error(e),
    };
    let seed = seed_override.unwrap_or(args.seed);
    let policy = match EqualityPolicy::spacetime(args.samples, seed, args.tol) {
        Ok(p) => p,
        Err(e) => return Outcome::input_error(e),
    };
    match action(&metric, &policy) {
        Ok(report) => finish(&report, format, None),
        Err(e) => Outcome::input_error(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Outcome {
        run(std::iter::once("cochain").chain(args.iter().copied()), None)
    }

    #[test]
    fn help_and_usage_errors() {
        let help = cli(&["--help"]);
        assert_eq!(help.code, 0);
        assert!(help.stdout.contains("check-complex"));
        assert_eq!(cli(&["frobnicate"]).code, EXIT_INPUT);
        assert_eq!(
            cli(&["check-complex", "--dim", "x", "--grade", "1"]).code,
            EXIT_INPUT
        );
    }

    #[test]
    fn small_complex_suite_passes() {
        let out = cli(&[
            "check-complex",
            "--dim",
            "3",
            "--grade",
            "1",
            "--trials",
            "3",
            "--seed",
            "7",
        ]);
        assert_eq!(out.code, 0, "{}", out.stdout);
        assert!(out.stdout.contains("explicit formula"));
    }

    #[test]
    fn env_seed_overrides_flag() {
        let args = [
            "cochain",
            "check-complex",
            "--dim",
            "2",
            "--grade",
            "2",
            "--trials",
            "2",
            "--seed",
            "1",
        ];
        let a = run(args, Some("9"));
        assert!(a.stdout.contains("seed 9"));
        assert_eq!(run(args, Some("nine")).code, EXIT_INPUT);
    }

    #[test]
    fn bad_ranges_are_input_errors() {
        assert_eq!(
            cli(&["check-complex", "--dim", "0", "--grade", "1"]).code,
            EXIT_INPUT
        );
        assert_eq!(cli(&["kernel", "--dim", "0"]).code, EXIT_INPUT);
        assert_eq!(
            cli(&["spacetime", "verify", "--metric", "nope"]).code,
            EXIT_INPUT
        );
        assert_eq!(
            cli(&["spacetime", "verify", "--samples", "0"]).code,
            EXIT_INPUT
        );
        assert_eq!(
            cli(&["spacetime", "verify", "--H", "(+ 1"]).code,
            EXIT_INPUT
        );
    }

    #[test]
    fn kernel_lists_affine_basis() {
        let out = cli(&["kernel", "--dim", "3"]);
        assert_eq!(out.code, 0);
        assert!(out.stdout.contains("  x2\n"));
        let json = cli(&["--format", "json", "kernel", "--dim", "2"]);
        let v: serde_json::Value = serde_json::from_str(&json.stdout).unwrap();
        assert_eq!(v["basis"], serde_json::json!(["1", "x0", "x1"]));
        assert_eq!(v["report"]["overall"], "pass");
    }
}
