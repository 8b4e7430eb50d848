//! `ncycle` command-line harness.

mod report;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use ncycle::analysis::{seesaw_search, sweep_figure1, SearchConfig, Verdict};
use ncycle::cycle::{
    canonical_cycle, lhv_enumerate, CycleExpression, EvaluationReport, MAX_ENUMERATION_N, MIN_CYCLE_LEN,
};
use ncycle::identities::{run_identity_suite, IDENTITY_TOL};
use ncycle::kcbs::C3Selector;
use ncycle::scenarios::{build_sixcycle, build_theorem1, theorem1_closed_forms};

use report::{emit_json, fixed4, Csv, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "ncycle", version)]
#[command(about = "Evaluate n-cycle locality and noncontextuality inequalities on a qubit-qutrit system")]
struct Cli {
    /// Emit `{manifest, results}` JSON instead of CSV.
    #[arg(long, global = true)]
    json: bool,

    /// Margin above which an inequality counts as violated.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// K and C of the CHSH plus n-cycle construction for a range of odd n
    Table1 {
        #[arg(long, default_value_t = 5)]
        min_n: usize,
        #[arg(long, default_value_t = 13)]
        max_n: usize,
    },
    /// KCBS and 6-locality values of the six-cycle example state
    Sixcycle,
    /// Classical bound of a cycle expression by enumerating ±1 assignments
    Lhv {
        /// Cycle length; defaults to the pattern length.
        #[arg(long)]
        n: Option<usize>,
        /// Coefficient signs such as `++++-`; defaults to `+…+-`.
        #[arg(long, allow_hyphen_values = true)]
        pattern: Option<String>,
    },
    /// Trend data (n, C, K, K/n) for odd n from 5 to max-n
    Figure1 {
        #[arg(long, default_value_t = 17)]
        max_n: usize,
    },
    /// See-saw search for a state violating the 2l-locality and l-noncontextuality inequalities together
    Search {
        #[arg(long, default_value_t = 5)]
        l: usize,
        #[arg(long, default_value_t = ncycle::analysis::DEFAULT_SEEDS)]
        seeds: usize,
        #[arg(long, default_value_t = ncycle::analysis::DEFAULT_MAX_ROUNDS)]
        max_rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
        #[arg(long, default_value_t = ncycle::analysis::DEFAULT_CONVERGENCE_TOL)]
        convergence_tol: f64,
        /// Search the CHSH cycle instead, seed 0 starting at the known witness.
        #[arg(long, conflicts_with = "menu")]
        regression_theorem1: bool,
        /// Comma-separated qutrit-side observables, e.g. `B1B2,B2B3,B3B4,B4B0,B0`.
        #[arg(long)]
        menu: Option<String>,
    },
    /// Check the closed-form identities behind the construction for m = 2..max-m
    Verify {
        #[arg(long, default_value_t = 50)]
        max_m: usize,
        /// Perturb one identity; the run must then report a failure.
        #[arg(long)]
        self_test_negative: bool,
    },
}

enum Status {
    Confirmed,
    /// A check failed, or the search found nothing within its budget.
    NotConfirmed,
}

/// Bad arguments; exits with code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Confirmed) => ExitCode::SUCCESS,
        Ok(Status::NotConfirmed) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<Status> {
    if !cli.tolerance.is_finite() || cli.tolerance < 0.0 {
        return usage(format!(
            "--tolerance must be a finite non-negative number, got {}",
            cli.tolerance
        ));
    }
    match &cli.command {
        Command::Table1 { min_n, max_n } => table1(cli, *min_n, *max_n),
        Command::Sixcycle => sixcycle(cli),
        Command::Lhv { n, pattern } => lhv(cli, *n, pattern.as_deref()),
        Command::Figure1 { max_n } => figure1(cli, *max_n),
        Command::Search {
            l,
            seeds,
            max_rounds,
            seed_base,
            convergence_tol,
            regression_theorem1,
            menu,
        } => {
            check_odd("--l", *l)?;
            let mut config = if *regression_theorem1 {
                SearchConfig::regression_theorem1(*l)?
            } else {
                let selectors = match menu {
                    Some(m) => C3Selector::parse_list(m, *l).map_err(|e| Usage(format!("--menu: {e}")))?,
                    None => SearchConfig::default_menu(*l),
                };
                SearchConfig::open_problem(*l, selectors)
            };
            config.seeds = *seeds;
            config.max_rounds = *max_rounds;
            config.seed_base = *seed_base;
            config.convergence_tol = *convergence_tol;
            config.violation_tol = cli.tolerance;
            search(cli, config, *regression_theorem1)
        }
        Command::Verify {
            max_m,
            self_test_negative,
        } => verify(cli, *max_m, *self_test_negative),
    }
}

fn check_odd(flag: &str, n: usize) -> Result<()> {
    if n < 5 || n % 2 == 0 {
        return usage(format!("{flag} must be odd and at least 5, got {n}"));
    }
    Ok(())
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Confirmed
    } else {
        Status::NotConfirmed
    }
}

#[derive(Serialize)]
struct Table1Row {
    n: usize,
    n_minus_2: usize,
    k: f64,
    c: f64,
    k_margin: f64,
    c_margin: f64,
    k_violated: bool,
    c_violated: bool,
    k_closed: f64,
    c_closed: f64,
}

fn table1(cli: &Cli, min_n: usize, max_n: usize) -> Result<Status> {
    check_odd("--min-n", min_n)?;
    check_odd("--max-n", max_n)?;
    if min_n > max_n {
        return usage(format!("--min-n {min_n} exceeds --max-n {max_n}"));
    }
    let mut rows = Vec::new();
    for m in (min_n / 2)..=(max_n / 2) {
        let s = build_theorem1(m)?;
        let kcbs = s.kcbs_report(cli.tolerance)?;
        let chsh = s.chsh_report(cli.tolerance)?;
        let closed = theorem1_closed_forms(m)?;
        rows.push(Table1Row {
            n: s.n,
            n_minus_2: s.n - 2,
            k: kcbs.total,
            c: chsh.total,
            k_margin: kcbs.margin,
            c_margin: chsh.margin,
            k_violated: kcbs.violated,
            c_violated: chsh.violated,
            k_closed: closed.k,
            c_closed: closed.c,
        });
    }
    let all = rows.iter().all(|r| r.k_violated && r.c_violated);
    if cli.json {
        let manifest = RunManifest::new("table1")
            .param("min_n", min_n)
            .param("max_n", max_n)
            .param("tolerance", cli.tolerance);
        emit_json(&manifest, &rows)?;
    } else {
        let mut csv = Csv::new(&["n", "n_minus_2", "K", "C", "K_violated", "C_violated"])?;
        for r in &rows {
            csv.row(&[
                r.n.to_string(),
                r.n_minus_2.to_string(),
                fixed4(r.k),
                fixed4(r.c),
                r.k_violated.to_string(),
                r.c_violated.to_string(),
            ])?;
        }
    }
    Ok(status(all))
}

#[derive(Serialize)]
struct NamedReport {
    inequality: &'static str,
    #[serde(flatten)]
    report: EvaluationReport,
}

fn sixcycle(cli: &Cli) -> Result<Status> {
    let s = build_sixcycle()?;
    let reports = [
        NamedReport {
            inequality: "kcbs",
            report: s.kcbs_report(cli.tolerance)?,
        },
        NamedReport {
            inequality: "locality6",
            report: s.locality_report(cli.tolerance)?,
        },
    ];
    let ok = reports.iter().all(|r| r.report.violated);
    if cli.json {
        let manifest = RunManifest::new("sixcycle").param("tolerance", cli.tolerance);
        emit_json(&manifest, &reports)?;
    } else {
        let mut csv = Csv::new(&[
            "inequality",
            "n",
            "total",
            "abs_total",
            "classical_bound",
            "margin",
            "violated",
            "per_term",
        ])?;
        for r in &reports {
            let terms: Vec<String> = r.report.per_term.iter().map(|&t| fixed4(t)).collect();
            csv.row(&[
                r.inequality.to_string(),
                r.report.n.to_string(),
                fixed4(r.report.total),
                fixed4(r.report.total.abs()),
                fixed4(r.report.classical_bound),
                fixed4(r.report.margin),
                r.report.violated.to_string(),
                terms.join(";"),
            ])?;
        }
    }
    Ok(status(ok))
}

#[derive(Serialize)]
struct LhvRow {
    pattern: String,
    n: usize,
    lhv_max: i64,
    n_minus_2: usize,
    maximizers: u64,
    example: Vec<i8>,
}

fn lhv(cli: &Cli, n: Option<usize>, pattern: Option<&str>) -> Result<Status> {
    let expr: CycleExpression = match (n, pattern) {
        (_, Some(p)) => {
            let expr: CycleExpression = p.parse().map_err(|e| Usage(format!("--pattern: {e}")))?;
            if let Some(n) = n {
                if n != expr.n() {
                    return usage(format!("--n {n} does not match pattern length {}", expr.n()));
                }
            }
            expr
        }
        (Some(n), None) => {
            if !(MIN_CYCLE_LEN..=MAX_ENUMERATION_N).contains(&n) {
                return usage(format!("--n must be in {MIN_CYCLE_LEN}..={MAX_ENUMERATION_N}, got {n}"));
            }
            canonical_cycle(n)?
        }
        (None, None) => return usage("give --n or --pattern"),
    };
    if expr.n() > MAX_ENUMERATION_N {
        return usage(format!(
            "cycle length {} exceeds the enumeration cap {MAX_ENUMERATION_N}",
            expr.n()
        ));
    }
    let best = lhv_enumerate(&expr)?;
    let row = LhvRow {
        pattern: expr.to_string(),
        n: expr.n(),
        lhv_max: best.value,
        n_minus_2: expr.n() - 2,
        maximizers: best.maximizers,
        example: best.example.values().to_vec(),
    };
    let ok = row.lhv_max == row.n_minus_2 as i64;
    if cli.json {
        let manifest = RunManifest::new("lhv").param("pattern", &row.pattern);
        emit_json(&manifest, &[row])?;
    } else {
        let example: String = row.example.iter().map(|&v| if v > 0 { '+' } else { '-' }).collect();
        let mut csv = Csv::new(&["pattern", "n", "lhv_max", "maximizers", "example"])?;
        csv.row(&[
            row.pattern.clone(),
            row.n.to_string(),
            row.lhv_max.to_string(),
            row.maximizers.to_string(),
            example,
        ])?;
    }
    Ok(status(ok))
}

fn figure1(cli: &Cli, max_n: usize) -> Result<Status> {
    check_odd("--max-n", max_n)?;
    let rows = sweep_figure1(2..=max_n / 2)?;
    if cli.json {
        let manifest = RunManifest::new("figure1").param("max_n", max_n);
        emit_json(&manifest, &rows)?;
    } else {
        let mut csv = Csv::new(&["n", "C", "K", "K_over_n"])?;
        for r in &rows {
            csv.row(&[r.n.to_string(), fixed4(r.c), fixed4(r.k), fixed4(r.k_over_n)])?;
        }
    }
    Ok(Status::Confirmed)
}

fn search(cli: &Cli, config: SearchConfig, regression: bool) -> Result<Status> {
    let result = seesaw_search(&config).map_err(|e| Usage(e.to_string()))?;
    if cli.json {
        let menu: Vec<String> = config.selectors.iter().map(|s| s.label(config.l)).collect();
        let manifest = RunManifest::new("search")
            .param("l", config.l)
            .param("menu", menu.join(","))
            .param("seeds", config.seeds)
            .param("max_rounds", config.max_rounds)
            .param("seed_base", config.seed_base)
            .param("convergence_tol", config.convergence_tol)
            .param("regression_theorem1", regression)
            .param("tolerance", cli.tolerance);
        emit_json(&manifest, std::slice::from_ref(&result))?;
    } else {
        println!(
            "{}",
            serde_json::to_string_pretty(&result).context("serializing search result")?
        );
    }
    match result.verdict {
        Verdict::JointViolation => {
            eprintln!(
                "verdict: {} (joint margin {:e})",
                result.verdict.label(),
                result.joint_margin
            );
            Ok(Status::Confirmed)
        }
        Verdict::Inconclusive => {
            eprintln!(
                "verdict: {} (best joint margin {:e} over {} seeds; a negative search is evidence, not proof)",
                result.verdict.label(),
                result.joint_margin,
                result.seeds_run
            );
            Ok(Status::NotConfirmed)
        }
    }
}

fn verify(cli: &Cli, max_m: usize, perturb: bool) -> Result<Status> {
    if max_m < 3 {
        return usage(format!(
            "--max-m must be at least 3 so both parities of m are covered, got {max_m}"
        ));
    }
    let checks = run_identity_suite(max_m, perturb)?;
    let ok = checks.iter().all(|c| c.passed);
    if cli.json {
        let manifest = RunManifest::new("verify")
            .param("max_m", max_m)
            .param("self_test_negative", perturb)
            .param("identity_tolerance", IDENTITY_TOL);
        emit_json(&manifest, &checks)?;
    } else {
        let mut csv = Csv::new(&["identity", "kind", "statistic", "tolerance", "cases", "passed"])?;
        for c in &checks {
            let kind = match c.kind {
                ncycle::identities::CheckKind::Equality => "equality",
                ncycle::identities::CheckKind::StrictInequality => "strict_inequality",
            };
            csv.row(&[
                c.name.clone(),
                kind.to_string(),
                format!("{:.3e}", c.statistic),
                format!("{:e}", c.tolerance),
                c.cases.to_string(),
                c.passed.to_string(),
            ])?;
        }
    }
    if !ok {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        eprintln!("failed: {}", failed.join(", "));
    }
    Ok(status(ok))
}
