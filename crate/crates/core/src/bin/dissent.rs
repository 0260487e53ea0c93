//! Command-line driver: parse system documents, run trajectories, sweep
//! families, and emit the JSON/CSV reports. A thin single-threaded shell —
//! parallelism lives inside the sweep operations and is sized by --workers.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dissent::analysis::{
    find_witness, period_spectrum, sample_dynamics, sample_periods, verify_pattern_periods,
    verify_period_set, verify_periods_absent, ConformistSource, FamilySpec, GraphScope,
    HubRuleSource, LoopPolicy, SampleSpec, SweepReport, WitnessOutcome, WitnessQuery,
    SAMPLE_MAX_VERTICES,
};
use dissent::engine::{run_to_cycle, step, State};
use dissent::format::{parse_system, render_system, SystemDocument};
use dissent::lyapunov::{check_settled_flips, trace};
use dissent::presets::{demo_system, gk_system};
use dissent::report::{
    cycle_report_json, dynamics_report_json, sample_report_json, spectrum_json, sweep_report_json,
    trace_csv, trace_json, witness_json, Stamp,
};

#[derive(Parser)]
#[command(
    name = "dissent",
    version,
    about = "Simulate and verify synchronous threshold dynamics with one contrarian vertex"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every randomized stage; identical seed and arguments give
    /// identical reports.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Sweep worker threads (0 keeps the library default).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Largest vertex count for sweeps and searches.
    #[arg(long, global = true)]
    nmax: Option<usize>,

    /// Include looped graphs where the check leaves the choice open.
    #[arg(long, global = true, overrides_with = "no_loops")]
    loops: bool,

    /// Restrict to loop-free graphs where the check leaves the choice open.
    #[arg(long, global = true, overrides_with = "loops")]
    no_loops: bool,

    /// Vertex-1 rule enumeration: count-based rules only, or full subset
    /// systems where the degree permits.
    #[arg(long, global = true, value_enum)]
    rule_mode: Option<RuleMode>,

    /// Trajectory budget for sampled stages; step cap for simulate.
    #[arg(long, global = true)]
    budget: Option<u64>,

    /// Force JSON output.
    #[arg(long, global = true, overrides_with = "csv")]
    json: bool,

    /// Force CSV output where supported (lyapunov).
    #[arg(long, global = true, overrides_with = "json")]
    csv: bool,

    /// Omit the generated_at field so identical runs are byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleMode {
    Count,
    Full,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Theorem {
    /// Thresholds everywhere: eventual period 1 or 2.
    Baseline,
    /// Loop-free, contrarian neighborhood independent, any vertex-1 rule:
    /// period 1, 2, or 4.
    Tfree,
    /// Loops allowed, contrarian neighborhood independent: period in
    /// {1, 2, 3, 4, 6, 8, 10, 12}.
    Loops,
    /// Anti-threshold vertex 1: every cycle's opinion pattern stays within
    /// its admissible period set.
    Minority,
    /// No loop at vertex 1: period 3 never occurs.
    Period3,
    /// Sampled trajectories: potential is nondecreasing, bounded, and
    /// settled cycles flip only where allowed.
    Settle,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory to its cycle; reads a system document with an
    /// init line from FILE or standard input.
    Simulate {
        /// System document path; '-' or absent reads standard input.
        file: Option<PathBuf>,
        /// Print the trajectory as one ± line per step instead of JSON.
        #[arg(long)]
        dump: bool,
    },
    /// Decompose a document's whole state space into cycles.
    Spectrum {
        /// System document path; '-' or absent reads standard input.
        file: Option<PathBuf>,
    },
    /// Trace the potential along one trajectory and check its cycle;
    /// CSV by default, --json for the structured form.
    Lyapunov {
        /// System document path; '-' or absent reads standard input.
        file: Option<PathBuf>,
        /// Steps to trace; defaults to the transient plus two full cycles.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Sweep a family exhaustively (with a sampled stage past the
    /// enumeration ceiling) and check a period claim.
    Verify {
        #[arg(long, value_enum)]
        theorem: Theorem,
    },
    /// Search a family for cycles realizing the given periods.
    Witness {
        /// Comma-separated target periods.
        #[arg(long, value_delimiter = ',', required = true)]
        periods: Vec<usize>,
    },
    /// Print a built-in system document (or its graph as DOT).
    Generate {
        /// Built-in graph: single_edge, k33, or cube3.
        #[arg(long, conflicts_with = "gk")]
        preset: Option<String>,
        /// Long-period gadget on 2k+8 vertices.
        #[arg(long)]
        gk: Option<usize>,
        /// Emit the graph in DOT format instead of a system document.
        #[arg(long)]
        dot: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> Result<i32, String> {
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    let stamp = if cli.no_timestamp {
        Stamp::Suppressed
    } else {
        Stamp::Now
    };
    match &cli.command {
        Command::Simulate { file, dump } => cmd_simulate(cli, file.as_deref(), *dump, stamp),
        Command::Spectrum { file } => cmd_spectrum(file.as_deref(), stamp),
        Command::Lyapunov { file, steps } => cmd_lyapunov(cli, file.as_deref(), *steps, stamp),
        Command::Verify { theorem } => cmd_verify(cli, *theorem, stamp),
        Command::Witness { periods } => cmd_witness(cli, periods, stamp),
        Command::Generate { preset, gk, dot } => cmd_generate(preset.as_deref(), *gk, *dot),
    }
}

// --- input plumbing ---------------------------------------------------------

fn read_document(path: Option<&Path>) -> Result<SystemDocument, String> {
    let text = match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?
        }
        _ => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| format!("standard input: {e}"))?;
            buf
        }
    };
    parse_system(&text).map_err(|e| e.to_string())
}

fn first_init(doc: &SystemDocument) -> Result<State, String> {
    doc.inits
        .first()
        .copied()
        .ok_or_else(|| "document has no init line".to_string())
}

/// Write to stdout, exiting quietly if the reader has gone away (such as a
/// pipe into `head`).
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if out.write_all(text.as_bytes()).is_err() {
        std::process::exit(0);
    }
}

fn print_doc(doc: &Value) {
    let body = serde_json::to_string_pretty(doc).expect("report serializes");
    emit(&body);
    emit("\n");
}

// --- trajectory commands ----------------------------------------------------

fn cmd_simulate(cli: &Cli, file: Option<&Path>, dump: bool, stamp: Stamp) -> Result<i32, String> {
    let doc = read_document(file)?;
    let start = first_init(&doc)?;
    let report = run_to_cycle(&doc.config, start, cli.budget).map_err(|e| e.to_string())?;
    if dump {
        let n = doc.config.n();
        let mut cur = start;
        for _ in 0..report.transient {
            emit(&format!("{}\n", cur.render(n)));
            cur = step(&doc.config, cur);
        }
        for state in &report.cycle {
            emit(&format!("{}\n", state.render(n)));
        }
    } else {
        print_doc(&cycle_report_json(&doc.config, start, &report, stamp));
    }
    Ok(0)
}

fn cmd_spectrum(file: Option<&Path>, stamp: Stamp) -> Result<i32, String> {
    let doc = read_document(file)?;
    let spectrum = period_spectrum(&doc.config).map_err(|e| e.to_string())?;
    print_doc(&spectrum_json(&doc.config, &spectrum, stamp));
    Ok(0)
}

fn cmd_lyapunov(
    cli: &Cli,
    file: Option<&Path>,
    steps: Option<usize>,
    stamp: Stamp,
) -> Result<i32, String> {
    let doc = read_document(file)?;
    let start = first_init(&doc)?;
    let walked = run_to_cycle(&doc.config, start, cli.budget).map_err(|e| e.to_string())?;
    let steps = steps.unwrap_or(walked.transient + 2 * walked.period + 4);
    let tr = trace(&doc.config, start, steps).map_err(|e| e.to_string())?;
    let flips = check_settled_flips(&doc.config, &walked).map_err(|e| e.to_string())?;
    let pass = tr.is_nondecreasing() && flips.is_empty();
    if cli.json {
        let mut out = trace_json(&tr, stamp);
        out["flip_violations"] = json!(flips.len());
        out["pass"] = json!(pass);
        print_doc(&out);
    } else {
        emit(&trace_csv(&tr));
        emit(&format!("# nondecreasing={}\n", tr.is_nondecreasing()));
        emit(&format!("# flip_violations={}\n", flips.len()));
    }
    Ok(if pass { 0 } else { 1 })
}

// --- family checks ----------------------------------------------------------

/// Loop policy for checks that leave the choice open.
fn loops_choice(cli: &Cli, default: LoopPolicy) -> LoopPolicy {
    if cli.loops {
        LoopPolicy::Anywhere
    } else if cli.no_loops {
        LoopPolicy::Forbidden
    } else {
        default
    }
}

fn hub_mode(cli: &Cli, default: HubRuleSource) -> HubRuleSource {
    match cli.rule_mode {
        None => default,
        Some(RuleMode::Count) => HubRuleSource::CountBased,
        Some(RuleMode::Full) => HubRuleSource::AutoFullThenCount,
    }
}

/// One theorem's sweep shape: which family, which expected periods, and
/// which checker to run on it.
struct Plan {
    check: &'static str,
    family: FamilySpec,
    expected: Option<Vec<usize>>,
    forbidden: Option<Vec<usize>>,
    patterns: bool,
}

fn plan_for(cli: &Cli, theorem: Theorem, nmax: usize) -> Result<Plan, String> {
    let base = |loops| FamilySpec {
        n_min: 1,
        n_max: nmax,
        loops,
        scope: GraphScope::Any,
        hub_rules: HubRuleSource::AllThresholds,
        conformists: ConformistSource::AllThresholds,
    };
    match theorem {
        Theorem::Baseline => Ok(Plan {
            check: "threshold-periods",
            family: base(loops_choice(cli, LoopPolicy::Anywhere)),
            expected: Some(vec![1, 2]),
            forbidden: None,
            patterns: false,
        }),
        Theorem::Tfree => {
            if cli.loops {
                return Err("--loops contradicts --theorem tfree (loop-free hypothesis)".into());
            }
            Ok(Plan {
                check: "loopless-independent-periods",
                family: FamilySpec {
                    scope: GraphScope::HubIndependent,
                    hub_rules: hub_mode(cli, HubRuleSource::AutoFullThenCount),
                    ..base(LoopPolicy::Forbidden)
                },
                expected: Some(vec![1, 2, 4]),
                forbidden: None,
                patterns: false,
            })
        }
        Theorem::Loops => {
            if cli.no_loops {
                return Err("--no-loops contradicts --theorem loops (loops are the point)".into());
            }
            Ok(Plan {
                check: "looped-independent-periods",
                family: FamilySpec {
                    scope: GraphScope::HubIndependent,
                    hub_rules: hub_mode(cli, HubRuleSource::AutoFullThenCount),
                    ..base(LoopPolicy::Anywhere)
                },
                expected: Some(vec![1, 2, 3, 4, 6, 8, 10, 12]),
                forbidden: None,
                patterns: false,
            })
        }
        Theorem::Minority => {
            let loops = loops_choice(cli, LoopPolicy::Forbidden);
            let expected = if matches!(loops, LoopPolicy::Forbidden) {
                vec![1, 2, 4, 5, 6, 10]
            } else {
                vec![1, 2, 3, 4, 5, 6, 8, 10]
            };
            Ok(Plan {
                check: "contrarian-pattern-periods",
                family: FamilySpec {
                    hub_rules: HubRuleSource::AllAntiThresholds,
                    ..base(loops)
                },
                expected: Some(expected),
                forbidden: None,
                patterns: true,
            })
        }
        Theorem::Period3 => {
            if cli.loops {
                return Err(
                    "--loops contradicts --theorem period3 (vertex 1 must stay loop-free)".into(),
                );
            }
            let loops = if cli.no_loops {
                LoopPolicy::Forbidden
            } else {
                LoopPolicy::ExceptHub
            };
            Ok(Plan {
                check: "no-contrarian-loop-period-three",
                family: FamilySpec {
                    hub_rules: hub_mode(cli, HubRuleSource::CountBased),
                    ..base(loops)
                },
                expected: None,
                forbidden: Some(vec![3]),
                patterns: false,
            })
        }
        Theorem::Settle => unreachable!("settle is sampled-only"),
    }
}

fn run_exhaustive(plan: &Plan) -> Result<SweepReport, String> {
    let report = if plan.patterns {
        verify_pattern_periods(&plan.family)
    } else if let Some(forbidden) = &plan.forbidden {
        verify_periods_absent(&plan.family, forbidden)
    } else {
        verify_period_set(&plan.family, plan.expected.as_deref().unwrap_or(&[]))
    };
    report.map_err(|e| e.to_string())
}

/// Sampled stand-in for the same claim at one vertex count past the
/// enumeration ceiling. Pattern checks degrade to their period set here.
fn run_sampled(
    plan: &Plan,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<(SampleSpec, SweepReport), String> {
    let spec = SampleSpec {
        n,
        loops: plan.family.loops,
        scope: plan.family.scope,
        hub_rules: plan.family.hub_rules,
        conformists: plan.family.conformists,
        samples,
        seed,
    };
    let allowed: Vec<usize> = match (&plan.expected, &plan.forbidden) {
        (Some(list), _) => list.clone(),
        (None, Some(bad)) => (1..128).filter(|p| !bad.contains(p)).collect(),
        (None, None) => Vec::new(),
    };
    let report = sample_periods(&spec, &allowed).map_err(|e| e.to_string())?;
    Ok((spec, report))
}

fn cmd_verify(cli: &Cli, theorem: Theorem, stamp: Stamp) -> Result<i32, String> {
    if matches!(theorem, Theorem::Settle) {
        let spec = SampleSpec {
            n: cli.nmax.unwrap_or(6),
            loops: loops_choice(cli, LoopPolicy::Anywhere),
            scope: GraphScope::Any,
            hub_rules: hub_mode(cli, HubRuleSource::AutoFullThenCount),
            conformists: ConformistSource::AllThresholds,
            samples: cli.budget.unwrap_or(10_000),
            seed: cli.seed,
        };
        let report = sample_dynamics(&spec).map_err(|e| e.to_string())?;
        print_doc(&dynamics_report_json("settlement", &spec, &report, stamp));
        return Ok(if report.pass() { 0 } else { 1 });
    }

    let nmax = cli.nmax.unwrap_or(4);
    let mut plan = plan_for(cli, theorem, nmax)?;
    let ceiling = plan.family.exhaustive_limit();

    // --budget adds a sampled stage at nmax and pulls the exhaustive stage
    // below it; past the enumeration ceiling the sampled stage is mandatory.
    let staged = cli.budget.is_some() || nmax > ceiling;
    if !staged {
        let report = run_exhaustive(&plan)?;
        let mut doc = sweep_report_json(
            plan.check,
            &plan.family,
            plan.expected.as_deref(),
            &report,
            stamp,
        );
        if let Some(bad) = &plan.forbidden {
            doc["forbidden_periods"] = json!(bad);
        }
        print_doc(&doc);
        return Ok(if report.pass() { 0 } else { 1 });
    }

    if nmax > SAMPLE_MAX_VERTICES {
        return Err(format!(
            "--nmax {nmax} exceeds the sampling limit of {SAMPLE_MAX_VERTICES}"
        ));
    }
    let samples = cli.budget.unwrap_or(10_000);
    let (spec, sampled) = run_sampled(&plan, nmax, samples, cli.seed)?;
    let mut pass = sampled.pass();
    let mut stages = Vec::new();
    let exhaustive_top = nmax.saturating_sub(1).min(ceiling);
    if exhaustive_top >= 1 {
        plan.family.n_max = exhaustive_top;
        let exhaustive = run_exhaustive(&plan)?;
        pass &= exhaustive.pass();
        let mut stage = sweep_report_json(
            plan.check,
            &plan.family,
            plan.expected.as_deref(),
            &exhaustive,
            Stamp::Suppressed,
        );
        if let Some(bad) = &plan.forbidden {
            stage["forbidden_periods"] = json!(bad);
        }
        stages.push(stage);
    }
    let mut stage = sample_report_json(
        plan.check,
        &spec,
        plan.expected.as_deref(),
        &sampled,
        Stamp::Suppressed,
    );
    if let Some(bad) = &plan.forbidden {
        stage["forbidden_periods"] = json!(bad);
    }
    stages.push(stage);
    let mut doc = json!({
        "schema": "verification-report/1",
        "check": plan.check,
        "mode": "staged",
        "pass": pass,
        "stages": stages,
    });
    stamp.apply(&mut doc);
    print_doc(&doc);
    Ok(if pass { 0 } else { 1 })
}

fn cmd_witness(cli: &Cli, periods: &[usize], stamp: Stamp) -> Result<i32, String> {
    let nmax = cli.nmax.unwrap_or(5);
    let loops = loops_choice(cli, LoopPolicy::Anywhere);
    let hub = match cli.rule_mode {
        None => HubRuleSource::Minority,
        Some(RuleMode::Count) => HubRuleSource::CountBased,
        Some(RuleMode::Full) => HubRuleSource::AutoFullThenCount,
    };
    let family = FamilySpec {
        n_min: 1,
        n_max: nmax,
        loops,
        scope: GraphScope::Any,
        hub_rules: hub,
        conformists: ConformistSource::AllThresholds,
    };
    let widen: Option<SampleSpec> = cli.budget.map(|samples| SampleSpec {
        n: (nmax + 1).min(SAMPLE_MAX_VERTICES),
        loops,
        scope: GraphScope::Any,
        hub_rules: hub,
        conformists: ConformistSource::AllThresholds,
        samples,
        seed: cli.seed,
    });
    let query = WitnessQuery {
        targets: periods.to_vec(),
        family,
    };
    let outcomes = find_witness(&query, widen.as_ref()).map_err(|e| e.to_string())?;
    print_doc(&witness_json(&outcomes, stamp));
    let all_found = outcomes
        .values()
        .all(|o| matches!(o, WitnessOutcome::Found { .. }));
    Ok(if all_found { 0 } else { 1 })
}

// --- document generation ----------------------------------------------------

fn cmd_generate(preset_name: Option<&str>, gk_k: Option<usize>, dot: bool) -> Result<i32, String> {
    let (cfg, init) = match (preset_name, gk_k) {
        (Some(name), None) => demo_system(name).map_err(|e| e.to_string())?,
        (None, Some(k)) => gk_system(k).map_err(|e| e.to_string())?,
        _ => return Err("generate needs exactly one of --preset or --gk".into()),
    };
    if dot {
        emit(&cfg.graph().to_dot());
    } else {
        emit(&render_system(&cfg, &[init]));
    }
    Ok(0)
}
