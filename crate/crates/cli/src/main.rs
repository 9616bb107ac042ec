//! Command-line front end: run the search, print the diagrams, sweep the
//! sharings, compare query counts, and show the entangled-pair case.
//!
//! Exit codes: 0 on success with all internal identity checks passing, 1 when
//! a check fails (the failing identity is named on stderr), 2 on usage
//! errors.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qsearch_core::{
    classical, epr, error::Error, grover, pipelines, sharing, trace, Register, RegisterLayout,
    Selection, SweepMode, VariantKind,
};

#[derive(Parser)]
#[command(
    name = "qsearch",
    version,
    about = "Two-register drawer-search simulator with forward/backward measurement traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the ordinary description once and report the search outcome.
    Simulate(SimulateArgs),
    /// Print the five diagrams for one setting and sharing.
    Tables(TablesArgs),
    /// Enumerate the even sharings; with a setting, sweep all instances.
    Sharings(SharingsArgs),
    /// Compare quantum query counts against the classical baselines.
    VerifyRule(VerifyRuleArgs),
    /// Entangled-pair correlation loop.
    Epr(EprArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputMode {
    Text,
    Structured,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variant {
    Standard,
    Certainty,
}

impl From<Variant> for VariantKind {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Standard => VariantKind::Standard,
            Variant::Certainty => VariantKind::Certainty,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Bits per register (drawer count is 2^n).
    #[arg(long = "n", default_value_t = 2)]
    n: u32,
    /// Setting bitstring; when absent the seed selects one at random.
    #[arg(long = "setting")]
    setting: Option<String>,
    #[arg(long = "seed", default_value_t = 0)]
    seed: u64,
    #[arg(long = "variant", value_enum, default_value_t = Variant::Certainty)]
    variant: Variant,
    #[arg(long = "output", value_enum, default_value_t = OutputMode::Text)]
    output: OutputMode,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long = "n", default_value_t = 2)]
    n: u32,
    /// Setting bitstring, e.g. 01.
    #[arg(long = "setting")]
    setting: String,
    /// Sharing: `left`, `right`, or a comma-separated list of initial B-bit
    /// positions, e.g. `0,2`.
    #[arg(long = "sharing", default_value = "left")]
    sharing: String,
    #[arg(long = "output", value_enum, default_value_t = OutputMode::Text)]
    output: OutputMode,
}

#[derive(Args)]
struct SharingsArgs {
    #[arg(long = "n", default_value_t = 2)]
    n: u32,
    /// Sweep every instance against this setting.
    #[arg(long = "setting")]
    setting: Option<String>,
    /// Sample this many sharings instead of sweeping exhaustively.
    #[arg(long = "sample")]
    sample: Option<usize>,
    #[arg(long = "seed", default_value_t = 0)]
    seed: u64,
    #[arg(long = "output", value_enum, default_value_t = OutputMode::Text)]
    output: OutputMode,
}

#[derive(Args)]
struct VerifyRuleArgs {
    /// Comma-separated drawer counts, each a power of two, e.g. 4,16,64,256.
    #[arg(long = "N", default_value = "4,16,64,256")]
    n_list: String,
    #[arg(long = "variant", value_enum, default_value_t = Variant::Certainty)]
    variant: Variant,
    #[arg(long = "output", value_enum, default_value_t = OutputMode::Text)]
    output: OutputMode,
}

#[derive(Args)]
struct EprArgs {
    /// Forced outcome of the first measurement.
    #[arg(long = "first-outcome", default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    first_outcome: u8,
    /// Which side is measured first.
    #[arg(long = "first-side", default_value = "b")]
    first_side: String,
    /// Phase of a nontrivial (diagonal) separation program; identity if absent.
    #[arg(long = "separation-phase")]
    separation_phase: Option<f64>,
    #[arg(long = "output", value_enum, default_value_t = OutputMode::Text)]
    output: OutputMode,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Tables(args) => tables(args),
        Command::Sharings(args) => sharings(args),
        Command::VerifyRule(args) => verify_rule(args),
        Command::Epr(args) => run_epr(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                // A failed internal consistency check, not a usage problem.
                Error::IdentityCheckFailed { .. } | Error::CertaintyNotReached { .. } => {
                    ExitCode::from(1)
                }
                _ => ExitCode::from(2),
            }
        }
    }
}

fn parse_sharing(n: u32, spec: &str) -> Result<sharing::Sharing, Error> {
    match (n, spec) {
        (2, "left") => sharing::Sharing::new(2, &[0]),
        (2, "right") => sharing::Sharing::new(2, &[1]),
        _ => {
            let positions = spec
                .split(',')
                .map(|part| {
                    part.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::InvalidSharing(format!("bad position {part:?}")))
                })
                .collect::<Result<Vec<u32>, Error>>()?;
            sharing::Sharing::new(n, &positions)
        }
    }
}

fn print_records(records: &[trace::TraceRecord]) {
    print!("{}", trace::records_to_jsonl(records));
}

fn simulate(args: SimulateArgs) -> Result<(), Error> {
    let layout = RegisterLayout::new(args.n)?;
    let selection = match &args.setting {
        Some(bits) => Selection::Setting(layout.parse_value(bits)?),
        None => Selection::Seeded(args.seed),
    };
    let (ordinary, setting) = pipelines::run_ordinary(layout, selection)?;

    let variant = grover::plan_variant(layout.register_dim() as u64, args.variant.into())?;
    let input = qsearch_core::StateVector::from_b_support(layout, &[setting]);
    let (output, counter) = grover::run_search(&input, &variant)?;
    let success = output
        .amplitude(setting, setting)
        .norm_sqr()
        .clamp(0.0, 1.0);

    match args.output {
        OutputMode::Text => {
            println!("setting: {}", layout.format_value(setting));
            print!("{}", trace::render_table(&ordinary, "ordinary description"));
            println!(
                "search ({}): {} oracle queries, success probability {:.10}",
                variant.kind, counter.oracle_calls, success
            );
        }
        OutputMode::Structured => {
            print_records(&ordinary.to_records());
            println!(
                "{}",
                serde_json::json!({
                    "label": "search_summary",
                    "setting": layout.format_value(setting),
                    "variant": variant.kind.to_string(),
                    "oracle_queries": counter.oracle_calls,
                    "success": success,
                })
            );
        }
    }
    Ok(())
}

fn tables(args: TablesArgs) -> Result<(), Error> {
    let layout = RegisterLayout::new(args.n)?;
    let setting = layout.parse_value(&args.setting)?;
    let sharing = parse_sharing(args.n, &args.sharing)?;

    let (ordinary, _) = pipelines::run_ordinary(layout, Selection::Setting(setting))?;
    let relativized = pipelines::run_relativized(layout, setting)?;
    let instance = pipelines::run_timesym_instance(
        layout,
        &sharing,
        &sharing.initial_bits_of(layout, setting),
        &sharing.final_bits_of(layout, setting),
    )?;
    let loop_trace =
        pipelines::run_relativized_loop(layout, &sharing, &sharing.final_bits_of(layout, setting))?;
    let reading = pipelines::loop_forward_reading(&loop_trace)?;

    // All three diagram identities must hold before anything is declared.
    let report = pipelines::check_trace_identities(layout, setting, &sharing)?;

    match args.output {
        OutputMode::Text => {
            let titles = [
                "Table I - ordinary description",
                "Table II - relativized description",
                "Table III - time-symmetrization instance",
                "Table IV - relativized causal loop",
                "Table V - loop bottom line, forward reading",
            ];
            for (trace_ref, title) in [
                (&ordinary, titles[0]),
                (&relativized, titles[1]),
                (&instance, titles[2]),
                (&loop_trace, titles[3]),
                (&reading, titles[4]),
            ] {
                println!("{}", trace::render_table(trace_ref, title));
            }
            println!("identity checks:");
            for check in &report.checks {
                println!("  {}: fidelity {:.12}", check.identity, check.fidelity);
            }
        }
        OutputMode::Structured => {
            for tr in [&ordinary, &relativized, &instance, &loop_trace, &reading] {
                print_records(&tr.to_records());
            }
            println!(
                "{}",
                serde_json::to_string(&report).expect("report serializes")
            );
        }
    }
    Ok(())
}

fn sharings(args: SharingsArgs) -> Result<(), Error> {
    let layout = RegisterLayout::new(args.n)?;
    let family = sharing::enumerate_sharings(args.n)?;
    let (before, after) = sharing::reduction_factor(args.n);

    let report = match &args.setting {
        Some(bits) => {
            let setting = layout.parse_value(bits)?;
            let mode = match args.sample {
                Some(count) => SweepMode::Sampled {
                    count,
                    seed: args.seed,
                },
                None => SweepMode::Exhaustive,
            };
            Some(sharing::sweep_instances(layout, setting, mode)?)
        }
        None => None,
    };

    match args.output {
        OutputMode::Text => {
            println!(
                "{} even sharings of {} bits (candidate space {} -> {}):",
                family.sharings.len(),
                args.n,
                before,
                after
            );
            for s in &family.sharings {
                println!("  {}", s.label());
            }
            if let Some(report) = &report {
                println!(
                    "sweep against setting {}: {}/{} instances agree, min fidelity {:.12}",
                    report.setting,
                    report.pass_count,
                    report.entries.len(),
                    report.min_fidelity
                );
                for entry in &report.entries {
                    println!(
                        "  {}: fidelity {:.12} {}",
                        entry.sharing,
                        entry.fidelity,
                        if entry.pass { "ok" } else { "FAIL" }
                    );
                }
            }
        }
        OutputMode::Structured => {
            println!(
                "{}",
                serde_json::json!({
                    "label": "sharing_family",
                    "n_bits": args.n,
                    "count": family.sharings.len(),
                    "space_before": before,
                    "space_after": after,
                })
            );
            if let Some(report) = &report {
                for entry in &report.entries {
                    println!(
                        "{}",
                        serde_json::to_string(entry).expect("entry serializes")
                    );
                }
                println!(
                    "{}",
                    serde_json::json!({
                        "label": "sweep_summary",
                        "setting": report.setting,
                        "pass_count": report.pass_count,
                        "total": report.entries.len(),
                        "min_fidelity": report.min_fidelity,
                    })
                );
            }
        }
    }

    if let Some(report) = &report {
        if !report.all_pass {
            return Err(Error::IdentityCheckFailed {
                identity: "sharing_sweep".into(),
                fidelity: report.min_fidelity,
            });
        }
    }
    Ok(())
}

fn verify_rule(args: VerifyRuleArgs) -> Result<(), Error> {
    let n_list = args
        .n_list
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidDrawerCount { n: 0 })
        })
        .collect::<Result<Vec<u64>, Error>>()?;
    let reports = classical::verify_rule(&n_list, args.variant.into())?;
    match args.output {
        OutputMode::Text => print!("{}", classical::render_query_table(&reports)),
        OutputMode::Structured => {
            for report in &reports {
                println!(
                    "{}",
                    serde_json::to_string(report).expect("report serializes")
                );
            }
        }
    }
    for report in &reports {
        if !report.within_bound {
            return Err(Error::IdentityCheckFailed {
                identity: format!("query_bound_at_{}", report.n_drawers),
                fidelity: report.quantum_success,
            });
        }
    }
    Ok(())
}

fn run_epr(args: EprArgs) -> Result<(), Error> {
    let first = match args.first_side.to_ascii_lowercase().as_str() {
        "b" => Register::B,
        "a" => Register::A,
        other => {
            return Err(Error::InvalidMeasurementSpec(format!(
                "first side must be `b` or `a`, got {other:?}"
            )))
        }
    };
    let scenario = match args.separation_phase {
        Some(phase) => epr::EprScenario::with_phase(phase, first),
        None => epr::EprScenario::identity(first),
    };
    let trace_run = epr::run_epr(&scenario, args.first_outcome == 1)?;
    let agreement = epr::agreement_probability(&trace_run)?;
    let deviation = epr::no_signaling_deviation(&scenario)?;
    let parity = epr::loop_parity_fidelity(&scenario, &trace_run)?;

    match args.output {
        OutputMode::Text => {
            print!(
                "{}",
                trace::render_table(&trace_run, "entangled-pair causal loop")
            );
            println!("same-basis agreement probability: {agreement}");
            println!("no-signaling marginal deviation:  {deviation:.3e}");
            println!("loop forward-reading fidelity:    {parity:.12}");
        }
        OutputMode::Structured => {
            print_records(&trace_run.to_records());
            println!(
                "{}",
                serde_json::json!({
                    "label": "epr_summary",
                    "agreement": agreement,
                    "no_signaling_deviation": deviation,
                    "loop_parity_fidelity": parity,
                })
            );
        }
    }

    if agreement != 1.0 {
        return Err(Error::IdentityCheckFailed {
            identity: "epr_agreement".into(),
            fidelity: agreement,
        });
    }
    if deviation >= 1e-12 {
        return Err(Error::IdentityCheckFailed {
            identity: "epr_no_signaling".into(),
            fidelity: 1.0 - deviation,
        });
    }
    if parity < 1.0 - 1e-9 {
        return Err(Error::IdentityCheckFailed {
            identity: "epr_loop_parity".into(),
            fidelity: parity,
        });
    }
    Ok(())
}
