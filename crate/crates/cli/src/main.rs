//! Command-line front-end: single-block optimization, Monte Carlo experiment
//! presets, and oracle checks, with CSV output and reproducible manifests.
//!
//! Exit codes: 0 success, 2 configuration/usage error, 3 infeasible rate
//! floor under `--strict`, 4 oracle gap violation.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;

use lumilink_core::channel::{build_channel, sample_fading, Scenario};
use lumilink_core::link::BlockState;
use lumilink_core::optimizer::{brute_force_oracle, optimize_block};
use lumilink_core::sim::{
    run_experiment, trial_rng, AggregateRow, CaseSpec, ExperimentConfig, GeomPolicy,
};
use lumilink_core::{SolverSettings, SystemParams};

use config::{load_config, load_manifest, write_manifest, ConfigFile, RunManifest};

const SEED_ENV: &str = "LUMILINK_SEED";

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
    fn infeasible(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
    fn oracle_gap(message: impl Into<String>) -> Self {
        Self {
            code: 4,
            message: message.into(),
        }
    }
    fn other(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "lumilink",
    version,
    about = "Hybrid VLC/RF energy-harvesting downlink: per-block optimization and Monte Carlo experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a single transmission block for one fixed scenario.
    Optimize(OptimizeArgs),
    /// Run a Monte Carlo experiment preset; writes results.csv and manifest.json.
    Experiment(ExperimentArgs),
    /// Compare the optimizer against the brute-force grid oracle on random scenarios.
    OracleCheck(OracleCheckArgs),
}

#[derive(Args)]
struct OptimizeArgs {
    /// JSON config file (params/settings/experiment sections, all optional).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Case index: 1 joint+carryover, 2 joint, 3 fixed-half+carryover, 4 fixed-half.
    #[arg(long, default_value_t = 1)]
    case: u8,
    /// Relay horizontal distance, m.
    #[arg(long = "d-r", default_value_t = 0.0)]
    d_r: f64,
    /// User horizontal distance, m.
    #[arg(long = "d-u", default_value_t = 4.0)]
    d_u: f64,
    /// RF carrier frequency, Hz.
    #[arg(long, default_value_t = 2.4e9)]
    fc: f64,
    /// Fixed fading power gain |h_RF|² (kept deterministic on purpose).
    #[arg(long, default_value_t = 1.0)]
    h2: f64,
    /// Phase-2 energy banked by the previous block, J.
    #[arg(long = "e2-prev", default_value_t = 0.0)]
    e2_prev: f64,
    /// Exit with code 3 when the RF rate floor is unattainable.
    #[arg(long)]
    strict: bool,
    /// Directory for optimize.csv and manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// Fixed relay, user distance swept over a list.
    SweepDu,
    /// Relay cells with the user distance drawn uniformly per trial.
    RandomDu,
}

impl Preset {
    fn name(&self) -> &'static str {
        match self {
            Preset::SweepDu => "sweep-du",
            Preset::RandomDu => "random-du",
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment preset; omit only when rerunning from a manifest.
    preset: Option<Preset>,
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Rerun exactly the experiment recorded in this manifest.
    #[arg(long = "from-manifest")]
    from_manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Master seed (falls back to LUMILINK_SEED, then the config value).
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated case indices, e.g. 1,2,3,4.
    #[arg(long)]
    cases: Option<String>,
    /// Blocks per trial.
    #[arg(long)]
    blocks: Option<usize>,
    /// Trials per cell.
    #[arg(long)]
    trials: Option<usize>,
    /// RF carrier frequency, Hz.
    #[arg(long)]
    fc: Option<f64>,
    /// Relay distance: M or min:max.
    #[arg(long = "d-r")]
    d_r: Option<String>,
    /// User distance: M, min:max, or a comma list.
    #[arg(long = "d-u")]
    d_u: Option<String>,
}

#[derive(Args)]
struct OracleCheckArgs {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of random scenarios.
    #[arg(short = 'n', long = "scenarios", default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
    scenarios: u32,
    /// Oracle grid points per axis (defaults to the solver setting).
    #[arg(long)]
    grid: Option<usize>,
    /// Master seed (falls back to LUMILINK_SEED, then the config value).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Optimize(args) => cmd_optimize(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn validated_params(cfg: &ConfigFile) -> Result<(SystemParams, SolverSettings), CliError> {
    let mut errs = cfg.params.validate();
    errs.extend(cfg.settings.validate());
    if errs.is_empty() {
        Ok((cfg.params, cfg.settings))
    } else {
        Err(CliError::config(errs.join("; ")))
    }
}

fn resolve_seed(flag: Option<u64>, fallback: u64) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .parse::<u64>()
            .map_err(|e| CliError::config(format!("invalid {SEED_ENV}={text}: {e}"))),
        Err(_) => Ok(fallback),
    }
}

// ---------------------------------------------------------------------------
// optimize
// ---------------------------------------------------------------------------

fn cmd_optimize(args: OptimizeArgs) -> Result<(), CliError> {
    let cfg = load_config(args.config.as_deref())?;
    let (params, settings) = validated_params(&cfg)?;
    let case = CaseSpec::from_index(args.case)
        .ok_or_else(|| CliError::config(format!("unknown case index {} (expected 1..=4)", args.case)))?;
    if !(args.d_r >= 0.0) || !(args.d_u > 0.0) || !(args.fc > 0.0) || !(args.h2 >= 0.0) {
        return Err(CliError::config(
            "scenario overrides must satisfy d_r >= 0, d_u > 0, fc > 0, h2 >= 0",
        ));
    }
    if !(args.e2_prev >= 0.0) {
        return Err(CliError::config("e2-prev must be non-negative"));
    }

    let scenario = Scenario {
        d_r: args.d_r,
        d_u: args.d_u,
        f_c: args.fc,
        h_rf_sq: args.h2,
    };
    let ch = build_channel(&scenario, &params).map_err(|e| CliError::config(e.to_string()))?;
    let state = BlockState {
        e2_prev: args.e2_prev,
    };
    let outcome = optimize_block(case, &state, &ch, &params, &settings);
    let d = &outcome.decision;
    let mm_total: usize = outcome.mm_traces.iter().map(|t| t.iterations).sum();

    println!(
        "case: {} ({}, carryover {})",
        case.index(),
        match case.time_policy {
            lumilink_core::sim::TimePolicy::Joint => "joint",
            lumilink_core::sim::TimePolicy::FixedHalf => "fixed_half",
        },
        if case.carryover_on() { "on" } else { "off" }
    );
    println!(
        "scenario: d_r_m={} d_u_m={} f_c_hz={} h_rf_sq={} e2_prev_j={}",
        scenario.d_r, scenario.d_u, scenario.f_c, scenario.h_rf_sq, args.e2_prev
    );
    println!("i_b_a: {}", d.i_b);
    println!("amp_a: {}", d.amp);
    println!("t_vlc: {}", d.t_vlc);
    println!("t_rf: {}", d.t_rf);
    println!("e_h_j: {}", d.e_h);
    println!("e2_next_j: {}", d.e2_next);
    println!("r_vlc_bps: {}", d.r_vlc);
    println!("r_rf_bps: {}", d.r_rf);
    println!("r_e2e_bps: {}", d.r_e2e);
    println!("feasible: {}", d.feasible);
    println!("mm_iterations: {mm_total}");
    println!("cycles: {}", outcome.cycles);

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::other(format!("cannot create {}: {e}", dir.display())))?;
        let mut csv = String::from(
            "case,d_r,d_u,f_c,h_rf_sq,e2_prev,i_b,amp,t_vlc,t_rf,e_h,r_vlc,r_rf,r_e2e,feasible\r\n",
        );
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\r",
            case.index(),
            scenario.d_r,
            scenario.d_u,
            scenario.f_c,
            scenario.h_rf_sq,
            args.e2_prev,
            d.i_b,
            d.amp,
            d.t_vlc,
            d.t_rf,
            d.e_h,
            d.r_vlc,
            d.r_rf,
            d.r_e2e,
            d.feasible
        );
        fs::write(dir.join("optimize.csv"), csv)
            .map_err(|e| CliError::other(format!("cannot write optimize.csv: {e}")))?;

        // A single-block manifest: the experiment section records the
        // scenario as fixed cells so the run context is self-describing.
        let mut experiment = cfg.experiment.clone();
        experiment.cases = vec![case.index()];
        experiment.n_blocks = 1;
        experiment.n_trials = 1;
        experiment.d_r = GeomPolicy::Fixed(scenario.d_r);
        experiment.d_u = GeomPolicy::Fixed(scenario.d_u);
        experiment.f_c = scenario.f_c;
        let manifest = RunManifest::new("optimize", None, params, settings, experiment);
        write_manifest(&dir.join("manifest.json"), &manifest)?;
    }

    if args.strict && !d.feasible {
        return Err(CliError::infeasible(
            "RF rate threshold unattainable for this scenario (strict mode)".to_string(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

fn parse_geom(text: &str, flag: &str, allow_list: bool) -> Result<GeomPolicy, CliError> {
    let parse_num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| CliError::config(format!("invalid {flag} value '{s}': {e}")))
    };
    if let Some((a, b)) = text.split_once(':') {
        return Ok(GeomPolicy::Range {
            min: parse_num(a)?,
            max: parse_num(b)?,
        });
    }
    if text.contains(',') {
        if !allow_list {
            return Err(CliError::config(format!("{flag} does not accept a list")));
        }
        let vals = text.split(',').map(parse_num).collect::<Result<Vec<_>, _>>()?;
        return Ok(GeomPolicy::List(vals));
    }
    Ok(GeomPolicy::Fixed(parse_num(text)?))
}

fn parse_cases(text: &str) -> Result<Vec<u8>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u8>()
                .map_err(|e| CliError::config(format!("invalid case '{s}': {e}")))
        })
        .collect()
}

fn apply_preset(experiment: &mut ExperimentConfig, preset: Preset) {
    match preset {
        Preset::SweepDu => {
            if !matches!(experiment.d_u, GeomPolicy::List(_)) {
                experiment.d_u = GeomPolicy::List(vec![4.0, 5.0, 6.0, 7.0, 8.0]);
            }
            if !matches!(experiment.d_r, GeomPolicy::Fixed(_)) {
                experiment.d_r = GeomPolicy::Fixed(0.0);
            }
        }
        Preset::RandomDu => {
            if !matches!(experiment.d_u, GeomPolicy::Range { .. }) {
                experiment.d_u = GeomPolicy::Range { min: 4.0, max: 8.0 };
            }
            if !matches!(experiment.d_r, GeomPolicy::List(_) | GeomPolicy::Fixed(_)) {
                experiment.d_r = GeomPolicy::List(vec![0.0, 2.0]);
            }
        }
    }
}

fn render_results_csv(rows: &[AggregateRow]) -> String {
    let mut csv =
        String::from("case,d_r,d_u,f_c,rate_mean,rate_se,ib_mean,tvlc_mean,outage_frac,n_trials\r\n");
    for r in rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}\r",
            r.case,
            r.d_r,
            r.d_u,
            r.f_c,
            r.rate_mean,
            r.rate_se,
            r.ib_mean,
            r.tvlc_mean,
            r.outage_frac,
            r.n_trials
        );
    }
    csv
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let (params, settings, experiment, preset_name) = if let Some(manifest_path) =
        &args.from_manifest
    {
        let manifest = load_manifest(manifest_path)?;
        (
            manifest.params,
            manifest.settings,
            manifest.experiment,
            manifest.preset,
        )
    } else {
        let Some(preset) = args.preset else {
            return Err(CliError::config(
                "specify an experiment preset (sweep-du | random-du) or --from-manifest",
            ));
        };
        let cfg = load_config(args.config.as_deref())?;
        let (params, settings) = validated_params(&cfg)?;
        let mut experiment = cfg.experiment.clone();
        apply_preset(&mut experiment, preset);
        if let Some(cases) = &args.cases {
            experiment.cases = parse_cases(cases)?;
        }
        if let Some(blocks) = args.blocks {
            experiment.n_blocks = blocks;
        }
        if let Some(trials) = args.trials {
            experiment.n_trials = trials;
        }
        if let Some(fc) = args.fc {
            experiment.f_c = fc;
        }
        if let Some(d_r) = &args.d_r {
            experiment.d_r = parse_geom(d_r, "--d-r", false)?;
        }
        if let Some(d_u) = &args.d_u {
            experiment.d_u = parse_geom(d_u, "--d-u", true)?;
        }
        experiment.seed = resolve_seed(args.seed, experiment.seed)?;
        (params, settings, experiment, Some(preset.name().to_string()))
    };

    let rows = run_experiment(&experiment, &params, &settings)
        .map_err(|e| CliError::config(e.to_string()))?;

    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::other(format!("cannot create {}: {e}", args.out.display())))?;
    let csv_path = args.out.join("results.csv");
    fs::write(&csv_path, render_results_csv(&rows))
        .map_err(|e| CliError::other(format!("cannot write {}: {e}", csv_path.display())))?;
    let manifest = RunManifest::new("experiment", preset_name, params, settings, experiment);
    write_manifest(&args.out.join("manifest.json"), &manifest)?;

    println!(
        "wrote {} aggregate rows to {} (seed {})",
        rows.len(),
        csv_path.display(),
        manifest.seed
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// oracle-check
// ---------------------------------------------------------------------------

fn cmd_oracle_check(args: OracleCheckArgs) -> Result<(), CliError> {
    let cfg = load_config(args.config.as_deref())?;
    let (params, settings) = validated_params(&cfg)?;
    let grid = args.grid.unwrap_or(settings.oracle_grid);
    if grid < 3 {
        return Err(CliError::config(format!("grid must be at least 3, got {grid}")));
    }
    let seed = resolve_seed(args.seed, cfg.experiment.seed)?;
    let n = args.scenarios;

    let mut max_gap = f64::NEG_INFINITY;
    let mut max_at = 0u32;
    let mut sum_gap = 0.0;
    let mut compared = 0u32;
    let mut skipped = 0u32;

    for k in 0..n {
        let mut rng = trial_rng(seed, k as u64);
        let d_r = 2.0 * rng.random::<f64>();
        let d_u = 4.0 + 4.0 * rng.random::<f64>();
        let h_rf_sq = sample_fading(&mut rng);
        let f_c = if k % 2 == 0 { 2.4e9 } else { 5.0e9 };
        let case = CaseSpec::from_index((k % 4) as u8 + 1).expect("indices 1..=4");
        let scenario = Scenario {
            d_r,
            d_u,
            f_c,
            h_rf_sq,
        };
        let ch = build_channel(&scenario, &params).map_err(|e| CliError::config(e.to_string()))?;
        let state = BlockState::default();
        let outcome = optimize_block(case, &state, &ch, &params, &settings);
        let oracle = brute_force_oracle(case, &state, &ch, &params, grid);
        // Compare like with like: when the grid misses the (continuous)
        // feasible set the oracle answers a different question.
        if oracle.feasible != outcome.decision.feasible || oracle.phi <= 0.0 {
            skipped += 1;
            continue;
        }
        let gap = (oracle.phi - outcome.decision.r_e2e) / oracle.phi;
        compared += 1;
        sum_gap += gap.max(0.0);
        if gap > max_gap {
            max_gap = gap;
            max_at = k;
        }
    }

    println!("scenarios: {n}");
    println!("compared: {compared}");
    println!("skipped_mismatched_feasibility: {skipped}");
    if compared > 0 {
        println!("max_gap: {max_gap} (scenario {max_at})");
        println!("mean_gap: {}", sum_gap / compared as f64);
    }
    if compared > 0 && max_gap > 0.01 {
        return Err(CliError::oracle_gap(format!(
            "max oracle gap {max_gap} exceeds 1% (scenario {max_at})"
        )));
    }
    println!("oracle check passed (threshold 1%)");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geom_flag_grammar() {
        assert_eq!(
            parse_geom("2", "--d-r", false).unwrap(),
            GeomPolicy::Fixed(2.0)
        );
        assert_eq!(
            parse_geom("0:2", "--d-r", false).unwrap(),
            GeomPolicy::Range { min: 0.0, max: 2.0 }
        );
        assert_eq!(
            parse_geom("4,5,6", "--d-u", true).unwrap(),
            GeomPolicy::List(vec![4.0, 5.0, 6.0])
        );
        assert!(parse_geom("4,5", "--d-r", false).is_err());
        assert!(parse_geom("abc", "--d-u", true).is_err());
    }

    #[test]
    fn case_list_parse() {
        assert_eq!(parse_cases("1,2,3,4").unwrap(), vec![1, 2, 3, 4]);
        assert!(parse_cases("1,x").is_err());
    }

    #[test]
    fn presets_shape_geometry() {
        let mut e = ExperimentConfig::default();
        apply_preset(&mut e, Preset::SweepDu);
        assert_eq!(e.d_u, GeomPolicy::List(vec![4.0, 5.0, 6.0, 7.0, 8.0]));
        assert_eq!(e.d_r, GeomPolicy::Fixed(0.0));

        let mut e = ExperimentConfig::default();
        apply_preset(&mut e, Preset::RandomDu);
        assert_eq!(e.d_u, GeomPolicy::Range { min: 4.0, max: 8.0 });
        assert_eq!(e.d_r, GeomPolicy::List(vec![0.0, 2.0]));
    }
}
