use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use shtlab::operators::{commutator_bm, maximal_commutator, maximal_function};
use shtlab::suite::{
    default_suite, parse_configs, parse_space_config, run_dominate, run_suite, with_threads, ScenarioConfig, SuiteKind,
};
use shtlab::weights::{ap_characteristic, bloom_weight, bmo_norm};
use shtlab::{Error, Report};

#[derive(Parser)]
#[command(name = "shtlab", version, about = "Sparse domination and two-weight commutator checks on finite spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario config (one object or an array).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the master seed of every scenario.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; capped by SHTLAB_THREADS.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Builds a space from a space config and writes space.json.
    GenSpace(Common),
    /// Builds the adjacent dyadic systems and certifies them.
    BuildDyadic(Common),
    /// Evaluates M f, C_b f and [b,M] f pointwise into eval.csv.
    Eval(Common),
    /// Runs the sparse domination and writes its certificate.
    Dominate(Common),
    /// Runs verification suites and writes report.csv and report.json.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Restricts the run to these suites.
        #[arg(long, value_delimiter = ',')]
        suite: Vec<SuiteKind>,
    },
    /// Merges report.json files into one report.
    ReportMerge {
        #[arg(long)]
        out: PathBuf,
        inputs: Vec<PathBuf>,
    },
}

enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e.chain().any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::Config { .. })));
            ExitCode::from(if config { 2 } else { 1 })
        }
    }
}

fn threads(jobs: Option<usize>) -> usize {
    let cap = std::env::var("SHTLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&v| v > 0);
    let want = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    cap.map_or(want, |c| want.min(c)).max(1)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_configs(common: &Common) -> Result<Vec<ScenarioConfig>> {
    let mut configs = match &common.config {
        Some(path) => parse_configs(&read(path)?)?,
        None => default_suite(common.seed.unwrap_or(42)),
    };
    if let (Some(seed), Some(_)) = (common.seed, &common.config) {
        for c in &mut configs {
            c.seed = seed;
        }
    }
    Ok(configs)
}

fn single_config(common: &Common) -> Result<ScenarioConfig> {
    let mut configs = load_configs(common)?;
    if common.config.is_none() || configs.len() != 1 {
        return Err(Error::Config {
            path: String::new(),
            message: "this command needs --config with exactly one scenario".into(),
        }
        .into());
    }
    Ok(configs.remove(0))
}

fn out_dir(common: &Common, config: Option<&ScenarioConfig>) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| config.and_then(|c| c.output.clone()))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn finish(report: &Report, dir: &Path) -> Result<Outcome> {
    report.save(dir).with_context(|| format!("writing report to {}", dir.display()))?;
    let failed: Vec<_> = report.failures().collect();
    for row in &failed {
        eprintln!("FAIL {} {} value {:e} threshold {:e}", row.scenario, row.check, row.value, row.threshold);
    }
    println!("{} checks, {} failed; report in {}", report.rows.len(), failed.len(), dir.display());
    Ok(if failed.is_empty() { Outcome::Pass } else { Outcome::Fail })
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::GenSpace(common) => {
            let path = common.config.as_ref().ok_or_else(|| Error::Config {
                path: String::new(),
                message: "gen-space needs --config".into(),
            })?;
            let mut cfg = parse_space_config(&read(path)?)?;
            if let Some(seed) = common.seed {
                cfg.seed = Some(seed);
            }
            let space = shtlab::space::build_space(cfg.kind, cfg.n, &cfg.params, cfg.seed.unwrap_or(0))?;
            let dir = out_dir(&common, None);
            std::fs::create_dir_all(&dir)?;
            space.save(&dir.join("space.json"))?;
            println!("{} points, A0 {:e}, C_mu {:e}", space.n(), space.a0(), space.c_mu());
            Ok(Outcome::Pass)
        }
        Command::BuildDyadic(common) => {
            let cfg = single_config(&common)?;
            let (adj, _, report) = with_threads(threads(common.jobs), || run_dominate(&cfg, true))?;
            let dir = out_dir(&common, Some(&cfg));
            std::fs::create_dir_all(&dir)?;
            for (t, sys) in adj.systems.iter().enumerate() {
                sys.save(&dir.join(format!("system_{t}.json")))?;
            }
            finish(&report, &dir)
        }
        Command::Dominate(common) => {
            let cfg = single_config(&common)?;
            let (_, cert, report) = with_threads(threads(common.jobs), || run_dominate(&cfg, false))?;
            let dir = out_dir(&common, Some(&cfg));
            std::fs::create_dir_all(&dir)?;
            if let Some(cert) = cert {
                std::fs::write(dir.join("certificate.json"), serde_json::to_string_pretty(&cert)?)?;
            }
            finish(&report, &dir)
        }
        Command::Eval(common) => {
            let cfg = single_config(&common)?;
            let space = cfg.build_space()?;
            let [l1, l2, b, f] = cfg.evaluate_inputs(&space)?;
            let (mf, cb, bm) = with_threads(threads(common.jobs), || {
                Ok((
                    maximal_function(&space, &f).values,
                    maximal_commutator(&space, &b, &f).values,
                    commutator_bm(&space, &b, &f),
                ))
            })?;
            let nu = bloom_weight(&l1, &l2, cfg.p)?;
            let mut csv = String::from("x,position,mass,lambda1,lambda2,nu,b,f,mf,cb_f,bm_f\n");
            for x in 0..space.n() {
                writeln!(
                    csv,
                    "{x},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                    space.position(x),
                    space.mass(x),
                    l1[x],
                    l2[x],
                    nu.nu.values()[x],
                    b[x],
                    f[x],
                    mf[x],
                    cb[x],
                    bm[x]
                )?;
            }
            let summary = json!({
                "id": cfg.id,
                "p": cfg.p,
                "constants": space.constants(),
                "ap_lambda1": ap_characteristic(&space, &l1, cfg.p)?.0,
                "ap_lambda2": ap_characteristic(&space, &l2, cfg.p)?.0,
                "bmo_nu": bmo_norm(&space, &b, nu.nu.values())?.0,
            });
            let dir = out_dir(&common, Some(&cfg));
            std::fs::create_dir_all(&dir)?;
            std::fs::write(dir.join("eval.csv"), csv)?;
            std::fs::write(dir.join("eval.json"), serde_json::to_string_pretty(&summary)?)?;
            println!("{} points evaluated; output in {}", space.n(), dir.display());
            Ok(Outcome::Pass)
        }
        Command::Verify { common, suite } => {
            let configs = load_configs(&common)?;
            let only = (!suite.is_empty()).then_some(suite.as_slice());
            let start = Instant::now();
            let mut report = run_suite(&configs, only, threads(common.jobs))?;
            report.runtime_seconds = Some(start.elapsed().as_secs_f64());
            let dir = out_dir(&common, (configs.len() == 1).then(|| &configs[0]));
            finish(&report, &dir)
        }
        Command::ReportMerge { out, inputs } => {
            let mut merged = Report::default();
            for path in &inputs {
                merged.extend(Report::load(path).with_context(|| format!("loading {}", path.display()))?);
            }
            merged.sort();
            finish(&merged, &out)
        }
    }
}
