use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::json;

use wgqed_core::experiments::{self, Artifact};
use wgqed_core::linalg::eigenvalues;
use wgqed_core::oracle::{gamma_prime, spatial_period, two_atom_eigenvalues};
use wgqed_core::{
    AtomConfig, ErrorClass, ExperimentConfig, ExperimentKind, Result, WaveguideGeometry, WgqedError,
};

#[derive(Parser, Debug)]
#[command(
    name = "wgqed",
    version,
    about = "Atomic decay and dipole coupling in a rectangular waveguide"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment file (TOML, or JSON when the name ends in .json).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for output files; the main table goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and matrix assembly.
    #[arg(long, env = "WGQED_WORKERS")]
    workers: Option<usize>,
    /// Evanescent truncation tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// End of the time grid, in 1/gamma0.
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of time points including t = 0.
    #[arg(long)]
    t_steps: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct GuideArgs {
    /// Wide side of the cross section, in 1/k0.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    k0: Option<f64>,
    /// Atom position `x,y,z`; repeat for several atoms.
    #[arg(long = "atom", value_parser = parse_atom)]
    atoms: Vec<AtomConfig>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mode table with cutoffs.
    Modes {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        guide: GuideArgs,
        /// Largest cutoff to list; defaults to k0.
        #[arg(long)]
        k_max: Option<f64>,
    },
    /// Effective generator for a configuration.
    Matrix {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        guide: GuideArgs,
        /// Write the dense matrix as CSV.
        #[arg(long)]
        dump: bool,
        /// Print the eigenvalues as JSON.
        #[arg(long)]
        eigs: bool,
    },
    /// Closed-form single-mode rates and period as JSON.
    Oracle {
        #[command(flatten)]
        guide: GuideArgs,
        #[arg(long)]
        x1: Option<f64>,
        #[arg(long)]
        x2: Option<f64>,
        #[arg(long)]
        dz: Option<f64>,
    },
    /// Propagate the configured initial state.
    Evolve {
        #[command(flatten)]
        common: Common,
    },
    /// Single-atom sublevel populations.
    Fig2 {
        #[command(flatten)]
        common: Common,
    },
    /// Two-atom transfer at large separation.
    Fig3 {
        #[command(flatten)]
        common: Common,
    },
    /// Maximum second-atom population against separation.
    Fig4 {
        #[command(flatten)]
        common: Common,
    },
    /// Square multimode guide report.
    Multimode {
        #[command(flatten)]
        common: Common,
    },
    /// Run the [sweep] section of a config.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_atom(s: &str) -> std::result::Result<AtomConfig, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts.as_slice() {
        [x, y, z] => Ok(AtomConfig::new(*x, *y, *z)),
        _ => Err(format!("expected x,y,z, got {s:?}")),
    }
}

fn workers(common: &Common) -> usize {
    common.workers.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

/// Loads `--config` or falls back to `preset`, then applies flag overrides.
fn resolve(common: &Common, preset: impl FnOnce() -> ExperimentConfig) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => preset(),
    };
    if let Some(tol) = common.tol {
        cfg.truncation = cfg.truncation.with_tol(tol);
    }
    if let Some(t) = common.t_max {
        cfg.time.t_max = t;
    }
    if let Some(n) = common.t_steps {
        cfg.time.steps = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn apply_guide(cfg: &mut ExperimentConfig, guide: &GuideArgs) -> Result<()> {
    if guide.a.is_some() || guide.b.is_some() {
        let a = guide.a.unwrap_or(cfg.geometry.a());
        let b = guide.b.unwrap_or(cfg.geometry.b());
        cfg.geometry = WaveguideGeometry::new(a, b)?;
        if guide.atoms.is_empty() {
            cfg.atoms = vec![AtomConfig::on_axis(&cfg.geometry, 0.0)];
        }
    }
    if let Some(k0) = guide.k0 {
        cfg.k0 = k0;
    }
    if !guide.atoms.is_empty() {
        cfg.atoms = guide.atoms.clone();
        cfg.initial_state.clear();
    }
    cfg.validate()
}

fn emit(out: Option<&Path>, artifacts: &[Artifact]) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            for a in artifacts {
                let path = dir.join(&a.file_name);
                fs::write(&path, &a.contents)?;
                info!("wrote {}", path.display());
            }
        }
        None => {
            if let Some(main) = artifacts.iter().find(|a| !a.file_name.ends_with(".py")) {
                print!("{}", main.contents);
            }
        }
    }
    Ok(())
}

fn artifact(name: &str, contents: String) -> Artifact {
    Artifact {
        file_name: name.into(),
        contents,
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json serializes") + "\n"
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Modes {
            common,
            guide,
            k_max,
        } => {
            let mut cfg = resolve(&common, experiments::fig2_config)?;
            apply_guide(&mut cfg, &guide)?;
            let k_max = k_max.unwrap_or(cfg.k0);
            emit(
                common.out.as_deref(),
                &[artifact("modes.csv", experiments::modes_csv(&cfg, k_max))],
            )
        }
        Command::Matrix {
            common,
            guide,
            dump,
            eigs,
        } => {
            let mut cfg = resolve(&common, experiments::fig2_config)?;
            apply_guide(&mut cfg, &guide)?;
            let m = pool(workers(&common))?.install(|| experiments::build_matrix(&cfg))?;
            let mut files = Vec::new();
            if eigs || !dump {
                let values: Vec<[f64; 2]> = eigenvalues(m.matrix())?
                    .iter()
                    .map(|z| [z.re, z.im])
                    .collect();
                files.push(artifact(
                    "eigenvalues.json",
                    pretty(&json!({ "config_sha256": cfg.hash(), "eigenvalues": values })),
                ));
            }
            if dump {
                files.insert(0, artifact("matrix.csv", experiments::matrix_csv(&cfg, &m)));
            }
            emit(common.out.as_deref(), &files)
        }
        Command::Oracle { guide, x1, x2, dz } => {
            let geom = WaveguideGeometry::new(guide.a.unwrap_or(4.0), guide.b.unwrap_or(2.0))?;
            let k0 = guide.k0.unwrap_or(1.0);
            let x1 = x1.unwrap_or(geom.a() / 2.0);
            let mut report = json!({
                "a": geom.a(),
                "b": geom.b(),
                "k0": k0,
                "x1": x1,
                "gamma_prime": gamma_prime(x1, &geom, k0)?,
                "spatial_period": spatial_period(&geom, k0)?,
            });
            if let Some(dz) = dz {
                let x2 = x2.unwrap_or(x1);
                let e = two_atom_eigenvalues(x1, x2, dz, &geom, k0)?;
                report["x2"] = json!(x2);
                report["dz"] = json!(dz);
                report["lambda1"] = json!([e.lambda1.re, e.lambda1.im]);
                report["lambda2"] = json!([e.lambda2.re, e.lambda2.im]);
            }
            print!("{}", pretty(&report));
            Ok(())
        }
        Command::Evolve { common } => {
            let cfg = resolve(&common, experiments::fig2_config)?;
            let files = pool(workers(&common))?.install(|| experiments::run_config(&cfg, 1))?;
            emit(common.out.as_deref(), &files)
        }
        Command::Fig2 { common } => {
            let cfg = resolve(&common, experiments::fig2_config)?;
            emit(
                common.out.as_deref(),
                &experiments::run_fig2(&cfg)?.artifacts(),
            )
        }
        Command::Fig3 { common } => {
            let cfg = resolve(&common, experiments::fig3_config)?;
            let r = experiments::run_fig3(&cfg)?;
            info!(
                "first atom asymptote {:.6}, second atom peak {:.6} at t = {:.4}",
                r.first_asymptote, r.second_peak.1, r.second_peak.0
            );
            emit(common.out.as_deref(), &r.artifacts())
        }
        Command::Fig4 { common } => {
            let cfg = resolve(&common, experiments::fig4_config)?;
            let r = experiments::run_fig4(&cfg, workers(&common))?;
            info!(
                "global max {:.6}, period {:?} (expected {:.6})",
                r.global_max, r.measured_period, r.expected_period
            );
            emit(common.out.as_deref(), &r.artifacts())
        }
        Command::Multimode { common } => {
            let cfg = resolve(&common, experiments::multimode_config)?;
            emit(
                common.out.as_deref(),
                &experiments::run_multimode_check(&cfg)?.artifacts(),
            )
        }
        Command::Sweep { common } => {
            let Some(path) = &common.config else {
                return Err(WgqedError::Config("sweep needs --config".into()));
            };
            let cfg = resolve(&common, || unreachable!("config given: {}", path.display()))?;
            if !matches!(
                cfg.kind,
                ExperimentKind::SweepDz | ExperimentKind::SweepPosition
            ) {
                return Err(WgqedError::Config(format!(
                    "config kind {:?} is not a sweep",
                    cfg.kind
                )));
            }
            let r = experiments::run_sweep(&cfg, workers(&common))?;
            emit(common.out.as_deref(), &r.artifacts("sweep"))
        }
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| WgqedError::Numerical(format!("cannot start worker pool: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Validation => 2,
                ErrorClass::Numerical => 3,
                ErrorClass::Io => 1,
            })
        }
    }
}
