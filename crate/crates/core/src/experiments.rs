//! Canned experiments and config-driven runs, with CSV/JSON emitters.
//!
//! Every CSV starts with `#` lines carrying the tool version, the config
//! hash and the truncation policy. Numbers are written with 12 significant
//! digits so repeated runs of one config are byte-identical.

use std::fmt::Write as _;

use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind, SweepSpec, SweepVariable, TimeGrid};
use crate::dynamics::{asymptotic_population, max_population, propagate, AmplitudeTrajectory};
use crate::error::{Result, WgqedError};
use crate::fit::{fit_decay_rate, FitModel};
use crate::geometry::{AtomConfig, WaveguideGeometry};
use crate::green::{build_effective_matrix, excited_states, EffectiveMatrix, ExcitedStateIndex};
use crate::linalg::eigenvalues;
use crate::modes::{cutoff_wavenumber, enumerate_modes, enumerate_propagating};
use crate::oracle::spatial_period;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Eigenvalues below this magnitude count as non-decaying.
const ZERO_RATE: f64 = 1e-9;

pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

/// A named output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

impl Artifact {
    fn new(file_name: impl Into<String>, contents: String) -> Self {
        Self {
            file_name: file_name.into(),
            contents,
        }
    }
}

pub fn provenance_header(cfg: &ExperimentConfig) -> String {
    let t = &cfg.truncation;
    format!(
        "# wgqed {VERSION}\n# config_sha256 {}\n# truncation tol={:e} max_terms={} min_axial_separation={:e}\n# config {}\n",
        cfg.hash(),
        t.tol,
        t.max_terms,
        t.min_axial_separation,
        cfg.to_json_string()
    )
}

fn m_label(m_j: i32) -> &'static str {
    match m_j {
        -1 => "m-1",
        0 => "m0",
        _ => "m+1",
    }
}

/// Minimal matplotlib script plotting `ys` against `x` from a CSV artifact.
pub fn plot_script(csv: &str, x: &str, ys: &[&str], xlabel: &str, ylabel: &str) -> String {
    let png = csv.trim_end_matches(".csv").to_string() + ".png";
    let ys = ys
        .iter()
        .map(|y| format!("\"{y}\""))
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        r##"#!/usr/bin/env python3
# Generated by wgqed {VERSION}.
import csv

import matplotlib.pyplot as plt


def load(path):
    with open(path) as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(rows)
    cols = {{name: [] for name in reader.fieldnames}}
    for row in reader:
        for key, value in row.items():
            cols[key].append(float(value))
    return cols


data = load("{csv}")
for name in [{ys}]:
    plt.plot(data["{x}"], data[name], label=name)
plt.xlabel("{xlabel}")
plt.ylabel("{ylabel}")
plt.legend()
plt.savefig("{png}", dpi=150)
"##
    )
}

pub fn build_matrix(cfg: &ExperimentConfig) -> Result<EffectiveMatrix> {
    build_effective_matrix(&cfg.atoms, &cfg.geometry, cfg.k0, &cfg.truncation)
}

/// Builds `Lambda` for `cfg` and propagates its initial state over its time grid.
pub fn run_evolve(cfg: &ExperimentConfig) -> Result<AmplitudeTrajectory> {
    cfg.validate()?;
    let m = build_matrix(cfg)?;
    propagate(&m, &cfg.initial_state()?, &cfg.time.times()?)
}

/// Columns: `t`, then `re`, `im`, `P` per state, then `P_sum` per atom.
pub fn trajectory_csv(cfg: &ExperimentConfig, traj: &AmplitudeTrajectory) -> String {
    let states = excited_states(traj.n_atoms());
    let mut out = provenance_header(cfg);
    let mut cols = vec!["t".to_string()];
    for s in &states {
        let tag = format!("a{}_{}", s.atom, m_label(s.m_j));
        cols.extend([format!("re_{tag}"), format!("im_{tag}"), format!("P_{tag}")]);
    }
    cols.extend((0..traj.n_atoms()).map(|a| format!("P_sum_a{a}")));
    out.push_str(&cols.join(","));
    out.push('\n');
    for (k, &t) in traj.times().iter().enumerate() {
        let amps = &traj.amplitudes()[k];
        let mut row = vec![fmt_num(t)];
        for s in &states {
            let z = amps[s.flat()];
            row.extend([fmt_num(z.re), fmt_num(z.im), fmt_num(z.norm_sqr())]);
        }
        for a in 0..traj.n_atoms() {
            let p: f64 = (0..3).map(|j| amps[3 * a + j].norm_sqr()).sum();
            row.push(fmt_num(p));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn fig2_config() -> ExperimentConfig {
    let geom = WaveguideGeometry::new(4.0, 2.0).expect("valid preset");
    let mut cfg = ExperimentConfig::evolve(geom, vec![AtomConfig::on_axis(&geom, 0.0)]);
    cfg.time = TimeGrid {
        t_max: 10.0,
        steps: 2001,
    };
    cfg
}

/// Single-atom sublevel populations.
#[derive(Debug, Clone)]
pub struct Fig2Result {
    pub config: ExperimentConfig,
    pub trajectory: AmplitudeTrajectory,
    /// Limiting `P_-1, P_0, P_+1` from the dark-state projection.
    pub asymptote: [f64; 3],
}

impl Fig2Result {
    pub fn population(&self, m_j: i32) -> Vec<f64> {
        self.trajectory
            .population(ExcitedStateIndex { atom: 0, m_j })
    }

    pub fn csv(&self) -> String {
        let mut out = provenance_header(&self.config);
        out.push_str("t,P_m-1,P_m0,P_m+1\n");
        let cols: Vec<Vec<f64>> = [-1, 0, 1].iter().map(|&m| self.population(m)).collect();
        for (k, &t) in self.trajectory.times().iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_num(t),
                fmt_num(cols[0][k]),
                fmt_num(cols[1][k]),
                fmt_num(cols[2][k])
            );
        }
        out
    }

    pub fn artifacts(&self) -> Vec<Artifact> {
        vec![
            Artifact::new("fig2.csv", self.csv()),
            Artifact::new(
                "fig2_plot.py",
                plot_script(
                    "fig2.csv",
                    "t",
                    &["P_m-1", "P_m0", "P_m+1"],
                    "t gamma0",
                    "population",
                ),
            ),
        ]
    }
}

pub fn run_fig2(cfg: &ExperimentConfig) -> Result<Fig2Result> {
    if cfg.atoms.len() != 1 {
        return Err(WgqedError::Config("fig2 expects exactly one atom".into()));
    }
    let trajectory = run_evolve(cfg)?;
    let p = asymptotic_population(&build_matrix(cfg)?, &cfg.initial_state()?)?;
    Ok(Fig2Result {
        config: cfg.clone(),
        trajectory,
        asymptote: [p[0], p[1], p[2]],
    })
}

pub fn fig3_config() -> ExperimentConfig {
    let geom = WaveguideGeometry::new(4.0, 2.0).expect("valid preset");
    let atoms = vec![
        AtomConfig::on_axis(&geom, 0.0),
        AtomConfig::on_axis(&geom, 107.0),
    ];
    let mut cfg = ExperimentConfig::evolve(geom, atoms);
    // The slow collective mode decays at ~0.13 gamma0 in population, so the
    // asymptote is reached well inside t = 100.
    cfg.time = TimeGrid {
        t_max: 100.0,
        steps: 4001,
    };
    cfg
}

/// Two-atom transfer plus the lone-atom reference curve.
#[derive(Debug, Clone)]
pub struct Fig3Result {
    pub config: ExperimentConfig,
    pub times: Vec<f64>,
    /// First atom, partner present.
    pub first_with_pair: Vec<f64>,
    /// First atom, partner removed.
    pub first_alone: Vec<f64>,
    pub second: Vec<f64>,
    pub first_asymptote: f64,
    pub alone_asymptote: f64,
    /// `(t, P)` at the second atom's maximum.
    pub second_peak: (f64, f64),
}

impl Fig3Result {
    pub fn csv(&self) -> String {
        let mut out = provenance_header(&self.config);
        out.push_str("t,P_sum_1_pair,P_sum_1_alone,P_sum_2\n");
        for (k, &t) in self.times.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_num(t),
                fmt_num(self.first_with_pair[k]),
                fmt_num(self.first_alone[k]),
                fmt_num(self.second[k])
            );
        }
        out
    }

    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "config_sha256": self.config.hash(),
            "first_asymptote": self.first_asymptote,
            "alone_asymptote": self.alone_asymptote,
            "second_peak_time": self.second_peak.0,
            "second_peak_population": self.second_peak.1,
        })
    }

    pub fn artifacts(&self) -> Vec<Artifact> {
        vec![
            Artifact::new("fig3.csv", self.csv()),
            Artifact::new("fig3_summary.json", pretty(&self.summary())),
            Artifact::new(
                "fig3_plot.py",
                plot_script(
                    "fig3.csv",
                    "t",
                    &["P_sum_1_pair", "P_sum_1_alone", "P_sum_2"],
                    "t gamma0",
                    "total excited population",
                ),
            ),
        ]
    }
}

pub fn run_fig3(cfg: &ExperimentConfig) -> Result<Fig3Result> {
    if cfg.atoms.len() != 2 {
        return Err(WgqedError::Config("fig3 expects exactly two atoms".into()));
    }
    info!(
        "fig3: t_max = {} (1/gamma0), {} samples",
        cfg.time.t_max, cfg.time.steps
    );
    let pair = build_matrix(cfg)?;
    let s0 = cfg.initial_state()?;
    let times = cfg.time.times()?;
    let traj = propagate(&pair, &s0, &times)?;
    let p_inf = asymptotic_population(&pair, &s0)?;

    let mut alone_cfg = cfg.clone();
    alone_cfg.atoms.truncate(1);
    alone_cfg.initial_state.retain(|e| e.atom == 0);
    let alone = build_matrix(&alone_cfg)?;
    let s_alone = alone_cfg.initial_state()?;
    let alone_traj = propagate(&alone, &s_alone, &times)?;
    let alone_inf = asymptotic_population(&alone, &s_alone)?;

    Ok(Fig3Result {
        config: cfg.clone(),
        first_with_pair: traj.atom_population(0),
        first_alone: alone_traj.atom_population(0),
        second: traj.atom_population(1),
        first_asymptote: p_inf[..3].iter().sum(),
        alone_asymptote: alone_inf.iter().sum(),
        second_peak: max_population(&traj, 1),
        times,
    })
}

/// Per-point outputs of a parameter sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    /// Largest total population of each atom over the time grid.
    pub max_population: Vec<f64>,
    pub time_of_max: Vec<f64>,
    /// Limiting total population of each atom.
    pub asymptotic_population: Vec<f64>,
    /// Smallest nonzero population decay rate `-2 Im(lambda)`.
    pub slowest_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub variable: SweepVariable,
    pub atom: usize,
    pub config_sha256: String,
    pub version: String,
    pub points: Vec<SweepPoint>,
    #[serde(skip)]
    config: ExperimentConfig,
}

impl SweepResult {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Maximum over time of `atom`'s population at every sweep point.
    pub fn max_series(&self, atom: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.max_population[atom]).collect()
    }

    pub fn csv(&self) -> String {
        let n = self.config.atoms.len();
        let mut out = provenance_header(&self.config);
        let mut cols = vec![self.variable.label().to_string()];
        for a in 0..n {
            cols.extend([
                format!("max_P_sum_a{a}"),
                format!("t_at_max_a{a}"),
                format!("P_inf_a{a}"),
            ]);
        }
        cols.push("slowest_rate".into());
        out.push_str(&cols.join(","));
        out.push('\n');
        for p in &self.points {
            let mut row = vec![fmt_num(p.value)];
            for a in 0..n {
                row.extend([
                    fmt_num(p.max_population[a]),
                    fmt_num(p.time_of_max[a]),
                    fmt_num(p.asymptotic_population[a]),
                ]);
            }
            row.push(fmt_num(p.slowest_rate));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn artifacts(&self, stem: &str) -> Vec<Artifact> {
        let csv_name = format!("{stem}.csv");
        let observed = format!("max_P_sum_a{}", self.observed_atom());
        vec![
            Artifact::new(
                format!("{stem}_plot.py"),
                plot_script(
                    &csv_name,
                    self.variable.label(),
                    &[&observed],
                    self.variable.label(),
                    "max population",
                ),
            ),
            Artifact::new(csv_name, self.csv()),
        ]
    }

    /// The atom whose maximum is of interest: the swept one, or atom 1 when atom 0 is swept.
    pub fn observed_atom(&self) -> usize {
        if self.atom == 0 && self.config.atoms.len() > 1 {
            1
        } else {
            self.atom
        }
    }
}

fn rayon_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| WgqedError::Numerical(format!("cannot start worker pool: {e}")))
}

fn sweep_point(cfg: &ExperimentConfig, sweep: &SweepSpec, value: f64) -> Result<SweepPoint> {
    let mut point_cfg = cfg.clone();
    point_cfg.atoms = cfg.atoms_at(sweep, value);
    let m = build_matrix(&point_cfg)?;
    let s0 = point_cfg.initial_state()?;
    let traj = propagate(&m, &s0, &cfg.time.times()?)?;
    let p_inf = asymptotic_population(&m, &s0)?;
    let n = point_cfg.atoms.len();
    let (time_of_max, max_population): (Vec<f64>, Vec<f64>) =
        (0..n).map(|a| max_population(&traj, a)).unzip();
    let slowest_rate = eigenvalues(m.matrix())?
        .iter()
        .filter(|l| l.norm() > ZERO_RATE)
        .map(|l| -2.0 * l.im)
        .fold(f64::INFINITY, f64::min);
    Ok(SweepPoint {
        value,
        max_population,
        time_of_max,
        asymptotic_population: (0..n)
            .map(|a| p_inf[3 * a..3 * a + 3].iter().sum())
            .collect(),
        slowest_rate: if slowest_rate.is_finite() {
            slowest_rate
        } else {
            0.0
        },
    })
}

/// Runs every sweep point of `cfg` on at most `workers` threads; rows keep sweep order.
pub fn run_sweep(cfg: &ExperimentConfig, workers: usize) -> Result<SweepResult> {
    cfg.validate()?;
    let sweep = cfg
        .sweep
        .ok_or_else(|| WgqedError::Config("config has no [sweep] section".into()))?;
    let values = sweep.values();
    info!(
        "sweep over {} ({} points, {} workers)",
        sweep.variable.label(),
        values.len(),
        workers
    );
    let points = rayon_pool(workers)?.install(|| {
        values
            .par_iter()
            .map(|&v| sweep_point(cfg, &sweep, v))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepResult {
        variable: sweep.variable,
        atom: sweep.atom,
        config_sha256: cfg.hash(),
        version: VERSION.into(),
        points,
        config: cfg.clone(),
    })
}

pub fn fig4_config() -> ExperimentConfig {
    let mut cfg = fig3_config();
    cfg.kind = ExperimentKind::SweepDz;
    cfg.time = TimeGrid {
        t_max: 100.0,
        steps: 2001,
    };
    cfg.sweep = Some(SweepSpec {
        variable: SweepVariable::Dz,
        atom: 1,
        start: 100.0,
        stop: 121.0,
        steps: 211,
    });
    cfg
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPeak {
    pub dz: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig4Result {
    pub sweep: SweepResult,
    /// Interior maxima of the sweep, refined by golden-section search.
    pub peaks: Vec<SweepPeak>,
    pub global_max: f64,
    /// Mean spacing of the refined peaks.
    pub measured_period: Option<f64>,
    /// Half the TE10 guided wavelength.
    pub expected_period: f64,
}

impl Fig4Result {
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "config_sha256": self.sweep.config_sha256,
            "peaks": self.peaks,
            "global_max": self.global_max,
            "measured_period": self.measured_period,
            "expected_period": self.expected_period,
        })
    }

    pub fn artifacts(&self) -> Vec<Artifact> {
        let mut out = self.sweep.artifacts("fig4");
        out.push(Artifact::new("fig4_summary.json", pretty(&self.summary())));
        out
    }
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
fn golden_max(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while hi - lo > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

pub fn run_fig4(cfg: &ExperimentConfig, workers: usize) -> Result<Fig4Result> {
    if cfg.kind != ExperimentKind::SweepDz || cfg.atoms.len() != 2 {
        return Err(WgqedError::Config(
            "fig4 expects a two-atom sweep_dz config".into(),
        ));
    }
    let sweep = run_sweep(cfg, workers)?;
    let spec = cfg.sweep.expect("validated");
    let observed = sweep.observed_atom();
    let xs = sweep.values();
    let ys = sweep.max_series(observed);
    let brackets: Vec<(f64, f64)> = (1..ys.len().saturating_sub(1))
        .filter(|&k| ys[k] > ys[k - 1] && ys[k] >= ys[k + 1])
        .map(|k| (xs[k - 1], xs[k + 1]))
        .collect();
    let refine = |&(lo, hi): &(f64, f64)| {
        golden_max(lo, hi, 1e-6, |v| {
            Ok(sweep_point(cfg, &spec, v)?.max_population[observed])
        })
        .map(|(dz, value)| SweepPeak { dz, value })
    };
    let peaks = rayon_pool(workers)?
        .install(|| brackets.par_iter().map(refine).collect::<Result<Vec<_>>>())?;
    let global_max = peaks
        .iter()
        .map(|p| p.value)
        .chain(ys.iter().copied())
        .fold(0.0, f64::max);
    let measured_period = (peaks.len() >= 2)
        .then(|| (peaks[peaks.len() - 1].dz - peaks[0].dz) / (peaks.len() - 1) as f64);
    Ok(Fig4Result {
        expected_period: spatial_period(&cfg.geometry, cfg.k0)?,
        sweep,
        peaks,
        global_max,
        measured_period,
    })
}

pub fn multimode_config() -> ExperimentConfig {
    let geom = WaveguideGeometry::new(8.0, 8.0).expect("valid preset");
    // Off every symmetry line of the square section.
    let mut cfg = ExperimentConfig::evolve(geom, vec![AtomConfig::new(3.1, 2.3, 0.0)]);
    cfg.time = TimeGrid {
        t_max: 10.0,
        steps: 1001,
    };
    cfg
}

#[derive(Debug, Clone, Serialize)]
pub struct SublevelDecay {
    pub start_m_j: i32,
    /// Largest population reached by each other sublevel, keyed by `m_J`.
    pub cross_population_max: Vec<(i32, f64)>,
    pub fitted_rate: f64,
    pub fit_residual: f64,
    pub asymptotic_total: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultimodeReport {
    pub config_sha256: String,
    pub version: String,
    pub propagating_modes: Vec<String>,
    pub mode_count: usize,
    pub decays: Vec<SublevelDecay>,
}

impl MultimodeReport {
    pub fn artifacts(&self) -> Vec<Artifact> {
        vec![Artifact::new(
            "multimode.json",
            serde_json::to_string_pretty(self).expect("report serializes") + "\n",
        )]
    }
}

pub fn run_multimode_check(cfg: &ExperimentConfig) -> Result<MultimodeReport> {
    if cfg.atoms.len() != 1 {
        return Err(WgqedError::Config(
            "multimode check expects one atom".into(),
        ));
    }
    cfg.validate()?;
    let modes = enumerate_propagating(&cfg.geometry, cfg.k0);
    let m = build_matrix(cfg)?;
    let times = cfg.time.times()?;
    let decays = [-1, 0, 1]
        .iter()
        .map(|&m_j| {
            let s0 = crate::dynamics::InitialState::sublevel(1, 0, m_j)?;
            let traj = propagate(&m, &s0, &times)?;
            let cross_population_max = [-1, 0, 1]
                .iter()
                .filter(|&&k| k != m_j)
                .map(|&k| {
                    let p = traj.population(ExcitedStateIndex { atom: 0, m_j: k });
                    (k, p.into_iter().fold(0.0, f64::max))
                })
                .collect();
            let own = traj.population(ExcitedStateIndex { atom: 0, m_j });
            let fit = fit_decay_rate(&times, &own, FitModel::SingleExp)?;
            Ok(SublevelDecay {
                start_m_j: m_j,
                cross_population_max,
                fitted_rate: fit.rates[0],
                fit_residual: fit.residual,
                asymptotic_total: asymptotic_population(&m, &s0)?.iter().sum(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MultimodeReport {
        config_sha256: cfg.hash(),
        version: VERSION.into(),
        mode_count: modes.len(),
        propagating_modes: modes.iter().map(|m| m.to_string()).collect(),
        decays,
    })
}

/// Mode table up to `k_max` with cutoffs and axial wavenumbers at `k0`.
pub fn modes_csv(cfg: &ExperimentConfig, k_max: f64) -> String {
    let mut out = provenance_header(cfg);
    out.push_str("mode,family,m,n,cutoff,propagating,kz\n");
    for mode in enumerate_modes(&cfg.geometry, k_max) {
        let kc = cutoff_wavenumber(&mode, &cfg.geometry);
        let propagating = kc < cfg.k0;
        let kz = if propagating {
            (cfg.k0 * cfg.k0 - kc * kc).sqrt()
        } else {
            0.0
        };
        let _ = writeln!(
            out,
            "{mode},{:?},{},{},{},{},{}",
            mode.family(),
            mode.m(),
            mode.n(),
            fmt_num(kc),
            propagating,
            fmt_num(kz)
        );
    }
    out
}

/// Dense `Lambda` as CSV, one row per absorber state.
pub fn matrix_csv(cfg: &ExperimentConfig, m: &EffectiveMatrix) -> String {
    let states = excited_states(m.n_atoms());
    let mut out = provenance_header(cfg);
    let mut cols = vec!["row".to_string()];
    for s in &states {
        let tag = format!("a{}_{}", s.atom, m_label(s.m_j));
        cols.extend([format!("re_{tag}"), format!("im_{tag}")]);
    }
    out.push_str(&cols.join(","));
    out.push('\n');
    for r in &states {
        let mut row = vec![format!("a{}_{}", r.atom, m_label(r.m_j))];
        for c in &states {
            let z = m.entry(*r, *c);
            row.extend([fmt_num(z.re), fmt_num(z.im)]);
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes") + "\n"
}

/// Runs whatever `cfg.kind` asks for and returns its output files.
pub fn run_config(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<Artifact>> {
    cfg.validate()?;
    Ok(match cfg.kind {
        ExperimentKind::Evolve => {
            let traj = run_evolve(cfg)?;
            let n = traj.n_atoms();
            let ys: Vec<String> = (0..n).map(|a| format!("P_sum_a{a}")).collect();
            let ys: Vec<&str> = ys.iter().map(String::as_str).collect();
            vec![
                Artifact::new("evolve.csv", trajectory_csv(cfg, &traj)),
                Artifact::new(
                    "evolve_plot.py",
                    plot_script("evolve.csv", "t", &ys, "t gamma0", "population"),
                ),
            ]
        }
        ExperimentKind::SweepDz | ExperimentKind::SweepPosition => {
            run_sweep(cfg, workers)?.artifacts("sweep")
        }
        ExperimentKind::ModesReport => {
            vec![Artifact::new("modes.csv", modes_csv(cfg, cfg.k0))]
        }
    })
}
