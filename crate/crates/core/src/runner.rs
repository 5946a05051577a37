//! Config-driven experiment runner behind the `magobs` binary.
//!
//! Each command reads one JSON [`ExperimentConfig`], writes its artifacts
//! atomically into the output directory and finishes with `manifest.json`.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::{Mode, ModeBasis, ModeVector};
use crate::error::{Error, Result};
use crate::fields::{directional_average, FourierField2D, VectorPotential};
use crate::geometry::{gcc_check, mgcc_check, Direction, Region};
use crate::linalg::{self, CMat, CVec};
use crate::obs::{self, SharpObsSetup};
use crate::quasimode::{self, WitnessSetup};
use crate::spectral::{self, ProjectorSpec};
use crate::weyl::normal_form_scan;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    CheckMgcc,
    Gcc,
    Simulate,
    ObsConstant,
    SharpObs,
    ResolventScan,
    Quasimode,
    Witness,
    Control,
    Damped,
    NormalForm,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::CheckMgcc,
        Command::Gcc,
        Command::Simulate,
        Command::ObsConstant,
        Command::SharpObs,
        Command::ResolventScan,
        Command::Quasimode,
        Command::Witness,
        Command::Control,
        Command::Damped,
        Command::NormalForm,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::CheckMgcc => "check-mgcc",
            Command::Gcc => "gcc",
            Command::Simulate => "simulate",
            Command::ObsConstant => "obs-constant",
            Command::SharpObs => "sharp-obs",
            Command::ResolventScan => "resolvent-scan",
            Command::Quasimode => "quasimode",
            Command::Witness => "witness",
            Command::Control => "control",
            Command::Damped => "damped",
            Command::NormalForm => "normal-form",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

/// One Fourier amplitude of a state, `u_k = re + i·im`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeAmplitude {
    pub k1: i32,
    pub k2: i32,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    /// Explicit amplitudes; when empty a seeded random state on `|k|_∞ ≤
    /// random_band` is used.
    #[serde(default)]
    pub modes: Vec<ModeAmplitude>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_band")]
    pub random_band: i32,
}

fn default_seed() -> u64 {
    1
}
fn default_band() -> i32 {
    2
}

impl Default for StateSpec {
    fn default() -> Self {
        StateSpec { modes: Vec::new(), seed: default_seed(), random_band: default_band() }
    }
}

impl StateSpec {
    fn build(&self, basis: ModeBasis) -> Result<ModeVector> {
        let v = if self.modes.is_empty() {
            let mut rng = StdRng::seed_from_u64(self.seed);
            let band = self.random_band;
            ModeVector::from_fn(basis, |k| {
                if k.linf() <= band {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        } else {
            let mut v = ModeVector::zeros(basis);
            for m in &self.modes {
                let i = basis
                    .index(Mode::new(m.k1, m.k2))
                    .ok_or_else(|| Error::Config(format!("state mode ({}, {}) outside the basis", m.k1, m.k2)))?;
                v.coeffs[i] += C64::new(m.re, m.im);
            }
            v
        };
        if v.norm() == 0.0 {
            return Err(Error::Config("state is zero".into()));
        }
        Ok(v.normalized())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MgccBlock {
    pub tol: f64,
}

impl Default for MgccBlock {
    fn default() -> Self {
        MgccBlock { tol: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateBlock {
    pub t_final: f64,
    pub steps: usize,
    pub initial: StateSpec,
    /// Also write the operator as `operator.bin`.
    pub dump_operator: bool,
}

impl Default for SimulateBlock {
    fn default() -> Self {
        SimulateBlock { t_final: 1.0, steps: 100, initial: StateSpec::default(), dump_operator: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObsBlock {
    pub t: f64,
    /// Restrict to the hard window `|h²λ − 1| ≤ rho` when both are given.
    pub h: Option<f64>,
    pub rho: Option<f64>,
}

impl Default for ObsBlock {
    fn default() -> Self {
        ObsBlock { t: 2.0, h: None, rho: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SharpObsBlock {
    pub h_list: Vec<f64>,
    pub rho: f64,
    pub t: f64,
}

impl Default for SharpObsBlock {
    fn default() -> Self {
        SharpObsBlock { h_list: vec![1.0 / 8.0, 1.0 / 12.0, 1.0 / 16.0], rho: 0.3, t: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResolventBlock {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub step: f64,
}

impl Default for ResolventBlock {
    fn default() -> Self {
        ResolventBlock { lambda_min: -400.0, lambda_max: 400.0, step: 10.0 }
    }
}

impl ResolventBlock {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || self.lambda_max < self.lambda_min {
            return Err(Error::Config("invalid lambda grid".into()));
        }
        let n = ((self.lambda_max - self.lambda_min) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.lambda_min + i as f64 * self.step).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuasimodeBlock {
    pub y_star: f64,
    pub b: f64,
    pub hbar_list: Vec<f64>,
    pub grid: usize,
}

impl Default for QuasimodeBlock {
    fn default() -> Self {
        QuasimodeBlock {
            y_star: 0.0,
            b: 1.0,
            hbar_list: vec![0.2, 0.14, 0.1, 0.07, 0.05],
            grid: quasimode::RESIDUAL_GRID,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WitnessBlock {
    pub k_list: Vec<i32>,
    pub t: f64,
    pub y_star: f64,
    pub b: f64,
    pub m: u32,
    pub grid: usize,
    pub samples: usize,
}

impl Default for WitnessBlock {
    fn default() -> Self {
        WitnessBlock { k_list: vec![8, 12, 16, 20], t: 1.0, y_star: 0.0, b: 1.0, m: 48, grid: 1024, samples: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlBlock {
    pub t: f64,
    pub reg: f64,
    pub samples: usize,
    pub initial: StateSpec,
    pub target: StateSpec,
}

impl Default for ControlBlock {
    fn default() -> Self {
        ControlBlock {
            t: 1.0,
            reg: 1e-10,
            samples: 21,
            initial: StateSpec::default(),
            target: StateSpec { seed: 2, ..StateSpec::default() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DampedBlock {
    pub damping: FourierField2D,
    pub dt: f64,
    pub steps: usize,
    pub initial: StateSpec,
}

impl Default for DampedBlock {
    fn default() -> Self {
        DampedBlock { damping: FourierField2D::constant(1.0), dt: 0.2, steps: 100, initial: StateSpec::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormalFormBlock {
    pub alpha: f64,
    pub h_list: Vec<f64>,
    pub n: u32,
}

impl Default for NormalFormBlock {
    fn default() -> Self {
        NormalFormBlock { alpha: 0.3, h_list: vec![1.0 / 32.0, 1.0 / 48.0, 1.0 / 64.0], n: 24 }
    }
}

/// Everything a run can read. Unknown keys are rejected at every level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub a: Option<VectorPotential>,
    #[serde(default)]
    pub v: FourierField2D,
    /// Control region; the full torus when absent.
    #[serde(default)]
    pub region: Option<Region>,
    /// Galerkin half-width.
    #[serde(default = "default_n")]
    pub n: u32,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub mgcc: MgccBlock,
    #[serde(default)]
    pub simulate: SimulateBlock,
    #[serde(default)]
    pub obs: ObsBlock,
    #[serde(default)]
    pub sharp_obs: SharpObsBlock,
    #[serde(default)]
    pub resolvent: ResolventBlock,
    #[serde(default)]
    pub quasimode: QuasimodeBlock,
    #[serde(default)]
    pub witness: WitnessBlock,
    #[serde(default)]
    pub control: ControlBlock,
    #[serde(default)]
    pub damped: DampedBlock,
    #[serde(default)]
    pub normal_form: NormalFormBlock,
}

fn default_n() -> u32 {
    12
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn potential(&self) -> VectorPotential {
        self.a.clone().unwrap_or_else(VectorPotential::zero)
    }

    pub fn region(&self) -> Region {
        self.region.clone().unwrap_or_else(Region::full)
    }

    fn basis(&self) -> ModeBasis {
        ModeBasis::square(self.n)
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub threads: usize,
    pub verify_beyond_cutoff: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl ErrorReport {
    pub fn new(e: &Error) -> Self {
        let kind = match e {
            Error::NonPrimitiveDirection { .. } => "non-primitive-direction",
            Error::EmptyRegion => "empty-region",
            Error::InvalidInput(_) => "invalid-input",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::TruncationRisk { .. } => "truncation-risk",
            Error::NotHermitian { .. } => "not-hermitian",
            Error::EmptyRange => "empty-range",
            Error::Linalg(_) => "linalg",
            Error::Config(_) | Error::Json(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        };
        ErrorReport { kind: kind.into(), message: e.to_string(), exit_code: e.exit_code() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_sha256: String,
    pub versions: std::collections::BTreeMap<String, String>,
    pub wall_time_s: f64,
    pub threads: usize,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub error: Option<ErrorReport>,
}

/// Writes `name` inside `dir` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        f(&mut w)?;
        w.flush()?;
        w.get_ref().sync_all()?;
    }
    fs::rename(&tmp, dir.join(name))?;
    Ok(())
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    opts: &'a RunOptions,
    dir: PathBuf,
    outputs: Vec<String>,
    warnings: Vec<String>,
}

impl Ctx<'_> {
    fn write(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        write_atomic(&self.dir, name, f)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }
}

/// Runs `command` on the config text and writes all artifacts. The manifest
/// is written whether or not the command succeeds.
pub fn run(command: Command, config_text: &str, opts: &RunOptions) -> Result<Manifest> {
    let start = Instant::now();
    let hash = hex(&Sha256::digest(config_text.as_bytes()));
    let cfg = ExperimentConfig::from_json(config_text);
    // Without an explicit --out, a config that fails to parse has no output directory.
    let dir = match (&opts.out, &cfg) {
        (Some(d), _) => d.clone(),
        (None, Ok(c)) => c.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        (None, Err(_)) => return cfg.map(|_| unreachable!("config parse failed")),
    };
    fs::create_dir_all(&dir)?;
    if opts.threads > 0 {
        // The global pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(opts.threads).build_global();
    }
    let (result, outputs, warnings) = match cfg {
        Ok(cfg) => {
            let mut ctx = Ctx { cfg: &cfg, opts, dir: dir.clone(), outputs: Vec::new(), warnings: Vec::new() };
            let r = dispatch(command, &mut ctx);
            (r, ctx.outputs, ctx.warnings)
        }
        Err(e) => (Err(e), Vec::new(), Vec::new()),
    };
    let mut versions = std::collections::BTreeMap::new();
    versions.insert("magobs".to_string(), env!("CARGO_PKG_VERSION").to_string());
    let manifest = Manifest {
        command: command.to_string(),
        config_sha256: hash,
        versions,
        wall_time_s: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
        outputs,
        warnings,
        error: result.as_ref().err().map(ErrorReport::new),
    };
    write_atomic(&dir, "manifest.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)?;
        writeln!(w)?;
        Ok(())
    })?;
    result.map(|_| manifest)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn dispatch(command: Command, ctx: &mut Ctx) -> Result<()> {
    match command {
        Command::CheckMgcc => check_mgcc(ctx),
        Command::Gcc => {
            let report = gcc_check(&ctx.cfg.region());
            ctx.write_json("gcc_report.json", &report)
        }
        Command::Simulate => simulate(ctx),
        Command::ObsConstant => obs_constant(ctx),
        Command::SharpObs => sharp_obs(ctx),
        Command::ResolventScan => resolvent(ctx),
        Command::Quasimode => quasimode_cmd(ctx),
        Command::Witness => witness(ctx),
        Command::Control => control(ctx),
        Command::Damped => damped(ctx),
        Command::NormalForm => normal_form(ctx),
    }
}

fn check_mgcc(ctx: &mut Ctx) -> Result<()> {
    let report = mgcc_check(&ctx.cfg.potential(), &ctx.cfg.region(), ctx.cfg.mgcc.tol, ctx.opts.verify_beyond_cutoff)?;
    ctx.write_json("mgcc_report.json", &report)?;
    ctx.write("mgcc.csv", |w| report.write_csv(w))
}

fn eigen(ctx: &Ctx) -> Result<(spectral::HermitianOperator, spectral::EigenDecomposition)> {
    let op = spectral::assemble(&ctx.cfg.potential(), &ctx.cfg.v, &ctx.cfg.basis())?;
    let eig = spectral::eigendecompose(&op)?;
    Ok((op, eig))
}

fn simulate(ctx: &mut Ctx) -> Result<()> {
    let block = &ctx.cfg.simulate;
    if block.steps == 0 || !(block.t_final > 0.0) {
        return Err(Error::Config("simulate needs positive t_final and steps".into()));
    }
    let (op, eig) = eigen(ctx)?;
    let u0 = block.initial.build(op.basis)?;
    let mut rows = Vec::with_capacity(block.steps + 1);
    for j in 0..=block.steps {
        let t = block.t_final * j as f64 / block.steps as f64;
        let u = spectral::propagate(&eig, &u0, t)?;
        let energy = linalg::inner(&op.entries.dot(&u.coeffs), &u.coeffs).re;
        rows.push((t, u.norm(), energy));
    }
    let dump = block.dump_operator;
    ctx.write("trajectory.csv", |w| {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "norm", "energy"])?;
        for (t, n, e) in &rows {
            wr.write_record([format!("{t:.9}"), format!("{n:.15e}"), format!("{e:.15e}")])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    ctx.write("spectrum.csv", |w| spectral::write_spectrum_csv(&eig.values, w))?;
    if dump {
        ctx.write("operator.bin", |w| op.write_binary(w))?;
    }
    Ok(())
}

fn obs_constant(ctx: &mut Ctx) -> Result<()> {
    let (_, eig) = eigen(ctx)?;
    let region = ctx.cfg.region();
    let mass = obs::region_mass_matrix(&region, &eig.basis);
    let b = &ctx.cfg.obs;
    let g = obs::gramian(&eig, &mass, b.t)?;
    let range = match (b.h, b.rho) {
        (Some(h), Some(rho)) => spectral::spectral_projector(&eig, &ProjectorSpec::hard(h, rho)?)
            .and_then(|p| obs::range_basis(&p.matrix))?,
        (None, None) => CMat::eye(eig.dim()),
        _ => return Err(Error::Config("obs.h and obs.rho must be given together".into())),
    };
    let mut report = obs::observability_constant(&g, &range, b.t, &geometry_label(&region))?;
    report.h = b.h;
    report.rho = b.rho;
    ctx.write("obs.csv", |w| obs::write_obs_csv(std::slice::from_ref(&report), w))
}

fn geometry_label(region: &Region) -> String {
    if region.is_full() {
        "full".into()
    } else {
        format!("{} rect(s), area {:.6}", region.rects().len(), region.area())
    }
}

fn sharp_obs(ctx: &mut Ctx) -> Result<()> {
    let a = ctx.cfg.potential();
    let region = ctx.cfg.region();
    let label = geometry_label(&region);
    let b = &ctx.cfg.sharp_obs;
    let setup = SharpObsSetup {
        a: &a,
        v: &ctx.cfg.v,
        region: &region,
        basis: ctx.cfg.basis(),
        t: b.t,
        rho: b.rho,
        geometry: &label,
    };
    let scan = obs::sharp_obs_experiment(&setup, &b.h_list)?;
    for h in &scan.skipped {
        ctx.warnings.push(format!("empty spectral window at h = {h}"));
    }
    ctx.write("sharp_obs.csv", |w| obs::write_obs_csv(&scan.reports, w))
}

fn resolvent(ctx: &mut Ctx) -> Result<()> {
    let (_, eig) = eigen(ctx)?;
    let mass = obs::region_mass_matrix(&ctx.cfg.region(), &eig.basis);
    let scan = obs::resolvent_scan(&eig, &mass, &ctx.cfg.resolvent.grid()?)?;
    if scan.constants.iter().any(|c| !c.is_finite()) {
        ctx.warnings.push("resolvent constant infinite somewhere on the grid".into());
    }
    ctx.write("resolvent.csv", |w| scan.write_csv(w))
}

fn x_average_profiles(a: &VectorPotential, v: &FourierField2D) -> Result<[crate::CircleFunction; 3]> {
    let dir = Direction::new(1, 0)?;
    let avg = |f: &FourierField2D| directional_average(f, dir).y_profile();
    Ok([avg(&a.a1)?, avg(&a.a2)?, avg(&a.norm_sqr().add(v))?])
}

fn quasimode_cmd(ctx: &mut Ctx) -> Result<()> {
    let b = &ctx.cfg.quasimode;
    let [a1, a2, w] = x_average_profiles(&ctx.cfg.potential(), &ctx.cfg.v)?;
    let params = quasimode::extract_params(&a1, &a2, &w, b.y_star, b.b)?;
    let scan = quasimode::residual_scan(&params, &b.hbar_list, b.grid)?;
    let hbar = *b.hbar_list.last().expect("scan checked length");
    let mut sol = quasimode::build_wkb(&params, hbar)?;
    sol.residuals = scan.records.clone();
    for r in &scan.records {
        if r.exterior_mass > 1e-12 {
            ctx.warnings.push(format!("exterior mass {:.3e} at hbar = {}", r.exterior_mass, r.hbar));
        }
    }
    ctx.write("quasimode.csv", |w| scan.write_csv(w))?;
    ctx.write_json("wkb_solution.json", &serde_json::json!({ "params": params, "solution": sol, "slope": scan.slope }))
}

fn witness(ctx: &mut Ctx) -> Result<()> {
    let a = ctx.cfg.potential();
    let region = ctx.cfg.region();
    let b = &ctx.cfg.witness;
    let setup = WitnessSetup {
        a: &a,
        v: &ctx.cfg.v,
        region: &region,
        y_star: b.y_star,
        b: b.b,
        t: b.t,
        m: b.m,
        grid: b.grid,
        samples: b.samples,
    };
    let records = quasimode::witness_experiment(&setup, &b.k_list)?;
    for r in &records {
        if r.truncation_loss > 1e-8 {
            ctx.warnings.push(format!("initial datum truncation loss {:.3e} at k = {}", r.truncation_loss, r.k));
        }
    }
    ctx.write("witness.csv", |w| quasimode::write_witness_csv(&records, w))
}

fn control(ctx: &mut Ctx) -> Result<()> {
    let (_, eig) = eigen(ctx)?;
    let mass = obs::region_mass_matrix(&ctx.cfg.region(), &eig.basis);
    let b = &ctx.cfg.control;
    let psi0 = b.initial.build(eig.basis)?;
    let psi1 = b.target.build(eig.basis)?;
    let res = obs::hum_control(&eig, &mass, b.t, &psi0.coeffs, &psi1.coeffs, b.reg, b.samples)?;
    ctx.write("control.csv", |w| res.write_csv(w))?;
    ctx.write_json(
        "control_report.json",
        &serde_json::json!({
            "error": res.error,
            "relative_error": res.relative_error,
            "gramian_min": res.gramian_min,
        }),
    )
}

fn damped(ctx: &mut Ctx) -> Result<()> {
    let (op, _) = eigen(ctx)?;
    let b = &ctx.cfg.damped;
    let m = spectral::damped_operator(&op, &b.damping)?;
    let alpha = spectral::spectral_abscissa(&m)?;
    let psi0: CVec = b.initial.build(op.basis)?.coeffs;
    let trace = spectral::damped_norm_trace(&m, &psi0, b.dt, b.steps)?;
    ctx.write("damped.csv", |w| {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "norm", "bound"])?;
        for (t, n) in &trace {
            wr.write_record([
                format!("{t:.9}"),
                format!("{n:.15e}"),
                format!("{:.15e}", 1.5 * (-0.9 * alpha * t).exp()),
            ])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    ctx.write_json("damped_report.json", &serde_json::json!({ "abscissa": alpha }))
}

fn normal_form(ctx: &mut Ctx) -> Result<()> {
    let b = &ctx.cfg.normal_form;
    let scan = normal_form_scan(&ctx.cfg.potential(), b.alpha, &b.h_list, b.n)?;
    ctx.write("normal_form.csv", |w| {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["h", "alpha", "remainder_norm"])?;
        for r in &scan.records {
            wr.write_record([format!("{:.12}", r.h), format!("{}", r.alpha), format!("{:.12e}", r.remainder_norm)])?;
        }
        wr.flush()?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.as_str().parse::<Command>().unwrap(), c);
        }
        assert!("nope".parse::<Command>().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = ExperimentConfig::from_json(r#"{"n": 4, "bogus": 1}"#).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = ExperimentConfig::from_json(r#"{"obs": {"t": 1.0, "x": 2}}"#).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn lambda_grid() {
        let g = ResolventBlock::default().grid().unwrap();
        assert_eq!(g.len(), 81);
        assert_eq!(g[0], -400.0);
        assert_eq!(g[80], 400.0);
    }
}
