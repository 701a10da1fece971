//! Command-line driver: one TOML configuration, sequential stages, CSV and JSON
//! artifacts plus a manifest tying every artifact to the configuration hash.

use crate::boundary::{audit, CurveSpec, Diagnostic, HodographBoundary};
use crate::error::{Error, Result};
use crate::hodograph_solver::{solve_auto, IterationState, Seed, Solution, SolveOptions, WzField};
use crate::physical_recovery::{physical_lattice, ForwardMap, OdeOptions};
use crate::thermo::{canonical_law, canonical_params, BernoulliSpec, PressureLaw, Thermo, ThermoParams, ThermoTable};
use crate::verify::{run_suite, SuiteOptions, SuiteReport, Verdict};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceState {
    pub rho: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EosConfig {
    #[serde(flatten)]
    pub law: PressureLaw,
    pub kappa0: f64,
    pub n0: f64,
    pub rho0: f64,
    /// Density interval on which the law is validated and the sonic root is sought.
    pub rho_range: [f64; 2],
    /// Bernoulli constant; exclusive with `reference`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bernoulli: Option<f64>,
    /// State `(rho, q)` fixing the Bernoulli constant; exclusive with `bernoulli`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableConfig {
    /// Upper end of the tabulated `t` range.
    pub t_max: f64,
    /// Rows of the table dump.
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Patch size; absent means automatic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub n_v: usize,
    pub n_chi: usize,
    pub tol: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    /// Characteristic ODE step; absent means half the solver step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_ode: Option<f64>,
    /// Forward-map sample lattice used to seed inversions.
    pub forward: [usize; 2],
    /// `(t, chi)` lattice of the physical field dump.
    pub lattice: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub levels: Vec<usize>,
    pub lattice: usize,
    pub queries: usize,
    pub perturbation: f64,
}

/// The whole run, one file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub seed: u64,
    pub eos: EosConfig,
    pub table: TableConfig,
    pub boundary: CurveSpec,
    pub solver: SolverConfig,
    pub recovery: RecoveryConfig,
    pub verify: VerifyConfig,
}

impl RunConfig {
    /// The shipped default, also in `configs/canonical.toml`.
    pub fn canonical() -> RunConfig {
        let p = canonical_params();
        let reference = match p.bernoulli {
            BernoulliSpec::Reference { rho_ref, q_ref } => Some(ReferenceState { rho: rho_ref, q: q_ref }),
            BernoulliSpec::Constant(_) => None,
        };
        RunConfig {
            output_dir: PathBuf::from("out"),
            seed: 1,
            eos: EosConfig {
                law: canonical_law(),
                kappa0: p.kappa0,
                n0: p.n0,
                rho0: p.rho0,
                rho_range: [p.rho_range.0, p.rho_range.1],
                bernoulli: None,
                reference,
            },
            table: TableConfig { t_max: 0.3, rows: 201 },
            boundary: CurveSpec::canonical(),
            solver: SolverConfig { delta: None, n_v: 129, n_chi: 129, tol: 1e-10, max_iters: 60 },
            recovery: RecoveryConfig { h_ode: None, forward: [17, 17], lattice: [33, 33] },
            verify: VerifyConfig { levels: vec![33, 65, 129], lattice: 13, queries: 100, perturbation: 5.0 },
        }
    }

    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        RunConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the normalized TOML.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.to_toml().as_bytes()))
    }

    /// Schema checks that need no numerics.
    pub fn check(&self) -> Result<()> {
        let e = &self.eos;
        if e.bernoulli.is_some() == e.reference.is_some() {
            return Err(Error::Config("eos needs exactly one of `bernoulli` and `reference`".into()));
        }
        if !(e.kappa0 >= 0.0 && e.n0 > 0.0 && e.rho0 > 0.0) {
            return Err(Error::Config("eos needs kappa0 >= 0, n0 > 0 and rho0 > 0".into()));
        }
        if !(e.rho_range[0] > 0.0 && e.rho_range[1] > e.rho_range[0]) {
            return Err(Error::Config(format!("eos.rho_range {:?} is empty", e.rho_range)));
        }
        if !(self.boundary.x_c > self.boundary.x_b && self.boundary.y_a < self.boundary.y_b) {
            return Err(Error::Config("boundary intervals need x_c > x_b and y_a < y_b".into()));
        }
        let s = &self.solver;
        if s.n_v < 5 || s.n_chi < 5 {
            return Err(Error::Config("solver grid needs at least 5 nodes per axis".into()));
        }
        if !(s.tol > 0.0) || s.max_iters == 0 {
            return Err(Error::Config("solver tol and max_iters must be positive".into()));
        }
        if let Some(d) = s.delta {
            if !(d > 0.0) {
                return Err(Error::Config(format!("solver.delta = {d} must be positive")));
            }
        }
        if self.table.rows < 2 || !(self.table.t_max > 0.0 && self.table.t_max < 1.0) {
            return Err(Error::Config("table needs rows >= 2 and 0 < t_max < 1".into()));
        }
        let r = &self.recovery;
        if r.forward.iter().chain(&r.lattice).any(|&n| n < 2) {
            return Err(Error::Config("recovery lattices need at least 2 nodes per axis".into()));
        }
        let v = &self.verify;
        if v.levels.len() < 2 || v.levels.iter().any(|&n| n < 5) || v.lattice < 5 {
            return Err(Error::Config("verify needs two or more levels of at least 5 nodes and lattice >= 5".into()));
        }
        Ok(())
    }

    pub fn thermo_params(&self) -> ThermoParams {
        let e = &self.eos;
        ThermoParams {
            kappa0: e.kappa0,
            n0: e.n0,
            rho0: e.rho0,
            bernoulli: match (&e.reference, e.bernoulli) {
                (Some(r), _) => BernoulliSpec::Reference { rho_ref: r.rho, q_ref: r.q },
                (None, b) => BernoulliSpec::Constant(b.unwrap_or(f64::NAN)),
            },
            rho_range: (e.rho_range[0], e.rho_range[1]),
        }
    }

    pub fn table(&self) -> Result<ThermoTable> {
        ThermoTable::build(Thermo::new(self.eos.law, &self.thermo_params())?, self.table.t_max)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { tol: self.solver.tol, max_iters: self.solver.max_iters, seed: Seed::Zero, keep_iterates: false }
    }

    pub fn suite_options(&self) -> SuiteOptions {
        let v = &self.verify;
        SuiteOptions {
            seed: self.seed,
            perturbation: v.perturbation,
            queries: v.queries,
            levels: v.levels.clone(),
            lattice: v.lattice,
            forward: (self.recovery.forward[0], self.recovery.forward[1]),
            records: (self.recovery.lattice[0], self.recovery.lattice[1]),
            ..SuiteOptions::default()
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Every hypothesis with its margin; never fails. A configuration that cannot even
/// build the thermodynamics yields a single failing entry.
pub fn validate(cfg: &RunConfig) -> Vec<Diagnostic> {
    let table = match cfg.check().and_then(|_| cfg.table()) {
        Ok(t) => t,
        Err(e) => {
            return vec![Diagnostic { name: "thermodynamics".into(), pass: false, margin: f64::NAN, detail: e.to_string() }]
        }
    };
    let mut spec = cfg.boundary.clone();
    let mut out = Vec::new();
    if spec.fit_corner {
        if let Err(e) = crate::boundary::fit_corner(&mut spec, &table) {
            out.push(Diagnostic { name: "corner-fit".into(), pass: false, margin: f64::NAN, detail: e.to_string() });
        }
    }
    out.extend(audit(&spec, &table).diagnostics);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Stage {
    /// Thermodynamic table along the Bernoulli curve.
    Tables,
    /// Hodograph boundary data.
    Boundary,
    /// Picard iteration and the (t, r) field.
    Solve,
    /// Physical-plane field.
    Recover,
    /// Audit suite.
    Verify,
    /// Every stage.
    All,
    /// Hypothesis diagnostics only.
    Validate,
    /// Print the canonical configuration.
    Canonical,
}

impl Stage {
    fn name(&self) -> &'static str {
        match self {
            Stage::Tables => "tables",
            Stage::Boundary => "boundary",
            Stage::Solve => "solve",
            Stage::Recover => "recover",
            Stage::Verify => "verify",
            Stage::All => "all",
            Stage::Validate => "validate",
            Stage::Canonical => "canonical",
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Stage::Tables => 0,
            Stage::Boundary => 1,
            Stage::Solve => 2,
            Stage::Recover => 3,
            Stage::Verify | Stage::All => 4,
            Stage::Validate | Stage::Canonical => 0,
        }
    }

    /// Whether this invocation writes the artifacts of pipeline stage `s`.
    fn writes(&self, s: Stage) -> bool {
        *self == Stage::All || *self == s
    }
}

#[derive(Debug, Parser)]
#[command(name = "rmhd-sonic", version, about = "Sonic-supersonic patches of steady relativistic MHD")]
pub struct Cli {
    #[command(subcommand)]
    pub stage: Stage,
    /// TOML configuration; the canonical one when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Solver nodes as `N_VxN_CHI`.
    #[arg(long, global = true, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Also write every Picard iterate.
    #[arg(long, global = true)]
    pub emit_iterations: bool,
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("grid `{s}` is not NxM"))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("grid `{s}`: {e}"));
    Ok((p(a)?, p(b)?))
}

impl Cli {
    /// The configuration after applying flag overrides.
    pub fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::canonical(),
        };
        if let Some(d) = &self.out_dir {
            cfg.output_dir = d.clone();
        }
        if let Some(d) = self.delta {
            cfg.solver.delta = Some(d);
        }
        if let Some((a, b)) = self.grid {
            cfg.solver.n_v = a;
            cfg.solver.n_chi = b;
        }
        if let Some(t) = self.tol {
            cfg.solver.tol = t;
        }
        if let Some(m) = self.max_iters {
            cfg.solver.max_iters = m;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.check()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub stage: &'static str,
    pub config_hash: String,
    pub status: String,
    pub artifacts: Vec<ArtifactEntry>,
}

/// Writes artifacts into the output directory and remembers them for the manifest.
struct Sink {
    dir: PathBuf,
    written: Vec<ArtifactEntry>,
}

impl Sink {
    fn new(dir: &Path) -> Result<Sink> {
        std::fs::create_dir_all(dir)?;
        Ok(Sink { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn bytes(&mut self, name: &str, data: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, data)?;
        self.written.push(ArtifactEntry { path: name.into(), sha256: hex(&Sha256::digest(data)), bytes: data.len() });
        Ok(())
    }

    fn csv<R: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = R>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let data = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        self.bytes(name, &data)
    }

    fn csv_header(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.iter().map(|v| format!("{v:?}")))?;
        }
        let data = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        self.bytes(name, &data)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut data = serde_json::to_vec_pretty(value)?;
        data.push(b'\n');
        self.bytes(name, &data)
    }

    /// Renames everything written so far with a `.partial` suffix.
    fn mark_partial(&mut self) {
        for a in &mut self.written {
            let from = self.dir.join(&a.path);
            let to = self.dir.join(format!("{}.partial", a.path));
            if std::fs::rename(&from, &to).is_ok() {
                a.path = format!("{}.partial", a.path);
            }
        }
    }
}

/// Summary written to `report.json`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub stage: String,
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<StageError>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<TableSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundarySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recover: Option<RecoverSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<SuiteReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub verdicts: Vec<Verdict>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableSummary {
    pub bernoulli: f64,
    pub rho_star: f64,
    pub limit_speed: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundarySummary {
    pub r1: f64,
    pub r2: f64,
    pub t0: f64,
    pub chi_max: f64,
    pub eps0: f64,
    pub psi: Vec<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub delta: f64,
    pub n_v: usize,
    pub n_chi: usize,
    pub iterations: usize,
    pub ratio_fit: f64,
    pub m_hat: f64,
    pub k_delta: f64,
    pub seconds: f64,
    pub attempts: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoverSummary {
    pub records: usize,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub t_floor: f64,
}

/// Outcome of one invocation.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub manifest: Manifest,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match (&self.report.error, self.report.verdicts.iter().all(|v| v.pass)) {
            (Some(_), _) => 1,
            (None, false) => 3,
            (None, true) => 0,
        }
    }
}

struct Run<'a> {
    cfg: &'a RunConfig,
    stage: Stage,
    emit_iterations: bool,
    sink: Sink,
    report: Report,
}

impl Run<'_> {
    fn step<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> std::result::Result<T, StageError> {
        f(self).map_err(|e| StageError { stage: name.into(), message: e.to_string() })
    }

    fn pipeline(&mut self) -> std::result::Result<(), StageError> {
        let stage = self.stage;
        let table = self.step("tables", |r| {
            let table = r.cfg.table()?;
            r.report.table = Some(TableSummary {
                bernoulli: table.thermo.b,
                rho_star: table.thermo.rho_star,
                limit_speed: table.thermo.limit_speed()?,
                t_max: table.t_max,
            });
            if stage.writes(Stage::Tables) {
                let rows = table.rows(r.cfg.table.rows)?;
                r.sink.csv("table.csv", rows)?;
            }
            Ok(table)
        })?;
        if stage.rank() < 1 {
            return Ok(());
        }
        let hb = self.step("boundary", |r| {
            let hb = HodographBoundary::build(&r.cfg.boundary, &table);
            r.report.diagnostics = validate(r.cfg);
            let hb = hb?;
            r.report.boundary = Some(BoundarySummary {
                r1: hb.r1,
                r2: hb.r2,
                t0: hb.t0,
                chi_max: hb.chi_max,
                eps0: hb.eps0,
                psi: hb.spec.psi.clone(),
                warnings: hb.warnings.clone(),
            });
            if stage.writes(Stage::Boundary) {
                write_boundary(&mut r.sink, &hb)?;
            }
            Ok(hb)
        })?;
        if stage.rank() < 2 {
            return Ok(());
        }
        let (sol, field) = self.step("solve", |r| {
            let mut opts = r.cfg.solve_options();
            opts.keep_iterates = r.emit_iterations && stage.writes(Stage::Solve);
            let s = &r.cfg.solver;
            let clock = std::time::Instant::now();
            let (sol, field, attempts) = solve_auto(&hb, s.delta, s.n_v, s.n_chi, &opts).inspect_err(|e| {
                let _ = r.sink.bytes("solve.log", format!("{e}\n").as_bytes());
            })?;
            let seconds = clock.elapsed().as_secs_f64();
            r.report.solve = Some(SolveSummary {
                delta: sol.grid.delta,
                n_v: sol.grid.n_v,
                n_chi: sol.grid.n_chi,
                iterations: sol.history.len(),
                ratio_fit: sol.ratio_fit,
                m_hat: sol.m_hat,
                k_delta: sol.k_delta,
                seconds,
                attempts: attempts.clone(),
            });
            if stage.writes(Stage::Solve) {
                r.sink.bytes("solve.log", (attempts.join("\n") + "\n").as_bytes())?;
                write_solution(&mut r.sink, &sol, &field)?;
            }
            Ok((sol, field))
        })?;
        if stage.rank() < 3 {
            return Ok(());
        }
        self.step("recover", |r| {
            let mut ode = OdeOptions::for_field(&field);
            if let Some(h) = r.cfg.recovery.h_ode {
                ode.h_ode = h;
            }
            let [nt, nc] = r.cfg.recovery.lattice;
            let records = physical_lattice(&field, nt, nc, ode)?;
            let range = |f: &dyn Fn(&crate::physical_recovery::PhysicalRecord) -> f64| {
                records.iter().map(f).fold([f64::INFINITY, f64::NEG_INFINITY], |a, v| [a[0].min(v), a[1].max(v)])
            };
            r.report.recover = Some(RecoverSummary {
                records: records.len(),
                x_range: range(&|p| p.x),
                y_range: range(&|p| p.y),
                t_floor: ForwardMap::build(&field, 2, 2, ode)?.t_floor,
            });
            if stage.writes(Stage::Recover) {
                r.sink.csv("physical.csv", &records)?;
            }
            Ok(())
        })?;
        if stage.rank() < 4 {
            return Ok(());
        }
        self.step("verify", |r| {
            let suite = run_suite(&hb, &sol, &field, &r.cfg.solve_options(), &r.cfg.suite_options())?;
            r.report.verdicts = suite.verdicts();
            let rows: Vec<ResidualRow> = suite
                .residuals
                .entries
                .iter()
                .flat_map(|e| {
                    e.levels.iter().map(move |l| ResidualRow { name: e.name.clone(), h: l.h, linf: l.linf, l2: l.l2, samples: l.samples, order: e.order })
                })
                .collect();
            r.sink.csv("residuals.csv", rows)?;
            r.report.verify = Some(suite);
            Ok(())
        })?;
        Ok(())
    }
}

#[derive(Serialize)]
struct ResidualRow {
    name: String,
    h: f64,
    linf: f64,
    l2: f64,
    samples: usize,
    order: f64,
}

fn write_boundary(sink: &mut Sink, hb: &HodographBoundary) -> Result<()> {
    let sonic = hb.sonic();
    let n = 201;
    let rows = (0..n)
        .map(|k| {
            let r = hb.r1 + (hb.r2 - hb.r1) * k as f64 / (n - 1) as f64;
            Ok(vec![r, sonic.a0_hat(r)?, sonic.a1_hat(r)?])
        })
        .collect::<Result<Vec<_>>>()?;
    sink.csv_header("sonic.csv", &["r", "a0hat", "a1hat"], rows)?;
    let cc = hb.characteristic();
    let rows = (0..n)
        .map(|k| {
            let t = hb.t0 * k as f64 / (n - 1) as f64;
            Ok(vec![t, cc.b0_bar(t)?])
        })
        .collect::<Result<Vec<_>>>()?;
    sink.csv_header("characteristic.csv", &["t", "b0bar"], rows)
}

fn state_rows(sol: &Solution, st: &IterationState) -> Vec<Vec<f64>> {
    let g = sol.grid;
    (0..g.n_v)
        .flat_map(|i| (0..g.n_chi).map(move |j| (i, j)))
        .map(|(i, j)| vec![g.v(i), g.chi(j), st.u[i * g.n_chi + j], st.v[i * g.n_chi + j]])
        .collect()
}

fn write_solution(sink: &mut Sink, sol: &Solution, field: &WzField) -> Result<()> {
    let header = ["upsilon", "chi", "U", "V"];
    let fin = IterationState { k: sol.history.len(), u: sol.u.clone(), v: sol.v.clone() };
    sink.csv_header("solution.csv", &header, state_rows(sol, &fin))?;
    for st in &sol.iterates {
        sink.csv_header(&format!("iterations/iter_{:03}.csv", st.k), &header, state_rows(sol, st))?;
    }
    sink.csv_header("field.csv", &["t", "r", "W", "Z"], field.rows().into_iter().map(|r| r.to_vec()))?;
    sink.csv("history.csv", &sol.history)
}

/// Runs one stage (with its prerequisites) and writes `report.json` and `manifest.json`.
/// On a stage error every artifact already written is renamed with `.partial`.
pub fn run(cfg: &RunConfig, stage: Stage, emit_iterations: bool) -> Result<Outcome> {
    let hash = cfg.hash();
    let mut run = Run {
        cfg,
        stage,
        emit_iterations,
        sink: Sink::new(&cfg.output_dir)?,
        report: Report { stage: stage.name().into(), config_hash: hash.clone(), ..Report::default() },
    };
    run.sink.bytes("config.toml", cfg.to_toml().as_bytes())?;
    match stage {
        Stage::Validate => run.report.diagnostics = validate(cfg),
        Stage::Canonical => {}
        _ => {
            if let Err(e) = run.pipeline() {
                run.report.error = Some(e);
            }
        }
    }
    let failed = run.report.error.is_some();
    let report = run.report;
    let mut sink = run.sink;
    sink.json("report.json", &report)?;
    if failed {
        sink.mark_partial();
    }
    let status = match &report.error {
        Some(e) => format!("failed in {}: {}", e.stage, e.message),
        None if report.verdicts.iter().any(|v| !v.pass) => "completed with failing checks".into(),
        None => "ok".into(),
    };
    let manifest = Manifest {
        tool: "rmhd-sonic",
        version: env!("CARGO_PKG_VERSION"),
        stage: stage.name(),
        config_hash: hash,
        status,
        artifacts: sink.written.clone(),
    };
    sink.json("manifest.json", &manifest)?;
    Ok(Outcome { report, manifest })
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match cli.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("rmhd-sonic: {e}");
            return 2;
        }
    };
    if cli.stage == Stage::Canonical {
        print!("{}", RunConfig::canonical().to_toml());
        return 0;
    }
    match run(&cfg, cli.stage, cli.emit_iterations) {
        Ok(out) => {
            if let Some(e) = &out.report.error {
                eprintln!("rmhd-sonic: stage {} failed: {}", e.stage, e.message);
            }
            for d in out.report.diagnostics.iter().filter(|_| cli.stage == Stage::Validate) {
                println!("{} {:24} margin {:>12.4e}  {}", if d.pass { "PASS" } else { "FAIL" }, d.name, d.margin, d.detail);
            }
            for v in &out.report.verdicts {
                println!("{} [{}] {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.criterion, v.name, v.detail);
            }
            println!("{}: {}", out.manifest.stage, out.manifest.status);
            out.exit_code()
        }
        Err(e) => {
            eprintln!("rmhd-sonic: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trips_through_toml() {
        let c = RunConfig::canonical();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn shipped_file_is_canonical() {
        let text = include_str!("../configs/canonical.toml");
        assert_eq!(RunConfig::from_toml(text).unwrap(), RunConfig::canonical());
    }

    #[test]
    fn bernoulli_choice_is_exclusive() {
        let mut c = RunConfig::canonical();
        c.eos.bernoulli = Some(1.2);
        assert!(matches!(c.check(), Err(Error::Config(_))));
        c.eos.reference = None;
        c.check().unwrap();
        c.eos.bernoulli = None;
        assert!(c.check().is_err());
    }

    #[test]
    fn grid_flag() {
        assert_eq!(parse_grid("65x33"), Ok((65, 33)));
        assert!(parse_grid("65").is_err());
    }

    #[test]
    fn validate_flags_forced_violations() {
        let c = RunConfig::canonical();
        let d = validate(&c);
        assert!(d.iter().all(|d| d.pass), "{d:?}");
        assert!(d.iter().any(|d| d.name == "eps0-positive" && d.margin > 0.0));

        let mut flat = c.clone();
        flat.boundary.theta_hat = vec![0.0, 0.0];
        assert!(validate(&flat).iter().any(|d| d.name == "theta-hat-decreasing" && !d.pass));
    }
}
