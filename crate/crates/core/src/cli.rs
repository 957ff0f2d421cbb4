//! Command-line front end: convergence studies, benchmarks and spectra.
//!
//! Exit codes: 0 success, 1 solver or I/O failure, 2 failed `--check`,
//! 3 violated resonance assumption, 64 usage or configuration error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::assembly::DivergenceMode;
use crate::benchmarks::{self, BenchmarkFields, BenchmarkKind};
use crate::fespace::DofLayout;
use crate::linsolve::{Method, SolveOptions};
use crate::mesh::{BoundaryConfig, Mesh};
use crate::mms::{self, ErrorReport, StudyOptions};
use crate::params::{lame_from_e_nu, ProblemParams, TensorField, ValidationMode};
use crate::{export, spectral, Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CHECK: i32 = 2;
pub const EXIT_ASSUMPTION: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "thermoporo", version, about = "Frequency-domain thermo-poroelasticity with mixed finite elements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Manufactured-solution convergence study.
    Converge(ConvergeArgs),
    /// Cantilever bracket or layered domain benchmark.
    Benchmark(BenchmarkArgs),
    /// Elasticity eigenvalues and the resonance check.
    Spectrum(SpectrumArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Flat `key = value` TOML file with parameter values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one value, e.g. `--set lambda=1e6` or `--set mesh=8,16`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = SolverArg::Lu)]
    pub solver: SolverArg,
    /// Relative residual required of every linear solve.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverArg {
    Lu,
    Realified,
    Gmres,
}

impl From<SolverArg> for Method {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Lu => Method::ComplexLu,
            SolverArg::Realified => Method::RealifiedLu,
            SolverArg::Gmres => Method::Gmres,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivergenceArg {
    Reduced,
    Full,
}

impl From<DivergenceArg> for DivergenceMode {
    fn from(d: DivergenceArg) -> Self {
        match d {
            DivergenceArg::Reduced => DivergenceMode::Reduced,
            DivergenceArg::Full => DivergenceMode::Full,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    #[value(name = "table-lambda1e6")]
    TableLambda1e6,
    #[value(name = "table-a0b0c0")]
    TableA0b0c0,
    #[value(name = "table-omega25")]
    TableOmega25,
    #[value(name = "table-delta0")]
    TableDelta0,
    #[value(name = "delta-theta")]
    DeltaTheta,
}

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Grid resolutions, increasing powers of two.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Compare against the reference table of the preset; exit 2 on
    /// mismatch.
    #[arg(long)]
    pub check: bool,
    #[arg(long, value_enum, default_value_t = DivergenceArg::Reduced)]
    pub divergence: DivergenceArg,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    /// `cantilever` or `layered`.
    pub name: String,
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    /// Frequencies (default 1 for the cantilever, 1,5,25 for layered).
    #[arg(long, value_delimiter = ',')]
    pub omega: Option<Vec<f64>>,
    /// Also write legacy VTK files.
    #[arg(long)]
    pub vtk: bool,
    /// Leave the cantilever temperature unpinned.
    #[arg(long)]
    pub no_pin: bool,
    /// Exit 2 if an oscillation metric exceeds its bound.
    #[arg(long)]
    pub check: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Number of eigenvalues.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Frequency for the resonance check (defaults to the parameter value).
    #[arg(long)]
    pub omega: Option<f64>,
    /// Minimum admissible `|ω² − κ|`.
    #[arg(long = "gap-tol", default_value_t = 1e-8)]
    pub gap_tol: f64,
    #[arg(long, value_enum, default_value_t = DivergenceArg::Reduced)]
    pub divergence: DivergenceArg,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Parameters plus the list-valued settings of a config file.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub params: ProblemParams,
    pub mesh: Option<Vec<usize>>,
    pub omega_list: Option<Vec<f64>>,
}

/// Sets one scalar parameter by its symbol.
pub fn set_param(p: &mut ProblemParams, key: &str, v: f64) -> Result<()> {
    match key {
        "omega" => p.omega = v,
        "rho_s" => p.rho_s = v,
        "rho_f" => p.rho_f = v,
        "phi" => p.phi = v,
        "a" => p.tortuosity = v,
        "lambda" => p.lambda = v,
        "mu" => p.mu = v,
        "alpha" => p.alpha = v,
        "beta" => p.beta = v,
        "a0" => p.a0 = v,
        "b0" => p.b0 = v,
        "c0" => p.c0 = v,
        "tau" => p.tau = v,
        "k" => p.permeability = TensorField::Isotropic(v),
        "theta" => p.conductivity = TensorField::Isotropic(v),
        "delta" => p.delta = v,
        _ => return Err(Error::Config(format!("unknown parameter `{key}`"))),
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr>(key: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Config(format!("bad entry `{t}` for `{key}`"))))
        .collect()
}

impl RunConfig {
    pub fn new(params: ProblemParams) -> Self {
        RunConfig { params, mesh: None, omega_list: None }
    }

    /// Applies `(key, value)` pairs in order. `E` and `nu` must come
    /// together and set `λ, μ`.
    fn apply(&mut self, pairs: Vec<(String, String)>) -> Result<()> {
        let mut e_nu = (None, None);
        for (key, value) in pairs {
            match key.as_str() {
                "mesh" => self.mesh = Some(parse_list(&key, &value)?),
                "omega_list" => self.omega_list = Some(parse_list(&key, &value)?),
                "E" => e_nu.0 = Some(parse_list::<f64>(&key, &value)?[0]),
                "nu" => e_nu.1 = Some(parse_list::<f64>(&key, &value)?[0]),
                _ => {
                    let v: f64 = value.trim().parse().map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))?;
                    set_param(&mut self.params, &key, v)?;
                }
            }
        }
        match e_nu {
            (Some(e), Some(nu)) => (self.params.lambda, self.params.mu) = lame_from_e_nu(e, nu).map_err(|e| Error::Config(e.to_string()))?,
            (None, None) => {}
            _ => return Err(Error::Config("`E` and `nu` must be given together".into())),
        }
        Ok(())
    }

    /// Applies a TOML file, then `--set` overrides.
    pub fn load(mut self, common: &CommonArgs) -> Result<Self> {
        if let Some(path) = &common.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let table: toml::Table = text.parse().map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let mut pairs = Vec::new();
            for (k, v) in table {
                let s = match v {
                    toml::Value::Float(f) => f.to_string(),
                    toml::Value::Integer(i) => i.to_string(),
                    toml::Value::Array(a) => a
                        .iter()
                        .map(|x| match x {
                            toml::Value::Float(f) => Ok(f.to_string()),
                            toml::Value::Integer(i) => Ok(i.to_string()),
                            _ => Err(Error::Config(format!("`{k}` must be a list of numbers"))),
                        })
                        .collect::<Result<Vec<_>>>()?
                        .join(","),
                    _ => return Err(Error::Config(format!("`{k}` must be a number or a list of numbers"))),
                };
                pairs.push((k, s));
            }
            self.apply(pairs)?;
        }
        let mut pairs = Vec::new();
        for o in &common.overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| Error::Config(format!("`--set {o}`: expected KEY=VALUE")))?;
            pairs.push((k.trim().to_string(), v.to_string()));
        }
        self.apply(pairs)?;
        self.params.check_invariants().map_err(|e| Error::Config(e.to_string()))?;
        Ok(self)
    }
}

/// Reference error table `(1/h, [e_u, e_w, e_p, e_T])`.
pub type ReferenceTable = &'static [(usize, [f64; 4])];

pub const TABLE_LAMBDA1E6: ReferenceTable = &[
    (8, [1.348e0, 2.595e-1, 6.536e-2, 4.329e-1]),
    (16, [6.629e-1, 1.304e-1, 3.277e-2, 2.181e-1]),
    (32, [3.300e-1, 6.529e-2, 1.640e-2, 1.092e-1]),
    (64, [1.648e-1, 3.265e-2, 8.199e-3, 5.465e-2]),
    (128, [8.238e-2, 1.633e-2, 4.100e-3, 2.733e-2]),
];

/// Shared by the `a0 = b0 = c0 = 0` table and its `δ = 0` variant.
pub const TABLE_A0B0C0: ReferenceTable = &[
    (8, [1.339e0, 2.910e-1, 6.536e-2, 4.329e-1]),
    (16, [6.578e-1, 1.479e-1, 3.277e-2, 2.181e-1]),
    (32, [3.273e-1, 7.431e-2, 1.640e-2, 1.092e-1]),
    (64, [1.635e-1, 3.720e-2, 8.199e-3, 5.465e-2]),
    (128, [8.171e-2, 1.861e-2, 4.100e-3, 2.733e-2]),
];

pub const TABLE_OMEGA25: ReferenceTable = &[
    (8, [1.351e0, 3.180e-1, 1.975e-1, 4.733e-1]),
    (16, [6.593e-1, 1.514e-1, 5.680e-2, 2.238e-1]),
    (32, [3.275e-1, 7.475e-2, 2.008e-2, 1.100e-1]),
    (64, [1.635e-1, 3.726e-2, 8.696e-3, 5.474e-2]),
    (128, [8.171e-2, 1.861e-2, 4.163e-3, 2.734e-2]),
];

/// Pressure rates of the `ω = 25` table, by `1/h` of the finer level.
pub const OMEGA25_P_RATES: &[(usize, f64)] = &[(16, 1.80), (32, 1.50), (64, 1.21), (128, 1.06)];

/// Conductivities and stabilization parameters of the sweep.
pub const SWEEP_THETA: [f64; 8] = [1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0];
pub const SWEEP_DELTA: [f64; 5] = [0.0, 0.001, 0.01, 0.1, 1.0];

/// One convergence study of a run.
#[derive(Clone, Debug)]
pub struct Job {
    pub label: String,
    pub params: ProblemParams,
}

/// Parameter sets of a preset, default resolutions and reference table.
pub fn preset_jobs(preset: Preset) -> (Vec<Job>, Vec<usize>, Option<ReferenceTable>) {
    let base = ProblemParams::table_defaults();
    let one = |label: &str, params| vec![Job { label: label.into(), params }];
    let levels = vec![8, 16, 32, 64];
    match preset {
        Preset::TableLambda1e6 => {
            (one("table-lambda1e6", ProblemParams { lambda: 1e6, ..base }), levels, Some(TABLE_LAMBDA1E6))
        }
        Preset::TableA0b0c0 => (
            one("table-a0b0c0", ProblemParams { a0: 0.0, b0: 0.0, c0: 0.0, ..base }),
            levels,
            Some(TABLE_A0B0C0),
        ),
        Preset::TableOmega25 => {
            (one("table-omega25", ProblemParams { omega: 25.0, ..base }), vec![8, 16, 32, 64, 128], Some(TABLE_OMEGA25))
        }
        Preset::TableDelta0 => (
            one("table-delta0", ProblemParams { a0: 0.0, b0: 0.0, c0: 0.0, delta: 0.0, ..base }),
            levels,
            Some(TABLE_A0B0C0),
        ),
        Preset::DeltaTheta => {
            let (lambda, mu) = lame_from_e_nu(10.0, 0.499).expect("valid Lamé data");
            let mut jobs = Vec::new();
            for theta in SWEEP_THETA {
                for delta in SWEEP_DELTA {
                    jobs.push(Job {
                        label: format!("delta-theta-theta{theta:e}-delta{delta}"),
                        params: ProblemParams {
                            lambda,
                            mu,
                            a0: 0.0,
                            b0: 0.0,
                            c0: 0.0,
                            tau: 0.0,
                            permeability: TensorField::Isotropic(1e-4),
                            conductivity: TensorField::Isotropic(theta),
                            delta,
                            ..base.clone()
                        },
                    });
                }
            }
            (jobs, levels, None)
        }
    }
}

/// Short hash of everything that determines a run's numbers.
pub fn config_hash(parts: &[&dyn std::fmt::Debug]) -> String {
    let mut s = String::new();
    for p in parts {
        let _ = write!(s, "{p:?}|");
    }
    hex::encode(&Sha256::digest(s.as_bytes())[..6])
}

/// Table mismatches; empty when the check passes.
pub fn check_report(report: &ErrorReport, reference: ReferenceTable, tol: f64, preset: Preset) -> Vec<String> {
    let mut bad = Vec::new();
    let names = ["e_u", "e_w", "e_p", "e_T"];
    let mut matched = 0;
    for row in &report.rows {
        let inv = (1.0 / row.h).round() as usize;
        let Some((_, want)) = reference.iter().find(|(n, _)| *n == inv) else { continue };
        matched += 1;
        for (k, (got, want)) in row.errors().iter().zip(want).enumerate() {
            if ((got - want) / want).abs() > tol {
                bad.push(format!("1/{inv} {}: {got:.3e} vs {want:.3e}", names[k]));
            }
        }
    }
    if matched == 0 {
        bad.push("no resolution in common with the reference table".into());
    }
    let rates = report.rates();
    match preset {
        Preset::TableOmega25 => {
            for (row, r) in report.rows.iter().zip(&rates) {
                let inv = (1.0 / row.h).round() as usize;
                let (Some(r), Some((_, want))) = (r, OMEGA25_P_RATES.iter().find(|(n, _)| *n == inv)) else { continue };
                if (r[2] - want).abs() > 0.15 {
                    bad.push(format!("1/{inv} pressure rate {:.2} vs {want:.2}", r[2]));
                }
            }
        }
        _ => {
            if let Some(Some(r)) = rates.last() {
                for (k, v) in r.iter().enumerate() {
                    if !(0.95..=1.05).contains(v) {
                        bad.push(format!("finest {} rate {v:.2} outside [0.95, 1.05]", names[k]));
                    }
                }
            }
        }
    }
    bad
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    log::info!("writing {}", path.display());
    Ok(BufWriter::new(File::create(path)?))
}

fn solve_options(common: &CommonArgs) -> SolveOptions {
    SolveOptions { method: common.solver.into(), tol: common.tol, ..SolveOptions::default() }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) => EXIT_USAGE,
        Error::AssumptionViolated(_) => EXIT_ASSUMPTION,
        _ => EXIT_FAILURE,
    }
}

pub fn cmd_converge(args: &ConvergeArgs) -> Result<i32> {
    let (jobs, default_levels, reference) = match args.preset {
        Some(p) => preset_jobs(p),
        None => (vec![Job { label: "converge".into(), params: ProblemParams::table_defaults() }], vec![8, 16, 32, 64], None),
    };
    let mut jobs_cfg = Vec::new();
    let mut mesh = None;
    for job in jobs {
        let cfg = RunConfig::new(job.params).load(&args.common)?;
        mesh = mesh.or(cfg.mesh.clone());
        jobs_cfg.push(Job { label: job.label, params: cfg.params });
    }
    let levels = args.n.clone().or(mesh).unwrap_or(default_levels);
    if levels.is_empty() {
        return Err(Error::Config("empty mesh list".into()));
    }
    if args.check && reference.is_none() {
        return Err(Error::Config("--check needs a table preset".into()));
    }
    for job in &jobs_cfg {
        let report = job.params.validate(ValidationMode::Experimental)?;
        for w in &report.warnings {
            log::warn!("{}: {w}", job.label);
        }
    }
    let opts = StudyOptions { solve: solve_options(&args.common), divergence: args.divergence.into() };
    let results: Vec<Result<ErrorReport>> =
        jobs_cfg.par_iter().map(|job| mms::convergence_study(&job.params, &levels, &opts)).collect();
    let mut code = EXIT_OK;
    let mut summary = Vec::new();
    for (job, res) in jobs_cfg.iter().zip(results) {
        let report = res?;
        let hash = config_hash(&[&job.params, &levels, &opts.divergence]);
        report.write_csv(create(&args.common.out, &format!("{}-{hash}.csv", job.label))?)?;
        println!("{}", job.label);
        print!("{}", report.format_table());
        summary.push((job, report.clone()));
        if args.check {
            let preset = args.preset.expect("checked above");
            let tol = if preset == Preset::TableOmega25 { 0.15 } else { 0.10 };
            let bad = check_report(&report, reference.expect("checked above"), tol, preset);
            if bad.is_empty() {
                println!("check: OK");
            } else {
                for b in &bad {
                    println!("check: FAIL {b}");
                }
                code = EXIT_CHECK;
            }
        }
    }
    if args.preset == Some(Preset::DeltaTheta) {
        let mut out = create(&args.common.out, "delta-theta.csv")?;
        use std::io::Write;
        writeln!(out, "theta,delta,h,e_T")?;
        for (job, report) in &summary {
            let theta = job.params.conductivity.eval(crate::Point::zeros())[(0, 0)];
            for row in &report.rows {
                writeln!(out, "{theta:e},{},{:.12e},{:.12e}", job.params.delta, row.h, row.e_t)?;
            }
        }
    }
    Ok(code)
}

/// Left-column bound for the cantilever and line bound for the layered
/// problem.
pub const CANTILEVER_METRIC_MAX: f64 = 1.05;
pub const LAYERED_METRIC_MAX: f64 = 1.1;

pub fn cmd_benchmark(args: &BenchmarkArgs) -> Result<i32> {
    let kind: BenchmarkKind = args.name.parse()?;
    let mut spec = kind.setup(args.n).map_err(|e| Error::Config(e.to_string()))?;
    let cfg = RunConfig::new(spec.params.clone()).load(&args.common)?;
    spec.params = cfg.params;
    if args.no_pin {
        spec.pin_temperature = None;
    }
    let omegas = args.omega.clone().or(cfg.omega_list).unwrap_or_else(|| match kind {
        BenchmarkKind::Cantilever => vec![1.0],
        BenchmarkKind::Layered => vec![1.0, 5.0, 25.0],
    });
    if omegas.is_empty() {
        return Err(Error::Config("empty frequency list".into()));
    }
    let fields = benchmarks::run_benchmark(&spec, &omegas, &solve_options(&args.common))?;
    let hash = config_hash(&[&spec.params, &spec.n, &spec.pin_temperature]);
    let mut code = EXIT_OK;
    for f in &fields {
        let stem = format!("{kind}-n{}-omega{}-{hash}", spec.n, f.omega);
        write_fields(&args.common.out, &stem, f, args.vtk)?;
        let line = benchmarks::pressure_line_sample(f, 0.5);
        export::write_line_csv(&line, create(&args.common.out, &format!("{stem}-line.csv"))?)?;
        let (metric, bound) = match kind {
            BenchmarkKind::Cantilever => {
                let col = benchmarks::left_column_real_pressure(f);
                let vals: Vec<f64> = col.iter().map(|s| s.1).collect();
                let m = benchmarks::oscillation_metric(&vals)?;
                println!(
                    "omega = {}: left-column Re p metric {m:.4}, bottom {:.4e}, top {:.4e}",
                    f.omega,
                    vals[0],
                    vals[vals.len() - 1]
                );
                (m, CANTILEVER_METRIC_MAX)
            }
            BenchmarkKind::Layered => {
                let vals: Vec<f64> = line.iter().map(|s| s.1).collect();
                let m = benchmarks::oscillation_metric(&vals)?;
                println!("omega = {}: |p| line metric {m:.4}", f.omega);
                (m, LAYERED_METRIC_MAX)
            }
        };
        if args.check && metric > bound {
            println!("check: FAIL omega = {} metric {metric:.4} > {bound}", f.omega);
            code = EXIT_CHECK;
        }
    }
    Ok(code)
}

fn write_fields(dir: &Path, stem: &str, f: &BenchmarkFields, vtk: bool) -> Result<()> {
    export::write_cell_pressure_csv(&f.mesh, f.pressure(), create(dir, &format!("{stem}-pressure.csv"))?)?;
    let u = f.vertex_displacement();
    export::write_vertex_csv(&f.mesh, &u, f.vertex_temperature(), create(dir, &format!("{stem}-vertex.csv"))?)?;
    if vtk {
        export::write_vtk(&f.mesh, f.pressure(), &u, f.vertex_temperature(), create(dir, &format!("{stem}.vtk"))?)?;
    }
    Ok(())
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<i32> {
    let cfg = RunConfig::new(ProblemParams::table_defaults()).load(&args.common)?;
    let omega = args.omega.unwrap_or(cfg.params.omega);
    let mesh = Mesh::uniform_unit_square(args.n)?.tag_boundary(&BoundaryConfig::all_dirichlet())?;
    let layout = DofLayout::new(&mesh)?;
    let mode: DivergenceMode = args.divergence.into();
    let pair = spectral::assemble_gram_pair(&mesh, &layout, &cfg.params, mode)?;
    let k = if args.k > pair.dim() {
        log::warn!("k = {} exceeds the {} free unknowns; clamped", args.k, pair.dim());
        pair.dim()
    } else {
        args.k
    };
    let spectrum = spectral::smallest_eigs(&pair, k)?;
    let report = spectral::check_assumption(&spectrum.values, omega, args.gap_tol);
    let hash = config_hash(&[&cfg.params, &args.n, &k, &omega, &mode]);
    report.write_csv(create(&args.common.out, &format!("spectrum-n{}-{hash}.csv", args.n))?)?;
    for (i, kappa) in report.eigenvalues.iter().enumerate() {
        println!("kappa_{i} = {kappa:.15e}");
    }
    println!("omega^2 = {:.6e}, gamma_min = {:.6e}, modes below omega^2 = {}", report.omega2, report.gamma_min, report.m_bar);
    if report.incomplete {
        println!("warning: spectrum incomplete, kappa_{} <= omega^2", k - 1);
    }
    if report.assumption_satisfied {
        println!("verdict: OK");
        Ok(EXIT_OK)
    } else {
        println!("verdict: omega^2 coincides with an eigenvalue");
        Ok(EXIT_ASSUMPTION)
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }
    let res = match &cli.command {
        Command::Converge(a) => cmd_converge(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Spectrum(a) => cmd_spectrum(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
