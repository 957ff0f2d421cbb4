//! The cantilever bracket and layered domain problems and their pressure
//! diagnostics.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::assembly::{self, DivergenceMode, LoadData};
use crate::fespace::{DofLayout, Field};
use crate::linsolve::{self, SolveOptions, SolveReport};
use crate::mesh::{sides, BoundaryConfig, Mesh, Partition, TaggedMesh};
use crate::params::{lame_from_e_nu, ProblemParams, TensorField};
use crate::{Error, Point, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchmarkKind {
    Cantilever,
    Layered,
}

impl BenchmarkKind {
    pub fn name(self) -> &'static str {
        match self {
            BenchmarkKind::Cantilever => "cantilever",
            BenchmarkKind::Layered => "layered",
        }
    }

    pub fn setup(self, n: usize) -> Result<BenchmarkSpec> {
        match self {
            BenchmarkKind::Cantilever => cantilever_setup(n),
            BenchmarkKind::Layered => layered_setup(n),
        }
    }
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cantilever" => Ok(BenchmarkKind::Cantilever),
            "layered" => Ok(BenchmarkKind::Layered),
            other => Err(Error::Config(format!("unknown benchmark `{other}`"))),
        }
    }
}

/// A fully specified benchmark run on the `n × n` unit-square grid.
#[derive(Clone, Debug)]
pub struct BenchmarkSpec {
    pub kind: BenchmarkKind,
    pub n: usize,
    pub params: ProblemParams,
    pub boundary: BoundaryConfig,
    pub load: LoadData,
    /// Temperature vertex pinned to a value when the heat problem carries
    /// only flux conditions.
    pub pin_temperature: Option<(usize, C64)>,
}

fn vector(f: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static) -> crate::VectorField {
    Arc::new(move |x| f(x).map(|v| C64::new(v, 0.0)))
}

/// Clamped left side, downward unit traction on the top, no-flow and
/// adiabatic everywhere. One temperature vertex is pinned to zero.
pub fn cantilever_setup(n: usize) -> Result<BenchmarkSpec> {
    if n < 8 {
        return Err(Error::InvalidParameter(format!("cantilever needs n >= 8, got {n}")));
    }
    let params = ProblemParams {
        a0: 0.0,
        b0: 0.0,
        c0: 0.0,
        delta: 0.1,
        permeability: TensorField::Isotropic(1e-7),
        conductivity: TensorField::Isotropic(1e-4),
        ..ProblemParams::table_defaults()
    };
    let boundary = BoundaryConfig {
        mechanics: Partition::split(sides::left),
        flow: Partition::all_first(),
        heat: Partition::all_second(),
        allow_floating: true,
    };
    let load = LoadData {
        traction: Some(vector(|x| if sides::top(x) { [0.0, -1.0] } else { [0.0, 0.0] })),
        ..LoadData::default()
    };
    Ok(BenchmarkSpec {
        kind: BenchmarkKind::Cantilever,
        n,
        params,
        boundary,
        load,
        pin_temperature: Some((0, C64::new(0.0, 0.0))),
    })
}

/// Permeability of the three horizontal layers as `(upper y, k)`.
pub const LAYERS: [(f64, f64); 3] = [(0.25, 1e-1), (0.75, 1e-2), (1.0, 1e-3)];

/// Three permeability layers; upward traction and a constant pressure on
/// the bottom, clamped and held at zero temperature on the top, lateral
/// sides traction-free, no-flow and adiabatic.
pub fn layered_setup(n: usize) -> Result<BenchmarkSpec> {
    if n == 0 || n % 4 != 0 {
        return Err(Error::InvalidParameter(format!("layered needs n divisible by 4, got {n}")));
    }
    let (lambda, mu) = lame_from_e_nu(100.0, 0.45)?;
    let params = ProblemParams {
        lambda,
        mu,
        delta: 0.1,
        permeability: TensorField::layered(LAYERS.to_vec()),
        ..ProblemParams::table_defaults()
    };
    let boundary = BoundaryConfig {
        mechanics: Partition::split(sides::top),
        flow: Partition::new(|x| !sides::bottom(x), sides::bottom),
        heat: Partition::split(sides::top),
        allow_floating: false,
    };
    let load = LoadData {
        traction: Some(vector(|x| if sides::bottom(x) { [0.0, 1e-2] } else { [0.0, 0.0] })),
        pressure: Some(Arc::new(|_| C64::new(1e-2, 0.0))),
        ..LoadData::default()
    };
    Ok(BenchmarkSpec { kind: BenchmarkKind::Layered, n, params, boundary, load, pin_temperature: None })
}

/// Discrete solution of a benchmark at one frequency.
#[derive(Clone, Debug)]
pub struct BenchmarkFields {
    pub omega: f64,
    pub n: usize,
    pub mesh: Arc<TaggedMesh>,
    pub layout: Arc<DofLayout>,
    pub solution: Vec<C64>,
    pub solve: SolveReport,
}

impl BenchmarkFields {
    /// Cellwise pressure.
    pub fn pressure(&self) -> &[C64] {
        self.layout.slice(&self.solution, Field::P)
    }

    /// Displacement at the vertices (the bubbles vanish there).
    pub fn vertex_displacement(&self) -> Vec<[C64; 2]> {
        let u = self.layout.slice(&self.solution, Field::U);
        (0..self.layout.n_vertices)
            .map(|v| [u[self.layout.u_vertex(v, 0)], u[self.layout.u_vertex(v, 1)]])
            .collect()
    }

    pub fn vertex_temperature(&self) -> &[C64] {
        self.layout.slice(&self.solution, Field::T)
    }

    pub fn cell_centers(&self) -> Vec<Point> {
        (0..self.mesh.n_cells()).map(|c| self.mesh.cell_geometry(c).centroid()).collect()
    }
}

/// Assembles, constrains and solves one configuration.
pub fn solve_configuration(
    mesh: &TaggedMesh,
    layout: &DofLayout,
    params: &ProblemParams,
    data: &LoadData,
    pin: Option<(usize, C64)>,
    opts: &SolveOptions,
) -> Result<(Vec<C64>, SolveReport)> {
    let mut a = assembly::assemble_operator(mesh, layout, params, DivergenceMode::Reduced)?;
    let mut b = assembly::assemble_load(mesh, layout, params, data)?;
    assembly::apply_essential_bcs(&mut a, &mut b, mesh, layout, data);
    if let Some((v, value)) = pin {
        assembly::pin_temperature(&mut a, &mut b, v, value);
    }
    linsolve::solve(&a, &b, opts)
}

/// Solves `spec` at every frequency in `omegas`, in parallel.
pub fn run_benchmark(spec: &BenchmarkSpec, omegas: &[f64], opts: &SolveOptions) -> Result<Vec<BenchmarkFields>> {
    let mesh = Arc::new(Mesh::uniform_unit_square(spec.n)?.tag_boundary(&spec.boundary)?);
    let layout = Arc::new(DofLayout::new(&mesh)?);
    omegas
        .par_iter()
        .map(|&omega| {
            let params = ProblemParams { omega, ..spec.params.clone() };
            params.check_invariants()?;
            let (solution, solve) = solve_configuration(&mesh, &layout, &params, &spec.load, spec.pin_temperature, opts)?;
            log::info!("{} n={} omega={omega}: residual {:.1e}", spec.kind, spec.n, solve.residual);
            Ok(BenchmarkFields { omega, n: spec.n, mesh: mesh.clone(), layout: layout.clone(), solution, solve })
        })
        .collect()
}

/// Per grid row, the cell whose center is nearest the vertical line
/// `x = x0`, as `(center y, value)` ordered by `y`. Ties go to the lower
/// cell index.
pub fn line_sample(mesh: &Mesh, rows: usize, values: &[f64], x0: f64) -> Vec<(f64, f64)> {
    let mut best: Vec<Option<(f64, usize)>> = vec![None; rows];
    for c in 0..mesh.n_cells() {
        let x = mesh.cell_geometry(c).centroid();
        let row = ((x.y * rows as f64).floor() as usize).min(rows - 1);
        let d = (x.x - x0).abs();
        if best[row].is_none_or(|(bd, _)| d < bd - 1e-12) {
            best[row] = Some((d, c));
        }
    }
    best.into_iter()
        .flatten()
        .map(|(_, c)| (mesh.cell_geometry(c).centroid().y, values[c]))
        .collect()
}

/// `(y, |p|)` along `x = x0`.
pub fn pressure_line_sample(fields: &BenchmarkFields, x0: f64) -> Vec<(f64, f64)> {
    let mag: Vec<f64> = fields.pressure().iter().map(|p| p.norm()).collect();
    line_sample(&fields.mesh, fields.n, &mag, x0)
}

/// `(y, Re p)` over the cells touching the left side.
pub fn left_column_real_pressure(fields: &BenchmarkFields) -> Vec<(f64, f64)> {
    let re: Vec<f64> = fields.pressure().iter().map(|p| p.re).collect();
    line_sample(&fields.mesh, fields.n, &re, 0.0)
}

/// Total variation over range. Equals 1 for monotone and for constant
/// sequences.
pub fn oscillation_metric(samples: &[f64]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::InvalidParameter("oscillation metric needs at least 3 samples".into()));
    }
    let tv: f64 = samples.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let range = max - min;
    if range <= f64::EPSILON * max.abs().max(min.abs()) {
        return Ok(1.0);
    }
    Ok(tv / range)
}
