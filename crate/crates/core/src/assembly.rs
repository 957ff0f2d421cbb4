//! Assembly of the complex block operator and load vector, and elimination
//! of essential boundary conditions.
//!
//! Entries follow the unknown-in-first-slot convention: the test functions
//! are real basis functions, so `A[i][j] = form(φ_j, φ_i)` with complex
//! scalar coefficients and no conjugation of basis values.

use nalgebra::Matrix2;
use rayon::prelude::*;

use crate::fespace::{CellBasis, CellDofs, DofLayout, EdgeRule, Field, QuadratureRule};
use crate::mesh::{FlowBc, HeatBc, MechanicsBc, TaggedMesh};
use crate::params::ProblemParams;
use crate::{c, Error, Result, ScalarField, VectorField, C64, I};

/// Treatment of the displacement divergence in the `λ` and `β` terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DivergenceMode {
    /// Cell means `P_h div` (the scheme).
    #[default]
    Reduced,
    /// Pointwise divergence, for comparison.
    Full,
}

/// Complex CSR matrix in block order `(u, w, p, T)`.
#[derive(Clone, Debug)]
pub struct SystemMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<C64>,
    pub layout: DofLayout,
}

impl SystemMatrix {
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        row.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    /// Entry `(i, j)`, zero outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.position(i, j).map_or(C64::new(0.0, 0.0), |k| self.vals[k])
    }

    /// Whether `(i, j)` is a stored position.
    pub fn in_pattern(&self, i: usize, j: usize) -> bool {
        self.position(i, j).is_some()
    }

    /// Stored entries of block `(row, col)` with field-local indices.
    pub fn block(&self, row: Field, col: Field) -> Vec<(usize, usize, C64)> {
        let (r0, c0) = (self.layout.offset(row), self.layout.offset(col));
        let (nr, nc) = (self.layout.n_dofs(row), self.layout.n_dofs(col));
        let mut out = Vec::new();
        for i in r0..r0 + nr {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                if (c0..c0 + nc).contains(&j) {
                    out.push((i - r0, j - c0, self.vals[k]));
                }
            }
        }
        out
    }

    /// Block `(row, col)` as a dense row-major array.
    pub fn block_dense(&self, row: Field, col: Field) -> Vec<Vec<C64>> {
        let mut d = vec![vec![C64::new(0.0, 0.0); self.layout.n_dofs(col)]; self.layout.n_dofs(row)];
        for (i, j, v) in self.block(row, col) {
            d[i][j] = v;
        }
        d
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n)
            .into_par_iter()
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|k| self.vals[k] * x[self.col_idx[k]])
                    .sum()
            })
            .collect()
    }

    /// Row-sorted `(row, col, value)` triplets of the stored entries.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.vals[k]))
        })
    }
}

/// Number of local slots: 9 BR, 3 RT, 1 P0, 3 P1.
const NLOC: usize = 16;
const W0: usize = 9;
const P0: usize = 12;
const T0: usize = 13;

fn local_globals(d: &CellDofs) -> [Option<usize>; NLOC] {
    let mut g = [None; NLOC];
    g[..9].copy_from_slice(&d.u);
    for k in 0..3 {
        g[W0 + k] = Some(d.w[k]);
        g[T0 + k] = Some(d.t[k]);
    }
    g[P0] = Some(d.p);
    g
}

fn slot_field(s: usize) -> Field {
    match s {
        0..W0 => Field::U,
        W0..P0 => Field::W,
        P0 => Field::P,
        _ => Field::T,
    }
}

/// `w` and `T` never interact.
fn coupled(a: Field, b: Field) -> bool {
    !matches!((a, b), (Field::W, Field::T) | (Field::T, Field::W))
}

/// CSR pattern of all cell-local couplings (minus the `w`–`T` blocks), rows
/// sorted.
fn sparsity(mesh: &TaggedMesh, layout: &DofLayout) -> (Vec<usize>, Vec<usize>) {
    let n = layout.total();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for cell in 0..mesh.n_cells() {
        let g = local_globals(&layout.cell_dofs(mesh, cell));
        for a in 0..NLOC {
            let Some(i) = g[a] else { continue };
            for b in 0..NLOC {
                let Some(j) = g[b] else { continue };
                if coupled(slot_field(a), slot_field(b)) {
                    rows[i].push(j);
                }
            }
        }
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    row_ptr.push(0);
    for mut r in rows {
        r.sort_unstable();
        r.dedup();
        col_idx.extend(r);
        row_ptr.push(col_idx.len());
    }
    (row_ptr, col_idx)
}

/// Coefficients that are constant over the domain, precomputed once.
struct Coefficients {
    w2: f64,
    rho: f64,
    rho_f: f64,
    rho_w: f64,
    conduction: C64,
}

type LocalMatrix = [[C64; NLOC]; NLOC];

fn local_matrix(
    b: &CellBasis,
    params: &ProblemParams,
    k: &Coefficients,
    rule: &QuadratureRule,
    mode: DivergenceMode,
) -> LocalMatrix {
    let zero = C64::new(0.0, 0.0);
    let mut a = [[zero; NLOC]; NLOC];
    let area = b.geom.area;
    let dbar = b.br_mean_div();
    let rt_div = b.rt_div();
    let live: [bool; 9] = std::array::from_fn(|i| i < 6 || b.has_bubble[i - 6]);
    let h2 = b.geom.diameter * b.geom.diameter;
    let (lam, mu) = (params.lambda, params.mu);

    for (l, x, w) in b.quad_points(rule) {
        let (phi, grad) = b.br(l);
        let psi = b.rt(x);
        let kinv = params
            .permeability
            .eval(x)
            .try_inverse()
            .unwrap_or_else(|| Matrix2::from_element(f64::NAN));
        let theta = params.conductivity.eval(x);
        for i in 0..9 {
            if !live[i] {
                continue;
            }
            for j in 0..9 {
                if !live[j] {
                    continue;
                }
                let mut v = -k.w2 * k.rho * phi[j].dot(&phi[i])
                    + 2.0 * mu * crate::fespace::strain_product(&grad[j], &grad[i]);
                if mode == DivergenceMode::Full {
                    v += lam * grad[j].trace() * grad[i].trace();
                }
                a[i][j] += c(w * v);
            }
            for j in 0..3 {
                let m = -k.w2 * k.rho_f * psi[j].dot(&phi[i]) * w;
                a[i][W0 + j] += c(m);
                a[W0 + j][i] += c(m);
            }
            if mode == DivergenceMode::Full {
                for j in 0..3 {
                    let bt = params.beta * l[j] * grad[i].trace() * w;
                    a[i][T0 + j] += c(-bt);
                    a[T0 + j][i] += I * bt;
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let mass = psi[j].dot(&psi[i]);
                let darcy = psi[j].dot(&(kinv * psi[i]));
                a[W0 + i][W0 + j] += (c(-k.w2 * k.rho_w * mass) + I * (params.omega * darcy)) * w;
                let gl = b.geom.grad_bary;
                a[T0 + i][T0 + j] += (k.conduction * gl[j].dot(&(theta * gl[i])) + I * (params.a0 * l[i] * l[j])) * w;
            }
        }
    }

    for i in 0..9 {
        if !live[i] {
            continue;
        }
        if mode == DivergenceMode::Reduced {
            for j in 0..9 {
                if live[j] {
                    a[i][j] += c(lam * area * dbar[i] * dbar[j]);
                }
            }
            for j in 0..3 {
                let bt = params.beta * dbar[i] * area / 3.0;
                a[i][T0 + j] += c(-bt);
                a[T0 + j][i] += I * bt;
            }
        }
        a[i][P0] += c(-params.alpha * area * dbar[i]);
        a[P0][i] += c(params.alpha * area * dbar[i]);
    }
    for i in 0..3 {
        a[W0 + i][P0] += c(-area * rt_div[i]);
        a[P0][W0 + i] += c(area * rt_div[i]);
        a[P0][T0 + i] += c(-params.b0 * area / 3.0);
        a[T0 + i][P0] += I * (-params.b0 * area / 3.0);
        for j in 0..3 {
            let g = b.geom.grad_bary;
            a[T0 + i][T0 + j] += c(params.delta * h2 * area * g[j].dot(&g[i]));
        }
    }
    a[P0][P0] += c(params.c0 * area);
    a
}

/// Cells processed per parallel batch before scattering.
const BATCH: usize = 4096;

/// Assembles the stabilized operator for the whole mesh.
pub fn assemble_operator(
    mesh: &TaggedMesh,
    layout: &DofLayout,
    params: &ProblemParams,
    mode: DivergenceMode,
) -> Result<SystemMatrix> {
    if layout.n_facets != mesh.n_facets() || layout.n_vertices != mesh.n_vertices() || layout.n_cells != mesh.n_cells() {
        return Err(Error::Layout("layout does not belong to this mesh".into()));
    }
    params.check_invariants()?;
    let (row_ptr, col_idx) = sparsity(mesh, layout);
    let n = layout.total();
    let mut m = SystemMatrix {
        n,
        vals: vec![C64::new(0.0, 0.0); col_idx.len()],
        row_ptr,
        col_idx,
        layout: layout.clone(),
    };
    let dens = params.derived_densities();
    let k = Coefficients {
        w2: params.omega * params.omega,
        rho: dens.rho,
        rho_f: params.rho_f,
        rho_w: dens.rho_w,
        conduction: params.conduction_coefficient(),
    };
    let rule = QuadratureRule::degree4();
    let cells: Vec<usize> = (0..mesh.n_cells()).collect();
    for chunk in cells.chunks(BATCH) {
        let locals: Vec<(LocalMatrix, [Option<usize>; NLOC])> = chunk
            .par_iter()
            .map(|&cell| {
                let b = CellBasis::new(mesh, layout, cell);
                (local_matrix(&b, params, &k, &rule, mode), local_globals(&layout.cell_dofs(mesh, cell)))
            })
            .collect();
        for (a, g) in &locals {
            for r in 0..NLOC {
                let Some(i) = g[r] else { continue };
                for s in 0..NLOC {
                    let Some(j) = g[s] else { continue };
                    if !coupled(slot_field(r), slot_field(s)) {
                        continue;
                    }
                    let pos = m.position(i, j).expect("entry outside sparsity pattern");
                    m.vals[pos] += a[r][s];
                }
            }
        }
    }
    if m.vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite operator entry (is K invertible?)".into()));
    }
    Ok(m)
}

/// Volume sources, natural boundary data and essential boundary data.
/// Unset entries are zero.
#[derive(Clone, Default)]
pub struct LoadData {
    /// `f` in the momentum equation.
    pub body_force: Option<VectorField>,
    /// `g` in the dynamic Darcy equation.
    pub fluid_force: Option<VectorField>,
    /// Source of the mass balance.
    pub mass_source: Option<ScalarField>,
    /// `H` in the energy equation.
    pub heat_source: Option<ScalarField>,
    /// `σn` on the traction part.
    pub traction: Option<VectorField>,
    /// `p` on the pressure part.
    pub pressure: Option<ScalarField>,
    /// `Θ∇T·n` on the flux part.
    pub heat_flux: Option<ScalarField>,
    /// `u` on the displacement part.
    pub displacement: Option<VectorField>,
    /// `w` whose normal component is imposed on the no-flow part.
    pub normal_flux: Option<VectorField>,
    /// `T` on the temperature part.
    pub temperature: Option<ScalarField>,
}

impl std::fmt::Debug for LoadData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let set = |b: bool| if b { "set" } else { "-" };
        f.debug_struct("LoadData")
            .field("body_force", &set(self.body_force.is_some()))
            .field("fluid_force", &set(self.fluid_force.is_some()))
            .field("mass_source", &set(self.mass_source.is_some()))
            .field("heat_source", &set(self.heat_source.is_some()))
            .field("traction", &set(self.traction.is_some()))
            .field("pressure", &set(self.pressure.is_some()))
            .field("heat_flux", &set(self.heat_flux.is_some()))
            .field("displacement", &set(self.displacement.is_some()))
            .field("normal_flux", &set(self.normal_flux.is_some()))
            .field("temperature", &set(self.temperature.is_some()))
            .finish()
    }
}

fn check_region(mesh: &TaggedMesh, present: bool, name: &'static str, pred: impl Fn(&crate::mesh::BoundaryTag) -> bool) -> Result<()> {
    if present && mesh.count(pred) == 0 {
        return Err(Error::UntaggedDatum(name));
    }
    Ok(())
}

/// Load vector `ℱ` including the natural boundary terms.
pub fn assemble_load(
    mesh: &TaggedMesh,
    layout: &DofLayout,
    params: &ProblemParams,
    data: &LoadData,
) -> Result<Vec<C64>> {
    check_region(mesh, data.traction.is_some(), "traction", |t| t.mechanics == MechanicsBc::Traction)?;
    check_region(mesh, data.pressure.is_some(), "pressure", |t| t.flow == FlowBc::Pressure)?;
    check_region(mesh, data.heat_flux.is_some(), "heat_flux", |t| t.heat == HeatBc::Flux)?;
    check_region(mesh, data.displacement.is_some(), "displacement", |t| t.mechanics == MechanicsBc::Displacement)?;
    check_region(mesh, data.normal_flux.is_some(), "normal_flux", |t| t.flow == FlowBc::NoFlow)?;
    check_region(mesh, data.temperature.is_some(), "temperature", |t| t.heat == HeatBc::Temperature)?;

    let zero = C64::new(0.0, 0.0);
    let rule = QuadratureRule::degree7();
    let locals: Vec<([C64; NLOC], [Option<usize>; NLOC])> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|cell| {
            let b = CellBasis::new(mesh, layout, cell);
            let mut f = [zero; NLOC];
            for (l, x, w) in b.quad_points(&rule) {
                let (phi, _) = b.br(l);
                if let Some(src) = &data.body_force {
                    let v = src(x);
                    for i in 0..9 {
                        f[i] += (v[0] * phi[i].x + v[1] * phi[i].y) * w;
                    }
                }
                if let Some(src) = &data.fluid_force {
                    let v = src(x);
                    for (i, p) in b.rt(x).iter().enumerate() {
                        f[W0 + i] += (v[0] * p.x + v[1] * p.y) * w;
                    }
                }
                if let Some(src) = &data.mass_source {
                    f[P0] += src(x) * w;
                }
                if let Some(src) = &data.heat_source {
                    let v = src(x);
                    for i in 0..3 {
                        f[T0 + i] += v * (l[i] * w);
                    }
                }
            }
            (f, local_globals(&layout.cell_dofs(mesh, cell)))
        })
        .collect();
    let mut rhs = vec![zero; layout.total()];
    for (f, g) in &locals {
        for s in 0..NLOC {
            if let Some(i) = g[s] {
                rhs[i] += f[s];
            }
        }
    }

    let edge = EdgeRule::gauss5();
    let conduction = params.conduction_coefficient();
    for fi in mesh.boundary_facets() {
        let tag = mesh.tags[fi].ok_or_else(|| Error::Layout(format!("boundary facet {fi} is untagged")))?;
        let cell = mesh.facets[fi].cells[0].expect("boundary facet without cell");
        let k = mesh.local_facet(cell, fi).expect("facet not in its cell");
        let b = CellBasis::new(mesh, layout, cell);
        let g = local_globals(&layout.cell_dofs(mesh, cell));
        let [pa, pb] = mesh.facet_points(fi);
        let len = mesh.facet_length(fi);
        for (t, wt) in edge.points.iter().zip(&edge.weights) {
            let x = pa + (pb - pa) * *t;
            let w = wt * len;
            let l = b.geom.barycentric(x);
            if tag.mechanics == MechanicsBc::Traction {
                if let Some(tn) = &data.traction {
                    let v = tn(x);
                    let (phi, _) = b.br(l);
                    for s in 0..9 {
                        if let Some(i) = g[s] {
                            rhs[i] += (v[0] * phi[s].x + v[1] * phi[s].y) * w;
                        }
                    }
                }
            }
            if tag.flow == FlowBc::Pressure {
                if let Some(pd) = &data.pressure {
                    // z·n on its own boundary facet is 1/|e|
                    rhs[g[W0 + k].unwrap()] -= pd(x) * (w / len);
                }
            }
            if tag.heat == HeatBc::Flux {
                if let Some(q) = &data.heat_flux {
                    let v = conduction * q(x);
                    for s in 0..3 {
                        rhs[g[T0 + s].unwrap()] += v * (l[s] * w);
                    }
                }
            }
        }
    }
    Ok(rhs)
}

/// Values of all essentially constrained unknowns as `(global index, value)`,
/// ascending by index.
pub fn essential_values(mesh: &TaggedMesh, layout: &DofLayout, data: &LoadData) -> Vec<(usize, C64)> {
    let zero = C64::new(0.0, 0.0);
    let mut out = Vec::new();
    let ou = layout.offset(Field::U);
    for (v, &fixed) in layout.u_fixed_vertex.iter().enumerate() {
        if fixed {
            let val = data.displacement.as_ref().map_or([zero; 2], |f| f(mesh.vertices[v]));
            out.push((ou + layout.u_vertex(v, 0), val[0]));
            out.push((ou + layout.u_vertex(v, 1), val[1]));
        }
    }
    let ow = layout.offset(Field::W);
    let edge = EdgeRule::gauss5();
    for (fi, &fixed) in layout.w_fixed_facet.iter().enumerate() {
        if fixed {
            let val = data.normal_flux.as_ref().map_or(zero, |wd| {
                let [a, b] = mesh.facet_points(fi);
                let n = mesh.facets[fi].normal;
                let len = mesh.facet_length(fi);
                edge.points
                    .iter()
                    .zip(&edge.weights)
                    .map(|(t, w)| {
                        let v = wd(a + (b - a) * *t);
                        (v[0] * n.x + v[1] * n.y) * (w * len)
                    })
                    .sum()
            });
            out.push((ow + fi, val));
        }
    }
    let ot = layout.offset(Field::T);
    for (v, &fixed) in layout.t_fixed_vertex.iter().enumerate() {
        if fixed {
            let val = data.temperature.as_ref().map_or(zero, |f| f(mesh.vertices[v]));
            out.push((ot + v, val));
        }
    }
    out.sort_unstable_by_key(|(i, _)| *i);
    out
}

/// Symmetric elimination: constrained rows become identity rows carrying
/// the prescribed value, and constrained columns are moved to the right-hand
/// side. The sparsity pattern is kept.
pub fn apply_constraints(sys: &mut SystemMatrix, rhs: &mut [C64], constraints: &[(usize, C64)]) {
    let zero = C64::new(0.0, 0.0);
    let mut value = vec![None; sys.n];
    for &(i, v) in constraints {
        value[i] = Some(v);
    }
    for i in 0..sys.n {
        let (lo, hi) = (sys.row_ptr[i], sys.row_ptr[i + 1]);
        if let Some(vi) = value[i] {
            for k in lo..hi {
                sys.vals[k] = if sys.col_idx[k] == i { C64::new(1.0, 0.0) } else { zero };
            }
            rhs[i] = vi;
        } else {
            for k in lo..hi {
                if let Some(vj) = value[sys.col_idx[k]] {
                    rhs[i] -= sys.vals[k] * vj;
                    sys.vals[k] = zero;
                }
            }
        }
    }
}

/// Imposes `u_D` on displacement vertices, `∫_e w_D·n_e` on no-flow facets
/// and `T_D` on temperature vertices.
pub fn apply_essential_bcs(
    sys: &mut SystemMatrix,
    rhs: &mut [C64],
    mesh: &TaggedMesh,
    layout: &DofLayout,
    data: &LoadData,
) {
    let cons = essential_values(mesh, layout, data);
    apply_constraints(sys, rhs, &cons);
}

/// Pins one temperature vertex to `value`: used when the temperature block
/// carries only natural boundary conditions.
pub fn pin_temperature(sys: &mut SystemMatrix, rhs: &mut [C64], vertex: usize, value: C64) {
    let i = sys.layout.offset(Field::T) + vertex;
    apply_constraints(sys, rhs, &[(i, value)]);
}
