//! Manufactured solutions, error norms and convergence studies.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;

use crate::assembly::{self, DivergenceMode, LoadData};
use crate::fespace::{self, CellBasis, DofLayout, Field, QuadratureRule};
use crate::linsolve::{self, SolveOptions, SolveReport};
use crate::mesh::{BoundaryConfig, Mesh, TaggedMesh};
use crate::params::ProblemParams;
use crate::{Error, Point, Result, C64, I};

/// Value and first and second derivatives of a real scalar function.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

impl Jet {
    /// `f(x) g(y)` from `(f, f', f'')` and `(g, g', g'')`.
    pub fn separable(f: [f64; 3], g: [f64; 3]) -> Jet {
        Jet {
            v: f[0] * g[0],
            dx: f[1] * g[0],
            dy: f[0] * g[1],
            dxx: f[2] * g[0],
            dxy: f[1] * g[1],
            dyy: f[0] * g[2],
        }
    }

    pub fn scale(self, s: f64) -> Jet {
        Jet {
            v: s * self.v,
            dx: s * self.dx,
            dy: s * self.dy,
            dxx: s * self.dxx,
            dxy: s * self.dxy,
            dyy: s * self.dyy,
        }
    }
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
            dxx: self.dxx + o.dxx,
            dxy: self.dxy + o.dxy,
            dyy: self.dyy + o.dyy,
        }
    }
}

/// Complex scalar jet.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CJet {
    pub re: Jet,
    pub im: Jet,
}

impl CJet {
    pub fn new(re: Jet, im: Jet) -> Self {
        CJet { re, im }
    }
    pub fn v(&self) -> C64 {
        C64::new(self.re.v, self.im.v)
    }
    pub fn dx(&self) -> C64 {
        C64::new(self.re.dx, self.im.dx)
    }
    pub fn dy(&self) -> C64 {
        C64::new(self.re.dy, self.im.dy)
    }
    pub fn dxx(&self) -> C64 {
        C64::new(self.re.dxx, self.im.dxx)
    }
    pub fn dxy(&self) -> C64 {
        C64::new(self.re.dxy, self.im.dxy)
    }
    pub fn dyy(&self) -> C64 {
        C64::new(self.re.dyy, self.im.dyy)
    }
    pub fn grad(&self) -> [C64; 2] {
        [self.dx(), self.dy()]
    }
}

/// Jets of the six scalar components `(u1, u2, w1, w2, p, T)` at a point.
#[derive(Clone, Copy, Debug, Default)]
pub struct FieldJets {
    pub u: [CJet; 2],
    pub w: [CJet; 2],
    pub p: CJet,
    pub t: CJet,
}

impl FieldJets {
    pub fn div_u(&self) -> C64 {
        self.u[0].dx() + self.u[1].dy()
    }
    pub fn div_w(&self) -> C64 {
        self.w[0].dx() + self.w[1].dy()
    }
    /// `∂_d u_c` at `[c][d]`.
    pub fn grad_u(&self) -> [[C64; 2]; 2] {
        [self.u[0].grad(), self.u[1].grad()]
    }
}

/// A smooth solution with analytic derivatives up to second order.
pub trait ExactFields: Send + Sync {
    fn jets(&self, x: Point) -> FieldJets;
}

/// The manufactured solution of the convergence studies. The
/// `1/(μ+λ)` and `1/(2λ)` terms make `div u → 0` as `λ → ∞`.
#[derive(Clone, Copy, Debug)]
pub struct TrigSolution {
    pub lambda: f64,
    pub mu: f64,
}

impl TrigSolution {
    pub fn new(params: &ProblemParams) -> Self {
        TrigSolution { lambda: params.lambda, mu: params.mu }
    }
}

/// `(sin kx, k cos kx, −k² sin kx)`.
fn sin_k(k: f64, x: f64) -> [f64; 3] {
    [(k * x).sin(), k * (k * x).cos(), -k * k * (k * x).sin()]
}

fn cos_k(k: f64, x: f64) -> [f64; 3] {
    [(k * x).cos(), -k * (k * x).sin(), -k * k * (k * x).cos()]
}

const ONE: [f64; 3] = [1.0, 0.0, 0.0];

fn affine(a: f64, b: f64, x: f64) -> [f64; 3] {
    [a + b * x, b, 0.0]
}

fn bubble(x: f64) -> [f64; 3] {
    [x * (1.0 - x), 1.0 - 2.0 * x, -2.0]
}

impl ExactFields for TrigSolution {
    fn jets(&self, p: Point) -> FieldJets {
        let (x, y) = (p.x, p.y);
        let q = 2.0 * PI;
        let sxsy = Jet::separable(sin_k(PI, x), sin_k(PI, y));
        let bump = sxsy.scale(1.0 / (self.mu + self.lambda));
        let c2x = cos_k(q, x);
        let c2y = cos_k(q, y);
        let re_u1 = Jet::separable([c2x[0] - 1.0, c2x[1], c2x[2]], sin_k(q, y)) + bump;
        let re_u2 = Jet::separable(sin_k(q, x), [1.0 - c2y[0], -c2y[1], -c2y[2]]) + bump;
        let l2 = 1.0 / (2.0 * self.lambda);
        let im_u1 = Jet::separable(sin_k(PI, x), cos_k(PI, y)) + Jet::separable([l2 * x * x, 2.0 * l2 * x, 2.0 * l2], ONE);
        let im_u2 = Jet::separable(cos_k(PI, x), sin_k(PI, y)).scale(-1.0)
            + Jet::separable(ONE, [l2 * y * y, 2.0 * l2 * y, 2.0 * l2]);
        let ey = y.exp();
        let ex = x.exp();
        let im_w1 = Jet::separable(affine(0.0, 1.0, x), [ey, ey, ey]);
        let im_w2 = Jet::separable([ex, ex, ex], affine(0.0, 1.0, y));
        let poly = Jet::separable(bubble(x), bubble(y));
        FieldJets {
            u: [CJet::new(re_u1, im_u1), CJet::new(re_u2, im_u2)],
            w: [CJet::new(sxsy, im_w1), CJet::new(sxsy, im_w2)],
            p: CJet::new(sxsy, poly),
            t: CJet::new(poly, sxsy),
        }
    }
}

/// Any closure producing jets.
impl<F> ExactFields for F
where
    F: Fn(Point) -> FieldJets + Send + Sync,
{
    fn jets(&self, x: Point) -> FieldJets {
        self(x)
    }
}

/// Strong-form residuals of an exact solution: `(f, g, r_m, H)`.
pub fn sources_at(params: &ProblemParams, j: &FieldJets, x: Point) -> ([C64; 2], [C64; 2], C64, C64) {
    let dens = params.derived_densities();
    let w2 = params.omega * params.omega;
    let (lam, mu) = (params.lambda, params.mu);
    let u = [j.u[0].v(), j.u[1].v()];
    let w = [j.w[0].v(), j.w[1].v()];
    let grad_div = [
        j.u[0].dxx() + j.u[1].dxy(),
        j.u[0].dxy() + j.u[1].dyy(),
    ];
    let lap = [j.u[0].dxx() + j.u[0].dyy(), j.u[1].dxx() + j.u[1].dyy()];
    let gp = j.p.grad();
    let gt = j.t.grad();
    let mut f = [C64::new(0.0, 0.0); 2];
    for c in 0..2 {
        let div_sigma = lap[c] * mu + grad_div[c] * (mu + lam) - gp[c] * params.alpha - gt[c] * params.beta;
        f[c] = -(u[c] * (w2 * dens.rho)) - w[c] * (w2 * params.rho_f) - div_sigma;
    }
    let kinv = params
        .permeability
        .eval(x)
        .try_inverse()
        .unwrap_or_else(|| nalgebra::Matrix2::from_element(f64::NAN));
    let mut g = [C64::new(0.0, 0.0); 2];
    for c in 0..2 {
        let kw = w[0] * kinv[(c, 0)] + w[1] * kinv[(c, 1)];
        g[c] = -(u[c] * (w2 * params.rho_f)) - w[c] * (w2 * dens.rho_w) + I * params.omega * kw + gp[c];
    }
    let div_u = j.div_u();
    let rm = j.p.v() * params.c0 - j.t.v() * params.b0 + div_u * params.alpha + j.div_w();
    // Θ is taken as locally constant
    let th = params.conductivity.eval(x);
    let div_flux = j.t.dxx() * th[(0, 0)] + j.t.dxy() * (th[(0, 1)] + th[(1, 0)]) + j.t.dyy() * th[(1, 1)];
    let h = I * (j.t.v() * params.a0 - j.p.v() * params.b0 + div_u * params.beta)
        - params.conduction_coefficient() * div_flux;
    (f, g, rm, h)
}

/// Sources and all-Dirichlet boundary data (`u`, `p`, `T` on the whole
/// boundary) for an exact solution.
pub fn rhs_from_exact(params: &ProblemParams, exact: Arc<dyn ExactFields>) -> LoadData {
    let p = Arc::new(params.clone());
    let src = {
        let (p, e) = (p.clone(), exact.clone());
        move |x: Point| sources_at(&p, &e.jets(x), x)
    };
    let src = Arc::new(src);
    let (s1, s2, s3, s4) = (src.clone(), src.clone(), src.clone(), src);
    let (e1, e2, e3) = (exact.clone(), exact.clone(), exact);
    LoadData {
        body_force: Some(Arc::new(move |x| s1(x).0)),
        fluid_force: Some(Arc::new(move |x| s2(x).1)),
        mass_source: Some(Arc::new(move |x| s3(x).2)),
        heat_source: Some(Arc::new(move |x| s4(x).3)),
        displacement: Some(Arc::new(move |x| {
            let j = e1.jets(x);
            [j.u[0].v(), j.u[1].v()]
        })),
        pressure: Some(Arc::new(move |x| e2.jets(x).p.v())),
        temperature: Some(Arc::new(move |x| e3.jets(x).t.v())),
        ..LoadData::default()
    }
}

/// Canonical interpolant of an exact solution in all four spaces, as a
/// global coefficient vector.
pub fn interpolate(mesh: &Mesh, layout: &DofLayout, exact: &dyn ExactFields) -> Vec<C64> {
    let mut x = vec![C64::new(0.0, 0.0); layout.total()];
    let vec_u = |p: Point| {
        let j = exact.jets(p);
        [j.u[0].v(), j.u[1].v()]
    };
    let vec_w = |p: Point| {
        let j = exact.jets(p);
        [j.w[0].v(), j.w[1].v()]
    };
    let parts = [
        (Field::U, fespace::interp_bv(mesh, layout, vec_u)),
        (Field::W, fespace::interp_rt(mesh, vec_w)),
        (Field::P, fespace::project_p0(mesh, |p| exact.jets(p).p.v())),
        (Field::T, fespace::interp_p1(mesh, |p| exact.jets(p).t.v())),
    ];
    for (f, v) in parts {
        let o = layout.offset(f);
        x[o..o + v.len()].copy_from_slice(&v);
    }
    x
}

/// Discrete fields of one cell evaluated at a quadrature point.
#[derive(Clone, Copy, Debug)]
pub struct PointValues {
    pub u: [C64; 2],
    pub grad_u: [[C64; 2]; 2],
    pub w: [C64; 2],
    pub div_w: C64,
    pub p: C64,
    pub t: C64,
    pub grad_t: [C64; 2],
}

/// Evaluates the discrete solution `x` on a cell at barycentric point `l`.
pub fn evaluate(mesh: &Mesh, layout: &DofLayout, x: &[C64], cell: usize, l: [f64; 3]) -> PointValues {
    let b = CellBasis::new(mesh, layout, cell);
    evaluate_with(&b, &layout.cell_dofs(mesh, cell), x, l)
}

fn evaluate_with(b: &CellBasis, d: &fespace::CellDofs, x: &[C64], l: [f64; 3]) -> PointValues {
    let zero = C64::new(0.0, 0.0);
    let (phi, grad) = b.br(l);
    let mut u = [zero; 2];
    let mut gu = [[zero; 2]; 2];
    for (i, dof) in d.u.iter().enumerate() {
        let Some(dof) = dof else { continue };
        let c = x[*dof];
        for r in 0..2 {
            u[r] += c * phi[i][r];
            for s in 0..2 {
                gu[r][s] += c * grad[i][(r, s)];
            }
        }
    }
    let pt = b.geom.point(l);
    let psi = b.rt(pt);
    let dv = b.rt_div();
    let mut w = [zero; 2];
    let mut div_w = zero;
    for k in 0..3 {
        let c = x[d.w[k]];
        w[0] += c * psi[k].x;
        w[1] += c * psi[k].y;
        div_w += c * dv[k];
    }
    let mut t = zero;
    let mut gt = [zero; 2];
    for k in 0..3 {
        let c = x[d.t[k]];
        t += c * l[k];
        gt[0] += c * b.geom.grad_bary[k].x;
        gt[1] += c * b.geom.grad_bary[k].y;
    }
    PointValues { u, grad_u: gu, w, div_w, p: x[d.p], t, grad_t: gt }
}

/// One row of a convergence table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRow {
    pub h: f64,
    /// `‖∇(u − u_h)‖₀`.
    pub e_u: f64,
    /// `‖w − w_h‖_div`.
    pub e_w: f64,
    /// `‖p − p_h‖₀`.
    pub e_p: f64,
    /// `‖∇(T − T_h)‖₀`.
    pub e_t: f64,
}

impl ErrorRow {
    pub fn errors(&self) -> [f64; 4] {
        [self.e_u, self.e_w, self.e_p, self.e_t]
    }
}

/// Errors of the discrete solution `x` against `exact`, with real and
/// imaginary parts combined, by degree-7 quadrature.
pub fn error_norms(mesh: &Mesh, layout: &DofLayout, x: &[C64], exact: &dyn ExactFields) -> ErrorRow {
    let rule = QuadratureRule::degree7();
    // summed serially so the result does not depend on the thread count
    let sums = (0..mesh.n_cells())
        .into_par_iter()
        .map(|cell| {
            let b = CellBasis::new(mesh, layout, cell);
            let d = layout.cell_dofs(mesh, cell);
            let mut s = [0.0; 4];
            for (l, pt, w) in b.quad_points(&rule) {
                let h = evaluate_with(&b, &d, x, l);
                let j = exact.jets(pt);
                let gu = j.grad_u();
                for r in 0..2 {
                    for c in 0..2 {
                        s[0] += w * (gu[r][c] - h.grad_u[r][c]).norm_sqr();
                    }
                }
                s[1] += w * ((j.w[0].v() - h.w[0]).norm_sqr() + (j.w[1].v() - h.w[1]).norm_sqr());
                s[1] += w * (j.div_w() - h.div_w).norm_sqr();
                s[2] += w * (j.p.v() - h.p).norm_sqr();
                let gt = j.t.grad();
                s[3] += w * ((gt[0] - h.grad_t[0]).norm_sqr() + (gt[1] - h.grad_t[1]).norm_sqr());
            }
            s
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold([0.0; 4], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
    ErrorRow { h: mesh.h, e_u: sums[0].sqrt(), e_w: sums[1].sqrt(), e_p: sums[2].sqrt(), e_t: sums[3].sqrt() }
}

/// Options shared by all manufactured-solution runs.
#[derive(Clone, Copy, Debug, Default)]
pub struct StudyOptions {
    pub solve: SolveOptions,
    pub divergence: DivergenceMode,
}

/// Result of one mesh level.
#[derive(Clone, Debug)]
pub struct ManufacturedRun {
    pub n: usize,
    pub row: ErrorRow,
    pub dofs: usize,
    pub solve: SolveReport,
    pub solution: Vec<C64>,
}

/// Builds the all-Dirichlet problem for `exact` on the `n × n` mesh,
/// solves it and measures the errors.
pub fn run_manufactured(
    params: &ProblemParams,
    exact: Arc<dyn ExactFields>,
    n: usize,
    opts: &StudyOptions,
) -> Result<ManufacturedRun> {
    let mesh: TaggedMesh = Mesh::uniform_unit_square(n)?.tag_boundary(&BoundaryConfig::all_dirichlet())?;
    let layout = DofLayout::new(&mesh)?;
    let data = rhs_from_exact(params, exact.clone());
    let mut a = assembly::assemble_operator(&mesh, &layout, params, opts.divergence)?;
    let mut b = assembly::assemble_load(&mesh, &layout, params, &data)?;
    assembly::apply_essential_bcs(&mut a, &mut b, &mesh, &layout, &data);
    let (x, solve) = linsolve::solve(&a, &b, &opts.solve)?;
    let row = error_norms(&mesh, &layout, &x, exact.as_ref());
    log::info!(
        "n = {n}: e_u {:.3e} e_w {:.3e} e_p {:.3e} e_T {:.3e} (residual {:.1e}, {:.2?})",
        row.e_u,
        row.e_w,
        row.e_p,
        row.e_t,
        solve.residual,
        solve.solve_time + solve.factor_time
    );
    Ok(ManufacturedRun { n, row, dofs: layout.total(), solve, solution: x })
}

/// Convergence table with consecutive-level rates.
#[derive(Clone, Debug, Default)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
    /// Relative residual of each solve.
    pub residuals: Vec<f64>,
    pub solve_times: Vec<Duration>,
}

impl ErrorReport {
    /// `log₂(e(2h)/e(h))` per norm; `None` on the first row.
    pub fn rates(&self) -> Vec<Option<[f64; 4]>> {
        let mut out = vec![None];
        for w in self.rows.windows(2) {
            let (a, b) = (w[0].errors(), w[1].errors());
            let ratio = w[0].h / w[1].h;
            out.push(Some(std::array::from_fn(|k| (a[k] / b[k]).ln() / ratio.ln())));
        }
        out.truncate(self.rows.len());
        out
    }

    /// CSV: `h,e_u,rate_u,e_w,rate_w,e_p,rate_p,e_T,rate_T`, with empty rate
    /// cells on the first row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "h,e_u,rate_u,e_w,rate_w,e_p,rate_p,e_T,rate_T")?;
        for (row, rate) in self.rows.iter().zip(self.rates()) {
            write!(out, "{:.10e}", row.h)?;
            for (k, e) in row.errors().iter().enumerate() {
                match rate {
                    Some(r) => write!(out, ",{e:.10e},{:.6}", r[k])?,
                    None => write!(out, ",{e:.10e},")?,
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Console table in the layout `h | e_u rate | e_w rate | e_p rate | e_T rate`.
    pub fn format_table(&self) -> String {
        let mut s = format!(
            "{:>8} | {:>10} {:>5} | {:>10} {:>5} | {:>10} {:>5} | {:>10} {:>5}\n",
            "h", "e_u", "rate", "e_w", "rate", "e_p", "rate", "e_T", "rate"
        );
        for (row, rate) in self.rows.iter().zip(self.rates()) {
            s += &format!("{:>8}", format!("1/{}", (1.0 / row.h).round()));
            for (k, e) in row.errors().iter().enumerate() {
                let r = rate.map_or("-".to_string(), |r| format!("{:.2}", r[k]));
                s += &format!(" | {e:>10.3e} {r:>5}");
            }
            s.push('\n');
        }
        s
    }
}

/// Runs the manufactured solution on each mesh of `n_list` (strictly
/// increasing powers of two).
pub fn convergence_study(params: &ProblemParams, n_list: &[usize], opts: &StudyOptions) -> Result<ErrorReport> {
    if n_list.is_empty() {
        return Err(Error::Config("empty mesh list".into()));
    }
    if n_list.iter().any(|n| !n.is_power_of_two()) || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("mesh list {n_list:?} must be increasing powers of two")));
    }
    let exact: Arc<dyn ExactFields> = Arc::new(TrigSolution::new(params));
    let mut report = ErrorReport::default();
    for &n in n_list {
        let run = run_manufactured(params, exact.clone(), n, opts).map_err(|e| match e {
            Error::Singular(m) => Error::Singular(format!("n = {n}: {m}")),
            other => other,
        })?;
        report.rows.push(run.row);
        report.residuals.push(run.solve.residual);
        report.solve_times.push(run.solve.factor_time + run.solve.solve_time);
    }
    Ok(report)
}
