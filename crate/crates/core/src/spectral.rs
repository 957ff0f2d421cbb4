//! Elasticity eigenpairs on `V_h` and the distance-to-resonance constant.
//!
//! The pencil is `(ψ, v)_{1,μ,λ} = κ (ψ, v)_{0,ρ}` with
//! `(u, v)_{1,μ,λ} = 2μ(ε(u), ε(v)) + λ(div u, div v)` on the displacement
//! space with the Dirichlet vertices removed. Smallest eigenvalues come
//! from shift-invert Lanczos with full reorthogonalization in the `M` inner
//! product; a dense solver covers small spaces and serves as the oracle.

use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Col, Side};
use nalgebra::{DMatrix, DVector};

use crate::assembly::DivergenceMode;
use crate::fespace::{CellBasis, DofLayout, QuadratureRule};
use crate::mesh::TaggedMesh;
use crate::params::ProblemParams;
use crate::{Error, Result};

/// Stiffness-type matrix `A` and mass matrix `M` on the free displacement
/// unknowns.
#[derive(Clone, Debug)]
pub struct GramPair {
    pub a: SparseColMat<usize, f64>,
    pub m: SparseColMat<usize, f64>,
    /// Field-local `V_h` index of each free unknown.
    pub free: Vec<usize>,
}

impl GramPair {
    pub fn dim(&self) -> usize {
        self.free.len()
    }

    pub fn a_dense(&self) -> DMatrix<f64> {
        to_dense(&self.a)
    }

    pub fn m_dense(&self) -> DMatrix<f64> {
        to_dense(&self.m)
    }
}

fn to_dense(s: &SparseColMat<usize, f64>) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(s.nrows(), s.ncols());
    for t in s.triplet_iter() {
        d[(t.row, t.col)] += *t.val;
    }
    d
}

fn spmv(s: &SparseColMat<usize, f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; s.nrows()];
    for t in s.triplet_iter() {
        y[t.row] += t.val * x[t.col];
    }
    y
}

/// Assembles `(A, M)` with the displacement-Dirichlet vertices eliminated.
/// `mode` selects the cellwise-mean or the pointwise divergence in the `λ`
/// term.
pub fn assemble_gram_pair(
    mesh: &TaggedMesh,
    layout: &DofLayout,
    params: &ProblemParams,
    mode: DivergenceMode,
) -> Result<GramPair> {
    let rho = params.derived_densities().rho;
    if rho <= 0.0 {
        return Err(Error::InvalidParameter("the mass matrix needs rho > 0".into()));
    }
    if !layout.u_fixed_vertex.iter().any(|f| *f) {
        return Err(Error::Boundary("the elasticity pencil needs a displacement Dirichlet part".into()));
    }
    let nu = 2 * layout.n_vertices + layout.n_bubbles;
    let mut index = vec![None; nu];
    let mut free = Vec::new();
    for (i, slot) in index.iter_mut().enumerate() {
        let fixed = i < 2 * layout.n_vertices && layout.u_fixed_vertex[i / 2];
        if !fixed {
            *slot = Some(free.len());
            free.push(i);
        }
    }
    let rule = QuadratureRule::degree4();
    let (mut ta, mut tm) = (Vec::new(), Vec::new());
    for cell in 0..mesh.n_cells() {
        let b = CellBasis::new(mesh, layout, cell);
        let dofs = layout.cell_dofs(mesh, cell).u;
        let dbar = b.br_mean_div();
        let mut la = [[0.0; 9]; 9];
        let mut lm = [[0.0; 9]; 9];
        for (l, _, w) in b.quad_points(&rule) {
            let (phi, grad) = b.br(l);
            for i in 0..9 {
                for j in 0..9 {
                    la[i][j] += w * 2.0 * params.mu * crate::fespace::strain_product(&grad[j], &grad[i]);
                    if mode == DivergenceMode::Full {
                        la[i][j] += w * params.lambda * grad[i].trace() * grad[j].trace();
                    }
                    lm[i][j] += w * rho * phi[i].dot(&phi[j]);
                }
            }
        }
        if mode == DivergenceMode::Reduced {
            for i in 0..9 {
                for j in 0..9 {
                    la[i][j] += params.lambda * b.geom.area * dbar[i] * dbar[j];
                }
            }
        }
        for i in 0..9 {
            let Some(gi) = dofs[i].and_then(|d| index[d]) else { continue };
            for j in 0..9 {
                let Some(gj) = dofs[j].and_then(|d| index[d]) else { continue };
                ta.push(Triplet::new(gi, gj, la[i][j]));
                tm.push(Triplet::new(gi, gj, lm[i][j]));
            }
        }
    }
    let n = free.len();
    let build = |t: &[Triplet<usize, usize, f64>]| {
        SparseColMat::<usize, f64>::try_new_from_triplets(n, n, t)
            .map_err(|e| Error::Eigen(format!("matrix construction: {e:?}")))
    };
    Ok(GramPair { a: build(&ta)?, m: build(&tm)?, free })
}

/// Computed eigenpairs, ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// `‖Aψ − κMψ‖ / ‖Mψ‖` per pair.
    pub residuals: Vec<f64>,
    /// Eigenvectors on the free unknowns, `M`-normalized.
    pub vectors: Vec<Vec<f64>>,
}

/// Dimension at or below which [`smallest_eigs`] uses the dense solver.
pub const DENSE_LIMIT: usize = 100;

const RESIDUAL_TOL: f64 = 1e-8;

/// All eigenpairs of the pencil by Cholesky reduction, ascending.
pub fn dense_eigs(pair: &GramPair) -> Result<Spectrum> {
    let a = pair.a_dense();
    let m = pair.m_dense();
    let chol = m.clone().cholesky().ok_or_else(|| Error::Eigen("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or_else(|| Error::Eigen("singular Cholesky factor".into()))?;
    let c = &linv * &a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut s = Spectrum { values: Vec::new(), residuals: Vec::new(), vectors: Vec::new() };
    for i in order {
        let y = eig.eigenvectors.column(i);
        let psi: DVector<f64> = linv.transpose() * y;
        let kappa = eig.eigenvalues[i];
        s.residuals.push(residual(&a, &m, &psi, kappa));
        s.values.push(kappa);
        s.vectors.push(psi.iter().copied().collect());
    }
    Ok(s)
}

fn residual(a: &DMatrix<f64>, m: &DMatrix<f64>, psi: &DVector<f64>, kappa: f64) -> f64 {
    let mpsi = m * psi;
    (a * psi - &mpsi * kappa).norm() / mpsi.norm()
}

fn sparse_residual(pair: &GramPair, psi: &[f64], kappa: f64) -> f64 {
    let ap = spmv(&pair.a, psi);
    let mp = spmv(&pair.m, psi);
    let r: f64 = ap.iter().zip(&mp).map(|(a, m)| (a - kappa * m).powi(2)).sum::<f64>().sqrt();
    r / mp.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// The `k` smallest eigenpairs. Uses the dense solver up to
/// [`DENSE_LIMIT`] unknowns and shift-invert Lanczos beyond; `k` is
/// clamped to the dimension.
pub fn smallest_eigs(pair: &GramPair, k: usize) -> Result<Spectrum> {
    let k = k.min(pair.dim());
    if k == 0 {
        return Err(Error::Eigen("no eigenvalues requested".into()));
    }
    let mut s = if pair.dim() <= DENSE_LIMIT { dense_eigs(pair)? } else { lanczos(pair, k)? };
    s.values.truncate(k);
    s.residuals.truncate(k);
    s.vectors.truncate(k);
    if let Some(worst) = s.residuals.iter().copied().reduce(f64::max) {
        if !(worst <= RESIDUAL_TOL) {
            return Err(Error::Eigen(format!("eigen-residual {worst:.2e} above {RESIDUAL_TOL:.0e}")));
        }
    }
    Ok(s)
}

/// Shift-invert Lanczos with shift 0 (A is positive definite when the
/// Dirichlet part is nonempty).
pub fn lanczos(pair: &GramPair, k: usize) -> Result<Spectrum> {
    let n = pair.dim();
    let chol = pair
        .a
        .sp_cholesky(Side::Lower)
        .map_err(|e| Error::Eigen(format!("Cholesky of the stiffness matrix: {e:?}")))?;
    let apply = |x: &[f64]| -> Vec<f64> {
        let mx = spmv(&pair.m, x);
        let y = chol.solve(Col::<f64>::from_fn(n, |i| mx[i]));
        (0..n).map(|i| y[i]).collect()
    };
    let mdot = |x: &[f64], y: &[f64]| -> f64 { spmv(&pair.m, y).iter().zip(x).map(|(a, b)| a * b).sum() };

    let mut steps = (4 * k + 40).min(n);
    loop {
        // deterministic start vector
        let mut q: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 104729) as f64 / 104729.0).collect();
        let nq = mdot(&q, &q).sqrt();
        q.iter_mut().for_each(|v| *v /= nq);
        let mut basis: Vec<Vec<f64>> = vec![q];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for j in 0..steps {
            let mut w = apply(&basis[j]);
            // two passes of classical Gram–Schmidt in the M inner product
            for _ in 0..2 {
                let mw = spmv(&pair.m, &w);
                for v in &basis {
                    let c: f64 = v.iter().zip(&mw).map(|(a, b)| a * b).sum();
                    w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
                }
            }
            let a_j = mdot(&basis[j], &apply(&basis[j]));
            alpha.push(a_j);
            let b = mdot(&w, &w).sqrt();
            if j + 1 == steps || b < 1e-14 * a_j.abs().max(1e-300) {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|v| v / b).collect());
        }
        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = t.symmetric_eigen();
        let mut order: Vec<usize> = (0..m).collect();
        // largest θ = 1/κ first
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let mut s = Spectrum { values: Vec::new(), residuals: Vec::new(), vectors: Vec::new() };
        for &i in order.iter().take(k.min(m)) {
            let theta = eig.eigenvalues[i];
            let coef = eig.eigenvectors.column(i);
            let mut psi = vec![0.0; n];
            for (c, v) in coef.iter().zip(&basis) {
                psi.iter_mut().zip(v).for_each(|(p, vi)| *p += c * vi);
            }
            let kappa = 1.0 / theta;
            s.residuals.push(sparse_residual(pair, &psi, kappa));
            s.values.push(kappa);
            s.vectors.push(psi);
        }
        let ok = s.values.len() == k && s.residuals.iter().all(|r| *r <= RESIDUAL_TOL);
        if ok || steps == n {
            return Ok(s);
        }
        steps = (2 * steps).min(n);
        log::debug!("Lanczos restarted with {steps} steps");
    }
}

/// Resonance check against a computed spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub omega2: f64,
    /// `min |ω² − κ| / (1 + κ)` over the computed modes.
    pub gamma_min: f64,
    pub assumption_satisfied: bool,
    /// Number of computed modes with `κ < ω²`.
    pub m_bar: usize,
    /// `κ_{k−1} ≤ ω²`: more modes may lie below `ω²`.
    pub incomplete: bool,
}

pub fn check_assumption(eigenvalues: &[f64], omega: f64, tol: f64) -> SpectrumReport {
    let omega2 = omega * omega;
    let gamma_min = eigenvalues
        .iter()
        .map(|k| (omega2 - k).abs() / (1.0 + k))
        .fold(f64::INFINITY, f64::min);
    let dist = eigenvalues.iter().map(|k| (omega2 - k).abs()).fold(f64::INFINITY, f64::min);
    let incomplete = eigenvalues.last().is_none_or(|k| *k <= omega2);
    if incomplete {
        log::warn!("computed spectrum does not extend past omega^2 = {omega2}");
    }
    SpectrumReport {
        eigenvalues: eigenvalues.to_vec(),
        omega2,
        gamma_min,
        assumption_satisfied: dist > tol,
        m_bar: eigenvalues.iter().filter(|k| omega2 > **k).count(),
        incomplete,
    }
}

impl SpectrumReport {
    /// CSV: `index,kappa,gap` with `gap = |ω² − κ| / (1 + κ)`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,kappa,gap")?;
        for (i, k) in self.eigenvalues.iter().enumerate() {
            writeln!(out, "{i},{k:.12e},{:.12e}", (self.omega2 - k).abs() / (1.0 + k))?;
        }
        Ok(())
    }
}
