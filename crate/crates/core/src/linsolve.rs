//! Sparse solution of the constrained complex system.
//!
//! The default path factorizes the complex matrix with a sparse LU and
//! applies a few steps of iterative refinement. A real `2N` block form and
//! a restarted GMRES with ILU(0) are available as alternatives.

use std::time::{Duration, Instant};

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Col};

use crate::assembly::SystemMatrix;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    /// Sparse LU of the complex matrix.
    #[default]
    ComplexLu,
    /// Sparse LU of `[[Re A, −Im A], [Im A, Re A]]`.
    RealifiedLu,
    /// Restarted GMRES right-preconditioned by ILU(0).
    Gmres,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub method: Method,
    /// Relative residual contract `‖Ax − b‖ / ‖b‖`.
    pub tol: f64,
    /// Refinement sweeps after a direct solve.
    pub refine_steps: usize,
    pub gmres_restart: usize,
    pub gmres_max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: Method::ComplexLu,
            tol: 1e-10,
            refine_steps: 3,
            gmres_restart: 200,
            gmres_max_iter: 20_000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveReport {
    pub method: Method,
    pub residual: f64,
    /// Krylov iterations, or refinement sweeps for direct methods.
    pub iterations: usize,
    pub factor_time: Duration,
    pub solve_time: Duration,
}

/// Borrowed complex CSR matrix.
#[derive(Clone, Copy, Debug)]
pub struct Csr<'a> {
    pub n: usize,
    pub row_ptr: &'a [usize],
    pub col_idx: &'a [usize],
    pub vals: &'a [C64],
}

impl<'a> From<&'a SystemMatrix> for Csr<'a> {
    fn from(m: &'a SystemMatrix) -> Self {
        Csr { n: m.n, row_ptr: &m.row_ptr, col_idx: &m.col_idx, vals: &m.vals }
    }
}

impl Csr<'_> {
    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(|k| self.vals[k] * x[self.col_idx[k]]).sum())
            .collect()
    }

    fn residual(&self, x: &[C64], b: &[C64]) -> Vec<C64> {
        self.matvec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
    }
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative residual `‖Ax − b‖ / ‖b‖` (absolute when `b = 0`).
pub fn relative_residual(a: Csr<'_>, x: &[C64], b: &[C64]) -> f64 {
    let r = norm(&a.residual(x, b));
    let nb = norm(b);
    if nb == 0.0 {
        r
    } else {
        r / nb
    }
}

/// Solves `A x = b` to the residual contract of `opts`.
pub fn solve(sys: &SystemMatrix, b: &[C64], opts: &SolveOptions) -> Result<(Vec<C64>, SolveReport)> {
    solve_csr(sys.into(), b, opts)
}

pub fn solve_csr(a: Csr<'_>, b: &[C64], opts: &SolveOptions) -> Result<(Vec<C64>, SolveReport)> {
    if b.len() != a.n || a.row_ptr.len() != a.n + 1 {
        return Err(Error::InvalidParameter("dimension mismatch in linear solve".into()));
    }
    if !(opts.tol >= 1e-14) {
        return Err(Error::InvalidParameter(format!("solver tolerance {} too small", opts.tol)));
    }
    let zero = C64::new(0.0, 0.0);
    if norm(b) == 0.0 {
        let report = SolveReport {
            method: opts.method,
            residual: 0.0,
            iterations: 0,
            factor_time: Duration::ZERO,
            solve_time: Duration::ZERO,
        };
        return Ok((vec![zero; a.n], report));
    }
    match opts.method {
        Method::ComplexLu => direct(a, b, opts, ComplexLu::new(a)?),
        Method::RealifiedLu => direct(a, b, opts, RealLu::new(a)?),
        Method::Gmres => gmres(a, b, opts),
    }
}

trait Factor {
    fn apply(&self, r: &[C64]) -> Vec<C64>;
    fn elapsed(&self) -> Duration;
}

struct ComplexLu {
    lu: faer::sparse::linalg::solvers::Lu<usize, c64>,
    time: Duration,
}

impl ComplexLu {
    fn new(a: Csr<'_>) -> Result<Self> {
        let t0 = Instant::now();
        let trip: Vec<Triplet<usize, usize, c64>> = (0..a.n)
            .flat_map(|i| (a.row_ptr[i]..a.row_ptr[i + 1]).map(move |k| (i, k)))
            .filter(|&(_, k)| a.vals[k] != C64::new(0.0, 0.0))
            .map(|(i, k)| Triplet::new(i, a.col_idx[k], a.vals[k]))
            .collect();
        let m = SparseColMat::<usize, c64>::try_new_from_triplets(a.n, a.n, &trip)
            .map_err(|e| Error::Singular(format!("matrix construction: {e:?}")))?;
        let lu = m.sp_lu().map_err(|e| Error::Singular(format!("LU factorization: {e:?}")))?;
        Ok(ComplexLu { lu, time: t0.elapsed() })
    }
}

impl Factor for ComplexLu {
    fn apply(&self, r: &[C64]) -> Vec<C64> {
        let rhs = Col::<c64>::from_fn(r.len(), |i| r[i]);
        let x = self.lu.solve(&rhs);
        (0..r.len()).map(|i| x[i]).collect()
    }
    fn elapsed(&self) -> Duration {
        self.time
    }
}

struct RealLu {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    time: Duration,
}

impl RealLu {
    fn new(a: Csr<'_>) -> Result<Self> {
        let t0 = Instant::now();
        let n = a.n;
        let mut trip = Vec::with_capacity(4 * a.vals.len());
        for i in 0..n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let (j, v) = (a.col_idx[k], a.vals[k]);
                if v.re != 0.0 {
                    trip.push(Triplet::new(i, j, v.re));
                    trip.push(Triplet::new(n + i, n + j, v.re));
                }
                if v.im != 0.0 {
                    trip.push(Triplet::new(i, n + j, -v.im));
                    trip.push(Triplet::new(n + i, j, v.im));
                }
            }
        }
        let m = SparseColMat::<usize, f64>::try_new_from_triplets(2 * n, 2 * n, &trip)
            .map_err(|e| Error::Singular(format!("matrix construction: {e:?}")))?;
        let lu = m.sp_lu().map_err(|e| Error::Singular(format!("LU factorization: {e:?}")))?;
        Ok(RealLu { lu, time: t0.elapsed() })
    }
}

impl Factor for RealLu {
    fn apply(&self, r: &[C64]) -> Vec<C64> {
        let n = r.len();
        let rhs = Col::<f64>::from_fn(2 * n, |i| if i < n { r[i].re } else { r[i - n].im });
        let x = self.lu.solve(&rhs);
        (0..n).map(|i| C64::new(x[i], x[n + i])).collect()
    }
    fn elapsed(&self) -> Duration {
        self.time
    }
}

fn direct(a: Csr<'_>, b: &[C64], opts: &SolveOptions, f: impl Factor) -> Result<(Vec<C64>, SolveReport)> {
    let t0 = Instant::now();
    let mut x = f.apply(b);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("factorization produced non-finite values".into()));
    }
    let nb = norm(b);
    let mut r = a.residual(&x, b);
    let mut res = norm(&r) / nb;
    let mut sweeps = 0;
    while sweeps < opts.refine_steps && res > 1e-3 * opts.tol {
        let dx = f.apply(&r);
        let cand: Vec<C64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let rc = a.residual(&cand, b);
        let rn = norm(&rc) / nb;
        sweeps += 1;
        if !(rn < res) {
            break;
        }
        x = cand;
        r = rc;
        res = rn;
    }
    let report = SolveReport {
        method: opts.method,
        residual: res,
        iterations: sweeps,
        factor_time: f.elapsed(),
        solve_time: t0.elapsed(),
    };
    log::debug!("{:?}: n = {}, residual {:.2e}, {} refinement sweeps", opts.method, a.n, res, sweeps);
    if res > opts.tol {
        if !res.is_finite() {
            return Err(Error::Singular("non-finite residual".into()));
        }
        return Err(Error::NotConverged { residual: res, tol: opts.tol });
    }
    Ok((x, report))
}

/// Zero-fill incomplete LU on the CSR pattern.
struct Ilu0<'a> {
    a: Csr<'a>,
    lu: Vec<C64>,
    diag: Vec<usize>,
}

impl<'a> Ilu0<'a> {
    fn new(a: Csr<'a>) -> Result<Self> {
        let mut lu = a.vals.to_vec();
        let mut diag = vec![usize::MAX; a.n];
        for i in 0..a.n {
            if let Ok(k) = a.col_idx[a.row_ptr[i]..a.row_ptr[i + 1]].binary_search(&i) {
                diag[i] = a.row_ptr[i] + k;
            }
        }
        for i in 0..a.n {
            let (lo, hi) = (a.row_ptr[i], a.row_ptr[i + 1]);
            for kk in lo..hi {
                let k = a.col_idx[kk];
                if k >= i {
                    break;
                }
                let dk = lu[diag[k]];
                if dk.norm() == 0.0 {
                    return Err(Error::Singular(format!("ILU(0) zero pivot in row {k}")));
                }
                let lik = lu[kk] / dk;
                lu[kk] = lik;
                // row i −= l_ik · row k, restricted to the pattern of row i
                let khi = a.row_ptr[k + 1];
                let mut p = kk + 1;
                for q in (diag[k] + 1)..khi {
                    let j = a.col_idx[q];
                    while p < hi && a.col_idx[p] < j {
                        p += 1;
                    }
                    if p < hi && a.col_idx[p] == j {
                        let u = lu[q];
                        lu[p] -= lik * u;
                    }
                }
            }
            if diag[i] == usize::MAX || lu[diag[i]].norm() == 0.0 {
                return Err(Error::Singular(format!("ILU(0) zero pivot in row {i}")));
            }
        }
        Ok(Ilu0 { a, lu, diag })
    }

    fn apply(&self, r: &[C64]) -> Vec<C64> {
        let a = &self.a;
        let mut y = r.to_vec();
        for i in 0..a.n {
            for k in a.row_ptr[i]..self.diag[i] {
                y[i] = y[i] - self.lu[k] * y[a.col_idx[k]];
            }
        }
        for i in (0..a.n).rev() {
            for k in (self.diag[i] + 1)..a.row_ptr[i + 1] {
                y[i] = y[i] - self.lu[k] * y[a.col_idx[k]];
            }
            y[i] /= self.lu[self.diag[i]];
        }
        y
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn gmres(a: Csr<'_>, b: &[C64], opts: &SolveOptions) -> Result<(Vec<C64>, SolveReport)> {
    let t0 = Instant::now();
    let ilu = Ilu0::new(a)?;
    let factor_time = t0.elapsed();
    let n = a.n;
    let m = opts.gmres_restart.max(1);
    let nb = norm(b);
    let zero = C64::new(0.0, 0.0);
    let mut x = vec![zero; n];
    let mut iters = 0;
    let mut best = f64::INFINITY;
    while iters < opts.gmres_max_iter {
        let r = a.residual(&x, b);
        let beta = norm(&r);
        best = best.min(beta / nb);
        if beta / nb <= opts.tol {
            break;
        }
        let mut v: Vec<Vec<C64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut z: Vec<Vec<C64>> = Vec::new();
        let mut h = vec![vec![zero; m]; m + 1];
        let (mut cs, mut sn) = (vec![zero; m], vec![zero; m]);
        let mut g = vec![zero; m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..m {
            let zk = ilu.apply(&v[k]);
            let mut w = a.matvec(&zk);
            z.push(zk);
            for (i, vi) in v.iter().enumerate() {
                let hik = dot(vi, &w);
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(vi) {
                    *wj -= hik * vj;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = C64::new(hn, 0.0);
            for i in 0..k {
                let t = cs[i].conj() * h[i][k] + sn[i].conj() * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (p, q) = (h[k][k], h[k + 1][k]);
            let d = (p.norm_sqr() + q.norm_sqr()).sqrt();
            if d == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = p / d;
            sn[k] = q / d;
            h[k][k] = C64::new(d, 0.0);
            h[k + 1][k] = zero;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            iters += 1;
            k_used = k + 1;
            if g[k + 1].norm() / nb <= 0.5 * opts.tol || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|z| z / hn).collect());
        }
        let mut y = vec![zero; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in (i + 1)..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, zi) in x.iter_mut().zip(&z[j]) {
                *xi += yj * zi;
            }
        }
        if k_used == 0 {
            break;
        }
    }
    let res = relative_residual(a, &x, b);
    let report = SolveReport {
        method: Method::Gmres,
        residual: res,
        iterations: iters,
        factor_time,
        solve_time: t0.elapsed() - factor_time,
    };
    if res > opts.tol || !res.is_finite() {
        return Err(Error::NotConverged { residual: res.min(best), tol: opts.tol });
    }
    Ok((x, report))
}
