#![allow(dead_code)]

use thermoporo::fespace::{interp_bv, interp_p1, interp_rt, project_p0, CellBasis, DofLayout, Field, QuadratureRule};
use thermoporo::mesh::{BoundaryConfig, Mesh, Partition, TaggedMesh};
use thermoporo::mms::evaluate;
use thermoporo::{Point, C64};

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Mesh where every facet carries a bubble and no field is constrained.
pub fn natural_mesh(n: usize) -> (TaggedMesh, DofLayout) {
    let cfg = BoundaryConfig {
        mechanics: Partition::all_second(),
        flow: Partition::all_second(),
        heat: Partition::all_second(),
        allow_floating: true,
    };
    let m = Mesh::uniform_unit_square(n).unwrap().tag_boundary(&cfg).unwrap();
    let l = DofLayout::new(&m).unwrap();
    (m, l)
}

/// A vector field with its Jacobian `[∂_x, ∂_y]` per component.
pub struct Vector {
    pub v: Box<dyn Fn(Point) -> [f64; 2]>,
    pub jac: Box<dyn Fn(Point) -> [[f64; 2]; 2]>,
}

impl Vector {
    pub fn div(&self, x: Point) -> f64 {
        let j = (self.jac)(x);
        j[0][0] + j[1][1]
    }
}

pub struct Scalar {
    pub s: Box<dyn Fn(Point) -> f64>,
    pub grad: Box<dyn Fn(Point) -> [f64; 2]>,
}

/// Cell means of `f` by degree-7 quadrature (the weights sum to one).
pub fn cell_means(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Vec<f64> {
    let rule = QuadratureRule::degree7();
    (0..mesh.n_cells())
        .map(|c| {
            let g = mesh.cell_geometry(c);
            rule.points.iter().zip(&rule.weights).map(|(l, w)| f(g.point(*l)) * w).sum()
        })
        .collect()
}

/// Interpolants of `(v, z, q, s)` packed as one solution vector.
pub fn interpolant(mesh: &Mesh, layout: &DofLayout, v: &Vector, z: &Vector, q: &Scalar, s: &Scalar) -> Vec<C64> {
    let mut x = vec![C64::new(0.0, 0.0); layout.total()];
    let parts = [
        (Field::U, interp_bv(mesh, layout, |p| (v.v)(p).map(re))),
        (Field::W, interp_rt(mesh, |p| (z.v)(p).map(re))),
        (Field::P, project_p0(mesh, |p| re((q.s)(p)))),
        (Field::T, interp_p1(mesh, |p| re((s.s)(p)))),
    ];
    for (f, vals) in parts {
        let o = layout.offset(f);
        x[o..o + vals.len()].copy_from_slice(&vals);
    }
    x
}

/// Interpolation errors in the order
/// `‖v−Πv‖₀, ‖∇(v−Πv)‖₀, ‖z−Πz‖₀, ‖div(z−Πz)‖₀, ‖q−P q‖₀, ‖s−Πs‖₀, ‖∇(s−Πs)‖₀`.
pub fn interpolation_errors(
    mesh: &Mesh,
    layout: &DofLayout,
    x: &[C64],
    v: &Vector,
    z: &Vector,
    q: &Scalar,
    s: &Scalar,
) -> [f64; 7] {
    let rule = QuadratureRule::degree7();
    let mut e = [0.0; 7];
    for cell in 0..mesh.n_cells() {
        let b = CellBasis::new(mesh, layout, cell);
        for (l, pt, w) in b.quad_points(&rule) {
            let h = evaluate(mesh, layout, x, cell, l);
            let (vv, vj) = ((v.v)(pt), (v.jac)(pt));
            let (zv, zd) = ((z.v)(pt), z.div(pt));
            for r in 0..2 {
                e[0] += w * (vv[r] - h.u[r].re).powi(2);
                for c in 0..2 {
                    e[1] += w * (vj[r][c] - h.grad_u[r][c].re).powi(2);
                }
                e[2] += w * (zv[r] - h.w[r].re).powi(2);
            }
            e[3] += w * (zd - h.div_w.re).powi(2);
            e[4] += w * ((q.s)(pt) - h.p.re).powi(2);
            e[5] += w * ((s.s)(pt) - h.t.re).powi(2);
            let g = (s.grad)(pt);
            e[6] += w * ((g[0] - h.grad_t[0].re).powi(2) + (g[1] - h.grad_t[1].re).powi(2));
        }
    }
    e.map(f64::sqrt)
}

/// Smooth non-polynomial fields for the decay rates.
pub fn smooth_fields() -> (Vector, Vector, Scalar, Scalar) {
    use std::f64::consts::PI;
    let v = Vector {
        v: Box::new(|p| [(PI * p.x).sin() * (PI * p.y).cos(), (p.x * p.y).exp()]),
        jac: Box::new(|p| {
            [
                [PI * (PI * p.x).cos() * (PI * p.y).cos(), -PI * (PI * p.x).sin() * (PI * p.y).sin()],
                [p.y * (p.x * p.y).exp(), p.x * (p.x * p.y).exp()],
            ]
        }),
    };
    let z = Vector {
        v: Box::new(|p| [(2.0 * p.y).sin() + p.x * p.x, (p.x - p.y).cos()]),
        jac: Box::new(|p| [[2.0 * p.x, 2.0 * (2.0 * p.y).cos()], [-(p.x - p.y).sin(), (p.x - p.y).sin()]]),
    };
    let q = Scalar {
        s: Box::new(|p| (3.0 * p.x).cos() * p.y),
        grad: Box::new(|p| [-3.0 * (3.0 * p.x).sin() * p.y, (3.0 * p.x).cos()]),
    };
    let s = Scalar {
        s: Box::new(|p| (PI * p.x * p.y).sin()),
        grad: Box::new(|p| [PI * p.y * (PI * p.x * p.y).cos(), PI * p.x * (PI * p.x * p.y).cos()]),
    };
    (v, z, q, s)
}

/// Polynomial vector field of total degree ≤ 3 from ten coefficients.
pub fn cubic_vector(c: [f64; 10]) -> Vector {
    let v = move |p: Point| {
        let (x, y) = (p.x, p.y);
        [
            c[0] + c[1] * x + c[2] * y * y + c[3] * x * x * y + c[4] * y * y * y,
            c[5] + c[6] * y + c[7] * x * x + c[8] * x * y * y + c[9] * x * x * x,
        ]
    };
    let jac = move |p: Point| {
        let (x, y) = (p.x, p.y);
        [
            [c[1] + 2.0 * c[3] * x * y, 2.0 * c[2] * y + c[3] * x * x + 3.0 * c[4] * y * y],
            [2.0 * c[7] * x + c[8] * y * y + 3.0 * c[9] * x * x, c[6] + 2.0 * c[8] * x * y],
        ]
    };
    Vector { v: Box::new(v), jac: Box::new(jac) }
}

/// Observed orders `log₂(e_coarse / e_fine)` between consecutive levels.
pub fn rates(errs: &[[f64; 7]]) -> Vec<[f64; 7]> {
    errs.windows(2).map(|w| std::array::from_fn(|k| (w[0][k] / w[1][k]).log2())).collect()
}
