use nalgebra::Matrix2;

use crate::mesh::{CellGeometry, Mesh};
use crate::Point;

use super::DofLayout;

/// Shape functions of all four spaces on one cell.
#[derive(Clone, Copy, Debug)]
pub struct CellBasis {
    pub geom: CellGeometry,
    /// Global facet normal `n_e` of each local facet.
    pub normals: [Point; 3],
    /// +1 when `n_e` is outward for this cell.
    pub signs: [f64; 3],
    /// Whether local facet `k` carries a bubble.
    pub has_bubble: [bool; 3],
    pub lengths: [f64; 3],
}

impl CellBasis {
    pub fn new(mesh: &Mesh, layout: &DofLayout, cell: usize) -> Self {
        let geom = mesh.cell_geometry(cell);
        let cf = mesh.cell_facets[cell];
        CellBasis {
            geom,
            normals: cf.map(|(f, _)| mesh.facets[f].normal),
            signs: cf.map(|(_, s)| s),
            has_bubble: cf.map(|(f, _)| layout.bubble_of_facet[f].is_some()),
            lengths: cf.map(|(f, _)| mesh.facet_length(f)),
        }
    }

    /// Values and gradients of the nine Bernardi–Raugel functions at
    /// barycentric point `l`. Entry `2k + c` is `λ_k e_c`; entry `6 + k` is
    /// the bubble of local facet `k` (returned even when the facet is not
    /// enriched; callers skip it via `has_bubble`).
    ///
    /// Gradients are `G[(c, d)] = ∂_d φ_c`.
    pub fn br(&self, l: [f64; 3]) -> ([Point; 9], [Matrix2<f64>; 9]) {
        let g = &self.geom.grad_bary;
        let mut val = [Point::zeros(); 9];
        let mut grad = [Matrix2::zeros(); 9];
        for k in 0..3 {
            for c in 0..2 {
                val[2 * k + c][c] = l[k];
                grad[2 * k + c].set_row(c, &g[k].transpose());
            }
            let (a, b) = ((k + 1) % 3, (k + 2) % 3);
            let psi = l[a] * l[b];
            let dpsi = g[b] * l[a] + g[a] * l[b];
            let n = self.normals[k];
            val[6 + k] = n * psi;
            grad[6 + k] = n * dpsi.transpose();
        }
        (val, grad)
    }

    /// Cell means of the divergence of the nine BR functions, i.e. the
    /// values of `P_h div φ`.
    pub fn br_mean_div(&self) -> [f64; 9] {
        let g = &self.geom.grad_bary;
        let mut out = [0.0; 9];
        for k in 0..3 {
            out[2 * k] = g[k].x;
            out[2 * k + 1] = g[k].y;
            // ∫_K ∇ψ = ∫_e λ_a λ_b ds n_{K,e} = |e|/6 n_{K,e}
            out[6 + k] = self.signs[k] * self.lengths[k] / (6.0 * self.geom.area);
        }
        out
    }

    /// Raviart–Thomas functions at physical point `x`: `s_k (x − p_k) / (2|K|)`
    /// with unit flux through facet `k` along `n_e`.
    pub fn rt(&self, x: Point) -> [Point; 3] {
        let v = &self.geom.vertices;
        let scale = 0.5 / self.geom.area;
        std::array::from_fn(|k| (x - v[k]) * (self.signs[k] * scale))
    }

    /// Constant divergences of the RT functions.
    pub fn rt_div(&self) -> [f64; 3] {
        self.signs.map(|s| s / self.geom.area)
    }

    /// Area-weighted quadrature points of `rule` mapped to this cell.
    pub fn quad_points<'a>(
        &'a self,
        rule: &'a super::QuadratureRule,
    ) -> impl Iterator<Item = ([f64; 3], Point, f64)> + 'a {
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(move |(l, w)| (*l, self.geom.point(*l), w * self.geom.area))
    }
}

/// `ε(a) : ε(b)` for two displacement gradients.
pub(crate) fn strain_product(a: &Matrix2<f64>, b: &Matrix2<f64>) -> f64 {
    let ea = (a + a.transpose()) * 0.5;
    let eb = (b + b.transpose()) * 0.5;
    ea.component_mul(&eb).sum()
}
