use crate::mesh::Mesh;
use crate::{Point, C64};

use super::{DofLayout, EdgeRule, QuadratureRule};

/// `∫_e f ds` for a facet by 5-point Gauss.
fn facet_integral(mesh: &Mesh, facet: usize, f: impl Fn(Point, f64) -> C64) -> C64 {
    let rule = EdgeRule::gauss5();
    let [a, b] = mesh.facet_points(facet);
    let len = mesh.facet_length(facet);
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(t, w)| f(a + (b - a) * *t, *t) * (w * len))
        .sum()
}

/// Canonical Bernardi–Raugel interpolant `Π_h^v`, as `V_h` coefficients in
/// field-local order.
///
/// Vertex values are nodal; the bubble on facet `e` receives
/// `∫_e (v − Π_l v)·n_e ds / ∫_e λ_a λ_b ds`, which makes the normal flux of
/// the interpolant match that of `v` on every enriched facet.
pub fn interp_bv(mesh: &Mesh, layout: &DofLayout, v: impl Fn(Point) -> [C64; 2]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); 2 * layout.n_vertices + layout.n_bubbles];
    let nodal: Vec<[C64; 2]> = mesh.vertices.iter().map(|x| v(*x)).collect();
    for (vi, val) in nodal.iter().enumerate() {
        out[layout.u_vertex(vi, 0)] = val[0];
        out[layout.u_vertex(vi, 1)] = val[1];
    }
    for (fi, facet) in mesh.facets.iter().enumerate() {
        let Some(dof) = layout.u_bubble(fi) else { continue };
        let [a, b] = facet.vertices;
        let n = facet.normal;
        let flux = facet_integral(mesh, fi, |x, t| {
            let vx = v(x);
            let lin = [0, 1].map(|c| nodal[a][c] * (1.0 - t) + nodal[b][c] * t);
            (vx[0] - lin[0]) * n.x + (vx[1] - lin[1]) * n.y
        });
        out[dof] = flux / (mesh.facet_length(fi) / 6.0);
    }
    out
}

/// Raviart–Thomas interpolant `Π_h^z`: facet fluxes `∫_e z·n_e ds`.
pub fn interp_rt(mesh: &Mesh, z: impl Fn(Point) -> [C64; 2]) -> Vec<C64> {
    (0..mesh.n_facets())
        .map(|fi| {
            let n = mesh.facets[fi].normal;
            facet_integral(mesh, fi, |x, _| {
                let zx = z(x);
                zx[0] * n.x + zx[1] * n.y
            })
        })
        .collect()
}

/// L² projection `P_h` onto piecewise constants (cell means).
pub fn project_p0(mesh: &Mesh, q: impl Fn(Point) -> C64) -> Vec<C64> {
    let rule = QuadratureRule::degree7();
    (0..mesh.n_cells())
        .map(|c| {
            let g = mesh.cell_geometry(c);
            rule.points.iter().zip(&rule.weights).map(|(l, w)| q(g.point(*l)) * *w).sum()
        })
        .collect()
}

/// Nodal interpolant `Π_h^s` onto continuous P1.
pub fn interp_p1(mesh: &Mesh, s: impl Fn(Point) -> C64) -> Vec<C64> {
    mesh.vertices.iter().map(|x| s(*x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::CellBasis;
    use crate::mesh::{BoundaryConfig, Partition};
    use approx::assert_relative_eq;

    fn traction_everywhere(n: usize) -> (crate::mesh::TaggedMesh, DofLayout) {
        let cfg = BoundaryConfig {
            mechanics: Partition::all_second(),
            flow: Partition::all_first(),
            heat: Partition::all_second(),
            allow_floating: true,
        };
        let m = Mesh::uniform_unit_square(n).unwrap().tag_boundary(&cfg).unwrap();
        let l = DofLayout::new(&m).unwrap();
        (m, l)
    }

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn p1_field_has_no_bubbles() {
        let (m, l) = traction_everywhere(3);
        let coef = interp_bv(&m, &l, |x| [re(1.0 + 2.0 * x.x - x.y), C64::new(x.y, 3.0 * x.x)]);
        assert!(coef[2 * l.n_vertices..].iter().all(|b| b.norm() < 1e-14));
    }

    #[test]
    fn bubble_restores_facet_flux() {
        let (m, l) = traction_everywhere(2);
        let v = |x: Point| [re((3.0 * x.y).sin()), C64::new(x.x * x.x, x.y)];
        let coef = interp_bv(&m, &l, v);
        let rt_exact = interp_rt(&m, v);
        // rebuild facet fluxes of the interpolant from the basis
        for fi in 0..m.n_facets() {
            let c = m.facets[fi].cells[0].unwrap();
            let b = CellBasis::new(&m, &l, c);
            let dofs = l.cell_dofs(&m, c);
            let n = m.facets[fi].normal;
            let flux = facet_integral(&m, fi, |x, _| {
                let (phi, _) = b.br(b.geom.barycentric(x));
                let mut s = C64::new(0.0, 0.0);
                for (i, d) in dofs.u.iter().enumerate() {
                    if let Some(d) = d {
                        s += coef[*d] * phi[i].dot(&n);
                    }
                }
                s
            });
            assert!((flux - rt_exact[fi]).norm() < 1e-13, "facet {fi}");
        }
    }

    #[test]
    fn rt_reproduces_constants() {
        let m = Mesh::uniform_unit_square(3).unwrap();
        let z = interp_rt(&m, |_| [re(1.0), re(-2.0)]);
        for (fi, f) in m.facets.iter().enumerate() {
            let expect = (f.normal.x - 2.0 * f.normal.y) * m.facet_length(fi);
            assert_relative_eq!(z[fi].re, expect, epsilon = 1e-14);
        }
        let zero = interp_rt(&m, |_| [re(0.0), re(0.0)]);
        assert!(zero.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn p0_of_affine_is_centroid_value() {
        let m = Mesh::uniform_unit_square(4).unwrap();
        let q = project_p0(&m, |x| re(x.x));
        for (c, v) in q.iter().enumerate() {
            assert_relative_eq!(v.re, m.cell_geometry(c).centroid().x, epsilon = 1e-14);
        }
        assert!(project_p0(&m, |_| re(2.5)).iter().all(|v| (v.re - 2.5).abs() < 1e-14));
    }

    #[test]
    fn p1_reproduces_affine() {
        let m = Mesh::uniform_unit_square(2).unwrap();
        let s = interp_p1(&m, |x| C64::new(1.0 + x.x, 2.0 * x.y));
        for (v, x) in s.iter().zip(&m.vertices) {
            assert_eq!(*v, C64::new(1.0 + x.x, 2.0 * x.y));
        }
    }
}
