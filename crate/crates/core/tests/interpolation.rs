mod common;

use proptest::prelude::*;
use thermoporo::fespace::{interp_bv, interp_p1, interp_rt, project_p0, CellBasis, Field};
use thermoporo::C64;

use common::*;

fn coefficients() -> impl Strategy<Value = [f64; 10]> {
    prop::array::uniform10(-2.0..2.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // cell mean of div Π v equals the cell mean of div v
    #[test]
    fn br_interpolant_commutes_with_mean_divergence(c in coefficients(), k in 1usize..4) {
        let n = 1 << k;
        let (mesh, layout) = natural_mesh(n);
        let v = cubic_vector(c);
        let coef = interp_bv(&mesh, &layout, |p| (v.v)(p).map(re));
        let means = cell_means(&mesh, |p| v.div(p));
        for cell in 0..mesh.n_cells() {
            let b = CellBasis::new(&mesh, &layout, cell);
            let d = layout.cell_dofs(&mesh, cell);
            let dbar: C64 = b.br_mean_div().iter().zip(&d.u).filter_map(|(m, i)| i.map(|i| coef[i] * m)).sum();
            prop_assert!((dbar.re - means[cell]).abs() < 1e-11, "cell {cell}: {} vs {}", dbar.re, means[cell]);
        }
    }

    // div Π z equals the cell mean of div z
    #[test]
    fn rt_interpolant_commutes_with_divergence(c in coefficients(), k in 1usize..4) {
        let n = 1 << k;
        let (mesh, layout) = natural_mesh(n);
        let z = cubic_vector(c);
        let flux = interp_rt(&mesh, |p| (z.v)(p).map(re));
        let means = cell_means(&mesh, |p| z.div(p));
        let ow = layout.offset(Field::W);
        for cell in 0..mesh.n_cells() {
            let b = CellBasis::new(&mesh, &layout, cell);
            let d = layout.cell_dofs(&mesh, cell);
            let div: f64 = b.rt_div().iter().zip(&d.w).map(|(m, i)| flux[*i - ow].re * m).sum();
            prop_assert!((div - means[cell]).abs() < 1e-11);
        }
    }

    // projections are idempotent on their own spaces
    #[test]
    fn p0_and_p1_reproduce_their_spaces(a in -3.0..3.0f64, bx in -3.0..3.0f64, by in -3.0..3.0f64) {
        let (mesh, _) = natural_mesh(4);
        let affine = |p: thermoporo::Point| re(a + bx * p.x + by * p.y);
        let s = interp_p1(&mesh, affine);
        for (v, x) in s.iter().zip(&mesh.vertices) {
            prop_assert!((v - affine(*x)).norm() < 1e-13);
        }
        let q = project_p0(&mesh, affine);
        for (cell, v) in q.iter().enumerate() {
            let c = mesh.cell_geometry(cell).centroid();
            prop_assert!((v - affine(c)).norm() < 1e-12);
        }
    }
}

#[test]
fn interpolation_orders() {
    let (v, z, q, s) = smooth_fields();
    let errs: Vec<[f64; 7]> = [4, 8, 16]
        .iter()
        .map(|&n| {
            let (mesh, layout) = natural_mesh(n);
            let x = interpolant(&mesh, &layout, &v, &z, &q, &s);
            interpolation_errors(&mesh, &layout, &x, &v, &z, &q, &s)
        })
        .collect();
    let r = rates(&errs);
    let expect = [2.0, 1.0, 1.0, 1.0, 1.0, 2.0, 1.0];
    for (k, want) in expect.iter().enumerate() {
        let got = r[1][k];
        assert!((got - want).abs() < 0.1, "norm {k}: rate {got:.3}, expected {want}");
    }
}

#[test]
fn linear_fields_are_reproduced() {
    let (mesh, layout) = natural_mesh(4);
    let v = cubic_vector([0.5, 1.0, 0.0, 0.0, 0.0, -1.0, 2.0, 0.0, 0.0, 0.0]);
    let z = cubic_vector([1.0, -0.5, 0.0, 0.0, 0.0, 0.25, 0.75, 0.0, 0.0, 0.0]);
    let q = Scalar { s: Box::new(|_| 3.0), grad: Box::new(|_| [0.0, 0.0]) };
    let s = Scalar { s: Box::new(|p| 1.0 - p.x + 2.0 * p.y), grad: Box::new(|_| [-1.0, 2.0]) };
    let x = interpolant(&mesh, &layout, &v, &z, &q, &s);
    let e = interpolation_errors(&mesh, &layout, &x, &v, &z, &q, &s);
    // RT0 holds a + b x only with a common b for both components
    for (k, err) in e.iter().enumerate() {
        if k == 2 || k == 3 {
            continue;
        }
        assert!(*err < 1e-12, "norm {k}: {err:e}");
    }
    let rt = cubic_vector([1.0, 0.5, 0.0, 0.0, 0.0, 0.25, 0.5, 0.0, 0.0, 0.0]);
    let x = interpolant(&mesh, &layout, &v, &rt, &q, &s);
    let e = interpolation_errors(&mesh, &layout, &x, &v, &rt, &q, &s);
    assert!(e[2] < 1e-12 && e[3] < 1e-12, "{e:?}");
}
