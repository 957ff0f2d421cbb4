//! CSV and legacy-VTK writers for solved fields.

use std::io::Write;

use crate::mesh::Mesh;
use crate::C64;

/// `x,y,re_p,im_p,abs_p` at cell centers.
pub fn write_cell_pressure_csv<W: Write>(mesh: &Mesh, p: &[C64], mut out: W) -> std::io::Result<()> {
    writeln!(out, "x,y,re_p,im_p,abs_p")?;
    for (c, v) in p.iter().enumerate() {
        let x = mesh.cell_geometry(c).centroid();
        writeln!(out, "{:.6},{:.6},{:.12e},{:.12e},{:.12e}", x.x, x.y, v.re, v.im, v.norm())?;
    }
    Ok(())
}

/// `x,y,re_u1,im_u1,re_u2,im_u2,re_T,im_T` at vertices.
pub fn write_vertex_csv<W: Write>(mesh: &Mesh, u: &[[C64; 2]], t: &[C64], mut out: W) -> std::io::Result<()> {
    writeln!(out, "x,y,re_u1,im_u1,re_u2,im_u2,re_T,im_T")?;
    for (i, x) in mesh.vertices.iter().enumerate() {
        let [a, b] = u[i];
        writeln!(
            out,
            "{:.6},{:.6},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            x.x, x.y, a.re, a.im, b.re, b.im, t[i].re, t[i].im
        )?;
    }
    Ok(())
}

/// Two columns `y,abs_p`.
pub fn write_line_csv<W: Write>(samples: &[(f64, f64)], mut out: W) -> std::io::Result<()> {
    writeln!(out, "y,abs_p")?;
    for (y, v) in samples {
        writeln!(out, "{y:.6},{v:.12e}")?;
    }
    Ok(())
}

/// Legacy ASCII VTK unstructured grid with pressure as cell data and
/// displacement and temperature as point data.
pub fn write_vtk<W: Write>(mesh: &Mesh, p: &[C64], u: &[[C64; 2]], t: &[C64], mut out: W) -> std::io::Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "thermoporo fields")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.n_vertices())?;
    for x in &mesh.vertices {
        writeln!(out, "{} {} 0", x.x, x.y)?;
    }
    writeln!(out, "CELLS {} {}", mesh.n_cells(), 4 * mesh.n_cells())?;
    for c in &mesh.cells {
        writeln!(out, "3 {} {} {}", c[0], c[1], c[2])?;
    }
    writeln!(out, "CELL_TYPES {}", mesh.n_cells())?;
    for _ in 0..mesh.n_cells() {
        writeln!(out, "5")?;
    }
    writeln!(out, "CELL_DATA {}", mesh.n_cells())?;
    let scalar = |out: &mut W, name: &str, vals: &mut dyn Iterator<Item = f64>| -> std::io::Result<()> {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in vals {
            writeln!(out, "{v:e}")?;
        }
        Ok(())
    };
    scalar(&mut out, "re_p", &mut p.iter().map(|v| v.re))?;
    scalar(&mut out, "im_p", &mut p.iter().map(|v| v.im))?;
    scalar(&mut out, "abs_p", &mut p.iter().map(|v| v.norm()))?;
    writeln!(out, "POINT_DATA {}", mesh.n_vertices())?;
    for (name, part) in [("re_u", (|c: &C64| c.re) as fn(&C64) -> f64), ("im_u", |c: &C64| c.im)] {
        writeln!(out, "VECTORS {name} double")?;
        for v in u {
            writeln!(out, "{:e} {:e} 0", part(&v[0]), part(&v[1]))?;
        }
    }
    scalar(&mut out, "re_T", &mut t.iter().map(|v| v.re))?;
    scalar(&mut out, "im_T", &mut t.iter().map(|v| v.im))?;
    Ok(())
}
