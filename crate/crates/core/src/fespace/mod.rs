//! Discrete spaces `V_h × Z_h × Q_h × S_h`, their degrees of freedom,
//! quadrature, and interpolation operators.
//!
//! * `V_h`: Bernardi–Raugel: vector P1 plus one normal bubble
//!   `ψ_e n_e = λ_a λ_b n_e` per interior or traction facet.
//! * `Z_h`: lowest-order Raviart–Thomas with unit-flux facet functions.
//! * `Q_h`: piecewise constants.
//! * `S_h`: continuous P1.
//!
//! Global unknowns are ordered in blocks `(u, w, p, T)`.

mod basis;
mod interp;
pub mod quadrature;

pub use basis::CellBasis;
pub(crate) use basis::strain_product;
pub use interp::{interp_bv, interp_p1, interp_rt, project_p0};
pub use quadrature::{EdgeRule, QuadratureRule};

use crate::mesh::{FacetKind, FlowBc, HeatBc, MechanicsBc, TaggedMesh};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    U,
    W,
    P,
    T,
}

impl Field {
    pub const ALL: [Field; 4] = [Field::U, Field::W, Field::P, Field::T];

    pub fn name(self) -> &'static str {
        match self {
            Field::U => "u",
            Field::W => "w",
            Field::P => "p",
            Field::T => "T",
        }
    }
}

/// Degree-of-freedom maps for the four spaces.
#[derive(Clone, Debug)]
pub struct DofLayout {
    pub n_vertices: usize,
    pub n_facets: usize,
    pub n_cells: usize,
    /// Bubble index of each facet, `Some` for interior and traction facets.
    pub bubble_of_facet: Vec<Option<usize>>,
    pub n_bubbles: usize,
    /// Vertices touching a displacement-Dirichlet facet.
    pub u_fixed_vertex: Vec<bool>,
    /// Facets on the no-flow boundary.
    pub w_fixed_facet: Vec<bool>,
    /// Vertices touching a temperature-Dirichlet facet.
    pub t_fixed_vertex: Vec<bool>,
}

/// Global indices of the unknowns supported on one cell.
#[derive(Clone, Copy, Debug)]
pub struct CellDofs {
    /// `2k + c` for vertex `k`, component `c`; `6 + k` for the bubble of
    /// local facet `k` when present.
    pub u: [Option<usize>; 9],
    pub w: [usize; 3],
    pub p: usize,
    pub t: [usize; 3],
}

impl CellDofs {
    pub fn iter_field(&self, field: Field) -> Vec<(usize, usize)> {
        match field {
            Field::U => self.u.iter().enumerate().filter_map(|(k, d)| d.map(|d| (k, d))).collect(),
            Field::W => self.w.iter().copied().enumerate().collect(),
            Field::P => vec![(0, self.p)],
            Field::T => self.t.iter().copied().enumerate().collect(),
        }
    }
}

impl DofLayout {
    pub fn new(mesh: &TaggedMesh) -> Result<Self> {
        if mesh.tags.len() != mesh.n_facets() {
            return Err(Error::Layout("tag vector does not match facet count".into()));
        }
        let mut bubble_of_facet = vec![None; mesh.n_facets()];
        let mut n_bubbles = 0;
        let mut u_fixed_vertex = vec![false; mesh.n_vertices()];
        let mut w_fixed_facet = vec![false; mesh.n_facets()];
        let mut t_fixed_vertex = vec![false; mesh.n_vertices()];
        for (fi, facet) in mesh.facets.iter().enumerate() {
            let enriched = match (facet.kind, mesh.tags[fi]) {
                (FacetKind::Interior, None) => true,
                (FacetKind::Boundary, Some(tag)) => {
                    if tag.mechanics == MechanicsBc::Displacement {
                        for v in facet.vertices {
                            u_fixed_vertex[v] = true;
                        }
                    }
                    if tag.flow == FlowBc::NoFlow {
                        w_fixed_facet[fi] = true;
                    }
                    if tag.heat == HeatBc::Temperature {
                        for v in facet.vertices {
                            t_fixed_vertex[v] = true;
                        }
                    }
                    tag.mechanics == MechanicsBc::Traction
                }
                (FacetKind::Boundary, None) => {
                    return Err(Error::Layout(format!("boundary facet {fi} is untagged")))
                }
                (FacetKind::Interior, Some(_)) => {
                    return Err(Error::Layout(format!("interior facet {fi} carries a boundary tag")))
                }
            };
            if enriched {
                bubble_of_facet[fi] = Some(n_bubbles);
                n_bubbles += 1;
            }
        }
        Ok(DofLayout {
            n_vertices: mesh.n_vertices(),
            n_facets: mesh.n_facets(),
            n_cells: mesh.n_cells(),
            bubble_of_facet,
            n_bubbles,
            u_fixed_vertex,
            w_fixed_facet,
            t_fixed_vertex,
        })
    }

    pub fn n_dofs(&self, field: Field) -> usize {
        match field {
            Field::U => 2 * self.n_vertices + self.n_bubbles,
            Field::W => self.n_facets,
            Field::P => self.n_cells,
            Field::T => self.n_vertices,
        }
    }

    pub fn offset(&self, field: Field) -> usize {
        match field {
            Field::U => 0,
            Field::W => self.n_dofs(Field::U),
            Field::P => self.n_dofs(Field::U) + self.n_dofs(Field::W),
            Field::T => self.n_dofs(Field::U) + self.n_dofs(Field::W) + self.n_dofs(Field::P),
        }
    }

    pub fn total(&self) -> usize {
        self.offset(Field::T) + self.n_dofs(Field::T)
    }

    /// Field owning a global index, and the field-local index.
    pub fn field_of(&self, global: usize) -> (Field, usize) {
        for f in [Field::T, Field::P, Field::W, Field::U] {
            if global >= self.offset(f) {
                return (f, global - self.offset(f));
            }
        }
        unreachable!()
    }

    /// Field-local index of component `c` at vertex `v`.
    pub fn u_vertex(&self, v: usize, c: usize) -> usize {
        2 * v + c
    }

    /// Field-local index of the bubble on `facet`, if enriched.
    pub fn u_bubble(&self, facet: usize) -> Option<usize> {
        self.bubble_of_facet[facet].map(|b| 2 * self.n_vertices + b)
    }

    pub fn cell_dofs(&self, mesh: &crate::mesh::Mesh, cell: usize) -> CellDofs {
        let verts = mesh.cells[cell];
        let facets = mesh.cell_facets[cell];
        let ou = self.offset(Field::U);
        let mut u = [None; 9];
        for k in 0..3 {
            u[2 * k] = Some(ou + self.u_vertex(verts[k], 0));
            u[2 * k + 1] = Some(ou + self.u_vertex(verts[k], 1));
            u[6 + k] = self.u_bubble(facets[k].0).map(|d| ou + d);
        }
        let ow = self.offset(Field::W);
        let ot = self.offset(Field::T);
        CellDofs {
            u,
            w: facets.map(|(f, _)| ow + f),
            p: self.offset(Field::P) + cell,
            t: verts.map(|v| ot + v),
        }
    }

    /// Global indices of every essentially constrained unknown, ascending.
    pub fn essential_dofs(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (v, &fixed) in self.u_fixed_vertex.iter().enumerate() {
            if fixed {
                out.push(self.offset(Field::U) + self.u_vertex(v, 0));
                out.push(self.offset(Field::U) + self.u_vertex(v, 1));
            }
        }
        for (f, &fixed) in self.w_fixed_facet.iter().enumerate() {
            if fixed {
                out.push(self.offset(Field::W) + f);
            }
        }
        for (v, &fixed) in self.t_fixed_vertex.iter().enumerate() {
            if fixed {
                out.push(self.offset(Field::T) + v);
            }
        }
        out.sort_unstable();
        out
    }

    /// Index in the realified `2N` vector of the real or imaginary part of
    /// global unknown `i`.
    pub fn realified(&self, i: usize, imaginary: bool) -> usize {
        if imaginary {
            self.total() + i
        } else {
            i
        }
    }

    /// The subslice of a global vector belonging to `field`.
    pub fn slice<'a, T>(&self, x: &'a [T], field: Field) -> &'a [T] {
        let o = self.offset(field);
        &x[o..o + self.n_dofs(field)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{sides, BoundaryConfig, Mesh, Partition};

    #[test]
    fn counts_all_dirichlet() {
        let m = Mesh::uniform_unit_square(4).unwrap().tag_boundary(&BoundaryConfig::all_dirichlet()).unwrap();
        let l = DofLayout::new(&m).unwrap();
        let interior = m.facets.iter().filter(|f| f.kind == FacetKind::Interior).count();
        assert_eq!(l.n_dofs(Field::U), 2 * 25 + interior);
        assert_eq!(l.n_dofs(Field::W), m.n_facets());
        assert_eq!(l.n_dofs(Field::P), 32);
        assert_eq!(l.n_dofs(Field::T), 25);
        assert_eq!(l.total(), 2 * 25 + interior + m.n_facets() + 32 + 25);
        // 16 boundary vertices constrained for u (2 each) and T; no w constraints
        assert_eq!(l.essential_dofs().len(), 16 * 3);
    }

    #[test]
    fn traction_facets_are_enriched() {
        let cfg = BoundaryConfig {
            mechanics: Partition::split(sides::left),
            flow: Partition::all_first(),
            heat: Partition::all_second(),
            allow_floating: true,
        };
        let m = Mesh::uniform_unit_square(8).unwrap().tag_boundary(&cfg).unwrap();
        let l = DofLayout::new(&m).unwrap();
        let interior = m.facets.iter().filter(|f| f.kind == FacetKind::Interior).count();
        assert_eq!(l.n_bubbles, interior + 24);
        assert_eq!(l.w_fixed_facet.iter().filter(|b| **b).count(), 32);
        assert_eq!(l.u_fixed_vertex.iter().filter(|b| **b).count(), 9);
        assert!(l.t_fixed_vertex.iter().all(|b| !b));
    }

    #[test]
    fn field_lookup_round_trip() {
        let m = Mesh::uniform_unit_square(2).unwrap().tag_boundary(&BoundaryConfig::all_dirichlet()).unwrap();
        let l = DofLayout::new(&m).unwrap();
        for f in Field::ALL {
            let g = l.offset(f) + l.n_dofs(f) - 1;
            assert_eq!(l.field_of(g), (f, l.n_dofs(f) - 1));
            assert_eq!(l.field_of(l.offset(f)), (f, 0));
        }
        assert_eq!(l.realified(3, true), l.total() + 3);
    }
}
