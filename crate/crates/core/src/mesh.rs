//! Structured triangulations of the unit square with oriented facets and
//! boundary tags.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::{Error, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FacetKind {
    Interior,
    Boundary,
}

#[derive(Clone, Debug)]
pub struct Facet {
    pub vertices: [usize; 2],
    /// Fixed unit normal `n_e`. Boundary facets point outward; interior
    /// facets point out of `cells[0]` (the lower-indexed neighbour).
    pub normal: Point,
    /// Adjacent cells, lower index first.
    pub cells: [Option<usize>; 2],
    pub kind: FacetKind,
}

/// Triangulation with counterclockwise cells.
///
/// Local facet `k` of a cell is the edge opposite local vertex `k`.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub cells: Vec<[usize; 3]>,
    pub facets: Vec<Facet>,
    /// Per cell: global facet index and orientation sign (+1 when `n_e` is
    /// the cell's outward normal) for each local facet.
    pub cell_facets: Vec<[(usize, f64); 3]>,
    /// Characteristic mesh size: max cell diameter over √2.
    pub h: f64,
}

/// Geometric data of one cell.
#[derive(Clone, Copy, Debug)]
pub struct CellGeometry {
    pub vertices: [Point; 3],
    pub area: f64,
    pub diameter: f64,
    /// Gradients of the barycentric coordinates.
    pub grad_bary: [Point; 3],
}

impl CellGeometry {
    /// Physical point of barycentric coordinates `l`.
    pub fn point(&self, l: [f64; 3]) -> Point {
        self.vertices[0] * l[0] + self.vertices[1] * l[1] + self.vertices[2] * l[2]
    }

    pub fn centroid(&self) -> Point {
        (self.vertices[0] + self.vertices[1] + self.vertices[2]) / 3.0
    }

    /// Barycentric coordinates of a physical point.
    pub fn barycentric(&self, x: Point) -> [f64; 3] {
        let l1 = self.grad_bary[1].dot(&(x - self.vertices[0]));
        let l2 = self.grad_bary[2].dot(&(x - self.vertices[0]));
        [1.0 - l1 - l2, l1, l2]
    }
}

impl Mesh {
    /// `n × n` squares, each split along its anti-diagonal into a lower-left
    /// triangle `{(i,j), (i+1,j), (i,j+1)}` and an upper-right triangle.
    pub fn uniform_unit_square(n: usize) -> Result<Mesh> {
        if n == 0 {
            return Err(Error::Mesh("n must be at least 1".into()));
        }
        let vid = |i: usize, j: usize| j * (n + 1) + i;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Point::new(i as f64 / n as f64, j as f64 / n as f64));
            }
        }
        let mut cells = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                cells.push([vid(i, j), vid(i + 1, j), vid(i, j + 1)]);
                cells.push([vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]);
            }
        }
        Self::from_cells(vertices, cells)
    }

    /// Builds facets and orientations from a counterclockwise cell list.
    pub fn from_cells(vertices: Vec<Point>, cells: Vec<[usize; 3]>) -> Result<Mesh> {
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut facets: Vec<Facet> = Vec::new();
        let mut cell_facets = Vec::with_capacity(cells.len());
        let mut hmax: f64 = 0.0;
        for (ci, cell) in cells.iter().enumerate() {
            let [a, b, c] = cell.map(|v| vertices[v]);
            let area2 = (b - a).perp(&(c - a));
            if area2 <= 0.0 {
                return Err(Error::Mesh(format!("cell {ci} is not counterclockwise")));
            }
            hmax = hmax.max((b - a).norm()).max((c - b).norm()).max((a - c).norm());
            let mut local = [(0usize, 0.0f64); 3];
            for k in 0..3 {
                let va = cell[(k + 1) % 3];
                let vb = cell[(k + 2) % 3];
                let key = (va.min(vb), va.max(vb));
                let fi = match lookup.get(&key) {
                    Some(&fi) => {
                        let f = &mut facets[fi];
                        if f.cells[1].is_some() {
                            return Err(Error::Mesh(format!("facet {key:?} shared by more than two cells")));
                        }
                        f.cells[1] = Some(ci);
                        f.kind = FacetKind::Interior;
                        local[k] = (fi, -1.0);
                        continue;
                    }
                    None => facets.len(),
                };
                let t = vertices[vb] - vertices[va];
                // counterclockwise cell: outward normal is the tangent rotated clockwise
                let normal = Point::new(t.y, -t.x) / t.norm();
                facets.push(Facet {
                    vertices: [va, vb],
                    normal,
                    cells: [Some(ci), None],
                    kind: FacetKind::Boundary,
                });
                lookup.insert(key, fi);
                local[k] = (fi, 1.0);
            }
            cell_facets.push(local);
        }
        Ok(Mesh {
            vertices,
            cells,
            facets,
            cell_facets,
            h: hmax / std::f64::consts::SQRT_2,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn cell_geometry(&self, cell: usize) -> CellGeometry {
        let v = self.cells[cell].map(|i| self.vertices[i]);
        let area2 = (v[1] - v[0]).perp(&(v[2] - v[0]));
        let grad_bary = std::array::from_fn(|k| {
            let a = v[(k + 1) % 3];
            let b = v[(k + 2) % 3];
            Point::new(a.y - b.y, b.x - a.x) / area2
        });
        let diameter = (v[1] - v[0]).norm().max((v[2] - v[1]).norm()).max((v[0] - v[2]).norm());
        CellGeometry { vertices: v, area: 0.5 * area2, diameter, grad_bary }
    }

    pub fn facet_length(&self, facet: usize) -> f64 {
        let [a, b] = self.facets[facet].vertices;
        (self.vertices[b] - self.vertices[a]).norm()
    }

    pub fn facet_midpoint(&self, facet: usize) -> Point {
        let [a, b] = self.facets[facet].vertices;
        (self.vertices[a] + self.vertices[b]) * 0.5
    }

    /// Endpoints of a facet.
    pub fn facet_points(&self, facet: usize) -> [Point; 2] {
        self.facets[facet].vertices.map(|v| self.vertices[v])
    }

    pub fn boundary_facets(&self) -> impl Iterator<Item = usize> + '_ {
        self.facets
            .iter()
            .enumerate()
            .filter(|(_, f)| f.kind == FacetKind::Boundary)
            .map(|(i, _)| i)
    }

    /// Local index (0..3) of `facet` within `cell`.
    pub fn local_facet(&self, cell: usize, facet: usize) -> Option<usize> {
        self.cell_facets[cell].iter().position(|(f, _)| *f == facet)
    }

    /// Plain-text dump: a `vertices N` section of `x y` lines followed by a
    /// `cells M` section of `v0 v1 v2` lines.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "vertices {}", self.vertices.len())?;
        for v in &self.vertices {
            writeln!(out, "{:.17e} {:.17e}", v.x, v.y)?;
        }
        writeln!(out, "cells {}", self.cells.len())?;
        for c in &self.cells {
            writeln!(out, "{} {} {}", c[0], c[1], c[2])?;
        }
        Ok(())
    }

    /// Classifies boundary facets into the three boundary partitions.
    pub fn tag_boundary(self, cfg: &BoundaryConfig) -> Result<TaggedMesh> {
        let mut tags = vec![None; self.facets.len()];
        let mut measure = [0.0f64; 3];
        for fi in self.boundary_facets().collect::<Vec<_>>() {
            let x = self.facet_midpoint(fi);
            let mech = cfg.mechanics.classify(x).map_err(|e| tag_error("displacement/traction", fi, x, e))?;
            let flow = cfg.flow.classify(x).map_err(|e| tag_error("no-flow/pressure", fi, x, e))?;
            let heat = cfg.heat.classify(x).map_err(|e| tag_error("temperature/flux", fi, x, e))?;
            let len = self.facet_length(fi);
            if mech == Side::First {
                measure[0] += len;
            }
            if heat == Side::First {
                measure[2] += len;
            }
            if flow == Side::First {
                measure[1] += len;
            }
            tags[fi] = Some(BoundaryTag {
                mechanics: mech.into(),
                flow: flow.into(),
                heat: heat.into(),
            });
        }
        if !cfg.allow_floating && (measure[0] == 0.0 || measure[2] == 0.0) {
            return Err(Error::Boundary(
                "displacement and temperature Dirichlet parts must have positive measure".into(),
            ));
        }
        Ok(TaggedMesh { mesh: self, tags })
    }
}

fn tag_error(partition: &str, facet: usize, x: Point, claim: usize) -> Error {
    let what = if claim == 0 { "neither" } else { "both" };
    Error::Boundary(format!(
        "{partition}: facet {facet} at ({:.4}, {:.4}) is claimed by {what} parts",
        x.x, x.y
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    First,
    Second,
}

/// Facet predicate evaluated at the facet midpoint.
pub type FacetPredicate = Arc<dyn Fn(Point) -> bool + Send + Sync>;

/// A two-way split of the boundary.
#[derive(Clone)]
pub struct Partition {
    pub first: FacetPredicate,
    pub second: FacetPredicate,
}

impl Partition {
    pub fn new(
        first: impl Fn(Point) -> bool + Send + Sync + 'static,
        second: impl Fn(Point) -> bool + Send + Sync + 'static,
    ) -> Self {
        Partition { first: Arc::new(first), second: Arc::new(second) }
    }

    /// `first` on the whole boundary.
    pub fn all_first() -> Self {
        Self::new(|_| true, |_| false)
    }

    /// `second` on the whole boundary.
    pub fn all_second() -> Self {
        Self::new(|_| false, |_| true)
    }

    /// `first` where `pred` holds, `second` elsewhere.
    pub fn split(pred: impl Fn(Point) -> bool + Send + Sync + 'static) -> Self {
        let pred: FacetPredicate = Arc::new(pred);
        let neg = pred.clone();
        Partition { first: pred, second: Arc::new(move |x| !neg(x)) }
    }

    fn classify(&self, x: Point) -> std::result::Result<Side, usize> {
        match ((self.first)(x), (self.second)(x)) {
            (true, false) => Ok(Side::First),
            (false, true) => Ok(Side::Second),
            (a, b) => Err(a as usize + b as usize),
        }
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Partition(..)")
    }
}

/// The three boundary partitions: `(Γ_d, Γ_t)` for the solid, `(Γ_p, Γ_f)`
/// for the fluid (no-flow / prescribed pressure) and `(Γ_r, Γ_h)` for heat
/// (prescribed temperature / flux).
#[derive(Clone, Debug)]
pub struct BoundaryConfig {
    pub mechanics: Partition,
    pub flow: Partition,
    pub heat: Partition,
    /// Permit an empty displacement or temperature Dirichlet part.
    pub allow_floating: bool,
}

impl BoundaryConfig {
    /// `Γ_d = Γ_f = Γ_r = ∂Ω`.
    pub fn all_dirichlet() -> Self {
        BoundaryConfig {
            mechanics: Partition::all_first(),
            flow: Partition::all_second(),
            heat: Partition::all_first(),
            allow_floating: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MechanicsBc {
    /// `u` prescribed (Γ_d).
    Displacement,
    /// `σn` prescribed (Γ_t).
    Traction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowBc {
    /// `w·n` prescribed (Γ_p).
    NoFlow,
    /// `p` prescribed (Γ_f).
    Pressure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeatBc {
    /// `T` prescribed (Γ_r).
    Temperature,
    /// `Θ∇T·n` prescribed (Γ_h).
    Flux,
}

impl From<Side> for MechanicsBc {
    fn from(s: Side) -> Self {
        match s {
            Side::First => MechanicsBc::Displacement,
            Side::Second => MechanicsBc::Traction,
        }
    }
}

impl From<Side> for FlowBc {
    fn from(s: Side) -> Self {
        match s {
            Side::First => FlowBc::NoFlow,
            Side::Second => FlowBc::Pressure,
        }
    }
}

impl From<Side> for HeatBc {
    fn from(s: Side) -> Self {
        match s {
            Side::First => HeatBc::Temperature,
            Side::Second => HeatBc::Flux,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryTag {
    pub mechanics: MechanicsBc,
    pub flow: FlowBc,
    pub heat: HeatBc,
}

/// A mesh whose boundary facets carry one tag from each partition.
#[derive(Clone, Debug)]
pub struct TaggedMesh {
    pub mesh: Mesh,
    /// `None` for interior facets.
    pub tags: Vec<Option<BoundaryTag>>,
}

impl TaggedMesh {
    pub fn count(&self, pred: impl Fn(&BoundaryTag) -> bool) -> usize {
        self.tags.iter().flatten().filter(|t| pred(t)).count()
    }
}

impl std::ops::Deref for TaggedMesh {
    type Target = Mesh;
    fn deref(&self) -> &Mesh {
        &self.mesh
    }
}

/// Side predicates for the unit square, evaluated at facet midpoints.
pub mod sides {
    use crate::Point;

    const EPS: f64 = 1e-12;

    pub fn left(x: Point) -> bool {
        x.x < EPS
    }
    pub fn right(x: Point) -> bool {
        x.x > 1.0 - EPS
    }
    pub fn bottom(x: Point) -> bool {
        x.y < EPS
    }
    pub fn top(x: Point) -> bool {
        x.y > 1.0 - EPS
    }
}
