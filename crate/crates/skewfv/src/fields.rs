//! Cell-centred fields, boundary conditions, gradient operators and point
//! location.

use crate::error::{Error, Result};
use crate::geom::{point_in_polygon, Vec2};
use crate::mesh::{Mesh, MeshGeometry};

/// Boundary condition of a scalar field on one patch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryCondition {
    FixedValue(f64),
    ZeroGradient,
}

/// One value per cell plus a boundary condition per patch.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub values: Vec<f64>,
    bcs: Vec<BoundaryCondition>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>, bcs: Vec<BoundaryCondition>, mesh: &Mesh) -> Result<Self> {
        if values.len() != mesh.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for {} cells",
                values.len(),
                mesh.n_cells()
            )));
        }
        if bcs.len() != mesh.patches().len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} boundary conditions for {} patches",
                bcs.len(),
                mesh.patches().len()
            )));
        }
        Ok(ScalarField { values, bcs })
    }

    pub fn constant(value: f64, bcs: Vec<BoundaryCondition>, mesh: &Mesh) -> Result<Self> {
        Self::new(vec![value; mesh.n_cells()], bcs, mesh)
    }

    /// Same-BC field with every patch zero-gradient.
    pub fn zero_gradient(values: Vec<f64>, mesh: &Mesh) -> Result<Self> {
        let bcs = vec![BoundaryCondition::ZeroGradient; mesh.patches().len()];
        Self::new(values, bcs, mesh)
    }

    pub fn bcs(&self) -> &[BoundaryCondition] {
        &self.bcs
    }

    /// Face value on a boundary face, resolved from the patch condition.
    pub fn boundary_value(&self, mesh: &Mesh, face: usize) -> f64 {
        let patch = mesh.patch_of_face(face).expect("boundary face");
        match self.bcs[patch] {
            BoundaryCondition::FixedValue(g) => g,
            BoundaryCondition::ZeroGradient => self.values[mesh.face(face).owner],
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One 2D vector per cell (gradients, velocity).
#[derive(Clone, Debug)]
pub struct VectorField(pub Vec<Vec2>);

/// One value per face (internal faces first, then boundary faces).
#[derive(Clone, Debug)]
pub struct FaceScalar(pub Vec<f64>);

#[derive(Clone, Debug)]
pub struct FaceVector(pub Vec<Vec2>);

/// Linear face interpolation at the intersection point `x_f'`; boundary faces
/// get their boundary-condition value.
pub fn linear_face_values(field: &ScalarField, mesh: &Mesh, geom: &MeshGeometry) -> FaceScalar {
    let mut out = Vec::with_capacity(mesh.n_faces());
    for fi in 0..mesh.n_faces() {
        let f = mesh.face(fi);
        match f.neighbour {
            Some(nei) => {
                let w = geom.faces[fi].delta_w;
                out.push(w * field.values[f.owner] + (1.0 - w) * field.values[nei]);
            }
            None => out.push(field.boundary_value(mesh, fi)),
        }
    }
    FaceScalar(out)
}

/// Cell gradient by Gauss' theorem with linear face interpolation.
///
/// Exact for affine fields only where faces are conjunctional; on skewed
/// meshes the least-squares gradient should be preferred for corrections.
pub fn gauss_gradient(field: &ScalarField, mesh: &Mesh, geom: &MeshGeometry) -> VectorField {
    let face_vals = linear_face_values(field, mesh, geom);
    let mut grad = vec![Vec2::ZERO; mesh.n_cells()];
    for fi in 0..mesh.n_faces() {
        let f = mesh.face(fi);
        let contrib = geom.faces[fi].s_f * face_vals.0[fi];
        grad[f.owner] += contrib;
        if let Some(nei) = f.neighbour {
            grad[nei] += -contrib;
        }
    }
    for (g, c) in grad.iter_mut().zip(&geom.cells) {
        *g = *g / c.volume;
    }
    VectorField(grad)
}

/// Weighted least-squares gradient over the face-neighbour stencil with
/// inverse-distance-squared weights; exact for affine fields on any mesh.
///
/// Cells whose neighbour stencil is collinear (e.g. corner triangles) are
/// augmented with second-ring neighbours before giving up.
pub fn least_squares_gradient(
    field: &ScalarField,
    mesh: &Mesh,
    geom: &MeshGeometry,
) -> Result<VectorField> {
    least_squares_gradient_of(mesh, geom, |c| field.values[c])
}

/// Least-squares gradient of an arbitrary per-cell quantity.
pub fn least_squares_gradient_of(
    mesh: &Mesh,
    geom: &MeshGeometry,
    value: impl Fn(usize) -> f64,
) -> Result<VectorField> {
    let mut out = Vec::with_capacity(mesh.n_cells());
    let mut stencil: Vec<usize> = Vec::new();
    for ci in 0..mesh.n_cells() {
        stencil.clear();
        stencil.extend_from_slice(mesh.cell_neighbours(ci));
        match lsf_cell(geom, ci, &stencil, &value) {
            Some(g) => out.push(g),
            None => {
                // Second ring.
                for &nb in mesh.cell_neighbours(ci) {
                    for &nb2 in mesh.cell_neighbours(nb) {
                        if nb2 != ci && !stencil.contains(&nb2) {
                            stencil.push(nb2);
                        }
                    }
                }
                match lsf_cell(geom, ci, &stencil, &value) {
                    Some(g) => out.push(g),
                    None => return Err(Error::SingularStencil { cell: ci }),
                }
            }
        }
    }
    Ok(VectorField(out))
}

fn lsf_cell(
    geom: &MeshGeometry,
    ci: usize,
    stencil: &[usize],
    value: &impl Fn(usize) -> f64,
) -> Option<Vec2> {
    if stencil.len() < 2 {
        return None;
    }
    let xc = geom.cells[ci].centroid;
    let vc = value(ci);
    let (mut axx, mut axy, mut ayy) = (0.0, 0.0, 0.0);
    let mut b = Vec2::ZERO;
    for &nb in stencil {
        let dx = geom.cells[nb].centroid - xc;
        let w = 1.0 / dx.norm_sq();
        axx += w * dx.x * dx.x;
        axy += w * dx.x * dx.y;
        ayy += w * dx.y * dx.y;
        b += dx * (w * (value(nb) - vc));
    }
    let det = axx * ayy - axy * axy;
    if det <= 1e-12 * axx * ayy {
        return None;
    }
    Some(Vec2::new((ayy * b.x - axy * b.y) / det, (axx * b.y - axy * b.x) / det))
}

/// Linear blend of the two cell gradients at `x_f'`.
pub fn interpolate_gradient_to_face(grad_p: Vec2, grad_n: Vec2, delta_w: f64) -> Vec2 {
    grad_p * delta_w + grad_n * (1.0 - delta_w)
}

/// Face-interpolated gradient for every internal face; boundary faces carry
/// the owner gradient.
pub fn face_gradients(grad: &VectorField, mesh: &Mesh, geom: &MeshGeometry) -> FaceVector {
    let mut out = Vec::with_capacity(mesh.n_faces());
    for fi in 0..mesh.n_faces() {
        let f = mesh.face(fi);
        match f.neighbour {
            Some(nei) => out.push(interpolate_gradient_to_face(
                grad.0[f.owner],
                grad.0[nei],
                geom.faces[fi].delta_w,
            )),
            None => out.push(grad.0[f.owner]),
        }
    }
    FaceVector(out)
}

/// Find the cell containing `point` by walking across faces from `hint`.
///
/// Each step crosses the face whose outward normal makes the largest positive
/// projection towards the point. Crossing a boundary face reports the point
/// as exterior (the generated domains are convex). The walk is capped at
/// `2 * n_cells` steps and falls back to an exhaustive scan, so it terminates
/// on any topology.
pub fn locate_point(mesh: &Mesh, geom: &MeshGeometry, point: Vec2, hint: usize) -> Option<usize> {
    let mut cur = hint.min(mesh.n_cells() - 1);
    for _ in 0..2 * mesh.n_cells() {
        let poly = mesh.cell_polygon(cur);
        if point_in_polygon(&poly, point) {
            return Some(cur);
        }
        let mut best: Option<(f64, usize)> = None;
        for &fi in mesh.cell_faces(cur) {
            let fg = &geom.faces[fi];
            let outward = if mesh.face(fi).owner == cur { fg.s_f } else { -fg.s_f };
            let d = (point - fg.centre).dot(outward) / fg.area;
            if d > 0.0 && best.map_or(true, |(bd, _)| d > bd) {
                best = Some((d, fi));
            }
        }
        match best {
            Some((_, fi)) => {
                let f = mesh.face(fi);
                match f.neighbour {
                    Some(nei) => cur = if f.owner == cur { nei } else { f.owner },
                    None => return None,
                }
            }
            None => break, // inconsistent with the polygon test; rescan below
        }
    }
    (0..mesh.n_cells()).find(|&ci| point_in_polygon(&mesh.cell_polygon(ci), point))
}
