//! Polygonal 2D mesh with owner/neighbour face addressing.
//!
//! Faces are stored internal-first; every internal face has `owner < neighbour`.
//! Cells are derived from the face list and kept as closed CCW vertex loops.

mod generate;
mod geometry;
mod io;

pub use generate::{build_cartesian, build_triangular, distort_random, distort_systematic};
pub use geometry::{
    decompose_face_vector, quality_report, CellGeometry, FaceGeometry, FaceSplit, MeshGeometry,
    QualityReport,
};
pub use io::{read_mesh, write_mesh};

use crate::error::{Error, Result};
use crate::geom::{polygon_signed_area, Vec2};

/// A straight mesh edge between two vertices. Boundary faces have no neighbour.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub v0: usize,
    pub v1: usize,
    pub owner: usize,
    pub neighbour: Option<usize>,
}

/// Named set of boundary faces.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    pub name: String,
    pub faces: Vec<usize>,
}

/// Logical lattice of generator-built meshes. Distortion keeps the layout so
/// refinement studies can re-distort self-similarly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridLayout {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl GridLayout {
    pub fn vertex(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Vec2>,
    faces: Vec<Face>,
    n_internal: usize,
    patches: Vec<Patch>,
    face_patch: Vec<Option<usize>>,
    cell_faces: Vec<Vec<usize>>,
    cell_loops: Vec<Vec<usize>>,
    cell_neighbours: Vec<Vec<usize>>,
    face_forward_in_owner: Vec<bool>,
    grid: Option<GridLayout>,
}

impl Mesh {
    /// Build and validate a mesh from raw vertices, faces and patches.
    ///
    /// Faces are reordered internal-first (stable) and patch face indices are
    /// remapped accordingly, so the constructor is idempotent under the mesh
    /// file round trip.
    pub fn new(vertices: Vec<Vec2>, faces: Vec<Face>, patches: Vec<Patch>) -> Result<Mesh> {
        Self::with_grid(vertices, faces, patches, None)
    }

    pub(crate) fn with_grid(
        vertices: Vec<Vec2>,
        faces: Vec<Face>,
        patches: Vec<Patch>,
        grid: Option<GridLayout>,
    ) -> Result<Mesh> {
        for (i, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
            }
        }
        if faces.len() < 3 {
            return Err(Error::InvalidMesh("fewer than 3 faces".into()));
        }

        // Stable internal-first ordering.
        let mut order: Vec<usize> = (0..faces.len()).collect();
        order.sort_by_key(|&f| faces[f].neighbour.is_none());
        let mut remap = vec![0usize; faces.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let faces: Vec<Face> = order.iter().map(|&f| faces[f].clone()).collect();
        let patches: Vec<Patch> = patches
            .into_iter()
            .map(|p| Patch {
                name: p.name,
                faces: p.faces.iter().map(|&f| remap.get(f).copied().unwrap_or(usize::MAX)).collect(),
            })
            .collect();
        let n_internal = faces.iter().filter(|f| f.neighbour.is_some()).count();

        let nv = vertices.len();
        let mut n_cells = 0usize;
        for (fi, f) in faces.iter().enumerate() {
            if f.v0 >= nv || f.v1 >= nv {
                return Err(Error::InvalidMesh(format!("face {fi} references missing vertex")));
            }
            if f.v0 == f.v1 {
                return Err(Error::InvalidMesh(format!("face {fi} has identical endpoints")));
            }
            n_cells = n_cells.max(f.owner + 1);
            if let Some(n) = f.neighbour {
                if n == f.owner {
                    return Err(Error::InvalidMesh(format!("face {fi} owner equals neighbour")));
                }
                if f.owner > n {
                    return Err(Error::InvalidMesh(format!(
                        "face {fi}: owner {} >= neighbour {n}",
                        f.owner
                    )));
                }
                n_cells = n_cells.max(n + 1);
            }
        }
        // Each face borders at most two cells and each cell needs >= 3 faces;
        // this bound also blocks allocation bombs from hostile files.
        if n_cells * 3 > 2 * faces.len() {
            return Err(Error::InvalidMesh(format!(
                "{n_cells} cells cannot be bounded by {} faces",
                faces.len()
            )));
        }

        let mut cell_faces: Vec<Vec<usize>> = vec![Vec::new(); n_cells];
        for (fi, f) in faces.iter().enumerate() {
            cell_faces[f.owner].push(fi);
            if let Some(n) = f.neighbour {
                cell_faces[n].push(fi);
            }
        }
        for (ci, cf) in cell_faces.iter().enumerate() {
            if cf.len() < 3 {
                return Err(Error::InvalidMesh(format!("cell {ci} has {} faces", cf.len())));
            }
        }

        // Patch bookkeeping: every boundary face in exactly one patch.
        let mut face_patch: Vec<Option<usize>> = vec![None; faces.len()];
        for (pi, p) in patches.iter().enumerate() {
            if p.name.is_empty() || p.name.contains(|c: char| c.is_whitespace() || c == ':') {
                return Err(Error::InvalidMesh(format!("invalid patch name {:?}", p.name)));
            }
            for &f in &p.faces {
                if f >= faces.len() {
                    return Err(Error::InvalidMesh(format!("patch {} references missing face", p.name)));
                }
                if faces[f].neighbour.is_some() {
                    return Err(Error::InvalidMesh(format!("patch {} contains internal face {f}", p.name)));
                }
                if face_patch[f].is_some() {
                    return Err(Error::InvalidMesh(format!("boundary face {f} in two patches")));
                }
                face_patch[f] = Some(pi);
            }
        }
        for f in n_internal..faces.len() {
            if face_patch[f].is_none() {
                return Err(Error::InvalidMesh(format!("boundary face {f} not covered by any patch")));
            }
        }
        let mut names: Vec<&str> = patches.iter().map(|p| p.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != patches.len() {
            return Err(Error::InvalidMesh("duplicate patch name".into()));
        }

        // Chain each cell's edges into a closed CCW loop.
        let mut cell_loops = Vec::with_capacity(n_cells);
        let mut face_forward_in_owner = vec![true; faces.len()];
        for (ci, cf) in cell_faces.iter().enumerate() {
            let loop_ = chain_loop(ci, cf, &faces, &vertices)?;
            // Record the traversal direction of owned faces in the CCW loop.
            for i in 0..loop_.len() {
                let a = loop_[i];
                let b = loop_[(i + 1) % loop_.len()];
                for &fi in cf {
                    let f = &faces[fi];
                    if f.owner == ci {
                        if f.v0 == a && f.v1 == b {
                            face_forward_in_owner[fi] = true;
                        } else if f.v0 == b && f.v1 == a {
                            face_forward_in_owner[fi] = false;
                        }
                    }
                }
            }
            cell_loops.push(loop_);
        }

        let mut cell_neighbours: Vec<Vec<usize>> = vec![Vec::new(); n_cells];
        for f in &faces[..n_internal] {
            let n = f.neighbour.unwrap();
            cell_neighbours[f.owner].push(n);
            cell_neighbours[n].push(f.owner);
        }

        let mesh = Mesh {
            vertices,
            faces,
            n_internal,
            patches,
            face_patch,
            cell_faces,
            cell_loops,
            cell_neighbours,
            face_forward_in_owner,
            grid,
        };
        mesh.check_closedness()?;
        Ok(mesh)
    }

    /// Per-cell closedness: the outward face area vectors of every cell must
    /// sum to zero (within roundoff of the cell perimeter).
    fn check_closedness(&self) -> Result<()> {
        for ci in 0..self.n_cells() {
            let mut sum = Vec2::ZERO;
            let mut perimeter = 0.0;
            for &fi in &self.cell_faces[ci] {
                let s = self.face_area_vector(fi);
                perimeter += s.norm();
                sum += if self.faces[fi].owner == ci { s } else { -s };
            }
            if sum.norm() > 1e-12 * perimeter.max(1e-300) {
                return Err(Error::InvalidMesh(format!(
                    "cell {ci} face vectors do not close: |sum| = {}",
                    sum.norm()
                )));
            }
        }
        Ok(())
    }

    /// Face area vector oriented owner -> neighbour (outward for boundary
    /// faces); length equals the edge length.
    pub fn face_area_vector(&self, fi: usize) -> Vec2 {
        let f = &self.faces[fi];
        let e = self.vertices[f.v1] - self.vertices[f.v0];
        let s = e.rot_cw();
        if self.face_forward_in_owner[fi] {
            s
        } else {
            -s
        }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, fi: usize) -> &Face {
        &self.faces[fi]
    }

    pub fn n_cells(&self) -> usize {
        self.cell_faces.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_internal_faces(&self) -> usize {
        self.n_internal
    }

    pub fn is_internal(&self, fi: usize) -> bool {
        fi < self.n_internal
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn patch_of_face(&self, fi: usize) -> Option<usize> {
        self.face_patch[fi]
    }

    pub fn cell_faces(&self, ci: usize) -> &[usize] {
        &self.cell_faces[ci]
    }

    /// CCW-ordered vertex indices of the cell polygon.
    pub fn cell_loop(&self, ci: usize) -> &[usize] {
        &self.cell_loops[ci]
    }

    pub fn cell_polygon(&self, ci: usize) -> Vec<Vec2> {
        self.cell_loops[ci].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_neighbours(&self, ci: usize) -> &[usize] {
        &self.cell_neighbours[ci]
    }

    pub fn grid(&self) -> Option<GridLayout> {
        self.grid
    }
}

/// Chain a cell's edges into a single closed loop, CCW-oriented.
fn chain_loop(ci: usize, cf: &[usize], faces: &[Face], vertices: &[Vec2]) -> Result<Vec<usize>> {
    let bad = |msg: &str| Error::InvalidMesh(format!("cell {ci}: {msg}"));
    let n = cf.len();
    // vertex -> the (up to two) incident edges of this cell
    let mut incident: Vec<(usize, [usize; 2], u8)> = Vec::with_capacity(2 * n);
    let add = |v: usize, e: usize, inc: &mut Vec<(usize, [usize; 2], u8)>| -> Result<()> {
        for entry in inc.iter_mut() {
            if entry.0 == v {
                if entry.2 == 2 {
                    return Err(bad("vertex shared by more than two cell edges"));
                }
                entry.1[1] = e;
                entry.2 = 2;
                return Ok(());
            }
        }
        inc.push((v, [e, usize::MAX], 1));
        Ok(())
    };
    for (ei, &fi) in cf.iter().enumerate() {
        add(faces[fi].v0, ei, &mut incident)?;
        add(faces[fi].v1, ei, &mut incident)?;
    }
    if incident.len() != n || incident.iter().any(|e| e.2 != 2) {
        return Err(bad("edges do not form a single closed loop"));
    }
    let find = |v: usize| incident.iter().find(|e| e.0 == v).unwrap();

    let mut loop_ = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let start = faces[cf[0]].v0;
    let mut cur = start;
    for _ in 0..n {
        loop_.push(cur);
        let inc = find(cur);
        let ei = if !used[inc.1[0]] {
            inc.1[0]
        } else if !used[inc.1[1]] {
            inc.1[1]
        } else {
            return Err(bad("edges do not form a single closed loop"));
        };
        used[ei] = true;
        let f = &faces[cf[ei]];
        cur = if f.v0 == cur { f.v1 } else { f.v0 };
    }
    if cur != start || used.iter().any(|&u| !u) {
        return Err(bad("edges do not form a single closed loop"));
    }

    let pts: Vec<Vec2> = loop_.iter().map(|&v| vertices[v]).collect();
    let area = polygon_signed_area(&pts);
    if area.abs() < 1e-300 {
        return Err(bad("zero-area cell"));
    }
    if area < 0.0 {
        loop_.reverse();
    }
    // Simple-polygon check: no two non-adjacent edges may intersect.
    let m = loop_.len();
    for i in 0..m {
        let (a1, a2) = (vertices[loop_[i]], vertices[loop_[(i + 1) % m]]);
        for j in i + 1..m {
            if j == i || (j + 1) % m == i || (i + 1) % m == j {
                continue;
            }
            let (b1, b2) = (vertices[loop_[j]], vertices[loop_[(j + 1) % m]]);
            if segments_cross(a1, a2, b1, b2) {
                return Err(bad("self-intersecting cell polygon"));
            }
        }
    }
    Ok(loop_)
}

fn segments_cross(a1: Vec2, a2: Vec2, b1: Vec2, b2: Vec2) -> bool {
    let d1 = (a2 - a1).cross(b1 - a1);
    let d2 = (a2 - a1).cross(b2 - a1);
    let d3 = (b2 - b1).cross(a1 - b1);
    let d4 = (b2 - b1).cross(a2 - b1);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}
