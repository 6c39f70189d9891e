//! Mesh generators: uniform Cartesian, chevron (systematic) distortion,
//! random distortion, and triangulated variants.

use super::{Face, GridLayout, Mesh, Patch};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform quadrilateral mesh on `[0,Lx] x [0,Ly]`.
pub fn build_cartesian(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Mesh> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidArgument(format!("need nx, ny >= 2, got {nx} x {ny}")));
    }
    if !(lx > 0.0) || !(ly > 0.0) {
        return Err(Error::InvalidArgument(format!("need positive extents, got {lx} x {ly}")));
    }
    let dx = lx / nx as f64;
    let dy = ly / ny as f64;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Vec2::new(i as f64 * dx, j as f64 * dy));
        }
    }
    let cells: Vec<Vec<usize>> = (0..nx * ny)
        .map(|c| {
            let (i, j) = (c % nx, c / nx);
            let v = |i, j| j * (nx + 1) + i;
            vec![v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)]
        })
        .collect();
    mesh_from_cells(vertices, cells, lx, ly, Some(GridLayout { nx, ny, dx, dy }))
}

/// Triangular mesh: each quad of the `nx` x `ny` lattice is split along a
/// diagonal chosen pseudo-randomly from `seed`.
pub fn build_triangular(nx: usize, ny: usize, lx: f64, ly: f64, seed: u64) -> Result<Mesh> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidArgument(format!("need nx, ny >= 2, got {nx} x {ny}")));
    }
    if !(lx > 0.0) || !(ly > 0.0) {
        return Err(Error::InvalidArgument(format!("need positive extents, got {lx} x {ly}")));
    }
    let dx = lx / nx as f64;
    let dy = ly / ny as f64;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Vec2::new(i as f64 * dx, j as f64 * dy));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let v = |i: usize, j: usize| j * (nx + 1) + i;
            let (bl, br, tr, tl) = (v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
            if rng.random::<bool>() {
                cells.push(vec![bl, br, tr]);
                cells.push(vec![bl, tr, tl]);
            } else {
                cells.push(vec![bl, br, tl]);
                cells.push(vec![br, tr, tl]);
            }
        }
    }
    mesh_from_cells(vertices, cells, lx, ly, Some(GridLayout { nx, ny, dx, dy }))
}

/// Chevron distortion: interior vertex `(i,j)` moves by `dy*beta*(-1)^i` in y.
/// Column-alternating shifts introduce non-conjunctionality on the vertical
/// faces and non-orthogonality on the (now tilted) horizontal faces, without
/// any statistical cancellation under refinement.
pub fn distort_systematic(mesh: &Mesh, beta: f64) -> Result<Mesh> {
    let grid = require_lattice(mesh)?;
    if !(0.0..0.5).contains(&beta) {
        return Err(Error::InvalidArgument(format!("need 0 <= beta < 0.5, got {beta}")));
    }
    let mut vertices = mesh.vertices().to_vec();
    for j in 1..grid.ny {
        for i in 1..grid.nx {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            vertices[grid.vertex(i, j)].y += grid.dy * beta * sign;
        }
    }
    Mesh::with_grid(vertices, mesh.faces().to_vec(), mesh.patches().to_vec(), Some(grid))
}

/// Random distortion: interior vertices move by a uniform random vector in
/// `[-beta*dx, beta*dx]^2`, deterministic for a fixed seed.
pub fn distort_random(mesh: &Mesh, beta: f64, seed: u64) -> Result<Mesh> {
    let grid = require_lattice(mesh)?;
    if !(0.0..0.5).contains(&beta) {
        return Err(Error::InvalidArgument(format!("need 0 <= beta < 0.5, got {beta}")));
    }
    let mut vertices = mesh.vertices().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = beta * grid.dx;
    for j in 1..grid.ny {
        for i in 1..grid.nx {
            // Always draw both components so the stream stays aligned.
            let ox = rng.random_range(-b..=b);
            let oy = rng.random_range(-b..=b);
            if beta > 0.0 {
                let v = &mut vertices[grid.vertex(i, j)];
                v.x += ox;
                v.y += oy;
            }
        }
    }
    Mesh::with_grid(vertices, mesh.faces().to_vec(), mesh.patches().to_vec(), Some(grid))
}

/// The distortion rules only apply to meshes whose vertices still sit on the
/// generator lattice.
fn require_lattice(mesh: &Mesh) -> Result<GridLayout> {
    let grid = mesh
        .grid()
        .ok_or_else(|| Error::InvalidArgument("mesh has no grid layout".into()))?;
    let tol = 1e-12 * (grid.dx * grid.nx as f64).max(grid.dy * grid.ny as f64);
    for j in 0..=grid.ny {
        for i in 0..=grid.nx {
            let expect = Vec2::new(i as f64 * grid.dx, j as f64 * grid.dy);
            if (mesh.vertices()[grid.vertex(i, j)] - expect).norm() > tol {
                return Err(Error::InvalidArgument(
                    "mesh is not an undistorted lattice".into(),
                ));
            }
        }
    }
    Ok(grid)
}

/// Assemble a mesh from CCW cell vertex loops; boundary faces are patched by
/// which domain edge their midpoint lies on.
fn mesh_from_cells(
    vertices: Vec<Vec2>,
    cells: Vec<Vec<usize>>,
    lx: f64,
    ly: f64,
    grid: Option<GridLayout>,
) -> Result<Mesh> {
    // Owner is the first (lower-index) cell touching an edge; the second
    // becomes the neighbour. Edge keys are sorted for a deterministic order.
    let mut edge_owner: std::collections::HashMap<(usize, usize), (usize, Option<usize>, usize, usize)> =
        std::collections::HashMap::new();
    for (ci, loop_) in cells.iter().enumerate() {
        for k in 0..loop_.len() {
            let a = loop_[k];
            let b = loop_[(k + 1) % loop_.len()];
            let key = (a.min(b), a.max(b));
            edge_owner
                .entry(key)
                .and_modify(|e| e.1 = Some(ci))
                .or_insert((ci, None, a, b));
        }
    }
    let mut keys: Vec<_> = edge_owner.keys().copied().collect();
    keys.sort_unstable();
    let mut internal: Vec<Face> = Vec::new();
    let mut boundary: Vec<Face> = Vec::new();
    for key in keys {
        let (owner, neighbour, a, b) = edge_owner[&key];
        let face = Face { v0: a, v1: b, owner, neighbour };
        if neighbour.is_some() {
            internal.push(face);
        } else {
            boundary.push(face);
        }
    }
    let mut faces: Vec<Face> = Vec::with_capacity(edge_owner.len());
    faces.extend(internal);
    let boundary_start = faces.len();
    faces.extend(boundary);

    let mut patch_faces: [Vec<usize>; 4] = Default::default();
    let tol = 1e-9 * lx.max(ly);
    for (fi, f) in faces.iter().enumerate().skip(boundary_start) {
        let mid = (vertices[f.v0] + vertices[f.v1]) * 0.5;
        let side = if mid.x.abs() < tol {
            0
        } else if (mid.x - lx).abs() < tol {
            1
        } else if mid.y.abs() < tol {
            2
        } else if (mid.y - ly).abs() < tol {
            3
        } else {
            return Err(Error::InvalidMesh(format!(
                "boundary face {fi} not on the domain boundary"
            )));
        };
        patch_faces[side].push(fi);
    }
    let names = ["left", "right", "bottom", "top"];
    let patches = names
        .iter()
        .zip(patch_faces)
        .map(|(&name, faces)| Patch { name: name.into(), faces })
        .collect();
    Mesh::with_grid(vertices, faces, patches, grid)
}
