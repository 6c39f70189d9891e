//! Derived face/cell geometry: area vectors, centroids, skewness vectors and
//! the Delta/k splitting of the face area vector.

use super::Mesh;
use crate::error::{Error, Result};
use crate::geom::{line_line_param, polygon_centroid, Vec2};

/// How the face area vector is split into a part parallel to `d` and a
/// non-orthogonal remainder (`Sf = Delta + k`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FaceSplit {
    /// `Delta = d |Sf|^2 / (d.Sf)` (default).
    #[default]
    OverRelaxed,
    /// `Delta = d_hat |Sf|`.
    Orthogonal,
    /// `Delta = d_hat (d_hat.Sf)`.
    Minimum,
}

/// Split `s_f` into `(Delta, k)` with `Delta` parallel to `d` and
/// `Delta + k = s_f` exactly.
pub fn decompose_face_vector(s_f: Vec2, d: Vec2, mode: FaceSplit) -> Result<(Vec2, Vec2)> {
    let dot = d.dot(s_f);
    if dot <= 0.0 {
        return Err(Error::InvalidArgument(format!("d.Sf = {dot} <= 0")));
    }
    let delta = match mode {
        FaceSplit::OverRelaxed => d * (s_f.norm_sq() / dot),
        FaceSplit::Orthogonal => d.unit() * s_f.norm(),
        FaceSplit::Minimum => d.unit() * (d.unit().dot(s_f)),
    };
    Ok((delta, s_f - delta))
}

/// Per-face geometry. For boundary faces `d` runs from the owner centroid to
/// the face centre, `x_fp == centre` and `m == 0`.
#[derive(Clone, Debug)]
pub struct FaceGeometry {
    /// Area vector oriented owner -> neighbour (outward on the boundary).
    pub s_f: Vec2,
    /// Edge length `|s_f|`.
    pub area: f64,
    /// Face centroid (edge midpoint).
    pub centre: Vec2,
    /// Owner centroid -> neighbour centroid.
    pub d: Vec2,
    /// Intersection of the owner-neighbour line with the face line.
    pub x_fp: Vec2,
    /// Skewness vector `centre - x_fp`.
    pub m: Vec2,
    /// Linear interpolation weight of the owner value at `x_fp`.
    pub delta_w: f64,
    /// `d`-parallel part of `s_f`.
    pub delta: Vec2,
    /// Non-orthogonal remainder, `s_f - delta`.
    pub k: Vec2,
}

#[derive(Clone, Debug)]
pub struct CellGeometry {
    pub centroid: Vec2,
    /// 2D cell measure (area).
    pub volume: f64,
}

#[derive(Clone, Debug)]
pub struct MeshGeometry {
    pub faces: Vec<FaceGeometry>,
    pub cells: Vec<CellGeometry>,
    pub split: FaceSplit,
}

impl MeshGeometry {
    pub fn compute(mesh: &Mesh, split: FaceSplit) -> Result<MeshGeometry> {
        let cells: Vec<CellGeometry> = (0..mesh.n_cells())
            .map(|ci| {
                let (volume, centroid) = polygon_centroid(&mesh.cell_polygon(ci));
                CellGeometry { centroid, volume }
            })
            .collect();

        let mut faces = Vec::with_capacity(mesh.n_faces());
        for fi in 0..mesh.n_faces() {
            let f = mesh.face(fi);
            let s_f = mesh.face_area_vector(fi);
            let area = s_f.norm();
            if area < 1e-150 {
                return Err(Error::DegenerateFace {
                    face: fi,
                    reason: "zero face area".into(),
                });
            }
            let a = mesh.vertices()[f.v0];
            let e = mesh.vertices()[f.v1] - a;
            let xp = cells[f.owner].centroid;
            let centre = a + e * 0.5;

            let (d, x_fp, m, delta_w) = if let Some(nei) = f.neighbour {
                let d = cells[nei].centroid - xp;
                if d.dot(s_f) <= 0.0 {
                    return Err(Error::PathologicalFace {
                        face: fi,
                        dot: d.dot(s_f),
                    });
                }
                let t = line_line_param(xp, d, a, e).ok_or(Error::PathologicalFace {
                    face: fi,
                    dot: 0.0,
                })?;
                let x_fp = xp + d * t;
                (d, x_fp, centre - x_fp, (1.0 - t).clamp(0.0, 1.0))
            } else {
                let d = centre - xp;
                if d.dot(s_f) <= 0.0 {
                    return Err(Error::PathologicalFace {
                        face: fi,
                        dot: d.dot(s_f),
                    });
                }
                (d, centre, Vec2::ZERO, 1.0)
            };

            let (delta, k) = decompose_face_vector(s_f, d, split)
                .map_err(|_| Error::PathologicalFace { face: fi, dot: d.dot(s_f) })?;
            faces.push(FaceGeometry {
                s_f,
                area,
                centre,
                d,
                x_fp,
                m,
                delta_w,
                delta,
                k,
            });
        }
        Ok(MeshGeometry { faces, cells, split })
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }

    /// True when every internal face is orthogonal and conjunctional to
    /// roundoff, e.g. on a uniform Cartesian mesh. The virtual-upwind value
    /// then uses the Gaussian gradient, which is exact there.
    pub fn is_orthogonal_conjunctional(&self, mesh: &Mesh) -> bool {
        let tol = 1e-10;
        (0..mesh.n_internal_faces()).all(|fi| {
            let fg = &self.faces[fi];
            let cosang = fg.d.unit().dot(fg.s_f.unit());
            fg.m.norm() <= tol * fg.d.norm() && (1.0 - cosang).abs() <= tol
        })
    }
}

/// Mesh quality summary over internal faces.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct QualityReport {
    pub max_nonortho_deg: f64,
    pub mean_nonortho_deg: f64,
    /// Skewness measured as |m| / |d|.
    pub max_skewness: f64,
    pub mean_skewness: f64,
}

pub fn quality_report(mesh: &Mesh, geom: &MeshGeometry) -> QualityReport {
    let mut r = QualityReport::default();
    let n = mesh.n_internal_faces();
    if n == 0 {
        return r;
    }
    for fi in 0..n {
        let fg = &geom.faces[fi];
        let cosang = fg.d.unit().dot(fg.s_f.unit()).clamp(-1.0, 1.0);
        let ang = cosang.acos().to_degrees();
        let skew = fg.m.norm() / fg.d.norm();
        r.max_nonortho_deg = r.max_nonortho_deg.max(ang);
        r.mean_nonortho_deg += ang;
        r.max_skewness = r.max_skewness.max(skew);
        r.mean_skewness += skew;
    }
    r.mean_nonortho_deg /= n as f64;
    r.mean_skewness /= n as f64;
    r
}
