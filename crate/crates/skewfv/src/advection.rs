//! Face interpolation of the advected scalar.
//!
//! The face value is written as `phi_f = phi_C + a_C (phi_D - phi_C)` with an
//! upwind-based weight. Base schemes (UDS, CDS, CICSAM, LB) provide the flux
//! limiter; the non-conjunctionality correction is either skipped (UC), added
//! as an explicit source (EC), or folded into the weight and clipped by the
//! TVD bound (SISC).

use crate::error::Result;
use crate::fields::{
    face_gradients, gauss_gradient, least_squares_gradient, locate_point, FaceScalar, ScalarField,
    VectorField,
};
use crate::geom::Vec2;
use crate::linsys::SparseSystem;
use crate::mesh::{Mesh, MeshGeometry};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseScheme {
    Uds,
    Cds,
    Cicsam,
    /// Blend of downwind and central differencing by the CICSAM angle factor;
    /// formally unbounded, boundedness comes from the SISC clip only.
    Lb,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Correction {
    /// No skewness correction.
    Uc,
    /// Explicit deferred correction `m . (grad phi)_f'` on the right hand side.
    Ec,
    /// Semi-implicit skewness correction: the correction joins the
    /// interpolation weight, which is then clipped by the TVD bound.
    Sisc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientMethod {
    Gauss,
    LeastSquares,
}

#[derive(Clone, Copy, Debug)]
pub struct AdvectionSchemeConfig {
    pub scheme: BaseScheme,
    pub correction: Correction,
    pub gradient: GradientMethod,
    /// Physical bounds of the transported quantity, used when the virtual
    /// upwind node falls outside the domain.
    pub bounds: (f64, f64),
}

impl AdvectionSchemeConfig {
    pub fn new(scheme: BaseScheme, correction: Correction, gradient: GradientMethod) -> Self {
        AdvectionSchemeConfig { scheme, correction, gradient, bounds: (0.0, 1.0) }
    }
}

/// Relative threshold below which `phi_D - phi_C` counts as degenerate; the
/// skewness term is dropped there since its contribution to `phi_f` vanishes.
fn degenerate(phi_c: f64, phi_d: f64) -> bool {
    (phi_d - phi_c).abs() < 1e-12 * phi_c.abs().max(phi_d.abs()).max(1.0)
}

/// Volumetric face flux `F_f = S_f . u_f` for a uniform velocity.
pub fn face_flux_uniform(u: Vec2, mesh: &Mesh, geom: &MeshGeometry) -> FaceScalar {
    FaceScalar((0..mesh.n_faces()).map(|f| geom.faces[f].s_f.dot(u)).collect())
}

/// Face flux with linear interpolation of a cell velocity field.
pub fn face_flux(u: &VectorField, mesh: &Mesh, geom: &MeshGeometry) -> FaceScalar {
    let mut out = Vec::with_capacity(mesh.n_faces());
    for fi in 0..mesh.n_faces() {
        let f = mesh.face(fi);
        let fg = &geom.faces[fi];
        let uf = match f.neighbour {
            Some(nei) => u.0[f.owner] * fg.delta_w + u.0[nei] * (1.0 - fg.delta_w),
            None => u.0[f.owner],
        };
        out.push(fg.s_f.dot(uf));
    }
    FaceScalar(out)
}

/// Cell Courant numbers `Co_P = (dt/|V|) sum_f max(F_f, 0)` over outgoing
/// fluxes.
pub fn cell_courant(flux: &FaceScalar, mesh: &Mesh, geom: &MeshGeometry, dt: f64) -> Vec<f64> {
    let mut co = vec![0.0; mesh.n_cells()];
    for fi in 0..mesh.n_faces() {
        let f = mesh.face(fi);
        co[f.owner] += flux.0[fi].max(0.0);
        if let Some(nei) = f.neighbour {
            co[nei] += (-flux.0[fi]).max(0.0);
        }
    }
    for (c, cell) in co.iter_mut().zip(&geom.cells) {
        *c *= dt / cell.volume;
    }
    co
}

/// Face Courant number: the upwind cell's Courant number.
pub fn face_courant(flux: &FaceScalar, mesh: &Mesh, geom: &MeshGeometry, dt: f64) -> FaceScalar {
    let co = cell_courant(flux, mesh, geom, dt);
    let mut out = Vec::with_capacity(mesh.n_internal_faces());
    for fi in 0..mesh.n_internal_faces() {
        let f = mesh.face(fi);
        let up = if flux.0[fi] >= 0.0 { f.owner } else { f.neighbour.unwrap() };
        out.push(co[up]);
    }
    FaceScalar(out)
}

/// Second-order Taylor reconstruction of the virtual upwind value,
/// `phi_U* = phi_D - 2 (grad phi)_C . d_CD`.
pub fn virtual_upwind(phi_d: f64, grad_c: Vec2, d_cd: Vec2) -> f64 {
    phi_d - 2.0 * grad_c.dot(d_cd)
}

/// Local limiting of the virtual upwind value: clamp into the value range of
/// the cell hosting the virtual node and its face neighbours. Outside the
/// domain only the physical bounds apply.
pub fn limit_virtual_upwind(
    raw: f64,
    host: Option<usize>,
    field: &ScalarField,
    mesh: &Mesh,
    bounds: (f64, f64),
) -> f64 {
    match host {
        Some(h) => {
            let mut lo = field.values[h];
            let mut hi = field.values[h];
            for &nb in mesh.cell_neighbours(h) {
                lo = lo.min(field.values[nb]);
                hi = hi.max(field.values[nb]);
            }
            raw.clamp(lo, hi)
        }
        None => raw.clamp(bounds.0, bounds.1),
    }
}

/// CICSAM angle factor `gamma_f = min((cos 2theta + 1)/2, 1) = cos^2 theta`
/// with `theta` the angle between the upwind-cell gradient and `d_CD`.
pub fn cicsam_angle_factor(grad_c: Vec2, d_cd: Vec2) -> f64 {
    let gn = grad_c.norm();
    if gn < 1e-300 {
        return 0.0;
    }
    let cos = (grad_c.dot(d_cd).abs() / (gn * d_cd.norm())).clamp(0.0, 1.0);
    cos * cos
}

/// Flux limiter of the base scheme in the `phi_f = phi_C + delta_f Psi (phi_D
/// - phi_C)` form. A non-finite `r` marks a locally flat field; CICSAM then
/// falls back to upwind (the face value does not depend on the weight there).
pub fn limiter_psi(scheme: BaseScheme, r: f64, co: f64, delta_f: f64, angle_factor: f64) -> f64 {
    match scheme {
        BaseScheme::Uds => 0.0,
        BaseScheme::Cds => 1.0,
        BaseScheme::Lb => {
            // Downwind/CDS blend straight in weight space.
            angle_factor / delta_f + (1.0 - angle_factor)
        }
        BaseScheme::Cicsam => {
            if !r.is_finite() {
                return 0.0;
            }
            let co = co.max(1e-12);
            let nv_c = r / (1.0 + r);
            if !(0.0..=1.0).contains(&nv_c) {
                return 0.0; // outside the NVD region: upwind
            }
            if 1.0 - nv_c < 1e-12 {
                return 1.0 / delta_f; // continuity limit, face value -> downwind
            }
            let hyper_c = (nv_c / co).min(1.0);
            let uq = ((8.0 * co * nv_c + (1.0 - co) * (6.0 * nv_c + 3.0)) / 8.0).min(hyper_c);
            let nv_f = angle_factor * hyper_c + (1.0 - angle_factor) * uq;
            (nv_f - nv_c) / (delta_f * (1.0 - nv_c))
        }
    }
}

/// TVD bound on the interpolation weight: `0 <= a_C <= min(r (1-Co)/Co, 1)`.
pub fn tvd_upper_bound(r: f64, co: f64) -> f64 {
    if !r.is_finite() {
        return 1.0;
    }
    let co = co.max(1e-12);
    (r * (1.0 - co) / co).min(1.0).max(0.0)
}

/// Combine base weight and skewness correction into the implicit
/// interpolation weight. Returns `(a_c, explicit_source)`.
pub fn implicit_weight(
    psi: f64,
    delta_f: f64,
    skew: f64,
    phi_c: f64,
    phi_d: f64,
    r: f64,
    co: f64,
    correction: Correction,
) -> (f64, f64) {
    let base = delta_f * psi;
    match correction {
        Correction::Uc => (base, 0.0),
        Correction::Ec => (base, skew),
        Correction::Sisc => {
            let a = if degenerate(phi_c, phi_d) {
                base
            } else {
                base + skew / (phi_d - phi_c)
            };
            (a.clamp(0.0, tvd_upper_bound(r, co)), 0.0)
        }
    }
}

/// Everything the assembly needs for one internal face.
#[derive(Clone, Copy, Debug)]
pub struct FaceAdvectionState {
    pub flux: f64,
    pub co: f64,
    pub r: f64,
    pub phi_u_star: f64,
    /// Weight on the downwind value: `phi_f = phi_C + a_c (phi_D - phi_C)`.
    pub a_c: f64,
    pub upwind_is_owner: bool,
    /// Explicit source `m . (grad phi)_f'` (EC mode only).
    pub skew_explicit: f64,
}

/// Per-face interpolation weights for one time step, shared between the phase
/// fraction equation and the species advection operator.
#[derive(Clone, Debug)]
pub struct FaceWeights {
    pub config: AdvectionSchemeConfig,
    pub dt: f64,
    pub faces: Vec<FaceAdvectionState>,
}

impl FaceWeights {
    /// Evaluate gradients, virtual upwind values, limiters and weights from
    /// the old-time field.
    pub fn compute(
        field: &ScalarField,
        mesh: &Mesh,
        geom: &MeshGeometry,
        cfg: AdvectionSchemeConfig,
        flux: &FaceScalar,
        dt: f64,
    ) -> Result<FaceWeights> {
        let grad_corr = match cfg.gradient {
            GradientMethod::Gauss => gauss_gradient(field, mesh, geom),
            GradientMethod::LeastSquares => least_squares_gradient(field, mesh, geom)?,
        };
        // The virtual upwind reconstruction is exact with the Gaussian
        // gradient on uniform Cartesian meshes; elsewhere least squares is
        // the accurate choice.
        let uniform = geom.is_orthogonal_conjunctional(mesh);
        let grad_vu = if uniform {
            match cfg.gradient {
                GradientMethod::Gauss => grad_corr.clone(),
                GradientMethod::LeastSquares => gauss_gradient(field, mesh, geom),
            }
        } else {
            match cfg.gradient {
                GradientMethod::LeastSquares => grad_corr.clone(),
                GradientMethod::Gauss => least_squares_gradient(field, mesh, geom)?,
            }
        };
        let grad_face = face_gradients(&grad_corr, mesh, geom);
        let cell_co = cell_courant(flux, mesh, geom, dt);

        let mut faces = Vec::with_capacity(mesh.n_internal_faces());
        for fi in 0..mesh.n_internal_faces() {
            let f = mesh.face(fi);
            let fg = &geom.faces[fi];
            let flux_f = flux.0[fi];
            let upwind_is_owner = flux_f >= 0.0;
            let (c, d) = if upwind_is_owner {
                (f.owner, f.neighbour.unwrap())
            } else {
                (f.neighbour.unwrap(), f.owner)
            };
            let delta_f = if upwind_is_owner { 1.0 - fg.delta_w } else { fg.delta_w };
            let co = cell_co[c];
            let (phi_c, phi_d) = (field.values[c], field.values[d]);

            let d_cd = geom.cells[d].centroid - geom.cells[c].centroid;
            let x_virtual = geom.cells[c].centroid - d_cd;
            let host = locate_point(mesh, geom, x_virtual, c);
            let raw = virtual_upwind(phi_d, grad_vu.0[c], d_cd);
            let phi_u_star = limit_virtual_upwind(raw, host, field, mesh, cfg.bounds);

            let r = if degenerate(phi_c, phi_d) {
                f64::NAN
            } else {
                (phi_c - phi_u_star) / (phi_d - phi_c)
            };
            let gamma = cicsam_angle_factor(grad_corr.0[c], d_cd);
            let psi = limiter_psi(cfg.scheme, r, co, delta_f, gamma);
            let skew = fg.m.dot(grad_face.0[fi]);
            let (a_c, skew_explicit) =
                implicit_weight(psi, delta_f, skew, phi_c, phi_d, r, co, cfg.correction);
            if cfg.correction == Correction::Sisc {
                debug_assert!(a_c >= 0.0 && a_c <= tvd_upper_bound(r, co));
            }
            faces.push(FaceAdvectionState {
                flux: flux_f,
                co,
                r,
                phi_u_star,
                a_c,
                upwind_is_owner,
                skew_explicit,
            });
        }
        Ok(FaceWeights { config: cfg, dt, faces })
    }

    /// Face value of `phi` under these weights (plus explicit correction).
    pub fn face_value(&self, fi: usize, phi_owner: f64, phi_neighbour: f64) -> f64 {
        let st = &self.faces[fi];
        let (phi_c, phi_d) = if st.upwind_is_owner {
            (phi_owner, phi_neighbour)
        } else {
            (phi_neighbour, phi_owner)
        };
        phi_c + st.a_c * (phi_d - phi_c) + st.skew_explicit
    }

    /// Largest violation of the TVD bound over all faces (zero in SISC mode).
    pub fn max_tvd_violation(&self) -> f64 {
        self.faces
            .iter()
            .map(|st| {
                let hi = tvd_upper_bound(st.r, st.co);
                (st.a_c - hi).max(-st.a_c).max(0.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Crank-Nicolson system for `d(phi)/dt + div(phi u) = 0`:
/// `phi^n + (dt/2|V|) sum_f F phi_f^n = phi^o - (dt/2|V|) sum_f F phi_f^o`,
/// with the same interpolation weights on both halves.
pub fn assemble_advection(
    old: &ScalarField,
    weights: &FaceWeights,
    flux: &FaceScalar,
    mesh: &Mesh,
    geom: &MeshGeometry,
) -> SparseSystem {
    let mut sys = SparseSystem::new(mesh);
    let dt = weights.dt;
    sys.diag.fill(1.0);
    sys.rhs.copy_from_slice(&old.values);

    for fi in 0..mesh.n_internal_faces() {
        let f = mesh.face(fi);
        let nei = f.neighbour.unwrap();
        let st = &weights.faces[fi];
        let fl = st.flux;
        // Weight of the owner/neighbour unknowns in phi_f.
        let (w_own, w_nei) = if st.upwind_is_owner {
            (1.0 - st.a_c, st.a_c)
        } else {
            (st.a_c, 1.0 - st.a_c)
        };
        let half_own = 0.5 * dt / geom.cells[f.owner].volume;
        let half_nei = 0.5 * dt / geom.cells[nei].volume;

        // Implicit half.
        sys.diag[f.owner] += half_own * fl * w_own;
        sys.upper[fi] += half_own * fl * w_nei;
        sys.diag[nei] -= half_nei * fl * w_nei;
        sys.lower[fi] -= half_nei * fl * w_own;

        // Explicit half; `face_value` already carries the deferred skew
        // source, which appears once per half (its value is frozen at the old
        // time level).
        let phi_f_old = weights.face_value(fi, old.values[f.owner], old.values[nei]);
        let expl = phi_f_old + st.skew_explicit;
        sys.rhs[f.owner] -= half_own * fl * expl;
        sys.rhs[nei] += half_nei * fl * expl;
    }

    for fi in mesh.n_internal_faces()..mesh.n_faces() {
        let f = mesh.face(fi);
        let fl = flux.0[fi];
        if fl == 0.0 {
            continue;
        }
        let half = 0.5 * dt / geom.cells[f.owner].volume;
        let patch = mesh.patch_of_face(fi).expect("boundary face");
        match old.bcs()[patch] {
            crate::fields::BoundaryCondition::FixedValue(g) => {
                sys.rhs[f.owner] -= dt / geom.cells[f.owner].volume * fl * g;
            }
            crate::fields::BoundaryCondition::ZeroGradient => {
                sys.diag[f.owner] += half * fl;
                sys.rhs[f.owner] -= half * fl * old.values[f.owner];
            }
        }
    }
    sys
}
