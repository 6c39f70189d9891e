//! Time stepping of the phase-fraction advection equation and the species
//! transport equation with interfacial jump.
//!
//! The phase fraction uses Crank-Nicolson in time with frozen face weights.
//! The species equation reuses those weights for its advective part (identical
//! discretisation avoids artificial species transfer) and treats the diffusive
//! and jump terms fully implicitly at the new time level, where the new phase
//! fraction is already available.

use crate::advection::{assemble_advection, AdvectionSchemeConfig, Correction, FaceWeights};
use crate::diffusion::{
    face_coefficient, implicit_diffusivity, nc_term, CoeffInterp, SnGradConfig, SnGradMode,
};
use crate::error::Result;
use crate::fields::{
    face_gradients, gauss_gradient, least_squares_gradient, least_squares_gradient_of,
    BoundaryCondition, FaceScalar, ScalarField, VectorField,
};
use crate::geom::Vec2;
use crate::linsys::{SolveMethod, SparseSystem};
use crate::mesh::{Mesh, MeshGeometry};

/// Physical constants of the species transfer problem. `alpha` denotes the
/// liquid fraction throughout; the Henry coefficient is the gas/liquid
/// concentration ratio at equilibrium (`c_g = H c_l`).
#[derive(Clone, Copy, Debug)]
pub struct CstPhysics {
    pub d_gas: f64,
    pub d_liq: f64,
    pub henry: f64,
}

impl CstPhysics {
    pub fn new(d_gas: f64, d_liq: f64, henry: f64) -> Result<CstPhysics> {
        if !(d_gas > 0.0) || !(d_liq > 0.0) {
            return Err(crate::Error::InvalidArgument(format!(
                "diffusivities must be positive, got {d_gas}, {d_liq}"
            )));
        }
        if !(henry > 0.0) {
            return Err(crate::Error::InvalidArgument(format!(
                "Henry coefficient must be positive, got {henry}"
            )));
        }
        Ok(CstPhysics { d_gas, d_liq, henry })
    }
}

/// Harmonic mean diffusivity `1 / (alpha/D1 + (1-alpha)/D2)` with `alpha` the
/// phase-1 fraction. Fractions are clamped into [0,1] so the tiny boundedness
/// slack of the advection step cannot produce negative diffusivities.
pub fn harmonic_diffusivity(alpha: f64, d1: f64, d2: f64) -> f64 {
    let a = alpha.clamp(0.0, 1.0);
    1.0 / (a / d1 + (1.0 - a) / d2)
}

/// Jump coefficient `K = (H - 1) / (1 + alpha (H - 1))`, with `alpha` the
/// fraction of the phase carrying the H-fold concentration (the gas phase).
pub fn cst_k(alpha: f64, henry: f64) -> f64 {
    (henry - 1.0) / (1.0 + alpha * (henry - 1.0))
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOpts {
    pub method: SolveMethod,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOpts {
    fn default() -> Self {
        SolverOpts { method: SolveMethod::BiCgStab, tol: 1e-10, max_iter: 2000 }
    }
}

/// Extrema, conservation and solver diagnostics of one step.
#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct StepReport {
    pub min: f64,
    pub max: f64,
    /// `sum |V| phi` after the step.
    pub mass: f64,
    pub solver_iterations: usize,
    pub solver_residual: f64,
    pub tvd_violation: f64,
}

fn report(values: &[f64], geom: &MeshGeometry, iters: usize, res: f64, tvd: f64) -> StepReport {
    let mut r = StepReport {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        mass: 0.0,
        solver_iterations: iters,
        solver_residual: res,
        tvd_violation: tvd,
    };
    for (v, c) in values.iter().zip(&geom.cells) {
        r.min = r.min.min(*v);
        r.max = r.max.max(*v);
        r.mass += v * c.volume;
    }
    r
}

pub struct AlphaStep {
    pub field: ScalarField,
    pub weights: FaceWeights,
    pub report: StepReport,
}

/// One Crank-Nicolson step of `d(alpha)/dt + div(alpha u) = 0`.
pub fn step_alpha(
    alpha_old: &ScalarField,
    mesh: &Mesh,
    geom: &MeshGeometry,
    cfg: AdvectionSchemeConfig,
    flux: &FaceScalar,
    dt: f64,
    opts: SolverOpts,
) -> Result<AlphaStep> {
    if flux.0.iter().all(|&f| f == 0.0) {
        // Stagnant field: the system is the identity; skip the solve so the
        // field stays bit-identical.
        let weights = FaceWeights { config: cfg, dt, faces: Vec::new() };
        let rep = report(&alpha_old.values, geom, 0, 0.0, 0.0);
        return Ok(AlphaStep { field: alpha_old.clone(), weights, report: rep });
    }
    let weights = FaceWeights::compute(alpha_old, mesh, geom, cfg, flux, dt)?;
    let sys = assemble_advection(alpha_old, &weights, flux, mesh, geom);
    let (values, stats) = sys.solve(&alpha_old.values, opts.method, opts.tol, opts.max_iter)?;
    let rep = report(&values, geom, stats.iterations, stats.residual, weights.max_tvd_violation());
    let field = ScalarField::new(values, alpha_old.bcs().to_vec(), mesh)?;
    Ok(AlphaStep { field, weights, report: rep })
}

/// One implicit step of the species equation
/// `dc/dt + div(c u) = div(D grad c) - div(D K c grad alpha_g)`,
/// with `alpha_g = 1 - alpha` the fraction of the phase holding the H-fold
/// concentration. The advective operator reuses the face weights of the
/// phase-fraction step; the right hand side is discretised at the new time
/// level with the face-normal gradients of `c` and `alpha` treated by the
/// same `SnGradMode`.
#[allow(clippy::too_many_arguments)]
pub fn step_species(
    c_old: &ScalarField,
    alpha_new: &ScalarField,
    weights: &FaceWeights,
    flux: &FaceScalar,
    mesh: &Mesh,
    geom: &MeshGeometry,
    physics: &CstPhysics,
    cfg: &SnGradConfig,
    opts: SolverOpts,
) -> Result<(ScalarField, StepReport)> {
    let dt = weights.dt;
    let n_int = mesh.n_internal_faces();

    // Advective part with the alpha weights; in EC mode the deferred source
    // must use the species' own gradients.
    let mut adv_weights = weights.clone();
    if weights.config.correction == Correction::Ec && !weights.faces.is_empty() {
        let grad = match weights.config.gradient {
            crate::advection::GradientMethod::Gauss => gauss_gradient(c_old, mesh, geom),
            crate::advection::GradientMethod::LeastSquares => {
                least_squares_gradient(c_old, mesh, geom)?
            }
        };
        let gf = face_gradients(&grad, mesh, geom);
        for fi in 0..n_int {
            adv_weights.faces[fi].skew_explicit = geom.faces[fi].m.dot(gf.0[fi]);
        }
    }
    let mut sys = if adv_weights.faces.is_empty() {
        let mut s = SparseSystem::new(mesh);
        s.diag.fill(1.0);
        s.rhs.copy_from_slice(&c_old.values);
        s
    } else {
        assemble_advection(c_old, &adv_weights, flux, mesh, geom)
    };

    // Cell fields at the new phase-fraction level.
    let d_cell = ScalarField::zero_gradient(
        alpha_new
            .values
            .iter()
            .map(|&a| harmonic_diffusivity(a, physics.d_liq, physics.d_gas))
            .collect(),
        mesh,
    )?;
    let k_cell: Vec<f64> =
        alpha_new.values.iter().map(|&a| cst_k((1.0 - a).clamp(0.0, 1.0), physics.henry)).collect();

    let gauss_d = match cfg.coeff_interp {
        CoeffInterp::CdsEc => Some(gauss_gradient(&d_cell, mesh, geom)),
        CoeffInterp::CdsUc => None,
    };
    let d_face = face_coefficient(&d_cell, mesh, geom, cfg.coeff_interp, gauss_d.as_ref());

    // Explicit correction of the implicit (Kc)_f interpolation, via the
    // Gauss gradient of the old-time K c field.
    let kc_ec_src: Option<FaceScalar> = match cfg.coeff_interp {
        CoeffInterp::CdsUc => None,
        CoeffInterp::CdsEc => {
            let kc = ScalarField::zero_gradient(
                k_cell.iter().zip(&c_old.values).map(|(k, c)| k * c).collect(),
                mesh,
            )?;
            let g = gauss_gradient(&kc, mesh, geom);
            let gf = face_gradients(&g, mesh, geom);
            Some(FaceScalar(
                (0..n_int).map(|fi| geom.faces[fi].m.dot(gf.0[fi])).collect(),
            ))
        }
    };

    // Face-normal gradient of alpha at the new level (explicit, it multiplies
    // the implicit (Kc)_f), discretised with the same SnGradMode as c.
    let need_correction = !matches!(cfg.mode, SnGradMode::Uc);
    let grad_alpha = if need_correction {
        Some(least_squares_gradient(alpha_new, mesh, geom)?)
    } else {
        None
    };
    let grad_alpha_face = grad_alpha.as_ref().map(|g| face_gradients(g, mesh, geom));
    let hess_alpha_face = if matches!(cfg.mode, SnGradMode::NoNc) {
        Some(face_hessians(grad_alpha.as_ref().unwrap(), mesh, geom)?)
    } else {
        None
    };

    // Old-time c gradients drive the deferred part of the diffusion term.
    let grad_c = if need_correction {
        Some(least_squares_gradient(c_old, mesh, geom)?)
    } else {
        None
    };
    let grad_c_face = grad_c.as_ref().map(|g| face_gradients(g, mesh, geom));
    let hess_c_face = if matches!(cfg.mode, SnGradMode::NoNc) {
        Some(face_hessians(grad_c.as_ref().unwrap(), mesh, geom)?)
    } else {
        None
    };

    for fi in 0..n_int {
        let f = mesh.face(fi);
        let nei = f.neighbour.unwrap();
        let fg = &geom.faces[fi];
        let d_mag = fg.d.norm();
        let df = d_face.0[fi];
        let w_own = dt / geom.cells[f.owner].volume;
        let w_nei = dt / geom.cells[nei].volume;

        // --- diffusion of c: implicit compact part + deferred correction ---
        let (mut coef, mut expl) = match cfg.mode {
            SnGradMode::Uc => (df * fg.area / d_mag, 0.0),
            SnGradMode::No => {
                let corr = fg.k.dot(grad_c_face.as_ref().unwrap().0[fi]);
                (df * fg.delta.norm() / d_mag, df * corr)
            }
            SnGradMode::NoNc => {
                let corr = fg.k.dot(grad_c_face.as_ref().unwrap().0[fi])
                    + nc_term(hess_c_face.as_ref().unwrap()[fi], fg.m, fg.s_f);
                match implicit_diffusivity(
                    df,
                    c_old.values[f.owner],
                    c_old.values[nei],
                    fg.delta.norm(),
                    corr,
                    d_mag,
                    fg.area,
                ) {
                    Some(gm) => (gm * fg.area / d_mag, 0.0),
                    // Degenerate cell difference: keep the flux by falling
                    // back to the deferred (NO-style) correction locally.
                    None => (df * fg.delta.norm() / d_mag, df * corr),
                }
            }
        };
        if cfg.clip_negative_diffusivity && coef < 0.0 {
            coef = 0.0;
            expl = 0.0;
        }
        sys.diag[f.owner] += w_own * coef;
        sys.upper[fi] -= w_own * coef;
        sys.diag[nei] += w_nei * coef;
        sys.lower[fi] -= w_nei * coef;
        sys.rhs[f.owner] += w_own * expl;
        sys.rhs[nei] -= w_nei * expl;

        // --- jump term: - D (Kc)_f [S_f . (grad alpha_g)_f] with
        //     alpha_g = 1 - alpha, i.e. + D (Kc)_f [S_f . (grad alpha)_f] ---
        if physics.henry != 1.0 {
            let (a_p, a_n) = (alpha_new.values[f.owner], alpha_new.values[nei]);
            let g_alpha = match cfg.mode {
                SnGradMode::Uc => fg.area * (a_n - a_p) / d_mag,
                SnGradMode::No => {
                    fg.delta.norm() * (a_n - a_p) / d_mag
                        + fg.k.dot(grad_alpha_face.as_ref().unwrap().0[fi])
                }
                SnGradMode::NoNc => {
                    fg.delta.norm() * (a_n - a_p) / d_mag
                        + fg.k.dot(grad_alpha_face.as_ref().unwrap().0[fi])
                        + nc_term(hess_alpha_face.as_ref().unwrap()[fi], fg.m, fg.s_f)
                }
            };
            // (Kc)_f interpolates K c implicitly in c.
            let w = fg.delta_w;
            let strength = df * g_alpha;
            sys.diag[f.owner] -= w_own * strength * w * k_cell[f.owner];
            sys.upper[fi] -= w_own * strength * (1.0 - w) * k_cell[nei];
            sys.diag[nei] += w_nei * strength * (1.0 - w) * k_cell[nei];
            sys.lower[fi] += w_nei * strength * w * k_cell[f.owner];
            if let Some(src) = &kc_ec_src {
                sys.rhs[f.owner] += w_own * strength * src.0[fi];
                sys.rhs[nei] -= w_nei * strength * src.0[fi];
            }
        }
    }

    // Boundary diffusion (compact, uncorrected); the jump term vanishes on
    // the zero-gradient alpha boundaries of all cases.
    for fi in n_int..mesh.n_faces() {
        let f = mesh.face(fi);
        let patch = mesh.patch_of_face(fi).expect("boundary face");
        match c_old.bcs()[patch] {
            BoundaryCondition::ZeroGradient => {}
            BoundaryCondition::FixedValue(g) => {
                let fg = &geom.faces[fi];
                let coef = d_face.0[fi] * fg.area / fg.d.norm();
                let w = dt / geom.cells[f.owner].volume;
                sys.diag[f.owner] += w * coef;
                sys.rhs[f.owner] += w * coef * g;
            }
        }
    }

    let (values, stats) = sys.solve(&c_old.values, opts.method, opts.tol, opts.max_iter)?;
    let rep = report(&values, geom, stats.iterations, stats.residual, 0.0);
    Ok((ScalarField::new(values, c_old.bcs().to_vec(), mesh)?, rep))
}

/// Face-interpolated gradient-of-gradient (one `Vec2` per gradient component).
fn face_hessians(
    grad: &VectorField,
    mesh: &Mesh,
    geom: &MeshGeometry,
) -> Result<Vec<[Vec2; 2]>> {
    let gx = least_squares_gradient_of(mesh, geom, |c| grad.0[c].x)?;
    let gy = least_squares_gradient_of(mesh, geom, |c| grad.0[c].y)?;
    let fx = face_gradients(&gx, mesh, geom);
    let fy = face_gradients(&gy, mesh, geom);
    Ok((0..mesh.n_internal_faces()).map(|fi| [fx.0[fi], fy.0[fi]]).collect())
}

/// Interface jump diagnostic: phase-averaged concentrations over nearly pure
/// cells and their ratio against the Henry coefficient.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct JumpDiagnostic {
    pub c_gas: f64,
    pub c_liq: f64,
    /// `c_gas / c_liq`; infinite while the liquid is still empty.
    pub ratio: f64,
    /// `|ratio - H| / H`.
    pub deviation: f64,
}

pub fn equilibrium_check(
    c: &ScalarField,
    alpha: &ScalarField,
    geom: &MeshGeometry,
    henry: f64,
) -> JumpDiagnostic {
    let (mut mg, mut vg, mut ml, mut vl) = (0.0, 0.0, 0.0, 0.0);
    for ((&ci, &ai), cell) in c.values.iter().zip(&alpha.values).zip(&geom.cells) {
        if ai <= 0.01 {
            mg += ci * cell.volume;
            vg += cell.volume;
        } else if ai >= 0.99 {
            ml += ci * cell.volume;
            vl += cell.volume;
        }
    }
    let c_gas = if vg > 0.0 { mg / vg } else { f64::NAN };
    let c_liq = if vl > 0.0 { ml / vl } else { f64::NAN };
    let ratio = c_gas / c_liq;
    JumpDiagnostic { c_gas, c_liq, ratio, deviation: (ratio - henry).abs() / henry }
}

#[cfg(test)]
mod tests;
