use super::*;
use crate::advection::{face_flux_uniform, AdvectionSchemeConfig, BaseScheme, GradientMethod};
use crate::geom::clip_halfplane;
use crate::mesh::{build_cartesian, distort_systematic, FaceSplit};

fn planar_setup(nx: usize, ny: usize, beta: f64) -> (Mesh, MeshGeometry) {
    let ly = 0.04;
    let dy = ly / ny as f64;
    let base = build_cartesian(nx, ny, nx as f64 * dy, ly).unwrap();
    let m = distort_systematic(&base, beta).unwrap();
    let g = MeshGeometry::compute(&m, FaceSplit::OverRelaxed).unwrap();
    (m, g)
}

/// Liquid fraction below `y_mid` by exact polygon clipping.
fn liquid_fraction(mesh: &Mesh, geom: &MeshGeometry, y_mid: f64) -> Vec<f64> {
    (0..mesh.n_cells())
        .map(|ci| {
            let poly = mesh.cell_polygon(ci);
            let clipped = clip_halfplane(&poly, Vec2::new(0.0, 1.0), y_mid);
            if clipped.len() < 3 {
                return 0.0;
            }
            let area = crate::geom::polygon_signed_area(&clipped);
            (area / geom.cells[ci].volume).clamp(0.0, 1.0)
        })
        .collect()
}

#[test]
fn harmonic_diffusivity_limits_and_value() {
    assert_eq!(harmonic_diffusivity(1.0, 0.1, 1e-5), 0.1);
    assert_eq!(harmonic_diffusivity(0.0, 0.1, 1e-5), 1e-5);
    // Direct evaluation of 1/(0.5/D1 + 0.5/D2) = 2/(1/D1 + 1/D2).
    let want = 2.0 / (1.0 / 0.1 + 1.0 / 1e-5);
    assert!((harmonic_diffusivity(0.5, 0.1, 1e-5) - want).abs() < 1e-20);
    assert!((want - 1.9998000199980002e-5).abs() < 1e-18);
    // Bounded by min/max and continuous at the ends.
    for a in [0.0, 0.1, 0.5, 0.9, 1.0] {
        let d = harmonic_diffusivity(a, 0.1, 1e-5);
        assert!((1e-5..=0.1).contains(&d));
    }
}

#[test]
fn cst_k_values() {
    for a in [0.0, 0.3, 1.0] {
        assert_eq!(cst_k(a, 1.0), 0.0);
    }
    assert_eq!(cst_k(0.0, 30.0), 29.0);
    assert!((cst_k(0.5, 30.0) - 29.0 / 15.5).abs() < 1e-14);
    assert!((cst_k(0.5, 30.0) - 1.8709677419354838).abs() < 1e-14);
}

#[test]
fn stagnant_alpha_step_is_bit_identical() {
    let (m, g) = planar_setup(4, 16, 0.25);
    let alpha = ScalarField::zero_gradient(liquid_fraction(&m, &g, 0.02), &m).unwrap();
    let flux = face_flux_uniform(Vec2::ZERO, &m, &g);
    let cfg = AdvectionSchemeConfig::new(BaseScheme::Lb, Correction::Sisc, GradientMethod::LeastSquares);
    let step = step_alpha(&alpha, &m, &g, cfg, &flux, 1e-3, SolverOpts::default()).unwrap();
    assert_eq!(step.field.values, alpha.values);
    assert_eq!(step.report.tvd_violation, 0.0);
}

#[test]
fn uniform_species_field_is_unchanged() {
    let (m, g) = planar_setup(4, 16, 0.25);
    let alpha = ScalarField::zero_gradient(liquid_fraction(&m, &g, 0.02), &m).unwrap();
    let c = ScalarField::zero_gradient(vec![0.8; m.n_cells()], &m).unwrap();
    let flux = face_flux_uniform(Vec2::ZERO, &m, &g);
    let cfg = AdvectionSchemeConfig::new(BaseScheme::Lb, Correction::Sisc, GradientMethod::LeastSquares);
    let step = step_alpha(&alpha, &m, &g, cfg, &flux, 1e-3, SolverOpts::default()).unwrap();
    // H = 1 and equal diffusivities: fluxes vanish identically.
    let phys = CstPhysics::new(1e-5, 1e-5, 1.0).unwrap();
    let (c1, _) = step_species(
        &c,
        &step.field,
        &step.weights,
        &flux,
        &m,
        &g,
        &phys,
        &SnGradConfig::default(),
        SolverOpts::default(),
    )
    .unwrap();
    assert_eq!(c1.values, c.values);
}

#[test]
fn species_mass_is_conserved_per_step() {
    let (m, g) = planar_setup(4, 32, 0.25);
    let alpha_vals = liquid_fraction(&m, &g, 0.02);
    let alpha = ScalarField::zero_gradient(alpha_vals.clone(), &m).unwrap();
    let c0: Vec<f64> = alpha_vals.iter().map(|a| 1.0 - a).collect();
    let mut c = ScalarField::zero_gradient(c0, &m).unwrap();
    let flux = face_flux_uniform(Vec2::ZERO, &m, &g);
    let cfg = AdvectionSchemeConfig::new(BaseScheme::Lb, Correction::Sisc, GradientMethod::LeastSquares);
    let phys = CstPhysics::new(1e-1, 1e-5, 5.0).unwrap();
    let opts = SolverOpts::default();

    let mass = |f: &ScalarField| -> f64 {
        f.values.iter().zip(&g.cells).map(|(v, c)| v * c.volume).sum()
    };
    let m0 = mass(&c);
    for mode in [SnGradMode::Uc, SnGradMode::No, SnGradMode::NoNc] {
        let sngrad = SnGradConfig { mode, ..Default::default() };
        for _ in 0..5 {
            let step = step_alpha(&alpha, &m, &g, cfg, &flux, 1e-3, opts).unwrap();
            let (c1, rep) = step_species(
                &c, &step.field, &step.weights, &flux, &m, &g, &phys, &sngrad, opts,
            )
            .unwrap();
            assert!((rep.mass - m0).abs() < 1e-8 * m0, "{mode:?}: mass drift {}", rep.mass - m0);
            c = c1;
        }
    }
}

#[test]
fn equilibrium_check_reports_jump_state() {
    let (m, g) = planar_setup(4, 32, 0.25);
    let alpha_vals = liquid_fraction(&m, &g, 0.02);
    let alpha = ScalarField::zero_gradient(alpha_vals.clone(), &m).unwrap();

    // Initial disequilibrium: all species in the gas phase.
    let c0 = ScalarField::zero_gradient(alpha_vals.iter().map(|a| 1.0 - a).collect(), &m).unwrap();
    let diag = equilibrium_check(&c0, &alpha, &g, 30.0);
    assert!(!diag.deviation.is_finite() || diag.deviation > 10.0);

    // Constructed equilibrium state c = c_l (1 + alpha_g (H-1)).
    let henry = 30.0;
    let c_l = 1.0 / (henry + 1.0);
    let ceq = ScalarField::zero_gradient(
        alpha_vals.iter().map(|a| c_l * (1.0 + (1.0 - a) * (henry - 1.0))).collect(),
        &m,
    )
    .unwrap();
    let diag = equilibrium_check(&ceq, &alpha, &g, henry);
    assert!(diag.deviation < 1e-12, "deviation {}", diag.deviation);

    // H = 1: ratio 1 for any uniform state.
    let uni = ScalarField::zero_gradient(vec![0.4; m.n_cells()], &m).unwrap();
    let diag = equilibrium_check(&uni, &alpha, &g, 1.0);
    assert!((diag.ratio - 1.0).abs() < 1e-12);
}

#[test]
fn species_step_invariant_to_jump_term_when_h_is_one() {
    // K(H=1) = 0, so the jump term contributes nothing: a run with H=1 and
    // very different diffusivities must match a hand-assembled pure-diffusion
    // step. Here we simply verify the K coefficients vanish and the step is
    // insensitive to alpha.
    let (m, g) = planar_setup(4, 16, 0.25);
    let alpha_a = ScalarField::zero_gradient(liquid_fraction(&m, &g, 0.02), &m).unwrap();
    let c0 = ScalarField::zero_gradient(
        g.cells.iter().map(|c| (c.centroid.y * 100.0).sin().abs()).collect(),
        &m,
    )
    .unwrap();
    let flux = face_flux_uniform(Vec2::ZERO, &m, &g);
    let cfg = AdvectionSchemeConfig::new(BaseScheme::Lb, Correction::Sisc, GradientMethod::LeastSquares);
    let phys = CstPhysics::new(2e-5, 2e-5, 1.0).unwrap();
    let opts = SolverOpts { tol: 1e-13, ..Default::default() };

    let step = step_alpha(&alpha_a, &m, &g, cfg, &flux, 1e-3, opts).unwrap();
    let (ca, _) = step_species(
        &c0, &step.field, &step.weights, &flux, &m, &g, &phys, &SnGradConfig::default(), opts,
    )
    .unwrap();

    // Same diffusivities, different phase distribution: with H=1 and D_g=D_l
    // the result must be identical because alpha only enters through K and D.
    let alpha_b = ScalarField::zero_gradient(vec![0.0; m.n_cells()], &m).unwrap();
    let step_b = step_alpha(&alpha_b, &m, &g, cfg, &flux, 1e-3, opts).unwrap();
    let (cb, _) = step_species(
        &c0, &step_b.field, &step_b.weights, &flux, &m, &g, &phys, &SnGradConfig::default(), opts,
    )
    .unwrap();
    for (a, b) in ca.values.iter().zip(&cb.values) {
        assert!((a - b).abs() < 1e-12);
    }
}
