//! Independent 1D finite-difference reference for planar two-phase diffusion
//! with a Henry-law jump at the interface.
//!
//! The liquid occupies `[0, interface]`, the gas `[interface, length]`. The
//! interface is a double node: a liquid-side value `c_L` and a gas-side value
//! `c_G` coupled by flux continuity and `c_G = H c_L`. Time integration is
//! backward Euler on a vertex-centred finite-volume grid, so total mass
//! telescopes exactly; the gas-side unknown is eliminated algebraically and
//! the remaining system is tridiagonal (Thomas algorithm).
//!
//! This module deliberately shares nothing with the 2D discretisation it
//! verifies.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct Oracle1DSpec {
    /// Domain length in y (m).
    pub length: f64,
    /// Interface position; must be strictly inside the domain.
    pub interface: f64,
    pub d_gas: f64,
    pub d_liq: f64,
    pub henry: f64,
    /// Total number of grid intervals (split between the phases so the
    /// interface lands on a node). At least 1000 for a well-resolved profile.
    pub nodes: usize,
    pub dt: f64,
    pub t_end: f64,
}

impl Oracle1DSpec {
    /// Paper-style defaults: 0.04 m domain, mid-plane interface.
    pub fn planar(d_gas: f64, d_liq: f64, henry: f64, t_end: f64) -> Oracle1DSpec {
        Oracle1DSpec {
            length: 0.04,
            interface: 0.02,
            d_gas,
            d_liq,
            henry,
            nodes: 2000,
            dt: 5e-5,
            t_end,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.henry > 0.0) {
            return Err(Error::InvalidArgument(format!("need H > 0, got {}", self.henry)));
        }
        if !(self.d_gas > 0.0 && self.d_liq > 0.0) {
            return Err(Error::InvalidArgument("need positive diffusivities".into()));
        }
        if !(self.length > 0.0) || !(self.interface > 0.0) || self.interface >= self.length {
            return Err(Error::InvalidArgument("interface must lie inside the domain".into()));
        }
        if self.nodes < 1000 {
            return Err(Error::InvalidArgument(format!(
                "need at least 1000 intervals for a resolved reference, got {}",
                self.nodes
            )));
        }
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) {
            return Err(Error::InvalidArgument("need dt > 0 and t_end >= 0".into()));
        }
        Ok(())
    }
}

/// Reference solution snapshot.
#[derive(Clone, Debug)]
pub struct OracleSolution {
    /// Liquid node positions `0..=interface` and values (interface last).
    pub y_liq: Vec<f64>,
    pub c_liq: Vec<f64>,
    /// Gas node positions `interface..=length` and values (interface first).
    pub y_gas: Vec<f64>,
    pub c_gas: Vec<f64>,
    pub time: f64,
    pub henry: f64,
}

impl OracleSolution {
    /// Piecewise-linear interpolation; the jump sits at the interface, points
    /// below it read the liquid branch.
    pub fn c_at(&self, y: f64) -> f64 {
        let interface = *self.y_gas.first().unwrap();
        let (ys, cs) = if y < interface {
            (&self.y_liq, &self.c_liq)
        } else {
            (&self.y_gas, &self.c_gas)
        };
        let y = y.clamp(ys[0], *ys.last().unwrap());
        let idx = match ys.binary_search_by(|v| v.total_cmp(&y)) {
            Ok(i) => return cs[i],
            Err(i) => i.clamp(1, ys.len() - 1),
        };
        let t = (y - ys[idx - 1]) / (ys[idx] - ys[idx - 1]);
        cs[idx - 1] + t * (cs[idx] - cs[idx - 1])
    }

    /// Phase averages with the half-cell weights of the scheme.
    pub fn gas_average(&self) -> f64 {
        trapezoid_average(&self.y_gas, &self.c_gas)
    }

    pub fn liquid_average(&self) -> f64 {
        trapezoid_average(&self.y_liq, &self.c_liq)
    }

    /// Ratio of the two interface values (imposed as `H` by the scheme).
    pub fn interface_ratio(&self) -> f64 {
        self.c_gas[0] / *self.c_liq.last().unwrap()
    }

    /// CSV with `y,c` columns; the interface appears twice, once per side.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("y,c\n");
        for (y, c) in self.y_liq.iter().zip(&self.c_liq) {
            out.push_str(&format!("{y:.10e},{c:.10e}\n"));
        }
        for (y, c) in self.y_gas.iter().zip(&self.c_gas) {
            out.push_str(&format!("{y:.10e},{c:.10e}\n"));
        }
        out
    }
}

fn trapezoid_average(y: &[f64], c: &[f64]) -> f64 {
    let mut sum = 0.0;
    for i in 1..y.len() {
        sum += 0.5 * (c[i] + c[i - 1]) * (y[i] - y[i - 1]);
    }
    sum / (y.last().unwrap() - y[0])
}

/// Time stepper; `advance_to` lets callers snapshot intermediate times.
pub struct Oracle1D {
    spec: Oracle1DSpec,
    h_liq: f64,
    h_gas: f64,
    n_liq: usize,
    n_gas: usize,
    /// Liquid values followed by gas values above the interface; the
    /// gas-side interface value is tracked separately.
    x: Vec<f64>,
    c_gas_interface: f64,
    pub time: f64,
    /// Largest relative mass drift seen over all steps.
    pub max_mass_drift: f64,
    mass0: f64,
}

impl Oracle1D {
    pub fn new(spec: Oracle1DSpec) -> Result<Oracle1D> {
        spec.validate()?;
        let frac = spec.interface / spec.length;
        let n_liq = ((spec.nodes as f64 * frac).round() as usize).max(2);
        let n_gas = (spec.nodes - n_liq).max(2);
        let h_liq = spec.interface / n_liq as f64;
        let h_gas = (spec.length - spec.interface) / n_gas as f64;
        // Initial state: c = 0 in the liquid, c = 1 in the gas; the interface
        // pair starts in disequilibrium.
        let mut x = vec![0.0; n_liq + 1 + n_gas];
        for v in x.iter_mut().skip(n_liq + 1) {
            *v = 1.0;
        }
        let mut o = Oracle1D {
            spec,
            h_liq,
            h_gas,
            n_liq,
            n_gas,
            x,
            c_gas_interface: 1.0,
            time: 0.0,
            max_mass_drift: 0.0,
            mass0: 0.0,
        };
        o.mass0 = o.mass();
        Ok(o)
    }

    pub fn mass(&self) -> f64 {
        let nl = self.n_liq;
        let mut m = 0.5 * self.h_liq * (self.x[0] + self.x[nl]);
        for i in 1..nl {
            m += self.h_liq * self.x[i];
        }
        m += 0.5 * self.h_gas * (self.c_gas_interface + self.x[nl + self.n_gas]);
        for i in 1..self.n_gas {
            m += self.h_gas * self.x[nl + i];
        }
        m
    }

    pub fn step(&mut self) {
        let (nl, ng) = (self.n_liq, self.n_gas);
        let n = nl + 1 + ng;
        let (hl, hg) = (self.h_liq, self.h_gas);
        let (dl, dg, henry, dt) = (self.spec.d_liq, self.spec.d_gas, self.spec.henry, self.spec.dt);
        let (al, ag) = (dl / hl, dg / hg);

        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];

        diag[0] = 0.5 * hl / dt + al;
        upper[0] = -al;
        rhs[0] = 0.5 * hl / dt * self.x[0];
        for i in 1..nl {
            lower[i] = -al;
            diag[i] = hl / dt + 2.0 * al;
            upper[i] = -al;
            rhs[i] = hl / dt * self.x[i];
        }
        // Interface row: combined mass of both half-cells, with the gas-side
        // unknown eliminated through c_G = H c_L.
        lower[nl] = -al;
        diag[nl] = (0.5 * hl + 0.5 * hg * henry) / dt + al + henry * ag;
        upper[nl] = -ag;
        rhs[nl] = (0.5 * hl * self.x[nl] + 0.5 * hg * self.c_gas_interface) / dt;
        // First gas node couples to c_G = H c_L.
        lower[nl + 1] = -henry * ag;
        diag[nl + 1] = hg / dt + 2.0 * ag;
        upper[nl + 1] = -ag;
        rhs[nl + 1] = hg / dt * self.x[nl + 1];
        for i in nl + 2..n - 1 {
            lower[i] = -ag;
            diag[i] = hg / dt + 2.0 * ag;
            upper[i] = -ag;
            rhs[i] = hg / dt * self.x[i];
        }
        lower[n - 1] = -ag;
        diag[n - 1] = 0.5 * hg / dt + ag;
        rhs[n - 1] = 0.5 * hg / dt * self.x[n - 1];

        thomas(&lower, &mut diag, &upper, &mut rhs);
        let sol = rhs;

        // Rebuild the state from face fluxes of the implicit solution. The
        // update then telescopes, so mass is conserved to summation roundoff
        // even though the solve itself is conditioned by the gas Fourier
        // number. For the exact solution both forms coincide.
        let c_g_new = henry * sol[nl];
        let mut flux = vec![0.0; n]; // flux[i]: into node i from the face above
        for i in 0..nl {
            flux[i] = al * (sol[i + 1] - sol[i]);
        }
        flux[nl] = ag * (sol[nl + 1] - c_g_new); // gas-side interface face
        for i in nl + 1..n - 1 {
            flux[i] = ag * (sol[i + 1] - sol[i]);
        }
        let mut x_new = self.x.clone();
        x_new[0] += dt / (0.5 * hl) * flux[0];
        for i in 1..nl {
            x_new[i] += dt / hl * (flux[i] - flux[i - 1]);
        }
        // Interface pair: combined mass over both half-cells.
        let pair_mass = 0.5 * hl * self.x[nl]
            + 0.5 * hg * self.c_gas_interface
            + dt * (flux[nl] - flux[nl - 1]);
        x_new[nl] = pair_mass / (0.5 * hl + 0.5 * hg * henry);
        for i in nl + 1..n - 1 {
            x_new[i] += dt / hg * (flux[i] - flux[i - 1]);
        }
        x_new[n - 1] += dt / (0.5 * hg) * (-flux[n - 2]);

        self.x = x_new;
        self.c_gas_interface = henry * self.x[nl];
        self.time += dt;
        let drift = (self.mass() - self.mass0).abs() / self.mass0;
        self.max_mass_drift = self.max_mass_drift.max(drift);
    }

    pub fn advance_to(&mut self, t: f64) {
        while self.time + 0.5 * self.spec.dt < t {
            self.step();
        }
    }

    pub fn solution(&self) -> OracleSolution {
        let nl = self.n_liq;
        let y_liq: Vec<f64> = (0..=nl).map(|i| i as f64 * self.h_liq).collect();
        let c_liq = self.x[..=nl].to_vec();
        let mut y_gas = Vec::with_capacity(self.n_gas + 1);
        let mut c_gas = Vec::with_capacity(self.n_gas + 1);
        y_gas.push(self.spec.interface);
        c_gas.push(self.c_gas_interface);
        for i in 1..=self.n_gas {
            y_gas.push(self.spec.interface + i as f64 * self.h_gas);
            c_gas.push(self.x[nl + i]);
        }
        OracleSolution { y_liq, c_liq, y_gas, c_gas, time: self.time, henry: self.spec.henry }
    }
}

/// Closed-form long-time equilibrium from global mass balance:
/// `c_l (L_l + H L_g) = M0`.
pub fn equilibrium_concentrations(spec: &Oracle1DSpec) -> (f64, f64) {
    let l_liq = spec.interface;
    let l_gas = spec.length - spec.interface;
    let m0 = l_gas; // initial c = 1 in the gas
    let c_l = m0 / (l_liq + spec.henry * l_gas);
    (spec.henry * c_l, c_l)
}

/// Run the reference to `t_end`.
pub fn solve_reference(spec: &Oracle1DSpec) -> Result<OracleSolution> {
    let mut o = Oracle1D::new(*spec)?;
    o.advance_to(spec.t_end);
    Ok(o.solution())
}

/// Tridiagonal solve; `diag` and `rhs` are clobbered, the result lands in
/// `rhs`. Rows are diagonally dominant by construction.
fn thomas(lower: &[f64], diag: &mut [f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    for i in 1..n {
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_specs() {
        let mut s = Oracle1DSpec::planar(1e-1, 1e-5, 0.0, 0.1);
        assert!(Oracle1D::new(s).is_err());
        s.henry = 1.0;
        s.nodes = 100;
        assert!(Oracle1D::new(s).is_err());
    }

    #[test]
    fn matches_erfc_similarity_solution() {
        // H = 1 with equal diffusivities is plain diffusion of a step:
        // c = 1/2 erfc((y_i - y)/(2 sqrt(D t))) while boundaries are unfelt.
        let d = 1e-5;
        let spec = Oracle1DSpec {
            length: 0.04,
            interface: 0.02,
            d_gas: d,
            d_liq: d,
            henry: 1.0,
            nodes: 2000,
            dt: 2e-5,
            t_end: 0.1,
        };
        let sol = solve_reference(&spec).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..400 {
            let y = 0.004 + 0.032 * (k as f64 + 0.5) / 400.0;
            let xi = (0.02 - y) / (2.0 * (d * spec.t_end).sqrt());
            let exact = 0.5 * libm::erfc(xi);
            worst = worst.max((sol.c_at(y) - exact).abs());
        }
        assert!(worst < 1e-3, "Linf vs erfc = {worst}");
    }

    #[test]
    fn conserves_mass_to_machine_precision() {
        let spec = Oracle1DSpec { dt: 1e-3, ..Oracle1DSpec::planar(1e-1, 1e-5, 5.0, 0.0) };
        let mut o = Oracle1D::new(spec).unwrap();
        for _ in 0..500 {
            o.step();
        }
        assert!(o.max_mass_drift < 1e-10, "mass drift {}", o.max_mass_drift);
    }

    #[test]
    fn long_time_state_matches_closed_form_equilibrium() {
        for henry in [0.033, 30.0] {
            let spec = Oracle1DSpec {
                nodes: 1000,
                dt: 0.05,
                t_end: 150.0,
                ..Oracle1DSpec::planar(1e-1, 1e-5, henry, 150.0)
            };
            let sol = solve_reference(&spec).unwrap();
            let (c_g, c_l) = equilibrium_concentrations(&spec);
            assert!(
                (sol.gas_average() - c_g).abs() < 5e-3 * c_g,
                "H={henry}: gas {} vs {c_g}",
                sol.gas_average()
            );
            assert!(
                (sol.liquid_average() - c_l).abs() < 5e-3 * c_l,
                "H={henry}: liq {} vs {c_l}",
                sol.liquid_average()
            );
            // Phase-average ratio approaches H as the profiles flatten.
            let ratio = sol.gas_average() / sol.liquid_average();
            assert!((ratio - henry).abs() < 5e-3 * henry, "H={henry}: ratio {ratio}");
            // The interface pair satisfies the jump exactly by construction.
            assert!((sol.interface_ratio() - henry).abs() < 1e-12 * henry);
        }
    }

    #[test]
    fn profile_is_bounded_and_jumps_at_interface() {
        let spec = Oracle1DSpec::planar(1e-1, 1e-5, 30.0, 0.5);
        let sol = solve_reference(&spec).unwrap();
        for c in sol.c_liq.iter().chain(&sol.c_gas) {
            assert!(*c >= -1e-14 && *c <= 1.0 + 1e-12);
        }
        let below = sol.c_at(0.02 - 1e-6);
        let above = sol.c_at(0.02 + 1e-6);
        assert!(above / below > 25.0, "jump ratio {}", above / below);
    }

    #[test]
    fn self_convergence_is_second_order_in_space() {
        let run = |nodes: usize| {
            let spec = Oracle1DSpec {
                nodes,
                dt: 2.5e-5,
                t_end: 0.05,
                ..Oracle1DSpec::planar(1e-1, 1e-5, 5.0, 0.05)
            };
            solve_reference(&spec).unwrap()
        };
        let (a, b, c) = (run(1000), run(2000), run(4000));
        // Compare liquid-side profiles pointwise (the liquid resolves the
        // moving front; the gas is nearly uniform).
        let linf = |s1: &OracleSolution, s2: &OracleSolution| {
            let mut worst: f64 = 0.0;
            for k in 0..200 {
                let y = 0.012 + 0.0079 * (k as f64 + 0.5) / 200.0;
                worst = worst.max((s1.c_at(y) - s2.c_at(y)).abs());
            }
            worst
        };
        let e12 = linf(&a, &b);
        let e23 = linf(&b, &c);
        let order = (e12 / e23).log2();
        assert!(order > 1.6, "observed spatial order {order} (e12={e12:.3e}, e23={e23:.3e})");
    }
}
