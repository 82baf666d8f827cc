//! Interaction energy between a moving charge and a solenoid, computed as a
//! field-overlap volume integral and as `A₂(x)·qv`, plus the EMF the passing
//! charge induces in the winding.

use std::f64::consts::PI;

use crate::constants::MU_0;
use crate::error::{Error, Result};
use crate::fields::{
    a_finite_solenoid, a_solenoid_closed, b_moving_charge, b_solenoid, flux_through_disc, ChargeState,
    SolenoidLength, SolenoidSpec, TruncationStudy,
};
use crate::quadrature::{self, CubatureOptions, Region};
use crate::vec3::Vec3;

/// Floor on |W_closed| when forming the relative discrepancy (J).
pub const ENERGY_FLOOR: f64 = 1e-40;

/// Infinite windings are truncated at this many times the larger of the
/// radius and the charge's distance from the axis (half-length), then at
/// twice that.
pub const TRUNCATION_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub w_integral: f64,
    pub w_closed: f64,
    pub rel_discrepancy: f64,
    pub quadrature_cells: usize,
    pub tol_used: f64,
    /// Relative change of `w_integral` between the two truncation lengths;
    /// zero for finite windings.
    pub truncation_gap: f64,
}

fn require_outside(c: &ChargeState, s: &SolenoidSpec) -> Result<()> {
    if s.contains(c.position()) {
        return Err(Error::Domain("charge lies inside the solenoid body".into()));
    }
    Ok(())
}

fn overlap_integral(c: &ChargeState, s: &SolenoidSpec, z_lo: f64, z_hi: f64, tol: f64) -> Result<quadrature::Estimate<f64>> {
    let (e1, e2) = s.axis().orthonormal_pair();
    let axis = s.axis();
    let centre = s.center();
    let line_current = s.turns_per_meter() * s.current();
    let finite = !s.is_infinite();
    let integrand = |x: &[f64; 3]| {
        let (sin, cos) = x[1].sin_cos();
        let r = centre + (e1 * cos + e2 * sin) * x[0] + axis * x[2];
        // the charge is outside the winding, so it never coincides with r
        let b1 = b_moving_charge(c, r).unwrap_or(Vec3::ZERO);
        let overlap = if finite {
            b1.dot(b_solenoid(s, r)) / MU_0
        } else {
            line_current * b1.dot(axis)
        };
        overlap * x[0]
    };
    let z_cells = (((z_hi - z_lo) / s.radius()).sqrt().ceil() as usize).clamp(2, 64);
    let region = Region::new([0.0, 0.0, z_lo], [s.radius(), 2.0 * PI, z_hi], [2, 8, z_cells]);
    quadrature::integrate(integrand, &region, &CubatureOptions::new(tol), None)
}

/// W′ by the overlap integral (1/μ₀)∫B₁·B₂ d³r over the winding interior.
///
/// Infinite windings are truncated symmetrically about the charge's axial
/// position; the returned study carries both truncations.
pub fn interaction_energy_study(c: &ChargeState, s: &SolenoidSpec, tol: f64) -> Result<TruncationStudy<f64>> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    require_outside(c, s)?;
    if c.velocity() == Vec3::ZERO || c.charge() == 0.0 || s.current() == 0.0 {
        return Ok(TruncationStudy {
            value: 0.0,
            short_value: 0.0,
            length: 0.0,
            gap: 0.0,
            cells: 0,
        });
    }
    match s.length() {
        SolenoidLength::Finite(l) => {
            let est = overlap_integral(c, s, -0.5 * l, 0.5 * l, tol)?;
            Ok(TruncationStudy {
                value: est.value,
                short_value: est.value,
                length: l,
                gap: 0.0,
                cells: est.cells,
            })
        }
        SolenoidLength::Infinite => {
            let local = s.to_cylindrical(c.position());
            let half = TRUNCATION_FACTOR * s.radius().max(local.rho);
            let short = overlap_integral(c, s, local.z - half, local.z + half, tol)?;
            let long = overlap_integral(c, s, local.z - 2.0 * half, local.z + 2.0 * half, tol)?;
            Ok(TruncationStudy {
                value: long.value,
                short_value: short.value,
                length: 4.0 * half,
                gap: (long.value - short.value).abs() / long.value.abs().max(ENERGY_FLOOR),
                cells: long.cells,
            })
        }
    }
}

/// W′ = (1/μ₀)∫B₁·B₂ d³r (J), relative quadrature tolerance `tol`.
pub fn interaction_energy_integral(c: &ChargeState, s: &SolenoidSpec, tol: f64) -> Result<f64> {
    Ok(interaction_energy_study(c, s, tol)?.value)
}

/// W′ = A₂(x)·qv (J). Finite windings use the loop-integrated potential
/// of the whole winding, so the exterior field the overlap integral leaves
/// out shows up as a discrepancy.
pub fn interaction_energy_closed(c: &ChargeState, s: &SolenoidSpec) -> Result<f64> {
    require_outside(c, s)?;
    let a2 = match s.length() {
        SolenoidLength::Infinite => a_solenoid_closed(s, c.position())?,
        SolenoidLength::Finite(_) => a_finite_solenoid(s, c.position())?,
    };
    Ok(a2.dot(c.velocity()) * c.charge())
}

/// Both sides of the interaction-energy identity and their discrepancy.
pub fn verify_eq2(c: &ChargeState, s: &SolenoidSpec, tol: f64) -> Result<EnergyReport> {
    let study = interaction_energy_study(c, s, tol)?;
    let w_closed = interaction_energy_closed(c, s)?;
    Ok(EnergyReport {
        w_integral: study.value,
        w_closed,
        rel_discrepancy: (study.value - w_closed).abs() / w_closed.abs().max(ENERGY_FLOOR),
        quadrature_cells: study.cells,
        tol_used: tol,
        truncation_gap: study.gap,
    })
}

/// Flux linkage and induced EMF along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct EmfTrace {
    pub times: Vec<f64>,
    /// Total linkage, turns × flux through the mid-plane section (Wb).
    pub flux_through_solenoid: Vec<f64>,
    pub emf: Vec<f64>,
}

/// Relative tolerance for the cross-section fluxes.
pub const SECTION_FLUX_TOL: f64 = 1e-7;

fn section_flux(c: &ChargeState, s: &SolenoidSpec, z: f64) -> Result<f64> {
    flux_through_disc(
        |p| b_moving_charge(c, p),
        s.center() + s.axis() * z,
        s.axis(),
        s.radius(),
        SECTION_FLUX_TOL,
    )
}

/// Linkage approximated as `turns × flux through the mid-plane section`.
pub fn flux_linkage(c: &ChargeState, s: &SolenoidSpec, turns_total: u64) -> Result<f64> {
    require_outside(c, s)?;
    Ok(turns_total as f64 * section_flux(c, s, 0.0)?)
}

/// Linkage from the mean flux over `sections` evenly spaced cross-sections of
/// a finite winding; the reference the mid-plane approximation is checked
/// against.
pub fn flux_linkage_sections(c: &ChargeState, s: &SolenoidSpec, turns_total: u64, sections: usize) -> Result<f64> {
    require_outside(c, s)?;
    let SolenoidLength::Finite(l) = s.length() else {
        return Err(Error::Domain("section averaging needs a finite winding".into()));
    };
    if sections == 0 {
        return Err(Error::invalid("sections", "must be at least 1"));
    }
    let mut sum = 0.0;
    for k in 0..sections {
        let z = -0.5 * l + l * (k as f64 + 0.5) / sections as f64;
        sum += section_flux(c, s, z)?;
    }
    Ok(turns_total as f64 * sum / sections as f64)
}

/// EMF −dΛ/dt induced in the winding by a moving charge, with Λ from
/// [`flux_linkage`]. Central differences inside, one-sided at the ends.
pub fn induced_emf(trajectory: &[(f64, ChargeState)], s: &SolenoidSpec, turns_total: u64) -> Result<EmfTrace> {
    if trajectory.len() < 3 {
        return Err(Error::invalid("trajectory", "needs at least 3 samples"));
    }
    if trajectory.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::invalid("trajectory", "times must be strictly increasing"));
    }
    let times: Vec<f64> = trajectory.iter().map(|(t, _)| *t).collect();
    let linkage = trajectory
        .iter()
        .map(|(_, c)| flux_linkage(c, s, turns_total))
        .collect::<Result<Vec<f64>>>()?;
    Ok(EmfTrace {
        emf: negative_derivative(&times, &linkage),
        times,
        flux_through_solenoid: linkage,
    })
}

fn negative_derivative(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                i if i == n - 1 => (n - 2, n - 1),
                i => (i - 1, i + 1),
            };
            -(y[b] - y[a]) / (t[b] - t[a])
        })
        .collect()
}

/// Straight-line trajectory `x(t) = x₀ + v·t` sampled at `samples` evenly
/// spaced times over `[t_start, t_end]`.
pub fn straight_trajectory(c: &ChargeState, t_start: f64, t_end: f64, samples: usize) -> Result<Vec<(f64, ChargeState)>> {
    if samples < 3 || !(t_end > t_start) {
        return Err(Error::invalid("trajectory", "needs t_end > t_start and at least 3 samples"));
    }
    Ok((0..samples)
        .map(|k| {
            let t = t_start + (t_end - t_start) * k as f64 / (samples - 1) as f64;
            (t, c.at(c.position() + c.velocity() * t))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ELEMENTARY_CHARGE;
    use crate::fields::{a_moving_charge, line_integral, LoopPath};
    use approx::assert_relative_eq;

    fn solenoid() -> SolenoidSpec {
        // n·I = 10³ A/m, R = 1 mm
        SolenoidSpec::infinite_z(1e-3, 1e4, 0.1).unwrap()
    }

    fn electron(p: Vec3, v: Vec3) -> ChargeState {
        ChargeState::new(-ELEMENTARY_CHARGE, p, v).unwrap()
    }

    #[test]
    fn closed_form_example() {
        // ρ = 2R, v azimuthal (+y at +x), |v| = 1e5 m/s.
        let s = solenoid();
        let c = electron(Vec3::new(2e-3, 0.0, 0.0), Vec3::Y * 1e5);
        let w = interaction_energy_closed(&c, &s).unwrap();
        // μ₀·10³·(10⁻³)²/(2·2·10⁻³) · (−e)·10⁵, evaluated independently:
        let expected = -(1.256_637_062_12e-6 * 1e3 * 1e-6 / 4e-3) * 1.602_176_634e-19 * 1e5;
        assert_relative_eq!(w, expected, max_relative = 1e-12);
        assert_relative_eq!(w, -5.033_386_345_867_676e-21, max_relative = 1e-12);
        let doubled = c.with_charge(-2.0 * ELEMENTARY_CHARGE);
        assert_relative_eq!(interaction_energy_closed(&doubled, &s).unwrap(), 2.0 * w, max_relative = 1e-15);
        let radial = c.with_velocity(Vec3::X * 1e5).unwrap();
        assert_eq!(interaction_energy_closed(&radial, &s).unwrap(), 0.0);
    }

    #[test]
    fn static_charge_has_no_interaction() {
        let s = solenoid();
        let c = electron(Vec3::new(3e-3, 0.0, 0.0), Vec3::ZERO);
        assert_eq!(interaction_energy_integral(&c, &s, 1e-3).unwrap(), 0.0);
        let r = verify_eq2(&c, &s.with_current(0.0), 1e-3).unwrap();
        assert_eq!((r.w_integral, r.w_closed, r.rel_discrepancy), (0.0, 0.0, 0.0));
    }

    #[test]
    fn integral_matches_closed_form() {
        let s = solenoid();
        let c = electron(Vec3::new(0.0, 3e-3, 1e-3), Vec3::new(-1e5, 0.0, 2e4));
        let r = verify_eq2(&c, &s, 1e-3).unwrap();
        assert!(r.rel_discrepancy < 1e-2, "{r:?}");
        assert!(r.truncation_gap < 1e-3, "{r:?}");
        let rev = interaction_energy_integral(&c.with_velocity(-c.velocity()).unwrap(), &s, 1e-3).unwrap();
        assert_relative_eq!(rev, -r.w_integral, max_relative = 1e-12);
        let far = electron(Vec3::new(-10e-3, 0.0, 0.0), Vec3::new(0.0, -1e5, 0.0));
        let r = verify_eq2(&far, &s, 1e-3).unwrap();
        assert!(r.rel_discrepancy < 1e-2, "{r:?}");
    }

    #[test]
    fn charge_inside_is_rejected() {
        let s = solenoid();
        let c = electron(Vec3::new(0.5e-3, 0.0, 0.0), Vec3::Y);
        assert!(matches!(interaction_energy_integral(&c, &s, 1e-3), Err(Error::Domain(_))));
        assert!(matches!(interaction_energy_closed(&c, &s), Err(Error::Domain(_))));
    }

    #[test]
    fn finite_winding_reports_discrepancy() {
        let r = 1e-3;
        let s = SolenoidSpec::new(Vec3::ZERO, Vec3::Z, r, SolenoidLength::Finite(20.0 * r), 1e4, 0.1).unwrap();
        let c = electron(Vec3::new(2.0 * r, 0.0, 0.0), Vec3::Y * 1e5);
        let report = verify_eq2(&c, &s, 1e-2).unwrap();
        let infinite = interaction_energy_closed(&c, &solenoid()).unwrap();
        // same sign and order of magnitude as the ideal winding
        assert!(report.w_integral / infinite > 0.5 && report.w_integral / infinite < 1.5, "{report:?}");
        assert!(report.w_closed / infinite > 0.5 && report.w_closed / infinite < 1.5, "{report:?}");
        assert_eq!(report.truncation_gap, 0.0);
    }

    #[test]
    fn static_linkage_gives_zero_emf() {
        let s = solenoid();
        let c = electron(Vec3::new(3e-3, 0.0, 0.0), Vec3::Y * 1e5);
        let traj: Vec<_> = (0..5).map(|k| (k as f64 * 1e-9, c)).collect();
        let trace = induced_emf(&traj, &s, 1000).unwrap();
        assert!(trace.emf.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn linkage_matches_stokes() {
        let s = solenoid();
        let c = electron(Vec3::new(2e-3, -1e-3, 0.3e-3), Vec3::new(2e4, 7e4, -1e4));
        let flux = flux_linkage(&c, &s, 1).unwrap();
        let circle = LoopPath::circle(Vec3::ZERO, Vec3::Z, 1e-3, 32).unwrap();
        let circ = line_integral(|p| a_moving_charge(&c, p), &circle, 1e-12 * flux.abs()).unwrap();
        assert_relative_eq!(flux, circ, max_relative = 1e-6);
    }

    #[test]
    fn symmetric_flyby() {
        let s = solenoid();
        let speed = 1e5;
        let c = electron(Vec3::new(0.0, 2e-3, 0.0), Vec3::X * speed);
        let half = 20e-3 / speed;
        let traj = straight_trajectory(&c, -half, half, 41).unwrap();
        let trace = induced_emf(&traj, &s, 1000).unwrap();
        let n = trace.emf.len();
        let peak_emf = trace.emf.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        for i in 0..n {
            assert!((trace.emf[i] + trace.emf[n - 1 - i]).abs() <= 1e-6 * peak_emf);
        }
        assert!(trace.emf[n / 2].abs() <= 1e-6 * peak_emf);
        // ∫EMF dt = −ΔΛ → 0 for the symmetric path
        let integral: f64 = trace
            .times
            .windows(2)
            .zip(trace.emf.windows(2))
            .map(|(t, e)| 0.5 * (e[0] + e[1]) * (t[1] - t[0]))
            .sum();
        let peak_linkage = trace.flux_through_solenoid.iter().fold(0.0_f64, |m, f| m.max(f.abs()));
        assert!(integral.abs() < 1e-3 * peak_linkage);

        // Doubling the speed halves the time scale and doubles B₁ itself, so
        // at matched positions the linkage doubles and the EMF quadruples.
        let fast = c.with_velocity(Vec3::X * 2.0 * speed).unwrap();
        let traj2 = straight_trajectory(&fast, -half / 2.0, half / 2.0, 41).unwrap();
        let trace2 = induced_emf(&traj2, &s, 1000).unwrap();
        for i in 0..n {
            let (l1, l2) = (trace.flux_through_solenoid[i], trace2.flux_through_solenoid[i]);
            assert!((l2 - 2.0 * l1).abs() <= 1e-9 * peak_linkage);
            assert!((trace2.emf[i] - 4.0 * trace.emf[i]).abs() <= 1e-6 * peak_emf);
        }
    }

    #[test]
    fn midplane_versus_section_average() {
        let r = 1e-3;
        let s = SolenoidSpec::new(Vec3::ZERO, Vec3::Z, r, SolenoidLength::Finite(4.0 * r), 1e4, 0.1).unwrap();
        let c = electron(Vec3::new(1.5 * r, 0.0, 0.0), Vec3::Y * 1e5);
        let mid = flux_linkage(&c, &s, 100).unwrap();
        let avg = flux_linkage_sections(&c, &s, 100, 5).unwrap();
        assert!(mid.signum() == avg.signum() && avg.abs() < mid.abs());
        assert!(flux_linkage_sections(&c, &solenoid(), 100, 5).is_err());
    }

    #[test]
    fn trajectory_validation() {
        let s = solenoid();
        let c = electron(Vec3::new(3e-3, 0.0, 0.0), Vec3::Y);
        assert!(induced_emf(&[(0.0, c), (1.0, c)], &s, 1).is_err());
        assert!(induced_emf(&[(0.0, c), (1.0, c), (1.0, c)], &s, 1).is_err());
        let inside = c.at(Vec3::ZERO);
        assert!(matches!(induced_emf(&[(0.0, c), (1.0, inside), (2.0, c)], &s, 1), Err(Error::Domain(_))));
    }
}
