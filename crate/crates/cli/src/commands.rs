use std::f64::consts::TAU;
use std::io::Write;

use abflux::constants::FLUX_QUANTUM;
use abflux::fields::{a_finite_solenoid, a_solenoid_closed, b_solenoid};
use abflux::interaction::{induced_emf, straight_trajectory, verify_eq2};
use abflux::interference::{ab_phase, fringe_pattern, screen};
use abflux::quantum_lc::{build_lc_operators, verify_commutators};
use abflux::shield::{pulse_spectrum, shields_ac};
use abflux::squid::{run_experiment, Hypothesis};
use abflux::verify::{run_all, SuiteOptions};

use crate::{CliError, ScenarioConfig};

type Out<'a> = &'a mut dyn Write;

fn preamble(out: Out, cfg: &ScenarioConfig) -> std::io::Result<()> {
    writeln!(out, "# config_hash={}", cfg.hash())
}

/// B and A of the solenoid along a radial line through its centre, out to
/// `extent` radii.
pub fn fields(out: Out, cfg: &ScenarioConfig, samples: usize, extent: f64) -> Result<(), CliError> {
    let s = &cfg.solenoid;
    if samples < 2 || extent.is_nan() || extent <= 0.0 {
        return Err(CliError::Compute(abflux::Error::InvalidParameter {
            name: "samples/extent",
            constraint: "need at least 2 samples and a positive extent".into(),
        }));
    }
    let (e1, _) = s.axis().orthonormal_pair();
    preamble(out, cfg)?;
    writeln!(out, "x_m,y_m,z_m,bx_t,by_t,bz_t,ax_tm,ay_tm,az_tm")?;
    for k in 0..samples {
        let p = s.center() + e1 * (extent * s.radius() * k as f64 / (samples - 1) as f64);
        let b = b_solenoid(s, p);
        let a = if s.is_infinite() { a_solenoid_closed(s, p)? } else { a_finite_solenoid(s, p)? };
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            p.x, p.y, p.z, b.x, b.y, b.z, a.x, a.y, a.z
        )?;
    }
    Ok(())
}

pub fn energy(out: Out, cfg: &ScenarioConfig) -> Result<(), CliError> {
    let r = verify_eq2(&cfg.charge, &cfg.solenoid, cfg.tol)?;
    preamble(out, cfg)?;
    writeln!(out, "w_integral_j,w_closed_j,rel_discrepancy,quadrature_cells,tol_used,truncation_gap")?;
    writeln!(
        out,
        "{:e},{:e},{:e},{},{:e},{:e}",
        r.w_integral, r.w_closed, r.rel_discrepancy, r.quadrature_cells, r.tol_used, r.truncation_gap
    )?;
    Ok(())
}

/// EMF along the straight path `x₀ + v·t`. The default window spans ten
/// radii of travel either side of t = 0.
pub fn emf(out: Out, cfg: &ScenarioConfig, samples: usize, window: Option<(f64, f64)>) -> Result<(), CliError> {
    let speed = cfg.charge.velocity().norm();
    let (t0, t1) = window.unwrap_or_else(|| {
        let half = if speed > 0.0 { 10.0 * cfg.solenoid.radius() / speed } else { 1.0 };
        (-half, half)
    });
    let path = straight_trajectory(&cfg.charge, t0, t1, samples)?;
    let trace = induced_emf(&path, &cfg.solenoid, cfg.turns_total)?;
    preamble(out, cfg)?;
    writeln!(out, "t,flux,emf")?;
    for i in 0..trace.times.len() {
        writeln!(out, "{:e},{:e},{:e}", trace.times[i], trace.flux_through_solenoid[i], trace.emf[i])?;
    }
    Ok(())
}

pub fn interfere(
    out: Out,
    cfg: &ScenarioConfig,
    flux_quanta: f64,
    gradient: f64,
    half_width: f64,
    points: usize,
) -> Result<(), CliError> {
    let delta_phi = ab_phase(flux_quanta * FLUX_QUANTUM);
    let pattern = fringe_pattern(delta_phi, gradient, &screen(half_width, points))?;
    preamble(out, cfg)?;
    writeln!(out, "# delta_phi_rad={:e}", delta_phi)?;
    writeln!(out, "x,intensity")?;
    for (x, i) in pattern.positions.iter().zip(&pattern.intensities) {
        writeln!(out, "{:e},{:e}", x, i)?;
    }
    Ok(())
}

pub const DEFAULT_GRADIENT: f64 = TAU / 1e-6;

/// Spectrum of the charge's field pulse at the shield wall.
pub fn shield(out: Out, cfg: &ScenarioConfig) -> Result<(), CliError> {
    let speed = cfg.charge.velocity().norm();
    let spectrum = pulse_spectrum(speed, cfg.shield.radius(), cfg.spectrum_samples)?;
    let shields = shields_ac(&cfg.shield, cfg.temperature, spectrum.photon_energy_ev);
    preamble(out, cfg)?;
    writeln!(
        out,
        "# centroid_hz={:e}, photon_ev={:e}, shields={}",
        spectrum.centroid_frequency, spectrum.photon_energy_ev, shields
    )?;
    writeln!(out, "freq_hz,amplitude")?;
    for (f, a) in spectrum.frequencies.iter().zip(&spectrum.amplitudes) {
        writeln!(out, "{:e},{:e}", f, a)?;
    }
    Ok(())
}

pub fn squid_run(out: Out, cfg: &ScenarioConfig, h: Hypothesis) -> Result<(), CliError> {
    let trace = run_experiment(&cfg.squid, &cfg.shield, &cfg.protocol, h)?;
    preamble(out, cfg)?;
    writeln!(out, "# hypothesis={h}")?;
    writeln!(out, "step,T_K,f,I_a_A,phi_a_wb,phi_b_wb,phi_obs_wb,I_c_A")?;
    for r in &trace.rows {
        writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.step, r.temperature, r.shielded_fraction, r.current_a, r.phi_a, r.phi_b, r.phi_obs, r.critical_current
        )?;
    }
    writeln!(out, "# final_total_flux_quanta={:.6}", trace.final_total_flux_quanta())?;
    Ok(())
}

pub fn lc_check(out: Out, dim: usize, inductance: f64, capacitance: f64) -> Result<(), CliError> {
    let ops = build_lc_operators(inductance, capacitance, dim)?;
    let r = verify_commutators(&ops.q, &ops.phi, &ops.u, capacitance)?;
    writeln!(out, "max_block_deviation={:e}", r.max_block_deviation.max(r.max_border_deviation))?;
    writeln!(out, "corner={:e} expected={:e}", r.corner.re, r.expected_corner)?;
    Ok(())
}

pub fn verify_all(out: Out, opts: &SuiteOptions) -> Result<(), CliError> {
    let outcomes = run_all(opts);
    for o in &outcomes {
        writeln!(
            out,
            "{} {:>2}  {:<56} {:>7.2}s  {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.seconds,
            o.detail
        )?;
        out.flush()?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(CliError::Acceptance(failed));
    }
    Ok(())
}
