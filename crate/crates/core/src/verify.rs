//! The end-to-end check suite behind `verify-all`: each check exercises one
//! module against an independent reference and reports pass or fail.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constants::{AB_FLUX_PERIOD, ELEMENTARY_CHARGE, FLUX_QUANTUM, HBAR};
use crate::error::Result;
use crate::fields::{
    a_moving_charge, a_solenoid_closed, a_solenoid_quadrature, b_moving_charge, flux_of_solenoid, flux_through_disc,
    line_integral, ChargeState, LoopPath, SolenoidSpec,
};
use crate::interaction::verify_eq2;
use crate::interference::{ab_phase, parity_distinguishable};
use crate::quantum_lc::{build_lc_operators, verify_commutators};
use crate::shield::{pulse_spectrum, shields_ac, ScreenedCharge, ShieldSpec};
use crate::squid::{critical_current, run_experiment, Hypothesis, Protocol, SquidSpec};
use crate::vec3::Vec3;

/// Impact parameter at which the fast-electron pulse is evaluated (m).
pub const PULSE_IMPACT: f64 = 0.6e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub eq2_configs: usize,
    pub eq2_tol: f64,
    pub potential_tol: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 20_240_601,
            eq2_configs: 50,
            eq2_tol: 1e-3,
            potential_tol: 5e-3,
        }
    }
}

type Check = fn(&SuiteOptions) -> Result<(bool, String)>;

const CHECKS: [(u8, &str, Check); 9] = [
    (1, "interaction energy: overlap integral vs A·qv", check_interaction_energy),
    (2, "vector potential: Biot-Savart quadrature vs closed form", check_potential_quadrature),
    (3, "solenoid flux by loop integral", check_solenoid_flux),
    (4, "no charge flux through a screened loop", check_screened_loop),
    (5, "phase and flux parity", check_parity),
    (6, "pulse spectrum and gap gate", check_pulse_gate),
    (7, "flux-locked loop under both hypotheses", check_flux_locked_loop),
    (8, "SQUID critical current", check_critical_current),
    (9, "LC commutators", check_commutators),
];

pub fn run_all(opts: &SuiteOptions) -> Vec<CheckOutcome> {
    CHECKS.iter().map(|&(id, name, check)| run_check(id, name, check, opts)).collect()
}

/// Runs the checks whose ids are listed.
pub fn run_selected(opts: &SuiteOptions, ids: &[u8]) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .filter(|(id, _, _)| ids.contains(id))
        .map(|&(id, name, check)| run_check(id, name, check, opts))
        .collect()
}

fn run_check(id: u8, name: &'static str, check: Check, opts: &SuiteOptions) -> CheckOutcome {
    let start = Instant::now();
    let (passed, detail) = match check(opts) {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckOutcome {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Seeded charge-outside-solenoid configurations: distance from the axis in
/// [1.2R, 10R], velocity with at least 30% of its magnitude azimuthal.
pub fn random_configurations(seed: u64, count: usize) -> Result<Vec<(ChargeState, SolenoidSpec)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let radius = 10f64.powf(rng.gen_range(-4.0..-2.0));
        let axis = random_unit(&mut rng);
        let center = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * radius;
        let current = rng.gen_range(0.01..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let s = SolenoidSpec::new(center, axis, radius, crate::fields::SolenoidLength::Infinite, rng.gen_range(1e3..1e5), current)?;

        let (e1, e2) = axis.orthonormal_pair();
        let angle = rng.gen_range(0.0..2.0 * PI);
        let radial = e1 * angle.cos() + e2 * angle.sin();
        let azimuthal = axis.cross(radial);
        let rho = radius * rng.gen_range(1.2..10.0);
        let position = center + radial * rho + axis * (radius * rng.gen_range(-5.0..5.0));

        let azimuthal_share: f64 = rng.gen_range(0.3..1.0);
        let rest = (1.0 - azimuthal_share * azimuthal_share).sqrt();
        let mix = rng.gen_range(0.0..2.0 * PI);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let direction = azimuthal * (sign * azimuthal_share) + (radial * mix.cos() + axis * mix.sin()) * rest;
        let speed = 10f64.powf(rng.gen_range(3.0..6.0));
        let charge = if rng.gen_bool(0.5) { -ELEMENTARY_CHARGE } else { ELEMENTARY_CHARGE };
        out.push((ChargeState::new(charge, position, direction * speed)?, s));
    }
    Ok(out)
}

fn check_interaction_energy(opts: &SuiteOptions) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut worst_gap = 0.0f64;
    for (c, s) in random_configurations(opts.seed, opts.eq2_configs)? {
        let r = verify_eq2(&c, &s, opts.eq2_tol)?;
        worst = worst.max(r.rel_discrepancy);
        worst_gap = worst_gap.max(r.truncation_gap);
    }
    Ok((
        worst < 1e-2,
        format!("{} configs, max rel discrepancy {worst:.3e}, max truncation gap {worst_gap:.3e}", opts.eq2_configs),
    ))
}

/// Probe points around a unit-radius solenoid on the z axis: 20 outside,
/// 5 inside.
pub fn potential_probes() -> Vec<Vec3> {
    let mut probes = Vec::with_capacity(25);
    for k in 0..20 {
        let rho = 1.25 + 3.75 * k as f64 / 19.0;
        let angle = 2.0 * PI * k as f64 / 20.0 + 0.1;
        let z = 2.0 * ((k % 5) as f64 - 2.0);
        probes.push(Vec3::new(rho * angle.cos(), rho * angle.sin(), z));
    }
    for k in 0..5 {
        let rho = 0.2 + 0.15 * k as f64;
        let angle = 1.3 * k as f64 + 0.4;
        probes.push(Vec3::new(rho * angle.cos(), rho * angle.sin(), 0.5 * k as f64 - 1.0));
    }
    probes
}

fn check_potential_quadrature(opts: &SuiteOptions) -> Result<(bool, String)> {
    let radius = 1e-3;
    let s = SolenoidSpec::infinite_z(radius, 1e4, 0.5)?;
    let mut worst = 0.0f64;
    let mut worst_gap = 0.0f64;
    for p in potential_probes() {
        let p = p * radius;
        let study = a_solenoid_quadrature(&s, p, 100.0 * radius, opts.potential_tol)?;
        let exact = a_solenoid_closed(&s, p)?;
        worst = worst.max((study.value - exact).norm() / exact.norm());
        worst_gap = worst_gap.max(study.gap);
    }
    Ok((
        worst < 1e-2,
        format!("25 probes, max rel error {worst:.3e}, truncation gap 100R->200R up to {worst_gap:.3e}"),
    ))
}

fn check_solenoid_flux(_: &SuiteOptions) -> Result<(bool, String)> {
    let radius = 2e-3;
    let s = SolenoidSpec::infinite_z(radius, 5e3, 0.3)?;
    let flux = flux_of_solenoid(&s);
    let a = |p: Vec3| a_solenoid_closed(&s, p);
    let tol = 1e-9 * flux.abs();
    let enclosing = [
        LoopPath::circle(Vec3::ZERO, Vec3::Z, 1.5 * radius, 64)?,
        LoopPath::circle(Vec3::new(0.0, 0.0, 0.1), Vec3::Z, 7.0 * radius, 64)?,
        LoopPath::circle(Vec3::new(0.3 * radius, -0.2 * radius, 0.0), Vec3::new(0.2, 0.1, 1.0), 2.5 * radius, 64)?,
        LoopPath::polygon(Vec3::new(0.0, 0.4 * radius, 0.0), Vec3::new(-0.3, 0.0, 1.0), 3.0 * radius, 12)?,
    ];
    let outside = [
        LoopPath::circle(Vec3::new(4.0 * radius, 0.0, 0.0), Vec3::Z, radius, 64)?,
        LoopPath::circle(Vec3::new(0.0, 3.0 * radius, 0.0), Vec3::new(0.0, 1.0, 0.0), 1.5 * radius, 64)?,
        LoopPath::polygon(Vec3::new(-5.0 * radius, 0.0, 1e-3), Vec3::new(0.2, 0.3, 1.0), 2.0 * radius, 10)?,
    ];
    let mut worst_in = 0.0f64;
    for path in &enclosing {
        worst_in = worst_in.max((line_integral(a, path, tol)? - flux).abs() / flux.abs());
    }
    let mut worst_out = 0.0f64;
    for path in &outside {
        worst_out = worst_out.max(line_integral(a, path, tol)?.abs() / flux.abs());
    }
    Ok((
        worst_in < 1e-3 && worst_out < 1e-6,
        format!("enclosing max rel error {worst_in:.3e}, non-enclosing max |flux|/Φ {worst_out:.3e}"),
    ))
}

fn check_screened_loop(_: &SuiteOptions) -> Result<(bool, String)> {
    let shield = ShieldSpec::niobium();
    let s = SolenoidSpec::infinite_z(0.3e-6, 1e5, 0.1)?;
    let start = Vec3::new(1.5e-6, -0.4e-6, 0.2e-6);
    let slow = ChargeState::new(-ELEMENTARY_CHARGE, start, Vec3::new(0.0, 1e5, 0.0))?;
    let fast = ChargeState::new_relativistic(-ELEMENTARY_CHARGE, start, Vec3::new(0.0, 2e8, 0.0))?;
    let loop_radius = 0.5e-6;
    let normals = [Vec3::Z, Vec3::new(0.3, -0.2, 1.0), Vec3::new(1.0, 0.0, 0.4)];

    // screened: the loop's spanning disc lies where the charge's field is gone
    let gated = ScreenedCharge::new(&slow, &s, &shield, 4.0)?;
    let mut screened_flux = 0.0f64;
    for n in normals {
        let radius = loop_radius * n.normalized().unwrap().z.abs().max(0.5);
        let f = flux_through_disc(|p| gated.b_field(p), Vec3::ZERO, n, radius.min(loop_radius), 1e-6)?;
        screened_flux = screened_flux.max(f.abs());
    }

    // the same loop with the bare field: Stokes ties ∮A₁·dl to the flux
    let bare_loop = LoopPath::circle(Vec3::ZERO, Vec3::Z, loop_radius, 64)?;
    let bare_flux = flux_through_disc(|p| b_moving_charge(&slow, p), Vec3::ZERO, Vec3::Z, loop_radius, 1e-9)?;
    let bare_line = line_integral(|p| a_moving_charge(&slow, p), &bare_loop, 1e-12 * bare_flux.abs())?;
    let stokes = (bare_line - bare_flux).abs() / bare_flux.abs();

    // a fast charge's pulse is above the gap: nothing is screened
    let ungated = ScreenedCharge::new(&fast, &s, &shield, 4.0)?;
    let fast_flux = flux_through_disc(|p| ungated.b_field(p), Vec3::ZERO, Vec3::Z, loop_radius, 1e-9)?;
    let fast_bare = flux_through_disc(|p| b_moving_charge(&fast, p), Vec3::ZERO, Vec3::Z, loop_radius, 1e-9)?;

    let passed = gated.is_screened() && screened_flux <= 1e-9 && stokes < 1e-6 && !ungated.is_screened() && fast_flux == fast_bare;
    Ok((
        passed,
        format!(
            "screened |flux| {screened_flux:.3e} T·m², bare loop flux {bare_flux:.3e} (Stokes rel {stokes:.1e}), fast charge unscreened"
        ),
    ))
}

fn check_parity(_: &SuiteOptions) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for n in 0..=10 {
        let k = (2 * n + 1) as f64;
        let phase = ab_phase(k * FLUX_QUANTUM);
        worst = worst.max((phase - k * PI).abs() / (k * PI));
    }
    let q = FLUX_QUANTUM;
    let table = [
        (parity_distinguishable(q, 2.0 * q, false), true),
        (parity_distinguishable(q, 3.0 * q, false), false),
        (parity_distinguishable(2.0 * q, 4.0 * q, false), false),
        (parity_distinguishable(q, 2.0 * q, true), false),
        (parity_distinguishable(3.0 * q, 8.0 * q, true), false),
        (parity_distinguishable(0.0, AB_FLUX_PERIOD, false), false),
    ];
    let table_ok = table.iter().all(|(got, want)| got == want);
    Ok((
        worst <= 2.0 * f64::EPSILON && table_ok,
        format!("max rel phase error {worst:.1e}, truncation table {}", if table_ok { "matches" } else { "differs" }),
    ))
}

fn check_pulse_gate(_: &SuiteOptions) -> Result<(bool, String)> {
    let nb = ShieldSpec::niobium();
    let fast = pulse_spectrum(2e8, PULSE_IMPACT, 1024)?;
    let slow = pulse_spectrum(1e5, PULSE_IMPACT, 1024)?;
    let in_band = fast.centroid_frequency > 5e13 / 3.0 && fast.centroid_frequency < 3.0 * 5e13;
    let passed = in_band
        && fast.photon_energy_ev > nb.energy_gap_ev()
        && !shields_ac(&nb, 4.0, fast.photon_energy_ev)
        && shields_ac(&nb, 4.0, slow.photon_energy_ev);
    Ok((
        passed,
        format!(
            "fast: {:.3e} Hz, {:.3e} eV; slow: {:.3e} Hz, {:.3e} eV; gap {:.1e} eV",
            fast.centroid_frequency,
            fast.photon_energy_ev,
            slow.centroid_frequency,
            slow.photon_energy_ev,
            nb.energy_gap_ev()
        ),
    ))
}

fn check_flux_locked_loop(_: &SuiteOptions) -> Result<(bool, String)> {
    let spec = SquidSpec::default();
    let nb = ShieldSpec::niobium();
    let proto = Protocol::new(10, 10.0, 4.0)?;
    let vp = run_experiment(&spec, &nb, &proto, Hypothesis::VectorPotential)?;
    let ie = run_experiment(&spec, &nb, &proto, Hypothesis::InteractionEnergy)?;
    let (n_vp, n_ie) = (vp.final_total_flux_quanta(), ie.final_total_flux_quanta());
    let lock = vp.tail_lock_error(0.1).max(ie.tail_lock_error(0.1)) / FLUX_QUANTUM;
    Ok((
        (n_vp - 10.0).abs() <= 1e-3 && (n_ie - 20.0).abs() <= 1e-3 && lock < 1e-3,
        format!("total flux quanta vp {n_vp:.6}, ie {n_ie:.6}; tail lock error {lock:.2e} Φ₀"),
    ))
}

fn check_critical_current(opts: &SuiteOptions) -> Result<(bool, String)> {
    let spec = SquidSpec::default();
    let i0 = spec.i0();
    let mut exact = critical_current(&spec, 0.0) == i0 && critical_current(&spec, FLUX_QUANTUM / 2.0) < 1e-15 * i0;
    for n in -10..=10 {
        exact &= (critical_current(&spec, n as f64 * FLUX_QUANTUM) - i0).abs() <= 2.0 * f64::EPSILON * i0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x8);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let phi = rng.gen_range(-50.0..50.0) * FLUX_QUANTUM;
        let d = (critical_current(&spec, phi + FLUX_QUANTUM) - critical_current(&spec, phi)).abs() / i0;
        worst = worst.max(d);
    }
    Ok((
        exact && worst < 1e-12,
        format!("special values {}, periodicity max rel deviation {worst:.2e}", if exact { "exact" } else { "off" }),
    ))
}

fn check_commutators(_: &SuiteOptions) -> Result<(bool, String)> {
    let (l, c) = (1e-9, 1e-12);
    let mut passed = true;
    let mut block = 0.0f64;
    let mut corner = 0.0f64;
    let mut voltage = 0.0f64;
    for n in [4, 8, 16, 32] {
        let ops = build_lc_operators(l, c, n)?;
        let r = verify_commutators(&ops.q, &ops.phi, &ops.u, c)?;
        let corner_err = (r.corner - Complex64::new(r.expected_corner, 0.0)).norm();
        passed &= r.max_block_deviation < 1e-10
            && r.max_border_deviation < 1e-10
            && corner_err < 1e-10
            && r.max_voltage_deviation <= 16.0 * n as f64 * f64::EPSILON;
        block = block.max(r.max_block_deviation.max(r.max_border_deviation));
        corner = corner.max(corner_err);
        voltage = voltage.max(r.max_voltage_deviation);
    }
    Ok((
        passed,
        format!("N in 4..32: block dev {block:.1e}, corner err {corner:.1e}, C[U,Φ]-[q,Φ] {voltage:.1e} ħ (ħ={HBAR:.3e})"),
    ))
}
