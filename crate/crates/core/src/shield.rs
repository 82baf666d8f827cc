//! Binary Meissner shielding: a thick superconducting wall below T_c screens
//! static fields, but a field pulse whose characteristic photon energy
//! exceeds the gap gets through.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::constants::{ELEMENTARY_CHARGE, MU_0, PLANCK};
use crate::error::{Error, Result};
use crate::fields::{b_moving_charge, ChargeState, SolenoidSpec};
use crate::interaction::interaction_energy_integral;
use crate::vec3::Vec3;

/// Wall thickness, in penetration depths, needed to count as shielding.
pub const THICK_WALL_RATIO: f64 = 5.0;

/// Samples used when a shield gate derives the photon energy of a pulse.
pub const GATE_SAMPLES: usize = 1024;

/// The pulse is sampled over ±this many impact-parameter transit times.
pub const WINDOW_TRANSITS: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShieldSpec {
    critical_temperature: f64,
    energy_gap_ev: f64,
    penetration_depth: f64,
    thickness: f64,
    radius: f64,
    gap_multiplier: f64,
}

impl ShieldSpec {
    pub fn new(
        critical_temperature: f64,
        energy_gap_ev: f64,
        penetration_depth: f64,
        thickness: f64,
        radius: f64,
    ) -> Result<Self> {
        let checks = [
            ("critical_temperature", critical_temperature),
            ("energy_gap", energy_gap_ev),
            ("penetration_depth", penetration_depth),
            ("thickness", thickness),
            ("radius", radius),
        ];
        for (name, value) in checks {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive and finite, got {value}")));
            }
        }
        Ok(ShieldSpec {
            critical_temperature,
            energy_gap_ev,
            penetration_depth,
            thickness,
            radius,
            gap_multiplier: 1.0,
        })
    }

    /// A niobium film: T_c 9.2 K, gap 3 meV, λ 39 nm, 1 μm thick, 0.6 μm
    /// radius.
    pub fn niobium() -> Self {
        ShieldSpec::new(9.2, 3e-3, 39e-9, 1e-6, 0.6e-6).expect("constants are valid")
    }

    /// Scales the gap before comparing with a photon energy (2 for the
    /// pair-breaking 2Δ convention).
    pub fn with_gap_multiplier(mut self, multiplier: f64) -> Result<Self> {
        if !(multiplier > 0.0 && multiplier.is_finite()) {
            return Err(Error::invalid("gap_multiplier", "must be positive and finite"));
        }
        self.gap_multiplier = multiplier;
        Ok(self)
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("radius", "must be positive and finite"));
        }
        self.radius = radius;
        Ok(self)
    }

    pub fn critical_temperature(&self) -> f64 {
        self.critical_temperature
    }
    pub fn energy_gap_ev(&self) -> f64 {
        self.energy_gap_ev
    }
    pub fn penetration_depth(&self) -> f64 {
        self.penetration_depth
    }
    pub fn thickness(&self) -> f64 {
        self.thickness
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn gap_multiplier(&self) -> f64 {
        self.gap_multiplier
    }

    pub fn is_thick(&self) -> bool {
        self.thickness >= THICK_WALL_RATIO * self.penetration_depth
    }

    /// Photon energy (eV) above which fields leak through.
    pub fn threshold_ev(&self) -> f64 {
        self.energy_gap_ev * self.gap_multiplier
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpectrum {
    /// One-sided, 0 to Nyquist.
    pub frequencies: Vec<f64>,
    /// |DFT|·Δt of the transverse field (T/Hz).
    pub amplitudes: Vec<f64>,
    pub centroid_frequency: f64,
    pub photon_energy_ev: f64,
}

/// Spectrum of the transverse field pulse an electron passing at speed
/// `speed` leaves at a point `impact` away from its straight path.
pub fn pulse_spectrum(speed: f64, impact: f64, samples: usize) -> Result<PulseSpectrum> {
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(Error::invalid("speed", "must be positive and finite"));
    }
    if !(impact > 0.0 && impact.is_finite()) {
        return Err(Error::invalid("impact_parameter", "must be positive and finite"));
    }
    if samples < 64 || !samples.is_power_of_two() {
        return Err(Error::invalid("samples", format!("must be a power of two >= 64, got {samples}")));
    }
    let half_window = WINDOW_TRANSITS * impact / speed;
    let dt = 2.0 * half_window / samples as f64;
    let scale = MU_0 / (4.0 * std::f64::consts::PI) * ELEMENTARY_CHARGE * speed * impact;
    let mut buffer: Vec<Complex64> = (0..samples)
        .map(|k| {
            let t = -half_window + k as f64 * dt;
            let r2 = impact * impact + speed * speed * t * t;
            Complex64::new(scale / (r2 * r2.sqrt()), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(samples).process(&mut buffer);

    let df = 1.0 / (samples as f64 * dt);
    let bins = samples / 2 + 1;
    let frequencies: Vec<f64> = (0..bins).map(|k| k as f64 * df).collect();
    let amplitudes: Vec<f64> = buffer[..bins].iter().map(|z| z.norm() * dt).collect();
    // trapezoid weights: the bins sample a continuous density, and a plain
    // sum would give the large DC bin a full cell
    let trapezoid = |k: usize| if k == 0 || k == bins - 1 { 0.5 } else { 1.0 };
    let weight: f64 = amplitudes.iter().enumerate().map(|(k, a)| trapezoid(k) * a).sum();
    let moment: f64 = frequencies
        .iter()
        .zip(&amplitudes)
        .enumerate()
        .map(|(k, (f, a))| trapezoid(k) * f * a)
        .sum();
    let centroid_frequency = moment / weight;
    Ok(PulseSpectrum {
        photon_energy_ev: PLANCK * centroid_frequency / ELEMENTARY_CHARGE,
        frequencies,
        amplitudes,
        centroid_frequency,
    })
}

/// Centroid of the continuous-time spectrum, 2v/(π²b): the amplitude
/// density goes as uK₁(u) with u = 2πfb/v, and ∫u²K₁/∫uK₁ = 4/π.
pub fn analytic_centroid(speed: f64, impact: f64) -> f64 {
    2.0 * speed / (TAU * TAU / 4.0 * impact)
}

pub fn shields_dc(spec: &ShieldSpec, temperature: f64) -> bool {
    temperature < spec.critical_temperature && spec.is_thick()
}

pub fn shields_ac(spec: &ShieldSpec, temperature: f64, photon_energy_ev: f64) -> bool {
    shields_dc(spec, temperature) && photon_energy_ev < spec.threshold_ev()
}

/// Photon energy (eV) of the pulse the charge produces at the shield wall.
pub fn pulse_photon_energy(c: &ChargeState, shield: &ShieldSpec) -> Result<f64> {
    let speed = c.velocity().norm();
    if speed == 0.0 {
        return Ok(0.0);
    }
    Ok(pulse_spectrum(speed, shield.radius(), GATE_SAMPLES)?.photon_energy_ev)
}

/// A moving charge's magnetic field as seen through a cylindrical shield
/// coaxial with a solenoid: zero inside the cylinder while the shield
/// screens the charge's pulse, the bare field everywhere otherwise.
#[derive(Debug, Clone, Copy)]
pub struct ScreenedCharge {
    charge: ChargeState,
    solenoid: SolenoidSpec,
    radius: f64,
    screened: bool,
}

impl ScreenedCharge {
    pub fn new(c: &ChargeState, s: &SolenoidSpec, shield: &ShieldSpec, temperature: f64) -> Result<Self> {
        if !(temperature > 0.0) {
            return Err(Error::invalid("temperature", "must be positive"));
        }
        let screened = shields_ac(shield, temperature, pulse_photon_energy(c, shield)?);
        Ok(ScreenedCharge {
            charge: *c,
            solenoid: *s,
            radius: shield.radius(),
            screened,
        })
    }

    pub fn is_screened(&self) -> bool {
        self.screened
    }

    pub fn b_field(&self, p: Vec3) -> Result<Vec3> {
        if self.screened && self.solenoid.to_cylindrical(p).rho < self.radius {
            return Ok(Vec3::ZERO);
        }
        b_moving_charge(&self.charge, p)
    }
}

/// W′ with the shield in place: exactly zero when the shield screens the
/// charge's pulse, otherwise the unshielded overlap integral.
pub fn effective_interaction_energy(
    c: &ChargeState,
    s: &SolenoidSpec,
    shield: &ShieldSpec,
    temperature: f64,
    tol: f64,
) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::invalid("temperature", "must be positive"));
    }
    if s.radius() > shield.radius() {
        return Err(Error::Domain("shield does not enclose the solenoid".into()));
    }
    if s.to_cylindrical(c.position()).rho <= shield.radius() {
        return Err(Error::Domain("charge is inside the shield".into()));
    }
    if shields_ac(shield, temperature, pulse_photon_energy(c, shield)?) {
        return Ok(0.0);
    }
    interaction_energy_integral(c, s, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    const IMPACT: f64 = 0.6e-6;

    #[test]
    fn centroid_matches_continuous_spectrum() {
        for &(v, b) in &[(2e8, IMPACT), (1e5, IMPACT), (3e6, 2e-6)] {
            let s = pulse_spectrum(v, b, 4096).unwrap();
            let exact = analytic_centroid(v, b);
            assert!((s.centroid_frequency / exact - 1.0).abs() < 0.02, "{} vs {}", s.centroid_frequency, exact);
        }
    }

    #[test]
    fn centroid_scaling_laws() {
        let base = pulse_spectrum(1e6, 1e-6, 1024).unwrap().centroid_frequency;
        for alpha in [2.0, 4.0] {
            let faster = pulse_spectrum(alpha * 1e6, 1e-6, 1024).unwrap().centroid_frequency;
            assert!((faster / (alpha * base) - 1.0).abs() < 0.01);
            let wider = pulse_spectrum(1e6, alpha * 1e-6, 1024).unwrap().centroid_frequency;
            assert!((wider * alpha / base - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn spectrum_invariants() {
        let s = pulse_spectrum(2e8, IMPACT, 256).unwrap();
        assert_eq!(s.frequencies.len(), 129);
        assert!(s.amplitudes.iter().all(|&a| a >= 0.0));
        assert!(s.centroid_frequency >= s.frequencies[0]);
        assert!(s.centroid_frequency <= *s.frequencies.last().unwrap());
        // zero-frequency amplitude is ∫B dt = μ₀e/(2πb)
        let dc = MU_0 * ELEMENTARY_CHARGE / (TAU * IMPACT);
        assert!((s.amplitudes[0] / dc - 1.0).abs() < 1e-2);
    }

    #[test]
    fn pulse_rejects_bad_input() {
        assert!(pulse_spectrum(0.0, 1e-6, 64).is_err());
        assert!(pulse_spectrum(1e5, -1.0, 64).is_err());
        assert!(pulse_spectrum(1e5, 1e-6, 32).is_err());
        assert!(pulse_spectrum(1e5, 1e-6, 100).is_err());
    }

    #[test]
    fn fast_and_slow_electrons() {
        let nb = ShieldSpec::niobium();
        let fast = pulse_spectrum(2e8, IMPACT, 1024).unwrap();
        assert!(fast.centroid_frequency > 5e13 / 3.0 && fast.centroid_frequency < 5e13 * 3.0);
        assert!(fast.photon_energy_ev > 3e-3);
        assert!(!shields_ac(&nb, 4.0, fast.photon_energy_ev));
        let slow = pulse_spectrum(1e5, IMPACT, 1024).unwrap();
        assert!(slow.photon_energy_ev < fast.photon_energy_ev / 1000.0);
        assert!(shields_ac(&nb, 4.0, slow.photon_energy_ev));
        assert!(!shields_ac(&nb, 4.0, 2e-2));
    }

    #[test]
    fn dc_rules() {
        let s = ShieldSpec::new(9.2, 3e-3, 50e-9, 500e-9, 1e-6).unwrap();
        assert!(!shields_dc(&s, 9.3));
        assert!(shields_dc(&s, 4.6));
        let thin = ShieldSpec::new(9.2, 3e-3, 50e-9, 100e-9, 1e-6).unwrap();
        assert!(!shields_dc(&thin, 4.6));
        for t in [1.0, 9.0, 9.2, 12.0] {
            assert_eq!(shields_ac(&s, t, 0.0), shields_dc(&s, t));
        }
    }

    #[test]
    fn ac_gate_is_monotone_in_photon_energy() {
        let nb = ShieldSpec::niobium();
        let mut last = true;
        for k in 0..200 {
            let e = 1e-6 * 1.1f64.powi(k);
            let now = shields_ac(&nb, 4.0, e);
            assert!(last || !now);
            last = now;
        }
        let doubled = nb.with_gap_multiplier(2.0).unwrap();
        assert!(shields_ac(&doubled, 4.0, 4e-3));
        assert!(!shields_ac(&nb, 4.0, 4e-3));
    }

    #[test]
    fn gated_energy_is_zero_or_ungated() {
        let nb = ShieldSpec::niobium();
        let s = SolenoidSpec::infinite_z(0.3e-6, 1e5, 0.1).unwrap();
        let pos = Vec3::new(1.2e-6, 0.0, 0.0);
        let slow = ChargeState::new(-ELEMENTARY_CHARGE, pos, Vec3::new(0.0, 1e5, 0.0)).unwrap();
        assert_eq!(effective_interaction_energy(&slow, &s, &nb, 4.0, 1e-4).unwrap(), 0.0);
        let open = interaction_energy_integral(&slow, &s, 1e-4).unwrap();
        assert!(open != 0.0);
        assert_eq!(effective_interaction_energy(&slow, &s, &nb, 9.3, 1e-4).unwrap(), open);

        let fast = ChargeState::new_relativistic(-ELEMENTARY_CHARGE, pos, Vec3::new(0.0, 2e8, 0.0)).unwrap();
        let open_fast = interaction_energy_integral(&fast, &s, 1e-4).unwrap();
        assert_eq!(effective_interaction_energy(&fast, &s, &nb, 4.0, 1e-4).unwrap(), open_fast);
    }

    #[test]
    fn screened_field_vanishes_inside_only_when_gated() {
        let nb = ShieldSpec::niobium();
        let s = SolenoidSpec::infinite_z(0.3e-6, 1e5, 0.1).unwrap();
        let pos = Vec3::new(1.2e-6, 0.0, 0.0);
        let slow = ChargeState::new(-ELEMENTARY_CHARGE, pos, Vec3::new(0.0, 1e5, 0.0)).unwrap();
        let inside = Vec3::new(0.2e-6, 0.1e-6, 0.3e-6);
        let outside = Vec3::new(0.0, 2e-6, 0.0);
        let gated = ScreenedCharge::new(&slow, &s, &nb, 4.0).unwrap();
        assert!(gated.is_screened());
        assert_eq!(gated.b_field(inside).unwrap(), Vec3::ZERO);
        assert_eq!(gated.b_field(outside).unwrap(), b_moving_charge(&slow, outside).unwrap());
        let warm = ScreenedCharge::new(&slow, &s, &nb, 10.0).unwrap();
        assert_eq!(warm.b_field(inside).unwrap(), b_moving_charge(&slow, inside).unwrap());
    }

    #[test]
    fn gate_checks_geometry() {
        let nb = ShieldSpec::niobium();
        let wide = SolenoidSpec::infinite_z(1e-6, 1e5, 0.1).unwrap();
        let c = ChargeState::new(-ELEMENTARY_CHARGE, Vec3::new(2e-6, 0.0, 0.0), Vec3::new(0.0, 1e5, 0.0)).unwrap();
        assert!(effective_interaction_energy(&c, &wide, &nb, 4.0, 1e-4).is_err());
        let s = SolenoidSpec::infinite_z(0.3e-6, 1e5, 0.1).unwrap();
        let inside = c.at(Vec3::new(0.5e-6, 0.0, 0.0));
        assert!(effective_interaction_energy(&inside, &s, &nb, 4.0, 1e-4).is_err());
    }
}
