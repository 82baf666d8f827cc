//! Python module `abflux`: solenoid and point-charge fields, interaction
//! energy, A-B phase, shielding, the flux-locked-loop experiment and the LC
//! commutator check. Vectors cross the boundary as `(x, y, z)` tuples.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ::abflux::fields::{self, ChargeState, SolenoidLength, SolenoidSpec};
use ::abflux::shield::ShieldSpec;
use ::abflux::squid::{Hypothesis, Protocol, SquidSpec};
use ::abflux::{interaction, interference, quantum_lc, shield, squid, verify, Error, Vec3};

type V3 = (f64, f64, f64);

fn err(e: Error) -> PyErr {
    match e {
        Error::Convergence { .. } | Error::Instability { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn vec(v: V3) -> Vec3 {
    Vec3::new(v.0, v.1, v.2)
}

fn tuple(v: Vec3) -> V3 {
    (v.x, v.y, v.z)
}

#[pyclass(name = "Solenoid", frozen)]
struct PySolenoid {
    spec: SolenoidSpec,
}

#[pymethods]
impl PySolenoid {
    /// `length=None` is the infinite idealization.
    #[new]
    #[pyo3(signature = (radius, turns_per_meter, current, length=None, center=(0.0, 0.0, 0.0), axis=(0.0, 0.0, 1.0)))]
    fn new(radius: f64, turns_per_meter: f64, current: f64, length: Option<f64>, center: V3, axis: V3) -> PyResult<Self> {
        let length = length.map_or(SolenoidLength::Infinite, SolenoidLength::Finite);
        let spec = SolenoidSpec::new(vec(center), vec(axis), radius, length, turns_per_meter, current).map_err(err)?;
        Ok(PySolenoid { spec })
    }

    fn b(&self, p: V3) -> V3 {
        tuple(fields::b_solenoid(&self.spec, vec(p)))
    }

    /// Closed-form A for infinite windings, loop-integrated A otherwise.
    fn a(&self, p: V3) -> PyResult<V3> {
        let a = if self.spec.is_infinite() {
            fields::a_solenoid_closed(&self.spec, vec(p))
        } else {
            fields::a_finite_solenoid(&self.spec, vec(p))
        };
        a.map(tuple).map_err(err)
    }

    /// A by Biot-Savart quadrature of the interior field truncated to
    /// `length` and `2·length`: `(value, truncation_gap)`.
    fn a_quadrature(&self, p: V3, length: f64, tol: f64) -> PyResult<(V3, f64)> {
        let study = fields::a_solenoid_quadrature(&self.spec, vec(p), length, tol).map_err(err)?;
        Ok((tuple(study.value), study.gap))
    }

    fn flux(&self) -> f64 {
        fields::flux_of_solenoid(&self.spec)
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.spec.radius()
    }
}

#[pyclass(name = "Charge", frozen)]
struct PyCharge {
    state: ChargeState,
}

#[pymethods]
impl PyCharge {
    #[new]
    #[pyo3(signature = (q, position, velocity, relativistic_override=false))]
    fn new(q: f64, position: V3, velocity: V3, relativistic_override: bool) -> PyResult<Self> {
        let state = if relativistic_override {
            ChargeState::new_relativistic(q, vec(position), vec(velocity))
        } else {
            ChargeState::new(q, vec(position), vec(velocity))
        }
        .map_err(err)?;
        Ok(PyCharge { state })
    }

    fn b(&self, p: V3) -> PyResult<V3> {
        fields::b_moving_charge(&self.state, vec(p)).map(tuple).map_err(err)
    }

    fn a(&self, p: V3) -> PyResult<V3> {
        fields::a_moving_charge(&self.state, vec(p)).map(tuple).map_err(err)
    }
}

#[pyclass(name = "Shield", frozen)]
struct PyShield {
    spec: ShieldSpec,
}

#[pymethods]
impl PyShield {
    #[new]
    #[pyo3(signature = (critical_temperature=9.2, energy_gap=3e-3, penetration_depth=39e-9, thickness=1e-6, radius=0.6e-6, gap_multiplier=1.0))]
    fn new(
        critical_temperature: f64,
        energy_gap: f64,
        penetration_depth: f64,
        thickness: f64,
        radius: f64,
        gap_multiplier: f64,
    ) -> PyResult<Self> {
        let spec = ShieldSpec::new(critical_temperature, energy_gap, penetration_depth, thickness, radius)
            .and_then(|s| s.with_gap_multiplier(gap_multiplier))
            .map_err(err)?;
        Ok(PyShield { spec })
    }

    fn shields_dc(&self, temperature: f64) -> bool {
        shield::shields_dc(&self.spec, temperature)
    }

    fn shields_ac(&self, temperature: f64, photon_energy_ev: f64) -> bool {
        shield::shields_ac(&self.spec, temperature, photon_energy_ev)
    }
}

#[pyfunction]
fn interaction_energy_integral(c: &PyCharge, s: &PySolenoid, tol: f64) -> PyResult<f64> {
    interaction::interaction_energy_integral(&c.state, &s.spec, tol).map_err(err)
}

#[pyfunction]
fn interaction_energy_closed(c: &PyCharge, s: &PySolenoid) -> PyResult<f64> {
    interaction::interaction_energy_closed(&c.state, &s.spec).map_err(err)
}

#[pyfunction]
fn verify_eq2(c: &PyCharge, s: &PySolenoid, tol: f64) -> PyResult<BTreeMap<&'static str, f64>> {
    let r = interaction::verify_eq2(&c.state, &s.spec, tol).map_err(err)?;
    Ok(BTreeMap::from([
        ("w_integral", r.w_integral),
        ("w_closed", r.w_closed),
        ("rel_discrepancy", r.rel_discrepancy),
        ("quadrature_cells", r.quadrature_cells as f64),
        ("tol_used", r.tol_used),
        ("truncation_gap", r.truncation_gap),
    ]))
}

#[pyfunction]
fn effective_interaction_energy(c: &PyCharge, s: &PySolenoid, shield: &PyShield, temperature: f64, tol: f64) -> PyResult<f64> {
    shield::effective_interaction_energy(&c.state, &s.spec, &shield.spec, temperature, tol).map_err(err)
}

#[pyfunction]
fn ab_phase(flux: f64) -> f64 {
    interference::ab_phase(flux)
}

#[pyfunction]
fn parity_distinguishable(flux_a: f64, flux_b: f64, shielded: bool) -> bool {
    interference::parity_distinguishable(flux_a, flux_b, shielded)
}

/// Intensities of the two-beam pattern at the given screen positions.
#[pyfunction]
fn fringe_pattern(delta_phi: f64, gradient: f64, screen: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(interference::fringe_pattern(delta_phi, gradient, &screen).map_err(err)?.intensities)
}

/// `(frequencies, amplitudes, centroid_hz, photon_ev)`.
#[pyfunction]
fn pulse_spectrum(speed: f64, impact: f64, samples: usize) -> PyResult<(Vec<f64>, Vec<f64>, f64, f64)> {
    let s = shield::pulse_spectrum(speed, impact, samples).map_err(err)?;
    Ok((s.frequencies, s.amplitudes, s.centroid_frequency, s.photon_energy_ev))
}

#[pyfunction]
fn critical_current(i0: f64, flux: f64) -> PyResult<f64> {
    let spec = SquidSpec::new(i0, 1e-9).map_err(err)?;
    Ok(squid::critical_current(&spec, flux))
}

/// Runs the flux-locked-loop experiment; returns trace columns keyed by
/// name plus `final_total_flux_quanta`.
#[pyfunction]
#[pyo3(signature = (hypothesis, n_quanta=10, t_start=10.0, t_end=4.0, ramp_steps=2000, front_steps=200, kp=0.5, ki=0.1, shield=None))]
#[allow(clippy::too_many_arguments)]
fn run_experiment(
    hypothesis: &str,
    n_quanta: u32,
    t_start: f64,
    t_end: f64,
    ramp_steps: usize,
    front_steps: usize,
    kp: f64,
    ki: f64,
    shield: Option<PyRef<PyShield>>,
) -> PyResult<BTreeMap<&'static str, Vec<f64>>> {
    let h: Hypothesis = hypothesis.parse().map_err(err)?;
    let proto = Protocol::new(n_quanta, t_start, t_end)
        .and_then(|p| p.with_ramp_steps(ramp_steps))
        .and_then(|p| p.with_front_steps(front_steps))
        .and_then(|p| p.with_gains(kp, ki))
        .map_err(err)?;
    let shield = shield.map_or_else(ShieldSpec::niobium, |s| s.spec);
    let trace = squid::run_experiment(&SquidSpec::default(), &shield, &proto, h).map_err(err)?;
    let column = |f: fn(&squid::TraceRow) -> f64| trace.rows.iter().map(f).collect::<Vec<f64>>();
    Ok(BTreeMap::from([
        ("T_K", column(|r| r.temperature)),
        ("f", column(|r| r.shielded_fraction)),
        ("I_a_A", column(|r| r.current_a)),
        ("phi_a_wb", column(|r| r.phi_a)),
        ("phi_b_wb", column(|r| r.phi_b)),
        ("phi_obs_wb", column(|r| r.phi_obs)),
        ("I_c_A", column(|r| r.critical_current)),
        ("final_total_flux_quanta", vec![trace.final_total_flux_quanta()]),
    ]))
}

/// `(max_block_deviation, corner, expected_corner, max_voltage_deviation)`.
#[pyfunction]
fn lc_commutators(inductance: f64, capacitance: f64, dim: usize) -> PyResult<(f64, f64, f64, f64)> {
    let ops = quantum_lc::build_lc_operators(inductance, capacitance, dim).map_err(err)?;
    let r = quantum_lc::verify_commutators(&ops.q, &ops.phi, &ops.u, capacitance).map_err(err)?;
    Ok((
        r.max_block_deviation.max(r.max_border_deviation),
        r.corner.re,
        r.expected_corner,
        r.max_voltage_deviation,
    ))
}

/// Runs the selected verification checks (all when `ids` is None):
/// a list of `(id, name, passed, detail)`.
#[pyfunction]
#[pyo3(signature = (ids=None))]
fn verify_checks(ids: Option<Vec<u8>>) -> Vec<(u8, &'static str, bool, String)> {
    let opts = verify::SuiteOptions::default();
    let outcomes = match ids {
        Some(ids) => verify::run_selected(&opts, &ids),
        None => verify::run_all(&opts),
    };
    outcomes.into_iter().map(|o| (o.id, o.name, o.passed, o.detail)).collect()
}

#[pymodule]
#[pyo3(name = "abflux")]
fn abflux_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FLUX_QUANTUM", ::abflux::constants::FLUX_QUANTUM)?;
    m.add("AB_FLUX_PERIOD", ::abflux::constants::AB_FLUX_PERIOD)?;
    m.add("ELEMENTARY_CHARGE", ::abflux::constants::ELEMENTARY_CHARGE)?;
    m.add_class::<PySolenoid>()?;
    m.add_class::<PyCharge>()?;
    m.add_class::<PyShield>()?;
    m.add_function(wrap_pyfunction!(interaction_energy_integral, m)?)?;
    m.add_function(wrap_pyfunction!(interaction_energy_closed, m)?)?;
    m.add_function(wrap_pyfunction!(verify_eq2, m)?)?;
    m.add_function(wrap_pyfunction!(effective_interaction_energy, m)?)?;
    m.add_function(wrap_pyfunction!(ab_phase, m)?)?;
    m.add_function(wrap_pyfunction!(parity_distinguishable, m)?)?;
    m.add_function(wrap_pyfunction!(fringe_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(pulse_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(critical_current, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(lc_commutators, m)?)?;
    m.add_function(wrap_pyfunction!(verify_checks, m)?)?;
    Ok(())
}
