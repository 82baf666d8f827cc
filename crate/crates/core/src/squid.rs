//! dc-SQUID response and a discrete-time run of the two-solenoid
//! flux-locked-loop experiment under two competing coupling hypotheses.
//!
//! Solenoid b holds n flux quanta and sits inside a superconducting
//! cylinder. Solenoid a is the feedback coil. While the cylinder cools from
//! one end to the other, a PI controller drives solenoid a to keep the flux
//! the SQUID observes at its initial value.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::constants::FLUX_QUANTUM;
use crate::error::{Error, Result};
use crate::shield::ShieldSpec;

/// Consecutive steps of growing lock error, with no change in the plant,
/// that count as divergence.
pub const DIVERGENCE_WINDOW: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquidSpec {
    i0: f64,
    flux_quantum: f64,
    mutual_inductance_a: f64,
    lock_setpoint: f64,
}

impl SquidSpec {
    pub fn new(i0: f64, mutual_inductance_a: f64) -> Result<Self> {
        if !(i0 > 0.0 && i0.is_finite()) {
            return Err(Error::invalid("i0", "must be positive and finite"));
        }
        if !(mutual_inductance_a > 0.0 && mutual_inductance_a.is_finite()) {
            return Err(Error::invalid("mutual_inductance_a", "must be positive and finite"));
        }
        Ok(SquidSpec {
            i0,
            flux_quantum: FLUX_QUANTUM,
            mutual_inductance_a,
            lock_setpoint: 0.0,
        })
    }

    pub fn i0(&self) -> f64 {
        self.i0
    }
    pub fn flux_quantum(&self) -> f64 {
        self.flux_quantum
    }
    pub fn mutual_inductance_a(&self) -> f64 {
        self.mutual_inductance_a
    }
    /// The flux the loop holds; set when feedback engages.
    pub fn lock_setpoint(&self) -> f64 {
        self.lock_setpoint
    }
    pub fn with_lock_setpoint(mut self, setpoint: f64) -> Self {
        self.lock_setpoint = setpoint;
        self
    }
}

impl Default for SquidSpec {
    /// 10 μA junctions, 1 nH feedback coupling.
    fn default() -> Self {
        SquidSpec::new(10e-6, 1e-9).expect("constants are valid")
    }
}

/// What the SQUID responds to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// The flux (line integral of A) through its loop; the shield changes
    /// nothing.
    VectorPotential,
    /// The interaction energy with the solenoid fields; the shielded part
    /// of solenoid b decouples.
    InteractionEnergy,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::VectorPotential => "vp",
            Hypothesis::InteractionEnergy => "ie",
        })
    }
}

impl FromStr for Hypothesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vp" | "vector-potential" => Ok(Hypothesis::VectorPotential),
            "ie" | "interaction-energy" => Ok(Hypothesis::InteractionEnergy),
            other => Err(Error::invalid("hypothesis", format!("expected vp or ie, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Protocol {
    n_quanta: u32,
    t_start: f64,
    t_end: f64,
    ramp_steps: usize,
    front_steps: usize,
    kp: f64,
    ki: f64,
    require_transition: bool,
}

impl Protocol {
    /// Cooling from `t_start` to `t_end` with Φ_b = n·Φ₀. Defaults: 2000
    /// ramp steps, a 200-step cooling front, gains k_p = 0.5, k_i = 0.1.
    pub fn new(n_quanta: u32, t_start: f64, t_end: f64) -> Result<Self> {
        if n_quanta == 0 {
            return Err(Error::invalid("n_quanta", "must be at least 1"));
        }
        if !(t_start > 0.0 && t_start.is_finite() && t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::invalid("t_start/t_end", "temperatures must be positive and finite"));
        }
        Ok(Protocol {
            n_quanta,
            t_start,
            t_end,
            ramp_steps: 2000,
            front_steps: 200,
            kp: 0.5,
            ki: 0.1,
            require_transition: true,
        })
    }

    pub fn with_ramp_steps(mut self, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::invalid("ramp_steps", "must be positive"));
        }
        self.ramp_steps = steps;
        Ok(self)
    }

    pub fn with_front_steps(mut self, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::invalid("front_steps", "must be positive"));
        }
        self.front_steps = steps;
        Ok(self)
    }

    pub fn with_gains(mut self, kp: f64, ki: f64) -> Result<Self> {
        if !(kp >= 0.0 && kp.is_finite() && ki >= 0.0 && ki.is_finite()) {
            return Err(Error::invalid("gains", "k_p and k_i must be finite and non-negative"));
        }
        self.kp = kp;
        self.ki = ki;
        Ok(self)
    }

    /// Drops the requirement that the ramp cross the shield's T_c, so a
    /// run in which nothing is ever shielded can be set up.
    pub fn relaxed(mut self) -> Self {
        self.require_transition = false;
        self
    }

    pub fn n_quanta(&self) -> u32 {
        self.n_quanta
    }
    pub fn t_start(&self) -> f64 {
        self.t_start
    }
    pub fn t_end(&self) -> f64 {
        self.t_end
    }
    pub fn ramp_steps(&self) -> usize {
        self.ramp_steps
    }
    pub fn front_steps(&self) -> usize {
        self.front_steps
    }
    pub fn gains(&self) -> (f64, f64) {
        (self.kp, self.ki)
    }

    fn temperature(&self, step: usize) -> f64 {
        self.t_start + (self.t_end - self.t_start) * step as f64 / self.ramp_steps as f64
    }

    fn validate(&self, shield: &ShieldSpec) -> Result<()> {
        if !self.require_transition {
            return Ok(());
        }
        let tc = shield.critical_temperature();
        if !(self.t_start > tc && tc > self.t_end) {
            return Err(Error::invalid(
                "t_start/t_end",
                format!("need t_start > T_c = {tc} K > t_end, got {} and {}", self.t_start, self.t_end),
            ));
        }
        let first_cold = (1..=self.ramp_steps).find(|&k| self.temperature(k) < tc).unwrap_or(self.ramp_steps);
        let settle = self.ramp_steps.div_ceil(10);
        if first_cold + self.front_steps + settle > self.ramp_steps {
            return Err(Error::invalid(
                "front_steps",
                "the cooling front must finish with at least a tenth of the ramp left",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub temperature: f64,
    pub shielded_fraction: f64,
    pub current_a: f64,
    pub phi_a: f64,
    pub phi_b: f64,
    pub phi_obs: f64,
    pub critical_current: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentTrace {
    pub hypothesis: Hypothesis,
    pub n_quanta: u32,
    /// Observed flux captured when feedback engaged.
    pub lock_setpoint: f64,
    pub rows: Vec<TraceRow>,
}

impl ExperimentTrace {
    fn last(&self) -> &TraceRow {
        self.rows.last().expect("a trace has at least the initial row")
    }

    /// (Φ_a + Φ_b)/Φ₀ at the last step.
    pub fn final_total_flux_quanta(&self) -> f64 {
        let r = self.last();
        (r.phi_a + r.phi_b) / FLUX_QUANTUM
    }

    pub fn final_phi_a(&self) -> f64 {
        self.last().phi_a
    }

    /// Largest |Φ_obs − setpoint| over the trailing `fraction` of steps.
    pub fn tail_lock_error(&self, fraction: f64) -> f64 {
        let tail = ((self.rows.len() as f64 * fraction).ceil() as usize).clamp(1, self.rows.len());
        self.rows[self.rows.len() - tail..]
            .iter()
            .map(|r| (r.phi_obs - self.lock_setpoint).abs())
            .fold(0.0, f64::max)
    }
}

/// I_c = I₀·|cos(πΦ/Φ₀)|.
pub fn critical_current(spec: &SquidSpec, flux: f64) -> f64 {
    spec.i0 * (PI * (flux / spec.flux_quantum)).cos().abs()
}

/// Flux the SQUID responds to when a fraction `f` of solenoid b is
/// shielded.
pub fn observable_flux(h: Hypothesis, phi_a: f64, phi_b: f64, f: f64) -> f64 {
    match h {
        Hypothesis::VectorPotential => phi_a + phi_b,
        Hypothesis::InteractionEnergy => phi_a + (1.0 - f) * phi_b,
    }
}

/// Runs both steps of the experiment: Φ_b is set to n·Φ₀ with feedback
/// off, then feedback locks the observed flux while the temperature ramps
/// down and the cooling front sweeps the cylinder.
pub fn run_experiment(spec: &SquidSpec, shield: &ShieldSpec, proto: &Protocol, h: Hypothesis) -> Result<ExperimentTrace> {
    proto.validate(shield)?;
    let phi_b = proto.n_quanta as f64 * FLUX_QUANTUM;
    let tc = shield.critical_temperature();
    let (kp, ki) = (proto.kp, proto.ki);

    let mut phi_a = 0.0;
    let mut front_done = 0usize;
    let mut f = 0.0;
    let setpoint = observable_flux(h, phi_a, phi_b, f);
    let row = |step, temperature, f, phi_a: f64| {
        let phi_obs = observable_flux(h, phi_a, phi_b, f);
        TraceRow {
            step,
            temperature,
            shielded_fraction: f,
            current_a: phi_a / spec.mutual_inductance_a,
            phi_a,
            phi_b,
            phi_obs,
            critical_current: critical_current(spec, phi_obs),
        }
    };
    let mut trace = ExperimentTrace {
        hypothesis: h,
        n_quanta: proto.n_quanta,
        lock_setpoint: setpoint,
        rows: Vec::with_capacity(proto.ramp_steps + 1),
    };
    trace.rows.push(row(0, proto.t_start, f, phi_a));

    let mut prev_error = 0.0;
    let mut growing = 0usize;
    for step in 1..=proto.ramp_steps {
        let temperature = proto.temperature(step);
        let f_before = f;
        if temperature < tc && front_done < proto.front_steps {
            front_done += 1;
            f = front_done as f64 / proto.front_steps as f64;
        }
        let error = setpoint - observable_flux(h, phi_a, phi_b, f);
        phi_a += kp * (error - prev_error) + ki * error;

        if f == f_before && error.abs() > prev_error.abs() {
            growing += 1;
        } else {
            growing = 0;
        }
        prev_error = error;
        trace.rows.push(row(step, temperature, f, phi_a));
        if growing >= DIVERGENCE_WINDOW || !phi_a.is_finite() {
            return Err(Error::Instability {
                step,
                trace: Box::new(trace),
            });
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn default_protocol(n: u32) -> Protocol {
        Protocol::new(n, 10.0, 4.0).unwrap()
    }

    #[test]
    fn critical_current_examples() {
        let s = SquidSpec::default();
        assert_eq!(critical_current(&s, 0.0), s.i0());
        assert!(critical_current(&s, FLUX_QUANTUM / 2.0) < 1e-16 * s.i0());
        for n in -5..=5 {
            let ic = critical_current(&s, n as f64 * FLUX_QUANTUM);
            assert!((ic - s.i0()).abs() <= 1e-15 * s.i0());
        }
    }

    #[test]
    fn critical_current_periodic() {
        let s = SquidSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let phi = rng.gen_range(-20.0..20.0) * FLUX_QUANTUM;
            let a = critical_current(&s, phi);
            let b = critical_current(&s, phi + FLUX_QUANTUM);
            assert!((a - b).abs() <= 64.0 * f64::EPSILON * s.i0(), "{phi}");
        }
    }

    #[test]
    fn observable_flux_endpoints() {
        let (a, b) = (0.3, 2.0);
        assert_eq!(
            observable_flux(Hypothesis::VectorPotential, a, b, 0.0),
            observable_flux(Hypothesis::InteractionEnergy, a, b, 0.0)
        );
        assert_eq!(observable_flux(Hypothesis::InteractionEnergy, 0.0, b, 1.0), 0.0);
        assert_eq!(observable_flux(Hypothesis::VectorPotential, a, b, 1.0), a + b);
    }

    #[test]
    fn hypotheses_diverge_by_n_quanta() {
        let spec = SquidSpec::default();
        let nb = ShieldSpec::niobium();
        let proto = default_protocol(10);
        let vp = run_experiment(&spec, &nb, &proto, Hypothesis::VectorPotential).unwrap();
        let ie = run_experiment(&spec, &nb, &proto, Hypothesis::InteractionEnergy).unwrap();
        assert!((vp.final_total_flux_quanta() - 10.0).abs() < 1e-3);
        assert!((ie.final_total_flux_quanta() - 20.0).abs() < 1e-3);
        assert!(vp.rows.iter().all(|r| r.current_a == 0.0));
        let gap = (ie.final_phi_a() - vp.final_phi_a()) / FLUX_QUANTUM;
        assert!((gap - 10.0).abs() < 1e-3);
        assert!(ie.tail_lock_error(0.1) < 1e-3 * FLUX_QUANTUM);
        assert!(vp.tail_lock_error(0.1) < 1e-3 * FLUX_QUANTUM);
    }

    #[test]
    fn trace_shape() {
        let proto = default_protocol(3);
        let t = run_experiment(&SquidSpec::default(), &ShieldSpec::niobium(), &proto, Hypothesis::InteractionEnergy).unwrap();
        assert_eq!(t.rows.len(), proto.ramp_steps() + 1);
        assert!(t.rows.windows(2).all(|w| w[1].shielded_fraction >= w[0].shielded_fraction));
        assert_eq!(t.rows.last().unwrap().shielded_fraction, 1.0);
        let phi_b = 3.0 * FLUX_QUANTUM;
        assert!(t.rows.iter().all(|r| r.phi_b == phi_b));
        // Φ_a climbs to n·Φ₀ with bounded overshoot and ripple
        let peak = t.rows.iter().map(|r| r.phi_a).fold(f64::MIN, f64::max);
        assert!(peak <= phi_b * 1.05);
        let mut running_max = f64::MIN;
        for r in &t.rows {
            assert!(r.phi_a >= running_max - 0.05 * phi_b);
            running_max = running_max.max(r.phi_a);
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let proto = default_protocol(4);
        let a = run_experiment(&SquidSpec::default(), &ShieldSpec::niobium(), &proto, Hypothesis::InteractionEnergy).unwrap();
        let b = run_experiment(&SquidSpec::default(), &ShieldSpec::niobium(), &proto, Hypothesis::InteractionEnergy).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn no_transition_means_no_difference() {
        let proto = Protocol::new(5, 20.0, 12.0).unwrap().relaxed();
        let nb = ShieldSpec::niobium();
        let spec = SquidSpec::default();
        let vp = run_experiment(&spec, &nb, &proto, Hypothesis::VectorPotential).unwrap();
        let ie = run_experiment(&spec, &nb, &proto, Hypothesis::InteractionEnergy).unwrap();
        assert_eq!(vp.rows, ie.rows);
        assert!(Protocol::new(5, 20.0, 12.0).unwrap().validate(&nb).is_err());
    }

    #[test]
    fn protocol_validation() {
        let nb = ShieldSpec::niobium();
        assert!(Protocol::new(0, 10.0, 4.0).is_err());
        assert!(default_protocol(1).with_gains(-0.1, 0.1).is_err());
        assert!(default_protocol(1).with_ramp_steps(0).is_err());
        let cramped = default_protocol(1).with_front_steps(1900).unwrap();
        assert!(run_experiment(&SquidSpec::default(), &nb, &cramped, Hypothesis::VectorPotential).is_err());
        assert!(SquidSpec::new(0.0, 1e-9).is_err());
        assert!(SquidSpec::new(1e-6, -1e-9).is_err());
    }

    #[test]
    fn unstable_gains_are_reported() {
        let proto = default_protocol(10).with_gains(0.0, 2.5).unwrap();
        match run_experiment(&SquidSpec::default(), &ShieldSpec::niobium(), &proto, Hypothesis::InteractionEnergy) {
            Err(Error::Instability { step, trace }) => {
                assert_eq!(trace.rows.len(), step + 1);
                assert!(step < proto.ramp_steps());
            }
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn hypothesis_parsing() {
        assert_eq!("vp".parse::<Hypothesis>().unwrap(), Hypothesis::VectorPotential);
        assert_eq!("ie".parse::<Hypothesis>().unwrap(), Hypothesis::InteractionEnergy);
        assert!("x".parse::<Hypothesis>().is_err());
        assert_eq!(Hypothesis::InteractionEnergy.to_string(), "ie");
    }
}
