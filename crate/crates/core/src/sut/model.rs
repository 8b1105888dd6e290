//! One-machine grid with a converter-interfaced wind plant, for fault
//! ride-through experiments.
//!
//! States are the machine speed deviation Δω and the plant's active current
//! i_d. The coupling-point voltage is algebraic: V = V_base + x·i_q, where
//! V_base drops to V_ret inside the fault window. The reactive reference
//! i_q* = K_aRCI·max(0, V_db − V) and V are solved together, then the
//! current limit is applied with the declared priority. After clearance,
//! i_d restarts from zero and returns to its pre-fault value no faster than
//! R_p.

use serde::{Deserialize, Serialize};

use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SutConfig {
    /// Inertia constant M = 2H, seconds.
    pub inertia: f64,
    /// Damping of the machine and load, per unit.
    pub damping: f64,
    /// Grid reactance seen from the coupling point, per unit.
    pub reactance: f64,
    pub t_on: f64,
    pub t_off: f64,
    /// Retained voltage during the fault, per unit.
    pub v_ret: f64,
    /// Converter rating (converter base), per unit.
    pub rating: f64,
    /// Plant rating as a fraction of the system base.
    pub plant_share: f64,
    /// Pre-fault active current of the plant, converter base.
    pub i_d0: f64,
    /// Load at nominal voltage (constant impedance), system base.
    pub load: f64,
    pub v_deadband: f64,
    pub current_limit: f64,
    /// Time constant with which i_d tracks its reference below the ramp limit.
    pub tracking: f64,
    pub noise_sd: f64,
    pub step: f64,
    pub t_end: f64,
}

impl Default for SutConfig {
    fn default() -> Self {
        SutConfig {
            inertia: 10.0,
            damping: 10.0,
            reactance: 0.3,
            t_on: 0.1,
            t_off: 0.25,
            v_ret: 0.5,
            rating: 1.0,
            plant_share: 0.3,
            i_d0: 0.9,
            load: 1.0,
            v_deadband: 0.9,
            current_limit: 1.0,
            tracking: 0.01,
            noise_sd: 0.0,
            step: 0.001,
            t_end: 15.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SutError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid treatment: {0}")]
    InvalidTreatment(String),
}

impl SutConfig {
    pub fn validate(&self) -> Result<(), SutError> {
        let bad = |m: &str| Err(SutError::InvalidConfig(m.to_string()));
        if !(self.t_on < self.t_off) || self.t_on < 0.0 {
            return bad("need 0 <= t_on < t_off");
        }
        if !(self.v_ret > 0.0 && self.v_ret <= 1.0) {
            return bad("v_ret must lie in (0, 1]");
        }
        if !(self.step > 0.0) || !(self.t_end > self.t_off) {
            return bad("need step > 0 and t_end > t_off");
        }
        let positive = [
            ("inertia", self.inertia),
            ("rating", self.rating),
            ("current_limit", self.current_limit),
            ("tracking", self.tracking),
            ("plant_share", self.plant_share),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
            return bad(&format!("{name} must be > 0"));
        }
        if self.damping < 0.0 || self.reactance < 0.0 || self.load < 0.0 || self.i_d0 < 0.0 {
            return bad("damping, reactance, load and i_d0 must be >= 0");
        }
        if self.i_d0 > self.current_limit {
            return bad("pre-fault current exceeds the current limit");
        }
        if !(self.noise_sd >= 0.0) {
            return bad("noise_sd must be >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Priority {
    /// Active current first, reactive current gets what is left.
    DPriority,
    /// Reactive current first.
    QPriority,
}

impl Priority {
    /// Accepts `d`, `q`, `d_priority` and `q_priority`.
    pub fn parse(s: &str) -> Option<Priority> {
        match s {
            "d" | "d_priority" => Some(Priority::DPriority),
            "q" | "q_priority" => Some(Priority::QPriority),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SutTreatment {
    pub k_arci: f64,
    pub priority: Priority,
    /// Ramp limit on i_d after clearance, per unit per second.
    pub r_p: f64,
}

impl SutTreatment {
    pub fn validate(&self) -> Result<(), SutError> {
        if !(self.k_arci >= 0.0 && self.k_arci.is_finite()) {
            return Err(SutError::InvalidTreatment("K_aRCI must be >= 0".into()));
        }
        if !(self.r_p > 0.0 && self.r_p.is_finite()) {
            return Err(SutError::InvalidTreatment("R_p must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SutMetrics {
    pub peak_speed_dev: f64,
    pub voltage_nadir: f64,
    /// Seconds after clearance until plant active power is back to 95 %
    /// of its pre-fault value; the remaining horizon if it never is.
    pub recovery_time: f64,
    pub recovered: bool,
    /// |Δω| exceeded 1 pu and integration stopped.
    pub diverged: bool,
}

/// Sampled waveforms, one entry per integration step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub t: Vec<f64>,
    pub speed_dev: Vec<f64>,
    pub voltage: Vec<f64>,
    pub i_d: Vec<f64>,
    pub i_q: Vec<f64>,
    pub p_plant: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Currents {
    v: f64,
    i_d: f64,
    i_q: f64,
}

struct Plant<'a> {
    cfg: &'a SutConfig,
    tr: &'a SutTreatment,
    i_lim: f64,
}

impl Plant<'_> {
    /// Reactive support and resulting voltage for a base voltage, before
    /// the active-current share of the limit is settled.
    fn support(&self, v_base: f64, cap: f64) -> (f64, f64) {
        let (k, x, vdb) = (self.tr.k_arci, self.cfg.reactance, self.cfg.v_deadband);
        // i_q = K (V_db − V_base − x i_q) solved for i_q, then capped
        let free = if v_base < vdb {
            k * (vdb - v_base) / (1.0 + k * x)
        } else {
            0.0
        };
        let iq = free.min(cap).max(0.0);
        (iq, v_base + x * iq)
    }

    /// Currents at a base voltage given the plant's active-current state
    /// (`None` inside the fault, where i_d follows available power).
    fn currents(&self, v_base: f64, i_d_state: Option<f64>) -> Currents {
        let i_lim = self.i_lim;
        let wanted = |v: f64| i_d_state.unwrap_or(self.cfg.i_d0 / v);
        match self.tr.priority {
            Priority::QPriority => {
                let (iq, v) = self.support(v_base, i_lim);
                let i_d = wanted(v).min((i_lim * i_lim - iq * iq).max(0.0).sqrt());
                Currents { v, i_d, i_q: iq }
            }
            Priority::DPriority => {
                // i_d depends on V through the power reference and V on the
                // reactive share left by i_d; a few fixed-point passes settle it
                let mut v = v_base;
                let mut out = Currents { v, i_d: 0.0, i_q: 0.0 };
                for _ in 0..50 {
                    let i_d = wanted(v).min(i_lim);
                    let (iq, v_new) = self.support(v_base, (i_lim * i_lim - i_d * i_d).max(0.0).sqrt());
                    out = Currents { v: v_new, i_d, i_q: iq };
                    if (v_new - v).abs() < 1e-15 {
                        break;
                    }
                    v = v_new;
                }
                out
            }
        }
    }
}

/// Runs the fault scenario and returns noiseless metrics plus the trace
/// when `keep_trace` is set.
pub fn simulate_trace(
    cfg: &SutConfig,
    tr: &SutTreatment,
    keep_trace: bool,
) -> Result<(SutMetrics, Option<Trace>), SutError> {
    cfg.validate()?;
    tr.validate()?;
    let plant = Plant {
        cfg,
        tr,
        i_lim: cfg.current_limit * cfg.rating,
    };
    let h = cfg.step;
    let n_on = (cfg.t_on / h).round() as usize;
    let n_off = (cfg.t_off / h).round() as usize;
    let n_end = (cfg.t_end / h).round() as usize;
    let share = cfg.plant_share;
    let p_w0 = share * cfg.i_d0;
    let p_m = cfg.load - p_w0;

    // post-fault i_d state; inside the fault i_d is algebraic
    let mut w = 0.0f64;
    let mut i_d_state = cfg.i_d0;
    let mut trace = keep_trace.then(Trace::default);
    let mut peak = 0.0f64;
    let mut nadir = f64::INFINITY;
    let mut recovery: Option<f64> = None;
    let mut prev_p: Option<(f64, f64)> = None;
    let mut diverged = false;
    let target = 0.95 * p_w0;

    let deriv = |w: f64, id: f64, in_fault: bool, post: bool| -> (f64, f64, Currents) {
        let v_base = if in_fault { cfg.v_ret } else { 1.0 };
        let c = plant.currents(v_base, if in_fault { None } else { Some(id) });
        let p_e = cfg.load * c.v * c.v - share * c.v * c.i_d;
        let dw = (p_m - p_e - cfg.damping * w) / cfg.inertia;
        let did = if post {
            let reference = cfg.i_d0 / c.v;
            ((reference - id) / cfg.tracking).min(tr.r_p)
        } else {
            0.0
        };
        (dw, did, c)
    };

    for n in 0..=n_end {
        let t = n as f64 * h;
        let in_fault = n >= n_on && n < n_off;
        let post = n >= n_off;
        // a dip of zero depth is no fault event, so nothing trips the ramp
        if n == n_off && cfg.v_ret < 1.0 {
            i_d_state = 0.0;
        }
        let (_, _, c) = deriv(w, i_d_state, in_fault, post);
        let p_plant = share * c.v * c.i_d;
        peak = peak.max(w.abs());
        nadir = nadir.min(c.v);
        if let Some(tr) = trace.as_mut() {
            tr.t.push(t);
            tr.speed_dev.push(w);
            tr.voltage.push(c.v);
            tr.i_d.push(c.i_d);
            tr.i_q.push(c.i_q);
            tr.p_plant.push(p_plant);
        }
        if post && recovery.is_none() {
            if p_plant >= target {
                recovery = Some(match prev_p {
                    Some((t0, p0)) if p0 < target => t0 + (target - p0) / (p_plant - p0) * (t - t0),
                    _ => t,
                });
            }
            prev_p = Some((t, p_plant));
        }
        if w.abs() > 1.0 {
            diverged = true;
            break;
        }
        if n == n_end {
            break;
        }
        // one RK4 step over [t, t + h]; the fault state is constant on it
        let (k1w, k1d, _) = deriv(w, i_d_state, in_fault, post);
        let (k2w, k2d, _) = deriv(w + 0.5 * h * k1w, i_d_state + 0.5 * h * k1d, in_fault, post);
        let (k3w, k3d, _) = deriv(w + 0.5 * h * k2w, i_d_state + 0.5 * h * k2d, in_fault, post);
        let (k4w, k4d, _) = deriv(w + h * k3w, i_d_state + h * k3d, in_fault, post);
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        i_d_state += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
    }
    let t_clear = n_off as f64 * h;
    let recovered = recovery.is_some() && !diverged;
    let recovery_time = match recovery {
        Some(t) if !diverged => (t - t_clear).max(0.0),
        _ => cfg.t_end - t_clear,
    };
    let metrics = SutMetrics {
        peak_speed_dev: peak,
        voltage_nadir: nadir,
        recovery_time,
        recovered,
        diverged,
    };
    Ok((metrics, trace))
}

/// Metrics for one treatment with seeded measurement noise added.
pub fn simulate(cfg: &SutConfig, tr: &SutTreatment, seed: u64) -> Result<SutMetrics, SutError> {
    let (mut m, _) = simulate_trace(cfg, tr, false)?;
    if cfg.noise_sd > 0.0 {
        let mut s = rng::stream(seed);
        let mut noisy = |x: f64| (x + cfg.noise_sd * rng::standard_normal(&mut s)).max(0.0);
        m.peak_speed_dev = noisy(m.peak_speed_dev);
        m.voltage_nadir = noisy(m.voltage_nadir);
        m.recovery_time = noisy(m.recovery_time);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(k: f64, priority: Priority, r_p: f64) -> SutMetrics {
        let tr = SutTreatment {
            k_arci: k,
            priority,
            r_p,
        };
        simulate_trace(&SutConfig::default(), &tr, false).unwrap().0
    }

    #[test]
    fn no_fault_stays_at_equilibrium() {
        let cfg = SutConfig {
            v_ret: 1.0,
            ..Default::default()
        };
        let tr = SutTreatment {
            k_arci: 1.0,
            priority: Priority::QPriority,
            r_p: 100.0,
        };
        let (m, _) = simulate_trace(&cfg, &tr, false).unwrap();
        assert!(m.peak_speed_dev < 1e-6, "{m:?}");
        assert_eq!(m.recovery_time, 0.0);
        assert!(m.recovered);
    }

    #[test]
    fn reactive_support_lowers_the_peak() {
        let p0 = run(0.0, Priority::QPriority, 5.0).peak_speed_dev;
        let p1 = run(1.0, Priority::QPriority, 5.0).peak_speed_dev;
        let p2 = run(2.0, Priority::QPriority, 5.0).peak_speed_dev;
        assert!(p2 < p1 && p1 < p0, "{p0} {p1} {p2}");
    }

    #[test]
    fn q_priority_beats_d_priority() {
        let q = run(1.0, Priority::QPriority, 5.0).peak_speed_dev;
        let d = run(1.0, Priority::DPriority, 5.0).peak_speed_dev;
        assert!(q < d, "{q} {d}");
    }

    #[test]
    fn faster_ramp_recovers_sooner() {
        let times: Vec<f64> = [0.1, 1.0, 10.0]
            .iter()
            .map(|&r| run(1.0, Priority::QPriority, r).recovery_time)
            .collect();
        assert!(times[0] >= times[1] && times[1] >= times[2], "{times:?}");
    }

    #[test]
    fn nadir_never_below_retained_voltage() {
        for k in [0.0, 0.5, 2.0, 5.0] {
            for p in [Priority::DPriority, Priority::QPriority] {
                let m = run(k, p, 1.0);
                assert!(m.voltage_nadir >= SutConfig::default().v_ret - 1e-12);
            }
        }
    }

    #[test]
    fn halving_the_step_changes_little() {
        let fine_cfg = SutConfig {
            step: 0.0005,
            ..Default::default()
        };
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-12);
        for k_arci in [0.0, 1.0, 2.0] {
            for r_p in [0.1, 1.0, 10.0] {
                let tr = SutTreatment {
                    k_arci,
                    priority: Priority::QPriority,
                    r_p,
                };
                let coarse = simulate_trace(&SutConfig::default(), &tr, false).unwrap().0;
                let fine = simulate_trace(&fine_cfg, &tr, false).unwrap().0;
                assert!(rel(coarse.peak_speed_dev, fine.peak_speed_dev) < 1e-4, "{tr:?}");
                assert!(rel(coarse.voltage_nadir, fine.voltage_nadir) < 1e-4, "{tr:?}");
                assert!(rel(coarse.recovery_time, fine.recovery_time) < 1e-4, "{tr:?}");
            }
        }
    }

    #[test]
    fn noise_is_seeded() {
        let cfg = SutConfig {
            noise_sd: 1e-3,
            ..Default::default()
        };
        let tr = SutTreatment {
            k_arci: 1.0,
            priority: Priority::DPriority,
            r_p: 1.0,
        };
        assert_eq!(simulate(&cfg, &tr, 3).unwrap(), simulate(&cfg, &tr, 3).unwrap());
        assert_ne!(simulate(&cfg, &tr, 3).unwrap(), simulate(&cfg, &tr, 4).unwrap());
    }

    #[test]
    fn trace_has_one_sample_per_step() {
        let cfg = SutConfig {
            t_end: 1.0,
            ..Default::default()
        };
        let tr = SutTreatment {
            k_arci: 1.0,
            priority: Priority::QPriority,
            r_p: 1.0,
        };
        let (_, trace) = simulate_trace(&cfg, &tr, true).unwrap();
        assert_eq!(trace.unwrap().t.len(), 1001);
    }

    #[test]
    fn rejects_bad_treatments() {
        let cfg = SutConfig::default();
        let bad = SutTreatment {
            k_arci: -1.0,
            priority: Priority::QPriority,
            r_p: 1.0,
        };
        assert!(matches!(simulate(&cfg, &bad, 0), Err(SutError::InvalidTreatment(_))));
        let bad = SutTreatment {
            k_arci: 1.0,
            priority: Priority::QPriority,
            r_p: 0.0,
        };
        assert!(simulate(&cfg, &bad, 0).is_err());
    }
}
