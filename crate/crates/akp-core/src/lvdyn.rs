//! Two-population Lotka-Volterra dynamics: dW1/dt = W1(a - b W2),
//! dW2/dt = W2(-c + d W1), a fixed-step RK4 integrator, the conserved
//! quantity V = d W1 - c ln W1 + b W2 - a ln W2 used as the integrator's
//! correctness oracle, and the decoupled exponential closed form
//! (W1(0) e^{at}, W2(0) e^{-ct}) which the full system reduces to when the
//! interaction coefficients b and d vanish.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LvParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl LvParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "coefficient {name} must be a finite non-negative real, got {v}"
                )));
            }
        }
        Ok(LvParams { a, b, c, d })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LvState {
    pub w1: f64,
    pub w2: f64,
}

impl LvState {
    pub fn new(w1: f64, w2: f64) -> Result<Self> {
        if !(w1 > 0.0 && w2 > 0.0) || !w1.is_finite() || !w2.is_finite() {
            return Err(Error::Domain(format!(
                "population sizes must be positive and finite, got ({w1}, {w2})"
            )));
        }
        Ok(LvState { w1, w2 })
    }
}

/// Linear map from populations to feature values, f = T (W1, W2).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FeatureMap {
    pub t11: f64,
    pub t12: f64,
    pub t21: f64,
    pub t22: f64,
}

impl FeatureMap {
    pub fn identity() -> Self {
        FeatureMap {
            t11: 1.0,
            t12: 0.0,
            t21: 0.0,
            t22: 1.0,
        }
    }

    pub fn apply(&self, s: &LvState) -> (f64, f64) {
        (
            self.t11 * s.w1 + self.t12 * s.w2,
            self.t21 * s.w1 + self.t22 * s.w2,
        )
    }
}

/// Integrated orbit sampled on a uniform time grid. Features are populated
/// with the identity map by `rk4_integrate`; `map_features` rewrites them
/// under another map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LvTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<LvState>,
    pub features: Vec<(f64, f64)>,
}

impl LvTrajectory {
    pub fn map_features(&mut self, map: &FeatureMap) {
        self.features = feature_trajectory(map, self);
    }
}

/// Right-hand side of the system.
pub fn lv_deriv(p: &LvParams, s: &LvState) -> (f64, f64) {
    (s.w1 * (p.a - p.b * s.w2), s.w2 * (-p.c + p.d * s.w1))
}

/// Classic fixed-step fourth-order Runge-Kutta. Aborts with a domain error
/// if a step drives either population non-positive or non-finite.
pub fn rk4_integrate(p: &LvParams, s0: &LvState, dt: f64, t_end: f64) -> Result<LvTrajectory> {
    if !(dt > 0.0) || !(t_end > 0.0) || dt > t_end {
        return Err(Error::InvalidParameter(format!(
            "need 0 < dt <= t_end, got dt={dt}, t_end={t_end}"
        )));
    }
    let steps = (t_end / dt).round().max(1.0) as usize;
    let mut states = Vec::with_capacity(steps + 1);
    let mut times = Vec::with_capacity(steps + 1);
    let mut s = *s0;
    states.push(s);
    times.push(0.0);

    for step in 0..steps {
        let k1 = lv_deriv(p, &s);
        let k2 = lv_deriv(
            p,
            &LvState {
                w1: s.w1 + 0.5 * dt * k1.0,
                w2: s.w2 + 0.5 * dt * k1.1,
            },
        );
        let k3 = lv_deriv(
            p,
            &LvState {
                w1: s.w1 + 0.5 * dt * k2.0,
                w2: s.w2 + 0.5 * dt * k2.1,
            },
        );
        let k4 = lv_deriv(
            p,
            &LvState {
                w1: s.w1 + dt * k3.0,
                w2: s.w2 + dt * k3.1,
            },
        );
        s = LvState {
            w1: s.w1 + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            w2: s.w2 + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        };
        if !(s.w1 > 0.0 && s.w2 > 0.0 && s.w1.is_finite() && s.w2.is_finite()) {
            return Err(Error::Domain(format!(
                "population left the positive quadrant at step {} (t = {}): ({}, {})",
                step + 1,
                (step + 1) as f64 * dt,
                s.w1,
                s.w2
            )));
        }
        states.push(s);
        times.push((step + 1) as f64 * dt);
    }

    let features = states.iter().map(|s| (s.w1, s.w2)).collect();
    Ok(LvTrajectory {
        times,
        states,
        features,
    })
}

/// Conserved quantity of the coupled system; constant along exact orbits.
pub fn lv_first_integral(p: &LvParams, s: &LvState) -> Result<f64> {
    if !(s.w1 > 0.0 && s.w2 > 0.0) {
        return Err(Error::Domain(format!(
            "first integral needs positive populations, got ({}, {})",
            s.w1, s.w2
        )));
    }
    Ok(p.d * s.w1 - p.c * s.w1.ln() + p.b * s.w2 - p.a * s.w2.ln())
}

/// Exponential trajectories (W1(0) e^{at}, W2(0) e^{-ct}); the exact
/// solution of the system once b = d = 0.
pub fn decoupled_solution(p: &LvParams, s0: &LvState, t: f64) -> LvState {
    LvState {
        w1: s0.w1 * (p.a * t).exp(),
        w2: s0.w2 * (-p.c * t).exp(),
    }
}

/// Features along a trajectory, one (f1, f2) pair per time point.
pub fn feature_trajectory(map: &FeatureMap, traj: &LvTrajectory) -> Vec<(f64, f64)> {
    traj.states.iter().map(|s| map.apply(s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classic() -> (LvParams, LvState) {
        (
            LvParams::new(2.0 / 3.0, 4.0 / 3.0, 1.0, 1.0).unwrap(),
            LvState::new(1.0, 1.0).unwrap(),
        )
    }

    #[test]
    fn interior_fixed_point_is_stationary() {
        let p = LvParams::new(2.0, 1.0, 3.0, 1.0).unwrap();
        let s = LvState::new(3.0, 2.0).unwrap();
        assert_eq!(lv_deriv(&p, &s), (0.0, 0.0));
    }

    #[test]
    fn prey_only_growth_limit() {
        let p = LvParams::new(2.0, 1.0, 3.0, 1.0).unwrap();
        let eps = 1e-12;
        let s = LvState::new(1.0, eps).unwrap();
        let (dw1, _) = lv_deriv(&p, &s);
        assert!((dw1 - p.a * s.w1).abs() < 1e-11);
    }

    #[test]
    fn hand_evaluated_derivative() {
        let (p, s) = classic();
        let (dw1, dw2) = lv_deriv(&p, &s);
        assert!((dw1 + 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(dw2, 0.0);
    }

    #[test]
    fn trajectory_from_fixed_point_stays_put() {
        let p = LvParams::new(2.0, 1.0, 3.0, 1.0).unwrap();
        let s0 = LvState::new(p.c / p.d, p.a / p.b).unwrap();
        let traj = rk4_integrate(&p, &s0, 0.01, 1.0).unwrap();
        for s in &traj.states {
            assert!((s.w1 - s0.w1).abs() < 1e-12);
            assert!((s.w2 - s0.w2).abs() < 1e-12);
        }
    }

    #[test]
    fn first_integral_hand_value() {
        let (p, s) = classic();
        let v = lv_first_integral(&p, &s).unwrap();
        assert!((v - (1.0 + 4.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_minimizes_the_first_integral() {
        let (p, _) = classic();
        let fp = LvState::new(p.c / p.d, p.a / p.b).unwrap();
        let v_min = lv_first_integral(&p, &fp).unwrap();
        for delta in [0.01, -0.01, 0.1, -0.1] {
            let s1 = LvState::new(fp.w1 + delta, fp.w2).unwrap();
            let s2 = LvState::new(fp.w1, fp.w2 + delta).unwrap();
            assert!(lv_first_integral(&p, &s1).unwrap() > v_min);
            assert!(lv_first_integral(&p, &s2).unwrap() > v_min);
        }
    }

    #[test]
    fn first_integral_rejects_non_positive_state() {
        let (p, _) = classic();
        let s = LvState { w1: 0.0, w2: 1.0 };
        assert!(matches!(
            lv_first_integral(&p, &s),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn decoupled_solution_hand_values() {
        let p = LvParams::new(0.5, 0.0, 0.2, 0.0).unwrap();
        let s0 = LvState::new(1.0, 2.0).unwrap();
        let at0 = decoupled_solution(&p, &s0, 0.0);
        assert_eq!(at0, s0);
        let at2 = decoupled_solution(&p, &s0, 2.0);
        assert!((at2.w1 - 2.718282).abs() < 1e-6);
        assert!((at2.w2 - 1.340640).abs() < 1e-6);
    }

    #[test]
    fn feature_map_hand_values() {
        let s = LvState::new(2.0, 3.0).unwrap();
        let traj = LvTrajectory {
            times: vec![0.0],
            states: vec![s],
            features: vec![(s.w1, s.w2)],
        };
        assert_eq!(
            feature_trajectory(&FeatureMap::identity(), &traj),
            vec![(2.0, 3.0)]
        );
        let zero = FeatureMap {
            t11: 0.0,
            t12: 0.0,
            t21: 0.0,
            t22: 0.0,
        };
        assert_eq!(feature_trajectory(&zero, &traj), vec![(0.0, 0.0)]);
        let mixed = FeatureMap {
            t11: 1.0,
            t12: 1.0,
            t21: 1.0,
            t22: -1.0,
        };
        assert_eq!(feature_trajectory(&mixed, &traj), vec![(5.0, -1.0)]);
    }

    #[test]
    fn feature_map_is_linear_in_populations() {
        let map = FeatureMap {
            t11: 0.3,
            t12: -1.2,
            t21: 2.0,
            t22: 0.7,
        };
        let s = LvState::new(1.5, 0.8).unwrap();
        let alpha = 3.25;
        let scaled = LvState::new(alpha * s.w1, alpha * s.w2).unwrap();
        let (f1, f2) = map.apply(&s);
        let (g1, g2) = map.apply(&scaled);
        assert!((g1 - alpha * f1).abs() < 1e-12);
        assert!((g2 - alpha * f2).abs() < 1e-12);
    }

    #[test]
    fn integrator_rejects_bad_steps() {
        let (p, s) = classic();
        assert!(rk4_integrate(&p, &s, 0.0, 1.0).is_err());
        assert!(rk4_integrate(&p, &s, 2.0, 1.0).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(LvParams::new(-0.1, 0.0, 0.0, 0.0).is_err());
        assert!(LvState::new(0.0, 1.0).is_err());
        assert!(LvState::new(1.0, -2.0).is_err());
    }
}
