//! Reaction terms `f`, their derivatives and primitives.
//!
//! Two families are supported: the Lane–Emden power `f(s) = |s|^{p−2}s`
//! and the odd cubic `f(s) = c₁s + c₃s³`. Both are odd, sign preserving
//! and superlinear (`f′(s) > f(s)/s`) when their parameters are admissible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A reaction term of one of the supported parametric families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NonlinearityModel {
    /// `f(s) = |s|^{p−2} s`. Admissible for `p > 2`.
    LaneEmden { p: f64 },
    /// `f(s) = c1·s + c3·s³` with `c1 ≥ 0`, `c3 > 0`.
    #[serde(rename = "cubic")]
    CubicFamily { c1: f64, c3: f64 },
}

impl NonlinearityModel {
    /// Lane–Emden model. Any finite exponent is accepted here; exponents
    /// `p ≤ 2` are reported by [`check_hypotheses`] instead.
    pub fn lane_emden(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::Validation(format!(
                "Lane-Emden exponent must be finite and > 1, got {p}"
            )));
        }
        Ok(Self::LaneEmden { p })
    }

    pub fn cubic(c1: f64, c3: f64) -> Result<Self> {
        let model = Self::CubicFamily { c1, c3 };
        model.validate()?;
        Ok(model)
    }

    /// `f(u) = u³`, the model with closed-form one-dimensional solutions.
    pub fn pure_cubic() -> Self {
        Self::CubicFamily { c1: 0.0, c3: 1.0 }
    }

    /// Structural checks on the parameters (not the hypotheses).
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::LaneEmden { p } if !p.is_finite() || p <= 1.0 => Err(Error::Validation(format!(
                "Lane-Emden exponent must be finite and > 1, got {p}"
            ))),
            Self::CubicFamily { c1, .. } if !(c1 >= 0.0 && c1.is_finite()) => {
                Err(Error::Validation(format!("cubic model needs c1 >= 0, got {c1}")))
            }
            Self::CubicFamily { c3, .. } if !(c3 > 0.0 && c3.is_finite()) => {
                Err(Error::Validation(format!("cubic model needs c3 > 0, got {c3}")))
            }
            _ => Ok(()),
        }
    }

    pub fn eval_f(&self, s: f64) -> f64 {
        match *self {
            Self::LaneEmden { p } => {
                if s == 0.0 {
                    0.0
                } else {
                    s.abs().powf(p - 2.0) * s
                }
            }
            Self::CubicFamily { c1, c3 } => c1 * s + c3 * s * s * s,
        }
    }

    /// `f′(s)`. For Lane–Emden with `p < 2` the derivative is infinite at 0.
    pub fn eval_fprime(&self, s: f64) -> f64 {
        match *self {
            Self::LaneEmden { p } => {
                if s == 0.0 {
                    if p > 2.0 {
                        0.0
                    } else if p == 2.0 {
                        1.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    (p - 1.0) * s.abs().powf(p - 2.0)
                }
            }
            Self::CubicFamily { c1, c3 } => c1 + 3.0 * c3 * s * s,
        }
    }

    /// Primitive `F(s) = ∫₀ˢ f`.
    #[allow(non_snake_case)]
    pub fn eval_F(&self, s: f64) -> f64 {
        match *self {
            Self::LaneEmden { p } => s.abs().powf(p) / p,
            Self::CubicFamily { c1, c3 } => {
                let s2 = s * s;
                0.5 * c1 * s2 + 0.25 * c3 * s2 * s2
            }
        }
    }
}

/// Which hypothesis failed at a sample point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    Superlinear,
    SignPreserving,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    /// `f′(s) > f(s)/s` at every sample.
    pub superlinear: bool,
    /// `s·f(s) > 0` at every sample.
    pub sign: bool,
    pub failures: Vec<(f64, Hypothesis)>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.superlinear && self.sign
    }
}

/// Checks superlinearity and sign preservation at the given nonzero samples.
pub fn check_hypotheses(model: &NonlinearityModel, samples: &[f64]) -> Result<HypothesisReport> {
    if samples.is_empty() {
        return Err(Error::Validation("hypothesis check needs samples".into()));
    }
    if let Some(&s) = samples.iter().find(|s| **s == 0.0 || !s.is_finite()) {
        return Err(Error::Validation(format!(
            "hypothesis samples must be finite and nonzero, got {s}"
        )));
    }
    let mut failures = Vec::new();
    for &s in samples {
        let f = model.eval_f(s);
        // f′(s) s² > f(s) s is the sign-safe form of f′(s) > f(s)/s.
        if !(model.eval_fprime(s) * s * s > f * s) {
            failures.push((s, Hypothesis::Superlinear));
        }
        if !(s * f > 0.0) {
            failures.push((s, Hypothesis::SignPreserving));
        }
    }
    Ok(HypothesisReport {
        superlinear: failures.iter().all(|(_, h)| *h != Hypothesis::Superlinear),
        sign: failures.iter().all(|(_, h)| *h != Hypothesis::SignPreserving),
        failures,
    })
}

/// Symmetric log-spaced samples `±10^{-3..3}` used when the caller has none.
pub fn default_samples() -> Vec<f64> {
    (0..=24)
        .map(|k| 10f64.powf(-3.0 + 0.25 * k as f64))
        .flat_map(|s| [s, -s])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn le(p: f64) -> NonlinearityModel {
        NonlinearityModel::lane_emden(p).unwrap()
    }

    #[test]
    fn point_values() {
        assert_eq!(le(3.0).eval_f(2.0), 4.0);
        assert_eq!(le(3.0).eval_f(0.0), 0.0);
        assert_eq!(NonlinearityModel::pure_cubic().eval_f(2.0), 8.0);

        assert_eq!(le(3.0).eval_fprime(2.0), 4.0);
        assert_eq!(le(4.0).eval_fprime(-1.0), 3.0);
        assert_eq!(NonlinearityModel::cubic(1.0, 1.0).unwrap().eval_fprime(0.0), 1.0);

        assert!((le(3.0).eval_F(2.0) - 8.0 / 3.0).abs() < 1e-15);
        assert_eq!(le(4.0).eval_F(1.0), 0.25);
        for m in [le(3.0), le(2.5), NonlinearityModel::cubic(2.0, 0.5).unwrap()] {
            assert_eq!(m.eval_F(0.0), 0.0);
        }
    }

    #[test]
    fn hypotheses() {
        let r = check_hypotheses(&le(3.0), &[0.5, -0.5, 1.0, -1.0, 2.0, -2.0]).unwrap();
        assert!(r.all_pass());

        let r = check_hypotheses(&le(1.5), &[1.0]).unwrap();
        assert!(!r.superlinear);
        assert!(r.sign);
        assert_eq!(r.failures, vec![(1.0, Hypothesis::Superlinear)]);

        let r = check_hypotheses(&NonlinearityModel::cubic(1.0, 1.0).unwrap(), &[1.0, -1.0]).unwrap();
        assert!(r.all_pass());

        assert!(check_hypotheses(&le(3.0), &[]).is_err());
        assert!(check_hypotheses(&le(3.0), &[0.0]).is_err());
    }

    #[test]
    fn lane_emden_p_two_is_not_superlinear() {
        let r = check_hypotheses(&le(2.0), &default_samples()).unwrap();
        assert!(!r.superlinear);
    }

    #[test]
    fn construction_rejects_bad_cubic() {
        assert!(NonlinearityModel::cubic(-1.0, 1.0).is_err());
        assert!(NonlinearityModel::cubic(0.0, 0.0).is_err());
        assert!(NonlinearityModel::lane_emden(f64::NAN).is_err());
    }

    #[test]
    fn serde_shape() {
        let m: NonlinearityModel = serde_json::from_str(r#"{"type":"lane_emden","p":3.0}"#).unwrap();
        assert_eq!(m, NonlinearityModel::LaneEmden { p: 3.0 });
        let m: NonlinearityModel = serde_json::from_str(r#"{"type":"cubic","c1":0.0,"c3":1.0}"#).unwrap();
        assert_eq!(m, NonlinearityModel::pure_cubic());
        assert_eq!(
            serde_json::to_string(&NonlinearityModel::pure_cubic()).unwrap(),
            r#"{"type":"cubic","c1":0.0,"c3":1.0}"#
        );
    }

    fn models() -> Vec<NonlinearityModel> {
        vec![
            le(2.5),
            le(3.0),
            le(4.0),
            le(6.0),
            NonlinearityModel::pure_cubic(),
            NonlinearityModel::cubic(2.0, 0.5).unwrap(),
        ]
    }

    #[test]
    fn superlinear_on_log_grid() {
        for m in models() {
            let r = check_hypotheses(&m, &default_samples()).unwrap();
            assert!(r.all_pass(), "{m:?}: {:?}", r.failures);
        }
    }

    proptest! {
        #[test]
        fn odd_and_even(s in -50.0f64..50.0) {
            for m in models() {
                prop_assert_eq!(m.eval_f(-s), -m.eval_f(s));
                prop_assert_eq!(m.eval_F(-s), m.eval_F(s));
                prop_assert!(m.eval_F(s) >= 0.0);
            }
        }

        #[test]
        fn derivatives_match_finite_differences(log_s in -3.0f64..3.0, neg in any::<bool>()) {
            let s = if neg { -(10f64.powf(log_s)) } else { 10f64.powf(log_s) };
            // Step scales with |s| below 1 as well; an absolute 1e-5 step
            // has truncation error ~h²/s² relative there.
            let h = 1e-5 * s.abs();
            for m in models() {
                let fd_f = (m.eval_f(s + h) - m.eval_f(s - h)) / (2.0 * h);
                let fp = m.eval_fprime(s);
                prop_assert!((fd_f - fp).abs() <= 1e-6 * fp.abs(),
                    "{:?} f' at {}: fd {} exact {}", m, s, fd_f, fp);
                let fd_big_f = (m.eval_F(s + h) - m.eval_F(s - h)) / (2.0 * h);
                let f = m.eval_f(s);
                prop_assert!((fd_big_f - f).abs() <= 1e-6 * f.abs(),
                    "{:?} F' at {}: fd {} exact {}", m, s, fd_big_f, f);
            }
        }
    }
}
