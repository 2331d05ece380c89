//! Fourier-parameterized star-shaped perturbations of the unit disk.
//!
//! A boundary is r(θ) = 1 + ε·ρ(θ) with ρ(θ) = Σ_k (a_k cos kθ + b_k sin kθ).
//! Finite trigonometric series only: every derivative of r is exact, so the
//! geometry layer carries no interpolation error.

use crate::error::{Error, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct Mode {
    pub k: u32,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryShape {
    pub epsilon: f64,
    pub modes: Vec<Mode>,
    /// max_θ |ρ(θ)| over a dense sample, stored at construction.
    pub rho_max: f64,
}

#[derive(Deserialize)]
struct ShapeFile {
    epsilon: f64,
    modes: Vec<Mode>,
}

impl BoundaryShape {
    pub fn new(epsilon: f64, modes: Vec<Mode>) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::BadInput(format!("epsilon must be ≥ 0, got {epsilon}")));
        }
        if epsilon > 0.0 && modes.is_empty() {
            return Err(Error::EmptyShape { epsilon });
        }
        for m in &modes {
            if m.k < 1 {
                return Err(Error::BadInput("mode index k must be ≥ 1".into()));
            }
            if !m.a.is_finite() || !m.b.is_finite() {
                return Err(Error::BadInput("mode coefficients must be finite".into()));
            }
        }
        let mut shape = BoundaryShape { epsilon, modes, rho_max: 0.0 };
        let mut rho_max: f64 = 0.0;
        let mut min_r = f64::INFINITY;
        // 4096 samples resolve any mode the validation caps allow by a wide margin.
        for i in 0..4096 {
            let th = 2.0 * std::f64::consts::PI * i as f64 / 4096.0;
            let rho = shape.rho(th);
            rho_max = rho_max.max(rho.abs());
            min_r = min_r.min(1.0 + epsilon * rho);
        }
        if min_r <= 0.0 {
            return Err(Error::NonStarShaped { min_r });
        }
        shape.rho_max = rho_max;
        Ok(shape)
    }

    /// The unit disk (ε = 0).
    pub fn disk() -> Self {
        BoundaryShape { epsilon: 0.0, modes: vec![], rho_max: 0.0 }
    }

    /// Named preset families used by the sweep harness:
    /// `disk`, `cos1` (near-translation), `cos2` (ovaling), `cos3`
    /// (triangular), `mixed` (modes 1–3 with both phases).
    pub fn preset(name: &str, epsilon: f64) -> Result<Self> {
        let modes = match name {
            "disk" => return Self::new(0.0, vec![]),
            "cos1" => vec![Mode { k: 1, a: 1.0, b: 0.0 }],
            "cos2" => vec![Mode { k: 2, a: 1.0, b: 0.0 }],
            "cos3" => vec![Mode { k: 3, a: 1.0, b: 0.0 }],
            "mixed" => vec![
                Mode { k: 1, a: 0.25, b: 0.0 },
                Mode { k: 2, a: 0.55, b: 0.20 },
                Mode { k: 3, a: 0.0, b: 0.35 },
            ],
            other => return Err(Error::BadInput(format!("unknown preset `{other}`"))),
        };
        Self::new(epsilon, modes)
    }

    pub const PRESETS: [&'static str; 5] = ["disk", "cos1", "cos2", "cos3", "mixed"];

    /// Parse the JSON shape schema {"epsilon": float, "modes": [{"k","a","b"}]}.
    pub fn from_json(text: &str) -> Result<Self> {
        let f: ShapeFile =
            serde_json::from_str(text).map_err(|e| Error::BadInput(format!("shape JSON: {e}")))?;
        Self::new(f.epsilon, f.modes)
    }

    /// d^m/dθ^m of ρ at θ (exact term-by-term differentiation).
    pub fn rho_deriv(&self, theta: f64, m: u32) -> f64 {
        let mut s = 0.0;
        for mode in &self.modes {
            let k = mode.k as f64;
            let km = k.powi(m as i32);
            let (si, co) = (k * theta).sin_cos();
            // d/dθ cycles (cos, −sin, −cos, sin); encode via phase shift m·π/2.
            let (ca, cb) = match m % 4 {
                0 => (co, si),
                1 => (-si, co),
                2 => (-co, -si),
                _ => (si, -co),
            };
            s += km * (mode.a * ca + mode.b * cb);
        }
        s
    }

    pub fn rho(&self, theta: f64) -> f64 {
        self.rho_deriv(theta, 0)
    }

    /// Boundary radius r(θ) = 1 + ε·ρ(θ) and its θ-derivatives.
    pub fn r(&self, theta: f64) -> f64 {
        1.0 + self.epsilon * self.rho(theta)
    }

    pub fn r_deriv(&self, theta: f64, m: u32) -> f64 {
        if m == 0 {
            self.r(theta)
        } else {
            self.epsilon * self.rho_deriv(theta, m)
        }
    }

    /// C⁴ closeness surrogate: max over 0 ≤ m ≤ 4 of sup_θ |d^m(ε·ρ)/dθ^m|.
    /// For a single mode this is ε·k⁴·max(|a|,|b|)-ish; computed on a dense
    /// sample to stay exact for mixed shapes. Also returns the 5th-derivative
    /// sup as the Hölder-tail proxy.
    pub fn closeness_proxy(&self) -> (f64, f64) {
        let mut c4: f64 = 0.0;
        let mut c5: f64 = 0.0;
        for i in 0..4096 {
            let th = 2.0 * std::f64::consts::PI * i as f64 / 4096.0;
            for m in 0..=4 {
                c4 = c4.max((self.epsilon * self.rho_deriv(th, m)).abs());
            }
            c5 = c5.max((self.epsilon * self.rho_deriv(th, 5)).abs());
        }
        (c4, c5)
    }

    /// ε·max(k⁴·max(|a_k|,|b_k|)) term bound used by the hard admissibility cap.
    pub fn closeness_term_bound(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| self.epsilon * (m.k as f64).powi(4) * m.a.abs().max(m.b.abs()))
            .fold(0.0, f64::max)
    }

    /// Amplitude of the perturbation, ε·max|ρ|.
    pub fn amplitude(&self) -> f64 {
        self.epsilon * self.rho_max
    }

    /// Hard admissibility gate for stability-suite runs (amplitude cap).
    /// The C⁴ cap is advisory: high modes trip it at sweep amplitudes, so it
    /// is reported as a flag and final admissibility is certified a
    /// posteriori by the positivity certificate.
    pub fn is_admissible(&self) -> bool {
        self.amplitude() <= crate::tol::AMPLITUDE_CAP
    }

    /// True when ε·max(k⁴·|coef|) exceeds the closeness cap.
    pub fn closeness_flagged(&self) -> bool {
        self.closeness_term_bound() > crate::tol::CLOSENESS_CAP
    }

    /// Highest mode index (0 for the disk).
    pub fn max_mode(&self) -> u32 {
        self.modes.iter().map(|m| m.k).max().unwrap_or(0)
    }

    /// Canonical one-line description for report headers and input hashing.
    pub fn describe(&self) -> String {
        let mut s = format!("epsilon={:.16e}", self.epsilon);
        for m in &self.modes {
            s.push_str(&format!(";k={} a={:.16e} b={:.16e}", m.k, m.a, m.b));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_is_trivial() {
        let d = BoundaryShape::disk();
        assert_eq!(d.r(0.3), 1.0);
        assert_eq!(d.amplitude(), 0.0);
        assert_eq!(d.closeness_proxy().0, 0.0);
    }

    #[test]
    fn cos2_series_evaluation() {
        let s = BoundaryShape::preset("cos2", 0.05).unwrap();
        assert!((s.r(0.0) - 1.05).abs() < 1e-15);
        assert!((s.r(std::f64::consts::FRAC_PI_2) - 0.95).abs() < 1e-15);
        // d/dθ cos 2θ = −2 sin 2θ
        assert!((s.r_deriv(0.3, 1) + 0.05 * 2.0 * (0.6f64).sin()).abs() < 1e-15);
    }

    #[test]
    fn closeness_proxy_is_fourth_derivative_for_single_modes() {
        let s = BoundaryShape::preset("cos2", 0.01).unwrap();
        let (c4, _) = s.closeness_proxy();
        assert!((c4 - 0.16).abs() < 1e-6, "ε·2⁴ = 0.16, got {c4}");

        let s = BoundaryShape::new(0.05, vec![Mode { k: 5, a: 1.0, b: 0.0 }]).unwrap();
        let (c4, _) = s.closeness_proxy();
        assert!((c4 - 31.25).abs() < 1e-4, "ε·5⁴ = 31.25, got {c4}");
        assert!(s.closeness_flagged(), "k = 5 at ε = 0.05 exceeds the closeness cap");
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            BoundaryShape::new(0.5, vec![]),
            Err(Error::EmptyShape { .. })
        ));
        // ε large enough to drive r ≤ 0.
        assert!(matches!(
            BoundaryShape::new(1.2, vec![Mode { k: 2, a: 1.0, b: 0.0 }]),
            Err(Error::NonStarShaped { .. })
        ));
        assert!(BoundaryShape::new(0.1, vec![Mode { k: 0, a: 1.0, b: 0.0 }]).is_err());
    }

    #[test]
    fn parses_shape_json() {
        let s = BoundaryShape::from_json(
            r#"{"epsilon": 0.05, "modes": [{"k": 2, "a": 1.0}, {"k": 3, "b": 0.5}]}"#,
        )
        .unwrap();
        assert_eq!(s.modes.len(), 2);
        assert_eq!(s.modes[1].b, 0.5);
        assert_eq!(s.modes[1].a, 0.0);
    }

    #[test]
    fn presets_are_admissible_at_cap() {
        for name in ["cos1", "cos2", "cos3", "mixed"] {
            let s = BoundaryShape::preset(name, 0.04).unwrap();
            assert!(s.is_admissible(), "{name} at ε = 0.04 must be admissible");
        }
    }
}
