//! Finite positive Borel measures on the unit circle and their Poisson integrals.
//!
//! Masses use arc-length normalization: Lebesgue measure has total mass `2pi`,
//! and the Poisson integral divides by `2pi`, so the Lebesgue preset has
//! `P_mu = 1` identically.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quad::{wrap_angle, DiscPoint};
use crate::{DmuError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub angle: f64,
    pub mass: f64,
}

/// Absolutely continuous part, as a density with respect to `d theta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Density {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    /// Values at `theta_j = 2 pi j / N`, integrated by the trapezoid rule.
    Samples {
        values: Vec<f64>,
    },
}

impl Density {
    /// Density at angle `t`; samples are interpolated linearly.
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            Density::Zero => 0.0,
            Density::Constant { value } => *value,
            Density::Samples { values } => {
                let n = values.len();
                let x = wrap_angle(t) / TAU * n as f64;
                let j = (x.floor() as usize).min(n - 1);
                let frac = x - j as f64;
                values[j] * (1.0 - frac) + values[(j + 1) % n] * frac
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MassConvention {
    #[default]
    ArcLength,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr")]
pub struct CircleMeasure {
    pub atoms: Vec<Atom>,
    pub density: Density,
    pub mass_convention: MassConvention,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MeasureRepr {
    Preset(String),
    Full(MeasureObject),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureObject {
    #[serde(default)]
    atoms: Vec<Atom>,
    #[serde(default)]
    density: Density,
    #[serde(default)]
    mass_convention: MassConvention,
}

impl TryFrom<MeasureRepr> for CircleMeasure {
    type Error = DmuError;
    fn try_from(r: MeasureRepr) -> Result<Self> {
        match r {
            MeasureRepr::Preset(s) => CircleMeasure::preset(&s),
            MeasureRepr::Full(o) => {
                let mut m = CircleMeasure::new(o.atoms, o.density)?;
                m.mass_convention = o.mass_convention;
                Ok(m)
            }
        }
    }
}

impl CircleMeasure {
    pub fn new(atoms: Vec<Atom>, density: Density) -> Result<Self> {
        let m = CircleMeasure {
            atoms,
            density,
            mass_convention: MassConvention::ArcLength,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn zero() -> Self {
        CircleMeasure {
            atoms: vec![],
            density: Density::Zero,
            mass_convention: MassConvention::ArcLength,
        }
    }

    /// Arc-length measure, total mass `2pi`.
    pub fn lebesgue() -> Self {
        CircleMeasure {
            atoms: vec![],
            density: Density::Constant { value: 1.0 },
            mass_convention: MassConvention::ArcLength,
        }
    }

    /// Point mass `2pi` at `angle`, so that `P_mu(0) = 1`.
    pub fn dirac(angle: f64) -> Self {
        CircleMeasure {
            atoms: vec![Atom {
                angle: wrap_angle(angle),
                mass: TAU,
            }],
            density: Density::Zero,
            mass_convention: MassConvention::ArcLength,
        }
    }

    /// Parses `"lebesgue"`, `"zero"` or `"dirac(theta)"`; `theta` may be a
    /// number, `pi`, or `<number>*pi`.
    pub fn preset(name: &str) -> Result<Self> {
        let s = name.trim();
        match s {
            "lebesgue" => return Ok(Self::lebesgue()),
            "zero" => return Ok(Self::zero()),
            _ => {}
        }
        if let Some(inner) = s.strip_prefix("dirac(").and_then(|t| t.strip_suffix(')')) {
            return Ok(Self::dirac(parse_angle(inner)?));
        }
        Err(DmuError::InvalidMeasure(format!("unknown preset {name:?}")))
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            if !(a.mass.is_finite() && a.mass >= 0.0) || !a.angle.is_finite() {
                return Err(DmuError::InvalidMeasure(format!(
                    "atom at angle {} has invalid mass {}",
                    a.angle, a.mass
                )));
            }
        }
        match &self.density {
            Density::Zero => {}
            Density::Constant { value } => {
                if !(value.is_finite() && *value >= 0.0) {
                    return Err(DmuError::InvalidMeasure(format!(
                        "density constant {value} must be finite and nonnegative"
                    )));
                }
            }
            Density::Samples { values } => {
                if values.is_empty() {
                    return Err(DmuError::InvalidMeasure("density samples are empty".into()));
                }
                if let Some((j, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
                    return Err(DmuError::InvalidMeasure(format!("density sample {j} is {v}")));
                }
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.iter().all(|a| a.mass == 0.0)
            && match &self.density {
                Density::Zero => true,
                Density::Constant { value } => *value == 0.0,
                Density::Samples { values } => values.iter().all(|v| *v == 0.0),
            }
    }

    /// Angles of atoms with positive mass.
    pub fn singular_angles(&self) -> Vec<f64> {
        self.atoms
            .iter()
            .filter(|a| a.mass > 0.0)
            .map(|a| wrap_angle(a.angle))
            .collect()
    }

    /// `a * self`, `a >= 0`.
    pub fn scaled(&self, a: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(DmuError::InvalidArgument(format!(
                "scale factor {a} must be nonnegative"
            )));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|x| Atom {
                angle: x.angle,
                mass: a * x.mass,
            })
            .collect();
        let density = match &self.density {
            Density::Zero => Density::Zero,
            Density::Constant { value } => Density::Constant { value: a * value },
            Density::Samples { values } => Density::Samples {
                values: values.iter().map(|v| a * v).collect(),
            },
        };
        CircleMeasure::new(atoms, density)
    }

    /// Sum of two measures; sampled densities must share a grid.
    pub fn add(&self, other: &CircleMeasure) -> Result<Self> {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().copied());
        use Density::*;
        let density = match (&self.density, &other.density) {
            (Zero, d) | (d, Zero) => d.clone(),
            (Constant { value: a }, Constant { value: b }) => Constant { value: a + b },
            (Constant { value: c }, Samples { values }) | (Samples { values }, Constant { value: c }) => Samples {
                values: values.iter().map(|v| v + c).collect(),
            },
            (Samples { values: a }, Samples { values: b }) => {
                if a.len() != b.len() {
                    return Err(DmuError::InvalidMeasure("density grids differ in size".into()));
                }
                Samples {
                    values: a.iter().zip(b).map(|(x, y)| x + y).collect(),
                }
            }
        };
        CircleMeasure::new(atoms, density)
    }

    /// Atom masses plus the integral of the density.
    pub fn total_mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass).sum();
        atoms
            + match &self.density {
                Density::Zero => 0.0,
                Density::Constant { value } => TAU * value,
                Density::Samples { values } => TAU * values.iter().sum::<f64>() / values.len() as f64,
            }
    }

    /// `P_mu(z) = int (1 - |z|^2) / |1 - conj(z) w|^2 dmu(w) / 2pi`.
    pub fn poisson_integral(&self, z: Complex64) -> Result<f64> {
        self.validate()?;
        if !(z.norm() < 1.0) {
            return Err(DmuError::OutsideDisc { re: z.re, im: z.im });
        }
        Ok(self.poisson_with(z, 1.0 - z.norm_sqr()))
    }

    /// Poisson integral at a quadrature node, skipping validation.
    ///
    /// `|e^{it} - z|^2 = (1 - r)^2 + 4 r sin^2((t - theta)/2)` keeps the
    /// kernel accurate when `z` is within rounding distance of the circle.
    pub fn poisson_at(&self, p: &DiscPoint) -> f64 {
        let (d, r, th) = (p.dist, p.r, p.theta);
        let w = p.one_minus_r2();
        self.poisson_kernel_sum(|t| w / (d * d + 4.0 * r * (0.5 * (t - th)).sin().powi(2)))
    }

    /// Poisson integral with `1 - |z|^2` supplied by the caller.
    pub fn poisson_with(&self, z: Complex64, one_minus_r2: f64) -> f64 {
        self.poisson_kernel_sum(|t| one_minus_r2 / (Complex64::from_polar(1.0, t) - z).norm_sqr())
    }

    fn poisson_kernel_sum(&self, kernel: impl Fn(f64) -> f64) -> f64 {
        let mut p = 0.0;
        for a in &self.atoms {
            if a.mass > 0.0 {
                p += a.mass * kernel(a.angle);
            }
        }
        p /= TAU;
        p += match &self.density {
            Density::Zero => 0.0,
            Density::Constant { value } => *value,
            Density::Samples { values } => {
                let n = values.len();
                let h = TAU / n as f64;
                values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * kernel(j as f64 * h))
                    .sum::<f64>()
                    / n as f64
            }
        };
        p
    }
}

fn parse_angle(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || DmuError::InvalidMeasure(format!("cannot parse angle {s:?}"));
    if s == "pi" {
        return Ok(PI);
    }
    if let Some(c) = s.strip_suffix("*pi") {
        return c.trim().parse::<f64>().map(|c| c * PI).map_err(|_| bad());
    }
    s.parse::<f64>().map_err(|_| bad())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lebesgue_poisson_is_one() {
        let m = CircleMeasure::lebesgue();
        for z in [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(-0.3, 0.9),
        ] {
            assert!((m.poisson_integral(z).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!((m.total_mass() - TAU).abs() < 1e-15);
    }

    #[test]
    fn zero_measure() {
        let m = CircleMeasure::zero();
        assert_eq!(m.poisson_integral(Complex64::new(0.2, 0.1)).unwrap(), 0.0);
        assert_eq!(m.total_mass(), 0.0);
        assert!(m.is_zero());
    }

    #[test]
    fn unit_atom_at_origin() {
        let m = CircleMeasure::dirac(0.0);
        assert!((m.poisson_integral(Complex64::new(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn atom_masses_sum() {
        let m = CircleMeasure::new(
            vec![Atom { angle: 0.0, mass: 1.5 }, Atom { angle: PI, mass: 0.5 }],
            Density::Zero,
        )
        .unwrap();
        assert!((m.total_mass() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_points_outside_and_bad_measures() {
        let m = CircleMeasure::lebesgue();
        assert!(m.poisson_integral(Complex64::new(1.0, 0.0)).is_err());
        assert!(CircleMeasure::new(vec![Atom { angle: 0.0, mass: -1.0 }], Density::Zero).is_err());
        assert!(CircleMeasure::new(
            vec![],
            Density::Samples {
                values: vec![1.0, -0.1]
            }
        )
        .is_err());
    }

    #[test]
    fn sampled_density_mean_value() {
        let values: Vec<f64> = (0..256).map(|j| 2.0 + (j as f64 * TAU / 256.0).cos()).collect();
        let m = CircleMeasure::new(vec![], Density::Samples { values }).unwrap();
        // P[2 + cos](z) = 2 + Re z
        let z = Complex64::new(0.4, -0.3);
        assert!((m.poisson_integral(z).unwrap() - 2.4).abs() < 1e-13);
        assert!((m.total_mass() - 2.0 * TAU).abs() < 1e-12);
    }

    #[test]
    fn json_presets_and_objects() {
        let m: CircleMeasure = serde_json::from_str("\"lebesgue\"").unwrap();
        assert_eq!(m, CircleMeasure::lebesgue());
        let m: CircleMeasure = serde_json::from_str("\"dirac(pi)\"").unwrap();
        assert_eq!(m, CircleMeasure::dirac(PI));
        let m: CircleMeasure =
            serde_json::from_str(r#"{"atoms":[{"angle":1.0,"mass":2.0}],"density":{"kind":"constant","value":0.5}}"#)
                .unwrap();
        assert!((m.total_mass() - (2.0 + PI)).abs() < 1e-15);
        assert!(serde_json::from_str::<CircleMeasure>(r#"{"atoms":[],"weird":1}"#).is_err());
        assert!(serde_json::from_str::<CircleMeasure>("\"cantor\"").is_err());
        let back: CircleMeasure = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
