//! Smooth bounded functions of `t = log|z|²` that extend continuously to
//! CP¹ through both poles. They serve as weak-convergence test functions
//! and as perturbations in the energy checks.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LineFunction {
    Constant { value: f64 },
    /// `tanh(t − shift)`
    Tanh { shift: f64 },
    /// `1 / (1 + t²)`
    Lorentzian,
    /// `1 / (1 + e^{−rate·t})`
    Sigmoid { rate: f64 },
    /// `height · exp(−(t − centre)² / (2 width²))`
    Bump { centre: f64, width: f64, height: f64 },
}

impl LineFunction {
    pub const ONE: LineFunction = LineFunction::Constant { value: 1.0 };

    /// The fixed test family used by the weak-convergence report.
    pub fn weak_convergence_family() -> Vec<LineFunction> {
        vec![
            LineFunction::ONE,
            LineFunction::Tanh { shift: 0.0 },
            LineFunction::Tanh { shift: 2.0 },
            LineFunction::Lorentzian,
            LineFunction::Sigmoid { rate: 3.0 },
        ]
    }

    pub fn name(&self) -> String {
        match self {
            LineFunction::Constant { value } => format!("const({value})"),
            LineFunction::Tanh { shift } if *shift == 0.0 => "tanh(t)".into(),
            LineFunction::Tanh { shift } => format!("tanh(t-{shift})"),
            LineFunction::Lorentzian => "1/(1+t^2)".into(),
            LineFunction::Sigmoid { rate } => format!("sigmoid({rate}t)"),
            LineFunction::Bump {
                centre,
                width,
                height,
            } => format!("bump({centre},{width},{height})"),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            LineFunction::Constant { value } => value,
            LineFunction::Tanh { shift } => (t - shift).tanh(),
            LineFunction::Lorentzian => 1.0 / (1.0 + t * t),
            LineFunction::Sigmoid { rate } => sigmoid(rate * t),
            LineFunction::Bump {
                centre,
                width,
                height,
            } => height * (-(t - centre).powi(2) / (2.0 * width * width)).exp(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            LineFunction::Constant { .. } => 0.0,
            LineFunction::Tanh { shift } => {
                let c = (t - shift).cosh();
                if c.is_finite() {
                    1.0 / (c * c)
                } else {
                    0.0
                }
            }
            LineFunction::Lorentzian => -2.0 * t / (1.0 + t * t).powi(2),
            LineFunction::Sigmoid { rate } => {
                let s = sigmoid(rate * t);
                rate * s * (1.0 - s)
            }
            LineFunction::Bump {
                centre,
                width,
                height,
            } => {
                let d = t - centre;
                -d / (width * width) * height * (-d * d / (2.0 * width * width)).exp()
            }
        }
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        match *self {
            LineFunction::Constant { .. } => 0.0,
            LineFunction::Tanh { shift } => {
                let x = t - shift;
                let c = x.cosh();
                if c.is_finite() {
                    -2.0 * x.tanh() / (c * c)
                } else {
                    0.0
                }
            }
            LineFunction::Lorentzian => (6.0 * t * t - 2.0) / (1.0 + t * t).powi(3),
            LineFunction::Sigmoid { rate } => {
                let s = sigmoid(rate * t);
                rate * rate * s * (1.0 - s) * (1.0 - 2.0 * s)
            }
            LineFunction::Bump {
                centre,
                width,
                height,
            } => {
                let d = t - centre;
                let w2 = width * width;
                height * (d * d / (w2 * w2) - 1.0 / w2) * (-d * d / (2.0 * w2)).exp()
            }
        }
    }

    /// `sup |f|` over the line.
    pub fn sup_abs(&self) -> f64 {
        match *self {
            LineFunction::Constant { value } => value.abs(),
            LineFunction::Bump { height, .. } => height.abs(),
            _ => 1.0,
        }
    }

    /// Limits at `t → −∞` and `t → +∞` (values at the two poles of CP¹).
    pub fn limits(&self) -> (f64, f64) {
        match *self {
            LineFunction::Constant { value } => (value, value),
            LineFunction::Tanh { .. } => (-1.0, 1.0),
            LineFunction::Lorentzian | LineFunction::Bump { .. } => (0.0, 0.0),
            LineFunction::Sigmoid { rate } => {
                if rate >= 0.0 {
                    (0.0, 1.0)
                } else {
                    (1.0, 0.0)
                }
            }
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
