use serde::{Deserialize, Serialize};

/// Relative slack below which a check still passes.
pub const SLACK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// value ≤ bound
    Upper,
    /// value ≥ bound
    Lower,
    /// |value − bound| ≤ tolerance
    Equal,
}

/// One computed quantity against one bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub direction: Direction,
    /// `bound − value` for upper bounds, `value − bound` for lower bounds,
    /// `tolerance − |value − bound|` for equalities.
    pub slack: f64,
    /// Absolute slack that still counts as a pass.
    pub tolerance: f64,
    pub pass: bool,
}

impl BoundReport {
    fn make(name: impl Into<String>, value: f64, bound: f64, direction: Direction, tolerance: f64) -> Self {
        let slack = match direction {
            Direction::Upper => bound - value,
            Direction::Lower => value - bound,
            Direction::Equal => tolerance - (value - bound).abs(),
        };
        let pass = match direction {
            Direction::Equal => slack >= 0.0,
            _ => slack >= -tolerance,
        };
        Self {
            name: name.into(),
            value,
            bound,
            direction,
            slack,
            tolerance,
            pass: pass && value.is_finite() && !bound.is_nan(),
        }
    }

    /// `value ≤ bound`, passing when `slack ≥ −1e−9·|bound|`.
    pub fn upper(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::make(name, value, bound, Direction::Upper, SLACK_TOL * bound.abs())
    }

    /// `value ≥ bound`, passing when `slack ≥ −1e−9·|bound|`.
    pub fn lower(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::make(name, value, bound, Direction::Lower, SLACK_TOL * bound.abs())
    }

    /// `|value − bound| ≤ tolerance`.
    pub fn equal(name: impl Into<String>, value: f64, bound: f64, tolerance: f64) -> Self {
        Self::make(name, value, bound, Direction::Equal, tolerance)
    }

    /// Inequality with an explicit absolute tolerance (sampling or
    /// quadrature error folded into the pass criterion).
    pub fn with_tolerance(name: impl Into<String>, value: f64, bound: f64, direction: Direction, tolerance: f64) -> Self {
        Self::make(name, value, bound, direction, tolerance)
    }
}

/// Median of a non-empty slice.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Stability rule for extracted constants: finite, positive and
/// `max ≤ 2·median`.
pub fn constant_is_stable(cs: &[f64]) -> bool {
    if cs.is_empty() || cs.iter().any(|c| !c.is_finite() || *c <= 0.0) {
        return false;
    }
    let max = cs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max <= 2.0 * median(cs)
}

/// `true` when the sequence never increases by more than `tol`.
pub fn is_non_increasing(xs: &[f64], tol: f64) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0] + tol)
}
