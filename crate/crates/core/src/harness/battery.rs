//! Named test functions with derivatives up to order 3.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::operators::BasisPoly;
use crate::orthopoly::RecurrenceTable;

/// Highest derivative order available for every battery member.
pub const MAX_DERIVATIVE: usize = 3;

/// Smoothing parameter of `(x^2 + eps^2)^{3/2}`.
pub const ABS3_EPS: f64 = 0.1;

/// Indices and coefficients of the polynomial member `pcomb`.
pub const PCOMB: [(usize, f64); 3] = [(1, 1.0), (3, 0.5), (5, 0.25)];

/// Names accepted by [`TestFunction::by_name`].
pub const NAMES: [&str; 5] = ["sin", "arctan", "xgauss", "abs3", "pcomb"];

type Derivs = Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>;

/// A smooth test function `f`, with `eval(x, i) = f^{(i)}(x)`.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    derivs: Derivs,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction").field("name", &self.name).finish()
    }
}

impl TestFunction {
    /// `rec` is needed only by `pcomb`, which is built from orthonormal polynomials.
    pub fn by_name(name: &str, rec: &Arc<RecurrenceTable>) -> Result<Self> {
        let derivs: Derivs = match name {
            "sin" => Arc::new(|x: f64, i| match i % 4 {
                0 => x.sin(),
                1 => x.cos(),
                2 => -x.sin(),
                _ => -x.cos(),
            }),
            "arctan" => Arc::new(|x: f64, i| {
                let s = 1.0 + x * x;
                match i {
                    0 => x.atan(),
                    1 => 1.0 / s,
                    2 => -2.0 * x / (s * s),
                    _ => (6.0 * x * x - 2.0) / (s * s * s),
                }
            }),
            "xgauss" => Arc::new(|x: f64, i| {
                let g = (-0.5 * x * x).exp();
                let x2 = x * x;
                g * match i {
                    0 => x,
                    1 => 1.0 - x2,
                    2 => x * (x2 - 3.0),
                    _ => -x2 * x2 + 6.0 * x2 - 3.0,
                }
            }),
            "abs3" => Arc::new(|x: f64, i| {
                let e2 = ABS3_EPS * ABS3_EPS;
                let s = x * x + e2;
                let r = s.sqrt();
                match i {
                    0 => s * r,
                    1 => 3.0 * x * r,
                    2 => (6.0 * x * x + 3.0 * e2) / r,
                    _ => (6.0 * x * x * x + 9.0 * e2 * x) / (s * r),
                }
            }),
            "pcomb" => {
                let deg = PCOMB.iter().map(|t| t.0).max().unwrap_or(0);
                let mut c = vec![0.0; deg + 1];
                for &(k, v) in &PCOMB {
                    c[k] = v;
                }
                let p = BasisPoly::new(rec.clone(), c)?;
                Arc::new(move |x: f64, i| p.derivative_at(x, i))
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown test function `{other}` (known: {})",
                    NAMES.join(", ")
                )))
            }
        };
        Ok(Self { name: name.to_string(), derivs })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `f^{(i)}(x)` for `i <= MAX_DERIVATIVE`.
    pub fn eval(&self, x: f64, i: usize) -> f64 {
        debug_assert!(i <= MAX_DERIVATIVE);
        (self.derivs)(x, i)
    }

    /// `f^{(i)}` as a closure.
    pub fn deriv(&self, i: usize) -> impl Fn(f64) -> f64 + Send + Sync + '_ {
        move |x| self.eval(x, i)
    }

    /// Degree if `f` is a polynomial.
    pub fn poly_degree(&self) -> Option<usize> {
        (self.name == "pcomb").then(|| PCOMB.iter().map(|t| t.0).max().unwrap_or(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightSpec;

    #[test]
    fn derivatives_match_differences() {
        let rec = Arc::new(RecurrenceTable::for_weight(WeightSpec::freud(2.0).unwrap(), 8).unwrap());
        let h = 1e-5;
        for name in NAMES {
            let f = TestFunction::by_name(name, &rec).unwrap();
            for &x in &[-1.7, -0.3, 0.0, 0.45, 2.2] {
                for i in 0..MAX_DERIVATIVE {
                    let fd = (f.eval(x + h, i) - f.eval(x - h, i)) / (2.0 * h);
                    let d = f.eval(x, i + 1);
                    assert!((fd - d).abs() < 1e-6 * (1.0 + d.abs()), "{name} order {i} at {x}: {fd} vs {d}");
                }
            }
        }
        assert!(TestFunction::by_name("cosh", &rec).is_err());
    }
}
