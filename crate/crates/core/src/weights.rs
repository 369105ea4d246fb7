//! Even exponential weights `w = exp(-Q)` on the real line.
//!
//! Two closed-form families are built in: Freud weights `Q(x) = |x|^alpha`
//! and the iterated-exponential family
//! `Q(x) = |x|^u (exp_l(|x|^alpha) - exp_l(0))`. Arbitrary even `Q` can be
//! supplied as callables through [`WeightSpec::custom`].
//!
//! Whenever a value is multiplied by a power of `w`, the product is formed in
//! the log domain (see [`WeightSpec::mul_weight`]): `w` underflows long before
//! the polynomial factors it multiplies overflow.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deepest supported iterate for `exp_l`.
pub const MAX_EXP_DEPTH: u32 = 3;

/// Point at which `T(0)` is sampled for families without a closed-form limit.
const T_ZERO_PROBE: f64 = 1e-6;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied `Q`, `Q'` and `Q''`.
#[derive(Clone)]
pub struct CustomQ {
    pub label: String,
    pub q: RealFn,
    pub dq: RealFn,
    pub d2q: RealFn,
    /// `Q(x) = sum c |x|^e`, kept so the weight can round-trip through JSON.
    terms: Option<Vec<(f64, f64)>>,
}

impl fmt::Debug for CustomQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomQ").field("label", &self.label).finish()
    }
}

#[derive(Clone, Debug)]
pub enum WeightFamily {
    Freud { alpha: f64 },
    ErdosExpL { u: f64, alpha: f64, l: u32 },
    Custom(CustomQ),
}

/// An even exponential weight together with the constants recorded by
/// [`WeightSpec::check_class`].
#[derive(Clone, Debug)]
pub struct WeightSpec {
    family: WeightFamily,
    /// Empirical lower bound of `T`, filled in by [`WeightSpec::record_class`].
    pub lambda_lower: Option<f64>,
    /// Exponent used for the `F_lambda` growth check.
    pub lambda_exponent: Option<f64>,
}

impl WeightSpec {
    pub fn freud(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Config(format!("Freud exponent must be positive, got {alpha}")));
        }
        Ok(Self::from_family(WeightFamily::Freud { alpha }))
    }

    pub fn erdos(u: f64, alpha: f64, l: u32) -> Result<Self> {
        if !(u >= 0.0 && alpha > 0.0 && u + alpha > 1.0) {
            return Err(Error::Config(format!(
                "iterated-exponential weight needs u >= 0, alpha > 0, u + alpha > 1 (got u={u}, alpha={alpha})"
            )));
        }
        if l == 0 || l > MAX_EXP_DEPTH {
            return Err(Error::Config(format!("exp depth l must be in 1..={MAX_EXP_DEPTH}, got {l}")));
        }
        Ok(Self::from_family(WeightFamily::ErdosExpL { u, alpha, l }))
    }

    /// The weight `exp(-(exp(x^2) - 1))` used throughout the verification runs.
    pub fn erdos_default() -> Self {
        Self::from_family(WeightFamily::ErdosExpL { u: 0.0, alpha: 2.0, l: 1 })
    }

    pub fn custom<Q, D, D2>(label: impl Into<String>, q: Q, dq: D, d2q: D2) -> Self
    where
        Q: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_family(WeightFamily::Custom(CustomQ {
            label: label.into(),
            q: Arc::new(q),
            dq: Arc::new(dq),
            d2q: Arc::new(d2q),
            terms: None,
        }))
    }

    /// `Q(x) = sum_i c_i |x|^{e_i}`.
    pub fn power_sum(terms: Vec<(f64, f64)>) -> Result<Self> {
        if terms.is_empty() || terms.iter().any(|&(c, e)| !(c > 0.0 && e > 1.0)) {
            return Err(Error::Config(
                "custom power-sum terms need positive coefficients and exponents > 1".into(),
            ));
        }
        let t1 = terms.clone();
        let t2 = terms.clone();
        let t3 = terms.clone();
        let q = move |x: f64| t1.iter().map(|&(c, e)| c * x.abs().powf(e)).sum::<f64>();
        let dq = move |x: f64| {
            x.signum() * t2.iter().map(|&(c, e)| c * e * x.abs().powf(e - 1.0)).sum::<f64>()
        };
        let d2q = move |x: f64| {
            t3.iter()
                .map(|&(c, e)| c * e * (e - 1.0) * x.abs().powf(e - 2.0))
                .sum::<f64>()
        };
        let label = terms
            .iter()
            .map(|(c, e)| format!("{c}|x|^{e}"))
            .collect::<Vec<_>>()
            .join("+");
        let mut spec = Self::custom(label, q, dq, d2q);
        if let WeightFamily::Custom(c) = &mut spec.family {
            c.terms = Some(terms);
        }
        Ok(spec)
    }

    fn from_family(family: WeightFamily) -> Self {
        Self { family, lambda_lower: None, lambda_exponent: None }
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    /// Short identifier used in report rows and file names.
    pub fn label(&self) -> String {
        match &self.family {
            WeightFamily::Freud { alpha } => format!("freud:{alpha}"),
            WeightFamily::ErdosExpL { u, alpha, l } => format!("erdos:{u},{alpha},{l}"),
            WeightFamily::Custom(c) => format!("custom:{}", c.label),
        }
    }

    /// Parses `freud:<alpha>`, `erdos`, `erdos:<u>,<alpha>,<l>` or a JSON object.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            let cfg: WeightConfig = serde_json::from_str(s)?;
            return cfg.build();
        }
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let nums = |a: &str| -> Result<Vec<f64>> {
            a.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad number `{t}` in weight `{s}`")))
                })
                .collect()
        };
        match (name, args) {
            ("freud", Some(a)) => {
                let v = nums(a)?;
                if v.len() != 1 {
                    return Err(Error::Config(format!("freud takes one parameter: `{s}`")));
                }
                Self::freud(v[0])
            }
            ("freud", None) => Self::freud(2.0),
            ("erdos", None) => Ok(Self::erdos_default()),
            ("erdos", Some(a)) => {
                let v = nums(a)?;
                if v.len() != 3 || v[2].fract() != 0.0 || v[2] < 1.0 {
                    return Err(Error::Config(format!("erdos takes u,alpha,l: `{s}`")));
                }
                Self::erdos(v[0], v[1], v[2] as u32)
            }
            _ => Err(Error::Config(format!("unknown weight `{s}`"))),
        }
    }

    pub fn to_config(&self) -> Option<WeightConfig> {
        match &self.family {
            WeightFamily::Freud { alpha } => Some(WeightConfig {
                family: "freud".into(),
                alpha: Some(*alpha),
                u: None,
                l: None,
                terms: None,
            }),
            WeightFamily::ErdosExpL { u, alpha, l } => Some(WeightConfig {
                family: "erdos".into(),
                alpha: Some(*alpha),
                u: Some(*u),
                l: Some(*l),
                terms: None,
            }),
            WeightFamily::Custom(c) => c.terms.as_ref().map(|t| WeightConfig {
                family: "custom".into(),
                alpha: None,
                u: None,
                l: None,
                terms: Some(t.clone()),
            }),
        }
    }

    pub fn is_freud(&self) -> bool {
        matches!(self.family, WeightFamily::Freud { .. })
    }

    /// `Q(x)`; `+inf` when the iterated exponential overflows.
    pub fn q(&self, x: f64) -> f64 {
        let s = x.abs();
        match &self.family {
            WeightFamily::Freud { alpha } => s.powf(*alpha),
            WeightFamily::ErdosExpL { u, alpha, l } => {
                if s == 0.0 {
                    return 0.0;
                }
                let g = exp_l_shifted(s.powf(*alpha), *l);
                if *u == 0.0 {
                    g
                } else {
                    s.powf(*u) * g
                }
            }
            WeightFamily::Custom(c) => (c.q)(x),
        }
    }

    /// `Q(x)` with overflow reported as an error.
    pub fn q_checked(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("non-finite argument {x}")));
        }
        let v = self.q(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow { x })
        }
    }

    /// `log w(x) = -Q(x)`.
    pub fn log_w(&self, x: f64) -> f64 {
        -self.q(x)
    }

    pub fn w(&self, x: f64) -> f64 {
        (-self.q(x)).exp()
    }

    /// `Q'(x)`, odd in `x`.
    pub fn dq(&self, x: f64) -> f64 {
        let s = x.abs();
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        match &self.family {
            WeightFamily::Freud { alpha } => {
                if s == 0.0 {
                    return 0.0;
                }
                sign * alpha * s.powf(alpha - 1.0)
            }
            WeightFamily::ErdosExpL { u, alpha, l } => {
                if s == 0.0 {
                    return 0.0;
                }
                let (g, dg, _) = erdos_g_parts(s, *alpha, *l);
                let v = if *u == 0.0 { dg } else { u * s.powf(u - 1.0) * g + s.powf(*u) * dg };
                sign * v
            }
            WeightFamily::Custom(c) => (c.dq)(x),
        }
    }

    /// `Q''(x)`, even in `x`. At `x = 0` the one-sided limit is sampled.
    pub fn d2q(&self, x: f64) -> f64 {
        let s = if x == 0.0 { 1e-8 } else { x.abs() };
        match &self.family {
            WeightFamily::Freud { alpha } => alpha * (alpha - 1.0) * s.powf(alpha - 2.0),
            WeightFamily::ErdosExpL { u, alpha, l } => {
                let (g, dg, d2g) = erdos_g_parts(s, *alpha, *l);
                if *u == 0.0 {
                    d2g
                } else {
                    u * (u - 1.0) * s.powf(u - 2.0) * g
                        + 2.0 * u * s.powf(u - 1.0) * dg
                        + s.powf(*u) * d2g
                }
            }
            WeightFamily::Custom(c) => (c.d2q)(x),
        }
    }

    /// `T(x) = x Q'(x) / Q(x)`.
    ///
    /// `T(0)` is `alpha` for Freud weights and the value at `1e-6` for the
    /// iterated-exponential family; custom weights have no value at 0.
    pub fn t(&self, x: f64) -> Result<f64> {
        match &self.family {
            WeightFamily::Freud { alpha } => Ok(*alpha),
            WeightFamily::ErdosExpL { u, alpha, l } => {
                let s = if x == 0.0 { T_ZERO_PROBE } else { x.abs() };
                let y = s.powf(*alpha);
                // T = u + alpha * y * E_l'(y) / (E_l(y) - E_l(0)), ratio taken in logs.
                let log_ratio = log_exp_l_derivative(y, *l) - log_exp_l_shifted(y, *l);
                let v = u + alpha * y * log_ratio.exp();
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Overflow { x })
                }
            }
            WeightFamily::Custom(c) => {
                if x == 0.0 {
                    return Err(Error::Domain("T(0) is undefined for a custom weight".into()));
                }
                let v = x * (c.dq)(x) / (c.q)(x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Overflow { x })
                }
            }
        }
    }

    /// `value * w(x)^power`, computed as `sign * exp(ln|value| - power * Q(x))`.
    pub fn mul_weight(&self, value: f64, x: f64, power: f64) -> f64 {
        if value == 0.0 {
            return 0.0;
        }
        let q = self.q(x);
        if q == f64::INFINITY {
            return 0.0;
        }
        value.signum() * (value.abs().ln() - power * q).exp()
    }

    /// Empirical membership report for the class conditions over `grid`.
    pub fn check_class(&self, grid: &[f64]) -> ClassReport {
        check_class(self, grid)
    }

    /// Runs [`check_class`] and records `Lambda` on the spec.
    pub fn record_class(&mut self, grid: &[f64], lambda_exponent: f64) -> ClassReport {
        self.lambda_exponent = Some(lambda_exponent);
        let report = check_class(self, grid);
        self.lambda_lower = Some(report.lambda_lower);
        report
    }
}

/// JSON form of a weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<(f64, f64)>>,
}

impl WeightConfig {
    pub fn build(&self) -> Result<WeightSpec> {
        match self.family.as_str() {
            "freud" => WeightSpec::freud(self.alpha.unwrap_or(2.0)),
            "erdos" => WeightSpec::erdos(
                self.u.unwrap_or(0.0),
                self.alpha.unwrap_or(2.0),
                self.l.unwrap_or(1),
            ),
            "custom" => WeightSpec::power_sum(
                self.terms
                    .clone()
                    .ok_or_else(|| Error::Config("custom weight needs `terms`".into()))?,
            ),
            other => Err(Error::Config(format!("unknown weight family `{other}`"))),
        }
    }
}

impl Serialize for WeightSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.to_config() {
            Some(cfg) => cfg.serialize(s),
            None => Err(serde::ser::Error::custom(
                "callable custom weights cannot be serialized",
            )),
        }
    }
}

impl<'de> Deserialize<'de> for WeightSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let cfg = WeightConfig::deserialize(d)?;
        cfg.build().map_err(serde::de::Error::custom)
    }
}

// --- iterated exponential ------------------------------------------------

/// `E_j(0)` for `j = 0..=3`: 0, 1, e, e^e.
fn exp_l_at_zero(j: u32) -> f64 {
    let mut v = 0.0f64;
    for _ in 0..j {
        v = v.exp();
    }
    v
}

/// `E_j(y)` with `E_0(y) = y`.
fn exp_iter(y: f64, j: u32) -> f64 {
    let mut v = y;
    for _ in 0..j {
        v = v.exp();
        if !v.is_finite() {
            return f64::INFINITY;
        }
    }
    v
}

/// `E_l(y) - E_l(0)` via the cancellation-free recursion
/// `D_j = E_j(0) * expm1(D_{j-1})`, `D_0 = y`.
fn exp_l_shifted(y: f64, l: u32) -> f64 {
    let mut d = y;
    for j in 1..=l {
        d = exp_l_at_zero(j) * d.exp_m1();
        if !d.is_finite() {
            return f64::INFINITY;
        }
    }
    d
}

/// `ln(E_l(y) - E_l(0))` without overflow for moderately large `y`.
fn log_exp_l_shifted(y: f64, l: u32) -> f64 {
    // ln D_l = E_{l-1}(0) + ln expm1(D_{l-1})
    let prev = exp_l_shifted(y, l - 1);
    let lead = exp_l_at_zero(l - 1);
    let ln_expm1 = if prev > 30.0 {
        prev + (-(-prev).exp()).ln_1p()
    } else {
        prev.exp_m1().ln()
    };
    lead + ln_expm1
}

/// `ln E_l'(y) = sum_{j=0}^{l-1} E_j(y)`.
fn log_exp_l_derivative(y: f64, l: u32) -> f64 {
    (0..l).map(|j| exp_iter(y, j)).sum()
}

/// `(g, g', g'')` for `g(s) = E_l(s^alpha) - E_l(0)`, `s > 0`.
fn erdos_g_parts(s: f64, alpha: f64, l: u32) -> (f64, f64, f64) {
    let y = s.powf(alpha);
    let g = exp_l_shifted(y, l);
    let log_de = log_exp_l_derivative(y, l);
    let de = log_de.exp();
    // (ln E_l')' = sum_{j=1}^{l} E_{j-1}'(y), E_0' = 1, E_j' = prod_{i<=j} E_i
    let mut dlog = 0.0;
    let mut prod = 1.0;
    for j in 1..=l {
        dlog += prod;
        prod *= exp_iter(y, j);
    }
    let d2e = de * dlog;
    let dy = alpha * s.powf(alpha - 1.0);
    let d2y = alpha * (alpha - 1.0) * s.powf(alpha - 2.0);
    let dg = de * dy;
    let d2g = d2e * dy * dy + de * d2y;
    (g, dg, d2g)
}

// --- class membership -------------------------------------------------------

/// Per-condition pass/fail with the empirical constants behind each verdict.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassReport {
    /// (a) `Q(0) = 0` and `Q'` finite near 0.
    pub cond_a: bool,
    /// (b) `Q'' > 0` off the origin.
    pub cond_b: bool,
    /// (c) `Q` increasing on the positive grid.
    pub cond_c: bool,
    /// (d) `T` quasi-increasing and `T >= Lambda > 1`.
    pub cond_d: bool,
    /// (e) `Q''/|Q'| <= C |Q'|/Q` with finite `C`.
    pub cond_e: bool,
    pub even: bool,
    /// `min T` over the grid.
    pub lambda_lower: f64,
    /// `max_{x<y} T(x)/T(y)`; 1 when `T` is nondecreasing.
    pub quasi_increasing_constant: f64,
    /// `sup (Q''/|Q'|) / (|Q'|/Q)`.
    pub cond_e_constant: f64,
    /// `sup (|Q'|/Q) / (Q''/|Q'|)` outside `[-1, 1]`.
    pub cond_e_reverse_constant: f64,
    /// Exponent used for the `F_lambda` growth check.
    pub lambda_exponent: f64,
    /// `sup_{|x|>=1} |Q'|/Q^lambda`.
    pub f_lambda_sup: f64,
    pub f_lambda_bounded: bool,
    /// `T(x_max)/T(1)`, `x_max = max(4, grid max)`.
    pub t_growth: f64,
    pub erdos_type: bool,
}

impl ClassReport {
    pub fn in_class(&self) -> bool {
        self.cond_a && self.cond_b && self.cond_c && self.cond_d && self.cond_e && self.even
    }
}

/// 512 points: 256 log-spaced magnitudes in `[radius/1000, radius]`, mirrored.
pub fn default_class_grid(radius: f64) -> Vec<f64> {
    let n = 256;
    let lo = (radius * 1e-3).ln();
    let hi = radius.ln();
    let pos: Vec<f64> = (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect();
    let mut grid: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
    grid.extend(pos);
    grid
}

fn default_lambda(spec: &WeightSpec) -> f64 {
    match spec.family {
        WeightFamily::Freud { .. } => 1.0,
        _ => 1.5,
    }
}

fn check_class(spec: &WeightSpec, grid: &[f64]) -> ClassReport {
    let lambda_exponent = spec.lambda_exponent.unwrap_or_else(|| default_lambda(spec));
    let mut pos: Vec<f64> = grid.iter().map(|x| x.abs()).filter(|&x| x > 0.0).collect();
    pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pos.dedup();

    let even = grid.iter().all(|&x| {
        let (a, b) = (spec.q(x), spec.q(-x));
        a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
    });

    let q0 = spec.q(0.0);
    let cond_a = q0.abs() <= 1e-14 && pos.first().is_none_or(|&x| spec.dq(x).is_finite());
    let cond_b = grid.iter().filter(|&&x| x != 0.0).all(|&x| spec.d2q(x) > 0.0);
    let qs: Vec<f64> = pos.iter().map(|&x| spec.q(x)).collect();
    let cond_c = qs.windows(2).all(|w| w[1] > w[0]) && qs.iter().all(|&q| q >= 0.0);

    let ts: Vec<f64> = pos.iter().filter_map(|&x| spec.t(x).ok()).collect();
    let lambda_lower = ts.iter().cloned().fold(f64::INFINITY, f64::min);
    // max_{x<y} T(x)/T(y): running max of T from the left over T at each y
    let mut running = 0.0f64;
    let mut quasi = 1.0f64;
    for &t in &ts {
        running = running.max(t);
        quasi = quasi.max(running / t);
    }
    let cond_d = ts.len() == pos.len() && lambda_lower > 1.0 + 1e-9 && quasi.is_finite();

    let mut cond_e_constant = 0.0f64;
    let mut cond_e_reverse_constant = 0.0f64;
    for &x in &pos {
        let (q, dq, d2q) = (spec.q(x), spec.dq(x), spec.d2q(x));
        if !(q > 0.0 && dq > 0.0 && q.is_finite() && d2q.is_finite()) {
            continue;
        }
        let lhs = d2q / dq;
        let rhs = dq / q;
        cond_e_constant = cond_e_constant.max(lhs / rhs);
        if x > 1.0 {
            cond_e_reverse_constant = cond_e_reverse_constant.max(rhs / lhs);
        }
    }
    let cond_e = cond_e_constant.is_finite() && cond_e_constant > 0.0;

    let tail: Vec<(f64, f64)> = pos
        .iter()
        .filter(|&&x| x >= 1.0)
        .map(|&x| (x, spec.dq(x) / spec.q(x).powf(lambda_exponent)))
        .filter(|(_, v)| v.is_finite())
        .collect();
    let f_lambda_sup = tail.iter().map(|p| p.1).fold(0.0, f64::max);
    let f_lambda_bounded = match tail.last() {
        Some(&(xm, vm)) => {
            let half = tail
                .iter()
                .min_by(|a, b| (a.0 - xm / 2.0).abs().partial_cmp(&(b.0 - xm / 2.0).abs()).unwrap())
                .unwrap()
                .1;
            vm <= half * (1.0 + 1e-9) || tail.len() < 2
        }
        None => true,
    };

    let x_max = pos.last().copied().unwrap_or(1.0).max(4.0);
    let t_growth = match (spec.t(x_max), spec.t(1.0)) {
        (Ok(a), Ok(b)) => a / b,
        _ => f64::INFINITY,
    };

    ClassReport {
        cond_a,
        cond_b,
        cond_c,
        cond_d,
        cond_e,
        even,
        lambda_lower,
        quasi_increasing_constant: quasi,
        cond_e_constant,
        cond_e_reverse_constant,
        lambda_exponent,
        f_lambda_sup,
        f_lambda_bounded,
        t_growth,
        erdos_type: t_growth > 10.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_values() {
        let f2 = WeightSpec::freud(2.0).unwrap();
        assert_eq!(f2.q(3.0), 9.0);
        let e = WeightSpec::erdos_default();
        assert_eq!(e.q(0.0), 0.0);
        assert!((e.q(1.0) - (std::f64::consts::E - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn log_weight_values() {
        let f2 = WeightSpec::freud(2.0).unwrap();
        assert_eq!(f2.log_w(0.0), 0.0);
        assert_eq!(f2.log_w(2.0), -4.0);
        let e = WeightSpec::erdos(1.0, 1.0, 1).unwrap();
        assert!((e.log_w(1.0) + (std::f64::consts::E - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn t_values() {
        let f4 = WeightSpec::freud(4.0).unwrap();
        assert_eq!(f4.t(1.7).unwrap(), 4.0);
        let f2 = WeightSpec::freud(2.0).unwrap();
        assert_eq!(f2.t(-5.0).unwrap(), 2.0);
        let e = WeightSpec::erdos_default();
        let x: f64 = 6.0;
        let t = e.t(x).unwrap();
        assert!((t / (2.0 * x * x) - 1.0).abs() < 1e-12);
        // T at the origin is the small-x limit 2
        assert!((e.t(0.0).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let specs = [
            WeightSpec::erdos_default(),
            WeightSpec::erdos(1.0, 1.5, 1).unwrap(),
            WeightSpec::erdos(0.5, 1.0, 2).unwrap(),
            WeightSpec::freud(3.5).unwrap(),
        ];
        for s in &specs {
            for &x in &[0.3, 0.9, 1.4] {
                let h = 1e-5;
                let fd1 = (s.q(x + h) - s.q(x - h)) / (2.0 * h);
                let fd2 = (s.dq(x + h) - s.dq(x - h)) / (2.0 * h);
                assert!((fd1 - s.dq(x)).abs() <= 1e-7 * s.dq(x).abs().max(1.0), "{}", s.label());
                assert!((fd2 - s.d2q(x)).abs() <= 1e-6 * s.d2q(x).abs().max(1.0), "{}", s.label());
                let t = x * s.dq(x) / s.q(x);
                assert!((t - s.t(x).unwrap()).abs() <= 1e-12 * t);
            }
        }
    }

    #[test]
    fn overflow_is_reported() {
        let e = WeightSpec::erdos(0.0, 2.0, 2).unwrap();
        assert!(matches!(e.q_checked(30.0), Err(Error::Overflow { .. })));
        assert_eq!(e.w(30.0), 0.0);
        assert_eq!(e.mul_weight(1e300, 30.0, 2.0), 0.0);
    }

    #[test]
    fn custom_t_at_zero_is_domain_error() {
        let c = WeightSpec::power_sum(vec![(1.0, 2.0), (1.0, 4.0)]).unwrap();
        assert!(matches!(c.t(0.0), Err(Error::Domain(_))));
        assert!((c.t(1.0).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn class_checks() {
        let grid: Vec<f64> = (1..=100)
            .flat_map(|i| [-(i as f64) * 0.1, i as f64 * 0.1])
            .collect();
        let r = WeightSpec::freud(2.0).unwrap().check_class(&grid);
        assert!(r.in_class());
        assert!((r.lambda_lower - 2.0).abs() < 1e-14);
        assert!(r.f_lambda_bounded);
        assert!(!r.erdos_type);

        let r1 = WeightSpec::freud(1.0).unwrap().check_class(&grid);
        assert!(!r1.cond_d);

        let re = WeightSpec::erdos_default().check_class(&default_class_grid(2.5));
        assert!(re.in_class());
        assert!(re.erdos_type);
        assert!(re.f_lambda_bounded);
    }

    #[test]
    fn json_round_trip() {
        for s in ["freud:4", "erdos", "erdos:1,1,2"] {
            let w = WeightSpec::parse(s).unwrap();
            let j = serde_json::to_string(&w).unwrap();
            let back: WeightSpec = serde_json::from_str(&j).unwrap();
            assert_eq!(back.label(), w.label());
        }
        let w = WeightSpec::parse(r#"{"family":"custom","terms":[[1.0,2.0],[0.5,4.0]]}"#).unwrap();
        assert!((w.q(2.0) - 12.0).abs() < 1e-12);
        assert!(WeightSpec::parse("gauss").is_err());
        assert!(WeightSpec::parse("erdos:0,2").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn q_and_t_are_even(x in 0.01f64..3.0, alpha in 1.2f64..5.0) {
                let f = WeightSpec::freud(alpha).unwrap();
                prop_assert_eq!(f.q(x), f.q(-x));
                prop_assert_eq!(f.t(x).unwrap(), f.t(-x).unwrap());
                let e = WeightSpec::erdos(0.5, alpha, 1).unwrap();
                let (a, b) = (e.q(x), e.q(-x));
                prop_assert!((a - b).abs() <= 1e-12 * a);
                let (ta, tb) = (e.t(x).unwrap(), e.t(-x).unwrap());
                prop_assert!((ta - tb).abs() <= 1e-12 * ta);
            }

            #[test]
            fn dq_positive_on_positive_axis(x in 0.01f64..3.0) {
                prop_assert!(WeightSpec::erdos_default().dq(x) > 0.0);
                prop_assert!(WeightSpec::freud(2.5).unwrap().dq(x) > 0.0);
            }
        }
    }
}
