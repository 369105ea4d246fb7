//! Inner-product engine for integrals against `w^2`.
//!
//! [`build_rule`] produces a composite Gauss–Legendre rule on `[-R, R]`
//! whose weights already contain `w^2(node)`. The radius comes from the MRS
//! numbers: the mass of `P^2 w^2` for `deg P <= m` lives inside about `a_{2m}`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::mrs::MrsTable;
use crate::numeric::brent;
use crate::weights::WeightSpec;

/// Largest `2 Q(R)` kept at the truncation radius; `exp(-690)` is still a
/// normal double.
const MAX_LOG_DECAY: f64 = 690.0;
/// Tail bound required when the radius has to be pulled in.
const MIN_LOG_DECAY: f64 = 69.1; // exp(-69.1) < 1e-30

const DEFAULT_PANELS: usize = 32;
const POINTS_PER_PANEL: usize = 24;
const MAX_NODES: usize = 1 << 14;
const EXACTNESS_TOL: f64 = 1e-9;

/// Gauss–Legendre nodes (increasing) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 1.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * pp * pp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Cached Gauss–Legendre rule; rules are computed once per size.
pub fn gauss_legendre_cached(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return r.clone();
    }
    let rule = Arc::new(gauss_legendre(n));
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

/// Integrates `f` over `[a, b]` with a Gauss–Legendre rule.
pub fn gl_integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(&x, &w)| w * f(c + h * x))
        .sum::<f64>()
        * h
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Returns `(value, error_estimate)`; the estimate is below
/// `max(abs_tol, rel_tol |value|)` unless the subdivision cap was hit.
pub fn adaptive_integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    let mut intervals = vec![{
        let (v, e) = gk15(&mut f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..4000 {
        let total: f64 = intervals.iter().map(|i| i.2).sum();
        let err: f64 = intervals.iter().map(|i| i.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    intervals.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    (
        intervals.iter().map(|i| i.2).sum(),
        intervals.iter().map(|i| i.3).sum(),
    )
}

/// Composite Gauss–Legendre rule for `int f(t) w^2(t) dt` on `[-R, R]`.
#[derive(Clone, Debug)]
pub struct QuadRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    radius: f64,
    target_degree: usize,
    /// True when `R` was pulled in to keep `w^2(R)` representable.
    pub radius_reduced: bool,
    pub panels: usize,
}

impl QuadRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights with `w^2(node)` folded in.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn target_degree(&self) -> usize {
        self.target_degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_i weight_i f(node_i)`, summing mirrored nodes pairwise so odd
    /// integrands cancel exactly.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<f64> {
        let values: Vec<f64> = self.nodes.iter().map(|&x| f(x)).collect();
        self.integrate_values(&values)
    }

    /// Same as [`QuadRule::integrate`] for values already sampled at the nodes.
    pub fn integrate_values(&self, values: &[f64]) -> Result<f64> {
        assert_eq!(values.len(), self.nodes.len());
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { x: self.nodes[i] });
        }
        let n = self.nodes.len();
        let mut sum = 0.0;
        for i in 0..n / 2 {
            let j = n - 1 - i;
            sum += self.weights[i] * (values[i] + values[j]);
        }
        if n % 2 == 1 {
            sum += self.weights[n / 2] * values[n / 2];
        }
        Ok(sum)
    }
}

/// `R = a_{2m} (1 + 2 delta_{2m})`, pulled in if `2 Q(R)` would underflow `w^2`.
pub fn truncation_radius(table: &MrsTable, degree: usize) -> Result<(f64, bool)> {
    let m2 = 2.0 * degree.max(1) as f64;
    let a = table.compute_a(m2)?;
    let r = a * (1.0 + 2.0 * table.delta(m2)?);
    let weight = table.weight();
    let decay = 2.0 * weight.q(r);
    if decay.is_finite() && decay <= MAX_LOG_DECAY {
        return Ok((r, false));
    }
    let rr = brent(
        |x| Ok(2.0 * weight.q(x) - MAX_LOG_DECAY),
        0.0,
        r,
        1e-12,
        0.0,
        200,
    )?;
    if 2.0 * weight.q(rr) < MIN_LOG_DECAY {
        return Err(Error::Quadrature(format!(
            "cannot truncate at R = {r}: exp(-2Q) tail bound fails"
        )));
    }
    Ok((rr, true))
}

fn composite_rule(weight: &WeightSpec, radius: f64, panels: usize, base: &(Vec<f64>, Vec<f64>)) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    // positive half, then mirrored
    let half = panels / 2;
    let h = radius / half as f64;
    let mut pos = Vec::with_capacity(half * base.0.len());
    let mut pos_w = Vec::with_capacity(half * base.0.len());
    for p in 0..half {
        let lo = p as f64 * h;
        for (&x, &w) in base.0.iter().zip(&base.1) {
            pos.push(lo + 0.5 * h * (x + 1.0));
            pos_w.push(0.5 * h * w);
        }
    }
    let n = pos.len();
    let mut nodes = Vec::with_capacity(2 * n);
    let mut log_weights = Vec::with_capacity(2 * n);
    for i in (0..n).rev() {
        nodes.push(-pos[i]);
        log_weights.push(pos_w[i].ln() - 2.0 * weight.q(pos[i]));
    }
    for i in 0..n {
        nodes.push(pos[i]);
        log_weights.push(pos_w[i].ln() - 2.0 * weight.q(pos[i]));
    }
    let weights = log_weights.iter().map(|l| l.exp()).collect();
    (nodes, weights, log_weights)
}

fn moments(nodes: &[f64], weights: &[f64], degree: usize) -> Vec<f64> {
    (0..=degree)
        .step_by(2)
        .map(|k| {
            nodes
                .iter()
                .zip(weights)
                .map(|(&x, &w)| w * x.powi(k as i32))
                .sum()
        })
        .collect()
}

/// Builds a rule integrating `t^k w^2(t)` exactly (to `1e-9` relative against
/// a doubled-panel rule) for `k <= degree`.
pub fn build_rule(table: &MrsTable, degree: usize) -> Result<QuadRule> {
    if degree < 1 {
        return Err(Error::Quadrature("degree must be at least 1".into()));
    }
    let weight = table.weight();
    let (radius, reduced) = truncation_radius(table, degree)?;
    let base = gauss_legendre_cached(POINTS_PER_PANEL);
    let mut panels = DEFAULT_PANELS;
    let (mut nodes, mut weights, mut log_weights) = composite_rule(weight, radius, panels, &base);
    loop {
        let (n2, w2, l2) = composite_rule(weight, radius, 2 * panels, &base);
        let m1 = moments(&nodes, &weights, degree);
        let m2 = moments(&n2, &w2, degree);
        let ok = m1
            .iter()
            .zip(&m2)
            .all(|(a, b)| (a - b).abs() <= EXACTNESS_TOL * b.abs());
        if ok {
            break;
        }
        if n2.len() > MAX_NODES {
            return Err(Error::Quadrature(format!(
                "no exact rule for degree {degree} within {MAX_NODES} nodes"
            )));
        }
        panels *= 2;
        nodes = n2;
        weights = w2;
        log_weights = l2;
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::Quadrature("non-positive quadrature weight".into()));
    }
    Ok(QuadRule {
        nodes,
        weights,
        log_weights,
        radius,
        target_degree: degree,
        radius_reduced: reduced,
        panels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightSpec;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_is_exact() {
        let r = gauss_legendre(24);
        for k in 0..48 {
            let v: f64 = r.0.iter().zip(&r.1).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((v - exact).abs() < 1e-14, "k={k}");
        }
        let r5 = gauss_legendre(5);
        assert_eq!(r5.0[2], 0.0);
    }

    #[test]
    fn adaptive_handles_kinks() {
        let (v, _) = adaptive_integrate(|x: f64| x.abs(), -1.0, 2.0, 1e-14, 1e-13);
        assert!((v - 2.5).abs() < 1e-12);
        let (e, _) = adaptive_integrate(|x: f64| x.exp(), 0.0, 1.0, 1e-15, 1e-14);
        assert!((e - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    fn freud2_rule(degree: usize) -> QuadRule {
        let table = MrsTable::new(WeightSpec::freud(2.0).unwrap());
        build_rule(&table, degree).unwrap()
    }

    #[test]
    fn gaussian_integrals() {
        let rule = freud2_rule(10);
        let total = rule.integrate(|_| 1.0).unwrap();
        assert!((total - (PI / 2.0).sqrt()).abs() < 1e-10);
        assert_eq!(rule.integrate(|t| t).unwrap(), 0.0);
        let m2 = rule.integrate(|t| t * t).unwrap();
        assert!((m2 - 0.25 * (PI / 2.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn rule_shape() {
        let rule = freud2_rule(20);
        let n = rule.len();
        assert!(rule.nodes().windows(2).all(|w| w[1] > w[0]));
        for i in 0..n {
            assert_eq!(rule.nodes()[i], -rule.nodes()[n - 1 - i]);
        }
        assert!(rule.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let rule = freud2_rule(4);
        let err = rule.integrate(|t| if t > 1.0 { f64::NAN } else { 1.0 }).unwrap_err();
        assert!(matches!(err, Error::NonFinite { x } if x > 1.0));
    }

    #[test]
    fn erdos_radius_is_pulled_in() {
        let table = MrsTable::new(WeightSpec::erdos_default());
        let rule = build_rule(&table, 82).unwrap();
        let w = table.weight();
        assert!(2.0 * w.q(rule.radius()) <= MAX_LOG_DECAY + 1e-6);
        assert!(rule.weights().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn tail_mass_is_negligible() {
        let m = 20usize;
        let table = MrsTable::new(WeightSpec::freud(2.0).unwrap());
        let rule = build_rule(&table, m).unwrap();
        let cut = table.compute_a(m as f64).unwrap() * (1.0 + 2.0 * table.delta(m as f64).unwrap());
        let f = |t: f64| t.powi(m as i32);
        let total = rule.integrate(f).unwrap();
        let tail: f64 = rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .filter(|(x, _)| x.abs() > cut)
            .map(|(&x, &w)| w * f(x))
            .sum();
        assert!(tail.abs() < 1e-12 * total.abs(), "tail {tail} total {total}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn integrate_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, s in 0.1f64..2.0) {
                let rule = freud2_rule(8);
                let f = |t: f64| (s * t).cos();
                let g = |t: f64| t * t - t;
                let lhs = rule.integrate(|t| a * f(t) + b * g(t)).unwrap();
                let rhs = a * rule.integrate(f).unwrap() + b * rule.integrate(g).unwrap();
                let scale = a.abs() * rule.integrate(|t| f(t).abs()).unwrap()
                    + b.abs() * rule.integrate(|t| g(t).abs()).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1e-300));
            }

            #[test]
            fn odd_integrands_vanish(c in -2.0f64..2.0) {
                let rule = freud2_rule(8);
                let v = rule.integrate(|t| (c * t).sin() + t.powi(3)).unwrap();
                prop_assert!(v.abs() < 1e-13);
            }
        }
    }
}
