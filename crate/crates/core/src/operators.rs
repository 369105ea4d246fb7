//! Approximation operators and polynomial calculus.
//!
//! [`BasisPoly`] stores coefficients in the orthonormal basis `{p_k}` and is
//! used for projections. [`NodalPoly`] stores values at the zeros of
//! `p_{d+1}` (the `w^2`-Gauss nodes) and is used for differentiation and
//! integration.

use std::sync::Arc;

use crate::approx::{best_const, Norm, NormGrid};
use crate::error::{Error, Result};
use crate::numeric::brent;
use crate::orthopoly::RecurrenceTable;
use crate::quadrature::{adaptive_integrate, gauss_legendre_cached};
use crate::weights::WeightSpec;

/// `sum_k c_k p_k`.
#[derive(Clone, Debug)]
pub struct BasisPoly {
    rec: Arc<RecurrenceTable>,
    coeffs: Vec<f64>,
}

impl BasisPoly {
    pub fn new(rec: Arc<RecurrenceTable>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("a polynomial needs at least one coefficient".into()));
        }
        if coeffs.len() > rec.n_max() + 1 {
            return Err(Error::DegreeTooLarge { requested: coeffs.len() - 1, max: rec.n_max() });
        }
        Ok(Self { rec, coeffs })
    }

    pub fn zero(rec: Arc<RecurrenceTable>) -> Self {
        Self { rec, coeffs: vec![0.0] }
    }

    /// The basis polynomial `p_k`.
    pub fn basis(rec: Arc<RecurrenceTable>, k: usize) -> Result<Self> {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Self::new(rec, c)
    }

    pub fn rec(&self) -> &Arc<RecurrenceTable> {
        &self.rec
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Length of the coefficient vector minus one.
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `p_k` (zero past the stored range).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_derivs(x, 0)[0]
    }

    /// `P^{(j)}(x)`.
    pub fn derivative_at(&self, x: f64, order: usize) -> f64 {
        self.eval_derivs(x, order)[order]
    }

    /// `[P(x), P'(x), ..., P^{(order)}(x)]` by differentiating the recurrence.
    pub fn eval_derivs(&self, x: f64, order: usize) -> Vec<f64> {
        let d = self.degree_bound();
        let rec = &self.rec;
        let mut prev = vec![0.0; order + 1];
        let mut cur = vec![0.0; order + 1];
        cur[0] = rec.norm0();
        let mut out: Vec<f64> = cur.iter().map(|v| v * self.coeffs[0]).collect();
        for k in 0..d {
            let bk = if k == 0 { 0.0 } else { rec.b(k) };
            let bk1 = rec.b(k + 1);
            let mut next = vec![0.0; order + 1];
            for j in 0..=order {
                let lower = if j == 0 { 0.0 } else { j as f64 * cur[j - 1] };
                next[j] = (x * cur[j] + lower - bk * prev[j]) / bk1;
            }
            let c = self.coeffs[k + 1];
            if c != 0.0 {
                out.iter_mut().zip(&next).for_each(|(o, v)| *o += c * v);
            }
            prev = cur;
            cur = next;
        }
        out
    }

    /// `w(x) P(x)`.
    pub fn eval_weighted(&self, x: f64) -> f64 {
        self.rec.weight().mul_weight(self.eval(x), x, 1.0)
    }

    /// Coefficient-wise `self + s * other`.
    pub fn axpy(&self, s: f64, other: &BasisPoly) -> BasisPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + s * other.coeff(k)).collect();
        BasisPoly { rec: self.rec.clone(), coeffs }
    }

    pub fn scale(&self, s: f64) -> BasisPoly {
        BasisPoly { rec: self.rec.clone(), coeffs: self.coeffs.iter().map(|c| s * c).collect() }
    }

    /// `||P w||_2 = |c|` by orthonormality.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn to_nodal(&self) -> Result<NodalPoly> {
        NodalPoly::from_fn(self.rec.clone(), self.degree_bound(), |x| self.eval(x))
    }

    /// Largest coefficient difference against `other`.
    pub fn max_coeff_diff(&self, other: &BasisPoly) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).map(|k| (self.coeff(k) - other.coeff(k)).abs()).fold(0.0, f64::max)
    }
}

/// Polynomial of degree `<= d` held by its values at the `d + 1` zeros of
/// `p_{d+1}`, evaluated by the modified Lagrange formula.
#[derive(Clone, Debug)]
pub struct NodalPoly {
    rec: Arc<RecurrenceTable>,
    degree: usize,
    nodes: Vec<f64>,
    lambdas: Vec<f64>,
    bary: Vec<f64>,
    values: Vec<f64>,
}

impl NodalPoly {
    /// Interpolates `f` at the zeros of `p_{degree+1}`.
    pub fn from_fn<F: FnMut(f64) -> f64>(rec: Arc<RecurrenceTable>, degree: usize, mut f: F) -> Result<Self> {
        let g = rec.gauss_data(degree + 1)?;
        let nodes = g.zeros;
        let values: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { x: nodes[i] });
        }
        let bary = barycentric_weights(&nodes);
        Ok(Self { rec, degree, nodes, lambdas: g.lambdas, bary, values })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut ell = 1.0;
        let mut sum = 0.0;
        for j in 0..self.nodes.len() {
            let d = x - self.nodes[j];
            if d == 0.0 {
                return self.values[j];
            }
            ell *= d;
            sum += self.bary[j] * self.values[j] / d;
        }
        ell * sum
    }

    /// Exact derivative via the differentiation matrix on the same nodes.
    pub fn differentiate(&self) -> NodalPoly {
        let n = self.nodes.len();
        let x = &self.nodes;
        let values = (0..n)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..n {
                    if j != i {
                        let dij = (self.bary[j] / self.bary[i]) / (x[i] - x[j]);
                        s += dij * (self.values[j] - self.values[i]);
                    }
                }
                s
            })
            .collect();
        NodalPoly { degree: self.degree.saturating_sub(1), values, ..self.clone() }
    }

    /// `x -> int_0^x P(t) dt`, one degree higher.
    pub fn antiderivative(&self) -> Result<NodalPoly> {
        let m = self.degree / 2 + 1;
        let rule = gauss_legendre_cached(m);
        let f = |x: f64| -> f64 {
            if x == 0.0 {
                return 0.0;
            }
            let h = 0.5 * x;
            rule.0.iter().zip(&rule.1).map(|(&t, &w)| w * self.eval(h * (t + 1.0))).sum::<f64>() * h
        };
        NodalPoly::from_fn(self.rec.clone(), self.degree + 1, f)
    }

    /// Coefficients in `{p_k}` by the Gauss rule on the nodes.
    pub fn to_basis(&self) -> Result<BasisPoly> {
        let d = self.degree;
        if d > self.rec.n_max() {
            return Err(Error::DegreeTooLarge { requested: d, max: self.rec.n_max() });
        }
        let mut c = vec![0.0; d + 1];
        for ((&x, &l), &y) in self.nodes.iter().zip(&self.lambdas).zip(&self.values) {
            for (k, p) in self.rec.eval_all(d, x).into_iter().enumerate() {
                c[k] += l * y * p;
            }
        }
        BasisPoly::new(self.rec.clone(), c)
    }

    /// Adds a constant.
    pub fn shift(&self, c: f64) -> NodalPoly {
        NodalPoly { values: self.values.iter().map(|v| v + c).collect(), ..self.clone() }
    }
}

fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let p: f64 = (0..x.len()).filter(|&k| k != j).map(|k| x[j] - x[k]).product();
            1.0 / p
        })
        .collect()
}

/// `f` at the master-rule nodes; errors on non-finite values.
pub fn sample_on_rule<F: Fn(f64) -> f64>(rec: &RecurrenceTable, f: F) -> Result<Vec<f64>> {
    let nodes = rec.rule().nodes();
    let v: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
    if let Some(i) = v.iter().position(|y| !y.is_finite()) {
        return Err(Error::NonFinite { x: nodes[i] });
    }
    Ok(v)
}

/// `int values * p_k w^2` for `k < m`, pairing mirrored nodes.
pub fn coeffs_from_samples(rec: &RecurrenceTable, values: &[f64], m: usize) -> Result<Vec<f64>> {
    if m > rec.n_max() + 1 {
        return Err(Error::DegreeTooLarge { requested: m - 1, max: rec.n_max() });
    }
    let n = values.len();
    Ok((0..m)
        .map(|k| {
            let wb = rec.weighted_basis(k);
            let mut s = 0.0;
            for i in 0..n / 2 {
                let j = n - 1 - i;
                s += values[i] * wb[i] + values[j] * wb[j];
            }
            if n % 2 == 1 {
                s += values[n / 2] * wb[n / 2];
            }
            s
        })
        .collect())
}

/// Fourier coefficients `b_0(f)..b_{m-1}(f)`.
pub fn fourier_coeffs<F: Fn(f64) -> f64>(rec: &RecurrenceTable, f: F, m: usize) -> Result<Vec<f64>> {
    let v = sample_on_rule(rec, f)?;
    coeffs_from_samples(rec, &v, m)
}

/// `s_n(f) = sum_{k<n} b_k(f) p_k`.
pub fn partial_sum<F: Fn(f64) -> f64>(rec: &Arc<RecurrenceTable>, f: F, n: usize) -> Result<BasisPoly> {
    if n < 1 {
        return Err(Error::Domain("partial sum needs n >= 1".into()));
    }
    BasisPoly::new(rec.clone(), fourier_coeffs(rec, f, n)?)
}

/// Damped coefficients of `v_n` from `b_0..b_{2n-1}`.
pub fn vp_coeffs(b: &[f64], n: usize) -> Vec<f64> {
    assert!(n >= 1 && b.len() >= 2 * n);
    (0..2 * n)
        .map(|k| if k <= n { b[k] } else { b[k] * (2 * n - k) as f64 / n as f64 })
        .collect()
}

/// `v_n` as the literal average `(1/n) sum_{j=n+1}^{2n} s_j`.
pub fn vp_coeffs_direct(b: &[f64], n: usize) -> Vec<f64> {
    assert!(n >= 1 && b.len() >= 2 * n);
    let mut c = vec![0.0; 2 * n];
    for j in n + 1..=2 * n {
        for k in 0..j {
            c[k] += b[k];
        }
    }
    c.iter_mut().for_each(|v| *v /= n as f64);
    c
}

fn check_vp_degree(rec: &RecurrenceTable, n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::Domain("de la Vallee Poussin mean needs n >= 1".into()));
    }
    if 2 * n - 1 > rec.n_max() {
        return Err(Error::DegreeTooLarge { requested: 2 * n - 1, max: rec.n_max() });
    }
    Ok(())
}

/// `v_n(f)`, degree `<= 2n - 1`.
pub fn vallee_poussin<F: Fn(f64) -> f64>(rec: &Arc<RecurrenceTable>, f: F, n: usize) -> Result<BasisPoly> {
    check_vp_degree(rec, n)?;
    let b = fourier_coeffs(rec, f, 2 * n)?;
    BasisPoly::new(rec.clone(), vp_coeffs(&b, n))
}

/// `max_{k<=n} |int (f - v_n(f)) p_k w^2|`, by quadrature of the residual.
pub fn orthogonality_check<F: Fn(f64) -> f64>(rec: &Arc<RecurrenceTable>, f: F, n: usize) -> Result<f64> {
    check_vp_degree(rec, n)?;
    let fv = sample_on_rule(rec, &f)?;
    let b = coeffs_from_samples(rec, &fv, 2 * n)?;
    let v = BasisPoly::new(rec.clone(), vp_coeffs(&b, n))?;
    let resid: Vec<f64> = rec.rule().nodes().iter().zip(&fv).map(|(&x, y)| y - v.eval(x)).collect();
    let r = coeffs_from_samples(rec, &resid, n + 1)?;
    Ok(r.iter().map(|v| v.abs()).fold(0.0, f64::max))
}

/// Decay margin `2Q(R) - 2Q(t)` for the tail integral.
pub const TAIL_LOG_DECAY: f64 = 80.0;

/// Smallest `R >= |t|` with `2Q(R) - 2Q(t) >= TAIL_LOG_DECAY`.
pub fn tail_radius(weight: &WeightSpec, t: f64) -> Result<f64> {
    let q0 = weight.q(t);
    let target = |r: f64| 2.0 * (weight.q(r) - q0) - TAIL_LOG_DECAY;
    let lo = t.abs();
    let mut hi = lo.max(1.0);
    while target(hi) < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e12 {
            return Err(Error::DivergentTail { radius: hi });
        }
    }
    if target(lo) >= 0.0 {
        return Ok(lo);
    }
    brent(|r| Ok(target(r)), lo, hi, 1e-12 * hi, 0.0, 200)
}

fn shifted_integral<H: Fn(f64) -> f64>(weight: &WeightSpec, h: &H, t: f64, a: f64, b: f64) -> f64 {
    let qt = weight.q(t);
    let g = |u: f64| {
        let v = h(u);
        if v == 0.0 {
            0.0
        } else {
            v * (2.0 * (qt - weight.q(u))).exp()
        }
    };
    let mut pts = vec![a, b];
    if a < 0.0 && b > 0.0 {
        pts.insert(1, 0.0);
    }
    pts.windows(2)
        .map(|w| adaptive_integrate(g, w[0], w[1], 1e-15, 1e-13).0)
        .sum()
}

/// `I(h)(t) = w^{-2}(t) int_t^inf h w^2`, as `int_t^R h(u) e^{2Q(t) - 2Q(u)} du`.
pub fn tail_operator<H: Fn(f64) -> f64>(weight: &WeightSpec, h: H, t: f64) -> Result<f64> {
    let r = tail_radius(weight, t)?;
    let end = h(r) * (2.0 * (weight.q(t) - weight.q(r))).exp();
    let v = shifted_integral(weight, &h, t, t, r);
    if !v.is_finite() || end.abs() > 1e-12 * v.abs().max(1.0) {
        return Err(Error::DivergentTail { radius: r });
    }
    Ok(v)
}

/// Same as [`tail_operator`], but for `t < 0` uses
/// `-w^{-2}(t) int_{-inf}^t h w^2`, equal when `int h w^2 = 0`.
pub fn tail_operator_balanced<H: Fn(f64) -> f64>(weight: &WeightSpec, h: H, t: f64) -> Result<f64> {
    if t >= 0.0 {
        return tail_operator(weight, h, t);
    }
    let r = tail_radius(weight, t)?;
    let end = h(-r) * (2.0 * (weight.q(t) - weight.q(r))).exp();
    let v = -shifted_integral(weight, &h, t, -r, t);
    if !v.is_finite() || end.abs() > 1e-12 * v.abs().max(1.0) {
        return Err(Error::DivergentTail { radius: r });
    }
    Ok(v)
}

/// `I(h)'(t) = 2 Q'(t) I(h)(t) - h(t)`, given `I(h)(t)`.
pub fn tail_derivative(weight: &WeightSpec, h_t: f64, i_t: f64, t: f64) -> f64 {
    2.0 * weight.dq(t) * i_t - h_t
}

/// `V_n(g) = a + int_0^x v_n(g')`, with `a` minimizing `||(g - V_n) w||_p`.
#[derive(Clone, Debug)]
pub struct PrimitiveVp {
    pub poly: NodalPoly,
    pub constant: f64,
    /// `||(g - V_n) w||_p`, which equals `E_{p,0}` of `g - int_0^x v_n(g')`.
    pub error: f64,
}

pub fn primitive_vp<G, D>(
    rec: &Arc<RecurrenceTable>,
    g: G,
    gprime: D,
    n: usize,
    p: Norm,
    grid: &NormGrid,
) -> Result<PrimitiveVp>
where
    G: Fn(f64) -> f64 + Sync,
    D: Fn(f64) -> f64,
{
    let v = vallee_poussin(rec, gprime, n)?;
    if 2 * n > rec.n_max() + 1 {
        return Err(Error::DegreeTooLarge { requested: 2 * n, max: rec.n_max() + 1 });
    }
    let v0 = v.to_nodal()?.antiderivative()?;
    let (c, err) = best_const(|x| g(x) - v0.eval(x), p, grid)?;
    Ok(PrimitiveVp { poly: v0.shift(c), constant: c, error: err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use std::sync::OnceLock;

    fn freud2() -> Arc<RecurrenceTable> {
        static T: OnceLock<Arc<RecurrenceTable>> = OnceLock::new();
        T.get_or_init(|| Arc::new(RecurrenceTable::for_weight(WeightSpec::freud(2.0).unwrap(), 40).unwrap()))
            .clone()
    }

    #[test]
    fn fourier_of_basis_and_constants() {
        let rec = freud2();
        let c = fourier_coeffs(&rec, |x| rec.eval_pk(3, x), 10).unwrap();
        for (k, v) in c.iter().enumerate() {
            let e = if k == 3 { 1.0 } else { 0.0 };
            assert!((v - e).abs() < 1e-8);
        }
        let c = fourier_coeffs(&rec, |_| 1.0, 6).unwrap();
        assert!((c[0] - rec.norm0() * (PI / 2.0).sqrt()).abs() < 1e-10);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-8));
        let c = fourier_coeffs(&rec, |x: f64| x.sin(), 12).unwrap();
        for k in (0..12).step_by(2) {
            assert!(c[k].abs() < 1e-10);
        }
    }

    #[test]
    fn partial_sums_project() {
        let rec = freud2();
        let s = partial_sum(&rec, |x| rec.eval_pk(2, x), 5).unwrap();
        assert!(s.max_coeff_diff(&BasisPoly::basis(rec.clone(), 2).unwrap()) < 1e-8);
        let s = partial_sum(&rec, |x| rec.eval_pk(5, x), 2).unwrap();
        assert!(s.l2_norm() < 1e-8);
        let f = |x: f64| rec.eval_pk(1, x) + 2.0 * rec.eval_pk(2, x);
        let s = partial_sum(&rec, f, 4).unwrap();
        assert!((s.coeff(1) - 1.0).abs() < 1e-8 && (s.coeff(2) - 2.0).abs() < 1e-8);
        let s = partial_sum(&rec, |x: f64| x.cos(), 9).unwrap();
        let again = partial_sum(&rec, |x| s.eval(x), 9).unwrap();
        assert!(s.max_coeff_diff(&again) < 1e-10);
    }

    #[test]
    fn vp_forms_and_reproduction() {
        let b: Vec<f64> = (0..12).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        for n in [2usize, 3, 5] {
            let a = vp_coeffs(&b, n);
            let d = vp_coeffs_direct(&b, n);
            assert!(a.iter().zip(&d).all(|(x, y)| (x - y).abs() <= 1e-12));
            assert!((a[2 * n - 1] - b[2 * n - 1] / n as f64).abs() < 1e-15);
        }
        let rec = freud2();
        let v = vallee_poussin(&rec, |x| rec.eval_pk(4, x), 4).unwrap();
        assert!(v.max_coeff_diff(&BasisPoly::basis(rec.clone(), 4).unwrap()) < 1e-8);
        let v = vallee_poussin(&rec, |x| rec.eval_pk(8, x), 4).unwrap();
        assert!(v.l2_norm() < 1e-8);
    }

    #[test]
    fn orthogonality_of_vp_residual() {
        let rec = freud2();
        assert!(orthogonality_check(&rec, |x| rec.eval_pk(15, x), 6).unwrap() < 1e-8);
        assert!(orthogonality_check(&rec, |x| x * x - 1.0, 6).unwrap() < 1e-8);
        assert!(orthogonality_check(&rec, |x: f64| x.sin(), 6).unwrap() < 1e-8);
    }

    #[test]
    fn derivatives_of_basis_poly() {
        let rec = freud2();
        let p = BasisPoly::new(rec.clone(), vec![0.3, -1.0, 0.5, 0.25, 2.0]).unwrap();
        let h = 1e-5;
        for &x in &[-1.2, 0.0, 0.7, 2.5] {
            let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
            let d = p.eval_derivs(x, 2);
            assert!((d[1] - fd).abs() < 1e-7 * (1.0 + fd.abs()));
            let fd2 = (p.derivative_at(x + h, 1) - p.derivative_at(x - h, 1)) / (2.0 * h);
            assert!((d[2] - fd2).abs() < 1e-6 * (1.0 + fd2.abs()));
        }
    }

    #[test]
    fn nodal_round_trip_and_calculus() {
        let rec = freud2();
        let c: Vec<f64> = (0..=40).map(|k| ((k * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let p = BasisPoly::new(rec.clone(), c).unwrap();
        let back = p.to_nodal().unwrap().to_basis().unwrap();
        assert!(p.max_coeff_diff(&back) < 1e-9);

        let cube = NodalPoly::from_fn(rec.clone(), 3, |x| x * x * x).unwrap();
        assert!((cube.differentiate().eval(2.0) - 12.0).abs() < 1e-10);
        let k = NodalPoly::from_fn(rec.clone(), 0, |_| 4.0).unwrap();
        assert_eq!(k.differentiate().eval(0.3), 0.0);
        let anti = cube.antiderivative().unwrap();
        assert!((anti.eval(1.5) - 1.5f64.powi(4) / 4.0).abs() < 1e-12);
        assert!(anti.eval(0.0).abs() < 1e-14);

        let p2 = BasisPoly::basis(rec.clone(), 2).unwrap();
        let d = p2.to_nodal().unwrap().differentiate();
        let h = 1e-5;
        let x = 0.9;
        let fd = (p2.eval(x + h) - p2.eval(x - h)) / (2.0 * h);
        assert!((d.eval(x) - fd).abs() < 1e-8);
    }

    #[test]
    fn tail_operator_values() {
        let w = WeightSpec::freud(2.0).unwrap();
        assert_eq!(tail_operator(&w, |_| 0.0, 0.4).unwrap(), 0.0);
        let v = tail_operator(&w, |_| 1.0, 0.0).unwrap();
        assert!((v - (PI / 8.0).sqrt()).abs() < 1e-12);
        // odd h has int h w^2 = 0; I(h)(0) = int_0^inf h w^2
        let h = |u: f64| u;
        assert!((tail_operator(&w, h, 0.0).unwrap() - 0.25).abs() < 1e-12);
        // both forms agree when the full integral vanishes
        for &t in &[-1.5, -0.3] {
            let a = tail_operator(&w, h, t).unwrap();
            let b = tail_operator_balanced(&w, h, t).unwrap();
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
        }
        // I(1)(t) = e^{2t^2} int_t^inf e^{-2u^2} for t > 0 matches erfc-free check via ODE
        let t = 0.8;
        let i_t = tail_operator(&w, |_| 1.0, t).unwrap();
        let eps = 1e-5;
        let di = (tail_operator(&w, |_| 1.0, t + eps).unwrap() - tail_operator(&w, |_| 1.0, t - eps).unwrap()) / (2.0 * eps);
        assert!((di - tail_derivative(&w, 1.0, i_t, t)).abs() < 1e-7);
    }
}
