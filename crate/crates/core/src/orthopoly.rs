//! Orthonormal polynomials for `w^2`, their zeros, Christoffel numbers and
//! the reproducing kernel.
//!
//! The weight is even, so `x p_k = b_{k+1} p_{k+1} + b_k p_{k-1}` with no
//! diagonal term. Recurrence coefficients come from a discretized Stieltjes
//! procedure on a composite master rule.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::mrs::MrsTable;
use crate::quadrature::{build_rule, QuadRule};
use crate::weights::WeightSpec;

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 40;
pub const ORTHONORMALITY_TOL: f64 = 1e-8;
pub const CHRISTOFFEL_TOL: f64 = 1e-6;

/// Three-term recurrence for the orthonormal polynomials `p_0..p_N`.
#[derive(Debug)]
pub struct RecurrenceTable {
    mrs: Arc<MrsTable>,
    n_max: usize,
    /// `b[k]` is `b_k` for `k = 1..=N`; `b[0] = 0`.
    b: Vec<f64>,
    norm0: f64,
    rule: QuadRule,
    /// `basis[k][i] = p_k(x_i) * weight_i` on the master rule.
    basis: Vec<Vec<f64>>,
    residual: f64,
}

impl RecurrenceTable {
    /// Stieltjes procedure up to degree `n_max`, verified on an independent rule.
    pub fn stieltjes(mrs: Arc<MrsTable>, n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::Domain("maximum degree must be at least 1".into()));
        }
        if n_max > MAX_DEGREE {
            return Err(Error::DegreeTooLarge { requested: n_max, max: MAX_DEGREE });
        }
        let rule = build_rule(&mrs, 2 * n_max + 2)?;
        let x = rule.nodes();
        let sw: Vec<f64> = rule.weights().iter().map(|w| w.sqrt()).collect();
        let mass = rule.integrate_values(&vec![1.0; x.len()])?;
        let norm0 = mass.powf(-0.5);

        let mut b = vec![0.0; n_max + 1];
        let mut prev = vec![0.0; x.len()];
        let mut cur: Vec<f64> = sw.iter().map(|s| norm0 * s).collect();
        for k in 0..n_max {
            let bk = b[k];
            let mut next: Vec<f64> = (0..x.len()).map(|i| x[i] * cur[i] - bk * prev[i]).collect();
            let norm = symmetric_norm(&next);
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::Orthonormality { degree: k + 1, residual: f64::NAN });
            }
            next.iter_mut().for_each(|v| *v /= norm);
            b[k + 1] = norm;
            prev = cur;
            cur = next;
        }

        let mut table = Self {
            mrs,
            n_max,
            b,
            norm0,
            rule,
            basis: Vec::new(),
            residual: 0.0,
        };
        table.residual = table.verify()?;
        table.basis = table.sample_basis(&table.rule);
        Ok(table)
    }

    /// Convenience constructor from a weight.
    pub fn for_weight(weight: WeightSpec, n_max: usize) -> Result<Self> {
        Self::stieltjes(Arc::new(MrsTable::new(weight)), n_max)
    }

    fn sample_basis(&self, rule: &QuadRule) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::with_capacity(rule.len()); self.n_max + 1];
        for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
            for (k, p) in self.eval_all(self.n_max, x).into_iter().enumerate() {
                out[k].push(p * w);
            }
        }
        out
    }

    /// Gram matrix residual on a rule of higher degree (different radius and
    /// nodes); errors at the first degree exceeding the tolerance.
    fn verify(&self) -> Result<f64> {
        let check = build_rule(&self.mrs, 2 * self.n_max + 4)?;
        let n = self.n_max;
        let mut gram = vec![vec![0.0; n + 1]; n + 1];
        for (&x, &w) in check.nodes().iter().zip(check.weights()) {
            let p = self.eval_all(n, x);
            for i in 0..=n {
                for j in 0..=i {
                    gram[i][j] += w * p[i] * p[j];
                }
            }
        }
        let mut worst: f64 = 0.0;
        for i in 0..=n {
            let row = (0..=i)
                .map(|j| (gram[i][j] - if i == j { 1.0 } else { 0.0 }).abs())
                .fold(0.0, f64::max);
            if !(row <= ORTHONORMALITY_TOL) {
                return Err(Error::Orthonormality { degree: i, residual: row });
            }
            worst = worst.max(row);
        }
        Ok(worst)
    }

    pub fn mrs(&self) -> &Arc<MrsTable> {
        &self.mrs
    }

    pub fn weight(&self) -> &WeightSpec {
        self.mrs.weight()
    }

    /// Maximum degree `N`.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `b_k` for `1 <= k <= N`.
    pub fn b(&self, k: usize) -> f64 {
        assert!((1..=self.n_max).contains(&k), "b_{k} out of range");
        self.b[k]
    }

    /// `b_1..b_N`.
    pub fn offdiag(&self) -> &[f64] {
        &self.b[1..]
    }

    /// `p_0 = (int w^2)^{-1/2}`.
    pub fn norm0(&self) -> f64 {
        self.norm0
    }

    /// Leading coefficient `gamma_k` of `p_k`.
    pub fn gamma(&self, k: usize) -> f64 {
        self.b[1..=k].iter().fold(self.norm0, |g, b| g / b)
    }

    /// Max `|G_ij - delta_ij|` observed during construction.
    pub fn orthonormality_residual(&self) -> f64 {
        self.residual
    }

    /// Master rule (exact for degree `2N + 2`).
    pub fn rule(&self) -> &QuadRule {
        &self.rule
    }

    /// `p_k(x_i) * weight_i` on the master rule.
    pub fn weighted_basis(&self, k: usize) -> &[f64] {
        &self.basis[k]
    }

    /// `p_k(x)`.
    pub fn eval_pk(&self, k: usize, x: f64) -> f64 {
        assert!(k <= self.n_max, "degree {k} above table maximum {}", self.n_max);
        *self.eval_all(k, x).last().unwrap()
    }

    /// `p_0(x)..p_n(x)`.
    pub fn eval_all(&self, n: usize, x: f64) -> Vec<f64> {
        assert!(n <= self.n_max, "degree {n} above table maximum {}", self.n_max);
        let mut p = Vec::with_capacity(n + 1);
        p.push(self.norm0);
        if n >= 1 {
            p.push(x * self.norm0 / self.b[1]);
        }
        for k in 1..n {
            let v = (x * p[k] - self.b[k] * p[k - 1]) / self.b[k + 1];
            p.push(v);
        }
        p
    }

    /// `lambda_n(x) = 1 / sum_{k<n} p_k(x)^2`.
    pub fn christoffel(&self, n: usize, x: f64) -> f64 {
        assert!(n >= 1 && n <= self.n_max + 1);
        1.0 / self.kernel(n, x, x)
    }

    /// `K_n(x, t) = sum_{k<n} p_k(x) p_k(t)`.
    pub fn kernel(&self, n: usize, x: f64, t: f64) -> f64 {
        assert!(n >= 1);
        let px = self.eval_all(n - 1, x);
        let pt = self.eval_all(n - 1, t);
        px.iter().zip(&pt).map(|(a, b)| a * b).sum()
    }

    /// Christoffel–Darboux form of `K_n(x, t)` for `x != t`.
    pub fn kernel_cd(&self, n: usize, x: f64, t: f64) -> f64 {
        assert!(n >= 1 && n <= self.n_max && x != t);
        let px = self.eval_all(n, x);
        let pt = self.eval_all(n, t);
        self.b[n] * (px[n] * pt[n - 1] - pt[n] * px[n - 1]) / (x - t)
    }

    /// The `n x n` Jacobi matrix.
    pub fn jacobi(&self, n: usize) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(n, n);
        for k in 1..n {
            j[(k - 1, k)] = self.b[k];
            j[(k, k - 1)] = self.b[k];
        }
        j
    }

    /// Zeros of `p_n` and the Christoffel numbers, for `n <= N + 1`.
    pub fn gauss_data(&self, n: usize) -> Result<GaussData> {
        if n < 1 {
            return Err(Error::Domain("Gauss rule needs n >= 1".into()));
        }
        // an n-point rule only needs b_1..b_{n-1}
        if n > self.n_max + 1 {
            return Err(Error::DegreeTooLarge { requested: n, max: self.n_max + 1 });
        }
        let eig = SymmetricEigen::try_new(self.jacobi(n), f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Eigen(format!("Jacobi matrix of size {n} did not converge")))?;
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut zeros: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        for k in 0..n / 2 {
            let s = 0.5 * (zeros[k] - zeros[n - 1 - k]);
            zeros[k] = s;
            zeros[n - 1 - k] = -s;
        }
        if n % 2 == 1 {
            zeros[n / 2] = 0.0;
        }
        let mass = self.norm0.powi(-2);
        let eig_lambda: Vec<f64> = pairs.iter().map(|p| mass * p.1).collect();
        let lambdas: Vec<f64> = zeros.iter().map(|&x| self.christoffel(n, x)).collect();
        let max_l = lambdas.iter().cloned().fold(0.0, f64::max);
        let discrepancy = lambdas
            .iter()
            .zip(&eig_lambda)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / max_l;
        if !(discrepancy <= CHRISTOFFEL_TOL) {
            return Err(Error::ChristoffelMismatch { discrepancy });
        }
        Ok(GaussData { n, zeros, lambdas, discrepancy })
    }
}

fn symmetric_norm(v: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n / 2 {
        s += v[i] * v[i] + v[n - 1 - i] * v[n - 1 - i];
    }
    if n % 2 == 1 {
        s += v[n / 2] * v[n / 2];
    }
    s.sqrt()
}

/// Gauss rule for `w^2` with `n` points.
#[derive(Clone, Debug)]
pub struct GaussData {
    pub n: usize,
    /// `x_{1,n} > x_{2,n} > ... > x_{n,n}`.
    pub zeros: Vec<f64>,
    /// `lambda_{k,n} = lambda_n(x_{k,n})`.
    pub lambdas: Vec<f64>,
    /// Relative gap between the eigenvector and kernel Christoffel numbers.
    pub discrepancy: f64,
}

impl GaussData {
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.zeros.iter().zip(&self.lambdas).map(|(&x, &l)| l * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;
    use std::f64::consts::PI;
    use std::sync::OnceLock;

    fn freud2() -> &'static RecurrenceTable {
        static T: OnceLock<RecurrenceTable> = OnceLock::new();
        T.get_or_init(|| RecurrenceTable::for_weight(WeightSpec::freud(2.0).unwrap(), 40).unwrap())
    }

    fn erdos() -> &'static RecurrenceTable {
        static T: OnceLock<RecurrenceTable> = OnceLock::new();
        T.get_or_init(|| RecurrenceTable::for_weight(WeightSpec::erdos_default(), 40).unwrap())
    }

    /// Gram–Schmidt on monomials against `exp(-2x^2)` with plain
    /// Gauss–Legendre on [-9, 9].
    fn gram_schmidt_b(kmax: usize) -> Vec<f64> {
        let (x, w) = gauss_legendre(400);
        let nodes: Vec<f64> = x.iter().map(|t| 9.0 * t).collect();
        let wts: Vec<f64> = nodes.iter().zip(&w).map(|(t, w)| 9.0 * w * (-2.0 * t * t).exp()).collect();
        let ip = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(&wts).map(|((a, b), w)| a * b * w).sum() };
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut gammas = Vec::new();
        for k in 0..=kmax {
            let mut v: Vec<f64> = nodes.iter().map(|t| t.powi(k as i32)).collect();
            let mut lead = 1.0;
            for _ in 0..2 {
                for q in &basis {
                    let c = ip(&v, q);
                    v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                }
            }
            let n = ip(&v, &v).sqrt();
            v.iter_mut().for_each(|a| *a /= n);
            lead /= n;
            gammas.push(lead);
            basis.push(v);
        }
        // gamma_{k-1} / gamma_k = b_k
        (1..=kmax).map(|k| gammas[k - 1] / gammas[k]).collect()
    }

    #[test]
    fn freud2_recurrence_matches_gram_schmidt() {
        let rec = freud2();
        let oracle = gram_schmidt_b(10);
        for k in 1..=10 {
            assert!((rec.b(k) - oracle[k - 1]).abs() < 1e-10, "k={k}");
            assert!((rec.b(k) - (k as f64).sqrt() / 2.0).abs() < 1e-10);
        }
        for k in 11..=40 {
            assert!((rec.b(k) - (k as f64).sqrt() / 2.0).abs() < 1e-9 * rec.b(k));
        }
        assert!((rec.norm0() - (PI / 2.0).powf(-0.25)).abs() < 1e-12);
        assert!(rec.orthonormality_residual() <= ORTHONORMALITY_TOL);
    }

    #[test]
    fn parity_and_zero_count() {
        let rec = freud2();
        for k in 0..=8 {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            let a = rec.eval_pk(k, 1.3);
            assert!((rec.eval_pk(k, -1.3) - s * a).abs() <= 1e-14 * a.abs().max(1.0));
        }
        assert_eq!(rec.eval_pk(0, 7.0), rec.norm0());
        let a3 = rec.mrs().compute_a(3.0).unwrap();
        let grid: Vec<f64> = (0..=2000).map(|i| -a3 + 2.0 * a3 * i as f64 / 2000.0).collect();
        let changes = grid
            .windows(2)
            .filter(|w| rec.eval_pk(3, w[0]) * rec.eval_pk(3, w[1]) < 0.0)
            .count();
        assert_eq!(changes + usize::from(rec.eval_pk(3, 0.0) == 0.0), 3);
    }

    #[test]
    fn both_families_are_orthonormal() {
        assert!(freud2().orthonormality_residual() <= 1e-8);
        assert!(erdos().orthonormality_residual() <= 1e-8);
        let f4 = RecurrenceTable::for_weight(WeightSpec::freud(4.0).unwrap(), 40).unwrap();
        assert!(f4.orthonormality_residual() <= 1e-8);
        assert!(erdos().offdiag().iter().all(|&b| b > 0.0));
    }

    #[test]
    fn rejects_large_degree() {
        let mrs = Arc::new(MrsTable::new(WeightSpec::freud(2.0).unwrap()));
        assert!(matches!(
            RecurrenceTable::stieltjes(mrs, 41),
            Err(Error::DegreeTooLarge { .. })
        ));
    }

    fn gaussian_moment(k: u32) -> f64 {
        // int t^k exp(-2t^2) dt = Gamma((k+1)/2) 2^{-(k+1)/2} for even k
        if k % 2 == 1 {
            return 0.0;
        }
        let mut g = PI.sqrt(); // Gamma(1/2)
        let mut s = 0.5;
        while s < (k as f64 + 1.0) / 2.0 {
            g *= s;
            s += 1.0;
        }
        g * 2f64.powf(-(k as f64 + 1.0) / 2.0)
    }

    #[test]
    fn gauss_rule_exactness() {
        let rec = freud2();
        let g = rec.gauss_data(6).unwrap();
        let v = g.integrate(|t| t.powi(10));
        assert!((v - gaussian_moment(10)).abs() < 1e-8 * gaussian_moment(10));
        for n in [1usize, 5, 17, 40] {
            let g = rec.gauss_data(n).unwrap();
            for k in 0..2 * n as u32 {
                let exact = gaussian_moment(k);
                let v = g.integrate(|t| t.powi(k as i32));
                if k % 2 == 1 {
                    assert!(v.abs() < 1e-12 * gaussian_moment(k + 1).max(1.0));
                } else {
                    assert!((v - exact).abs() < 1e-8 * exact, "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn gauss_shape() {
        for rec in [freud2(), erdos()] {
            for n in 1..=20 {
                let g = rec.gauss_data(n).unwrap();
                for k in 0..n {
                    assert_eq!(g.zeros[k], -g.zeros[n - 1 - k]);
                    assert!(g.lambdas[k] > 0.0);
                    assert!((rec.christoffel(n, g.zeros[k]) - g.lambdas[k]).abs() <= 1e-8 * g.lambdas[k]);
                }
                assert!(g.zeros.windows(2).all(|w| w[0] > w[1]));
                let an = rec.mrs().compute_a(n as f64).unwrap();
                let dn = rec.mrs().delta(n as f64).unwrap();
                assert!(g.zeros[0] < an * (1.0 + 2.0 * dn));
                if n < 20 {
                    let h = rec.gauss_data(n + 1).unwrap();
                    for k in 0..n {
                        assert!(h.zeros[k] > g.zeros[k] && g.zeros[k] > h.zeros[k + 1]);
                    }
                }
            }
        }
    }

    #[test]
    fn christoffel_and_kernel() {
        let rec = freud2();
        assert!((rec.christoffel(1, 0.7) - (PI / 2.0).sqrt()).abs() < 1e-12);
        let x = 0.5;
        let t = 1.0;
        let k = rec.kernel(8, x, t);
        assert!((k - rec.kernel_cd(8, x, t)).abs() <= 1e-8 * k.abs());
        assert_eq!(k, rec.kernel(8, t, x));
        assert!(rec.christoffel(9, x) < rec.christoffel(8, x));
        for n in [3usize, 12, 30] {
            for &(x, t) in &[(0.1, -1.7), (2.3, 2.9)] {
                let a = rec.kernel(n, x, t);
                let b = rec.kernel_cd(n, x, t);
                assert!((a - b).abs() <= 1e-8 * a.abs().max(rec.kernel(n, x, x).sqrt() * rec.kernel(n, t, t).sqrt()));
            }
        }
    }

    #[test]
    fn christoffel_is_a_minimum() {
        // any P of degree < n with P(x) = 1 has int (P w)^2 >= lambda_n(x)
        let rec = freud2();
        let n = 6;
        let x = 0.8;
        let lam = rec.christoffel(n, x);
        let px = rec.eval_all(n - 1, x);
        let mut state = 12345u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..20 {
            let mut c: Vec<f64> = (0..n).map(|_| rnd()).collect();
            let at_x: f64 = c.iter().zip(&px).map(|(a, b)| a * b).sum();
            c.iter_mut().for_each(|v| *v /= at_x);
            let norm2: f64 = c.iter().map(|v| v * v).sum();
            assert!(norm2 >= lam * (1.0 - 1e-12));
        }
        // the extremal polynomial K_n(x, .) / K_n(x, x) attains it
        let kxx: f64 = px.iter().map(|v| v * v).sum();
        let best: f64 = px.iter().map(|v| (v / kxx).powi(2)).sum();
        assert!((best - lam).abs() < 1e-14);
    }

    #[test]
    fn gamma_ratio() {
        let rec = freud2();
        for n in 1..=40 {
            assert!((rec.gamma(n - 1) / rec.gamma(n) - rec.b(n)).abs() < 1e-12 * rec.b(n));
        }
    }
}
