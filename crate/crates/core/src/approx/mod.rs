//! Weighted `L^p` norms and best approximation degrees for `p` in `{1, 2, inf}`.

mod l1;
mod minimax;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{brent, golden_max, golden_min};
use crate::operators::{coeffs_from_samples, sample_on_rule, BasisPoly};
use crate::orthopoly::RecurrenceTable;
use crate::quadrature::gauss_legendre_cached;
use crate::weights::WeightSpec;

/// Nodes per unit of degree on the inner part of a [`NormGrid`].
pub const NODES_PER_DEGREE: usize = 40;

/// The exponent `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Norm {
    #[serde(rename = "1")]
    L1,
    #[serde(rename = "2")]
    L2,
    #[serde(rename = "inf")]
    Linf,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L1 => "1",
            Norm::L2 => "2",
            Norm::Linf => "inf",
        })
    }
}

impl FromStr for Norm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" => Ok(Norm::L1),
            "2" => Ok(Norm::L2),
            "inf" | "infinity" | "oo" => Ok(Norm::Linf),
            other => Err(Error::Config(format!("unsupported p = {other:?}; use 1, 2 or inf"))),
        }
    }
}

/// Evaluation grid on `[-R, R]`: Chebyshev-clustered nodes on `[-A, A]`,
/// `A = a_{2n}(1 + 2 delta_{2n})`, plus evenly spaced tail nodes out to the
/// master-rule radius `R`.
#[derive(Clone, Debug)]
pub struct NormGrid {
    rec: Arc<RecurrenceTable>,
    degree: usize,
    nodes: Vec<f64>,
    inner: f64,
    radius: f64,
}

impl NormGrid {
    pub fn new(rec: &Arc<RecurrenceTable>, degree: usize) -> Result<Self> {
        let mrs = rec.mrs();
        let m2 = 2.0 * degree.max(1) as f64;
        let radius = rec.rule().radius();
        let inner = (mrs.compute_a(m2)? * (1.0 + 2.0 * mrs.delta(m2)?)).min(radius);
        let m = 2 * (NODES_PER_DEGREE * (degree + 1)).div_ceil(2);
        let half = m / 2;
        let mut pos: Vec<f64> = (0..half)
            .map(|j| inner * (std::f64::consts::PI * j as f64 / m as f64).cos())
            .collect();
        pos.reverse();
        let spacing = 2.0 * inner / m as f64;
        let k = (((radius - inner) / spacing).ceil() as usize).min(4000);
        for i in 1..=k {
            pos.push(inner + (radius - inner) * i as f64 / k as f64);
        }
        let mut nodes: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
        nodes.push(0.0);
        nodes.extend(pos);
        Ok(Self { rec: rec.clone(), degree, nodes, inner, radius })
    }

    /// Same grid with midpoints inserted.
    pub fn refined(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len());
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(*self.nodes.last().unwrap());
        Self { nodes, ..self.clone() }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rec(&self) -> &Arc<RecurrenceTable> {
        &self.rec
    }

    pub fn weight(&self) -> &WeightSpec {
        self.rec.weight()
    }

    /// `f(x) w(x)` at every node.
    pub fn weighted_values(&self, f: &dyn Fn(f64) -> f64) -> Result<Vec<f64>> {
        let w = self.weight();
        let v: Vec<f64> = self.nodes.iter().map(|&x| w.mul_weight(f(x), x, 1.0)).collect();
        match v.iter().position(|y| !y.is_finite()) {
            Some(i) => Err(Error::NonFinite { x: self.nodes[i] }),
            None => Ok(v),
        }
    }
}

/// `||f w||_p` over the grid's range.
pub fn weighted_norm<F: Fn(f64) -> f64>(f: F, p: Norm, grid: &NormGrid) -> Result<f64> {
    norm_dyn(&f, p, grid)
}

fn norm_dyn(f: &dyn Fn(f64) -> f64, p: Norm, grid: &NormGrid) -> Result<f64> {
    match p {
        Norm::L2 => {
            let rec = grid.rec();
            let v = sample_on_rule(rec, |x| {
                let y = f(x);
                y * y
            })?;
            Ok(rec.rule().integrate_values(&v)?.sqrt())
        }
        Norm::Linf => sup_norm(f, grid),
        Norm::L1 => l1_norm(f, grid),
    }
}

fn sup_norm(f: &dyn Fn(f64) -> f64, grid: &NormGrid) -> Result<f64> {
    let w = grid.weight();
    let vals: Vec<f64> = grid.weighted_values(f)?.iter().map(|v| v.abs()).collect();
    let vmax = vals.iter().cloned().fold(0.0, f64::max);
    if vmax == 0.0 {
        return Ok(0.0);
    }
    let x = grid.nodes();
    let n = x.len();
    let g = |t: f64| w.mul_weight(f(t), t, 1.0).abs();
    let mut best = vmax;
    for i in 0..n {
        let left = if i > 0 { vals[i - 1] } else { 0.0 };
        let right = if i + 1 < n { vals[i + 1] } else { 0.0 };
        if vals[i] >= left && vals[i] >= right && vals[i] >= 0.5 * vmax {
            let a = x[i.saturating_sub(1)];
            let b = x[(i + 1).min(n - 1)];
            let (_, v) = golden_max(g, a, b, 1e-9 * (b - a));
            best = best.max(v);
        }
    }
    Ok(best)
}

fn l1_norm(f: &dyn Fn(f64) -> f64, grid: &NormGrid) -> Result<f64> {
    let w = grid.weight();
    let rule = gauss_legendre_cached(10);
    let x = grid.nodes();
    let fx: Vec<f64> = x.iter().map(|&t| f(t)).collect();
    if let Some(i) = fx.iter().position(|y| !y.is_finite()) {
        return Err(Error::NonFinite { x: x[i] });
    }
    let piece = |a: f64, b: f64| -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        rule.0
            .iter()
            .zip(&rule.1)
            .map(|(&t, &wt)| {
                let u = c + h * t;
                wt * w.mul_weight(f(u).abs(), u, 1.0)
            })
            .sum::<f64>()
            * h
    };
    let mut total = 0.0;
    for i in 0..x.len() - 1 {
        let (a, b) = (x[i], x[i + 1]);
        if fx[i] * fx[i + 1] < 0.0 {
            let r = brent(|t| Ok(f(t)), a, b, 1e-15 * (b - a).max(a.abs()), 0.0, 200)?;
            total += piece(a, r) + piece(r, b);
        } else {
            total += piece(a, b);
        }
    }
    Ok(total)
}

/// Minimizer `c0` of `c -> ||(f - c) w||_p` and the minimum.
pub fn best_const<F: Fn(f64) -> f64>(f: F, p: Norm, grid: &NormGrid) -> Result<(f64, f64)> {
    let f: &dyn Fn(f64) -> f64 = &f;
    if p == Norm::L2 {
        let rec = grid.rec();
        let v = sample_on_rule(rec, f)?;
        let b0 = coeffs_from_samples(rec, &v, 1)?[0];
        let c = b0 * rec.norm0();
        let val = norm_dyn(&|x| f(x) - c, p, grid)?;
        return Ok((c, val));
    }
    let fnorm = norm_dyn(f, p, grid)?;
    if fnorm == 0.0 {
        return Ok((0.0, 0.0));
    }
    let wnorm = norm_dyn(&|_| 1.0, p, grid)?;
    // ||(f - c)w|| >= |c| ||w|| - ||f w||
    let bound = 2.0 * fnorm / wnorm;
    let (c, v) = golden_min(|c| norm_dyn(&|x| f(x) - c, p, grid), -bound, bound, 1e-10 * bound.max(1e-300))?;
    Ok((c, v))
}

/// Outcome of [`best_poly`].
#[derive(Clone, Debug)]
pub struct BestApprox {
    pub poly: BasisPoly,
    /// `||w (f - P)||_p` for the returned `P`.
    pub error: f64,
    pub norm: Norm,
    pub degree: usize,
    /// Equioscillation defect (`inf`), relative subgradient residual (`1`), 0 for `2`.
    pub certificate: f64,
    pub iterations: usize,
    /// `f` is a polynomial of degree `<= n` up to rounding.
    pub exact: bool,
    /// `p = 2`: Fourier coefficients near degree `N` are not negligible.
    pub tail_flag: bool,
    /// `p = inf`: the residual spread sits at the rounding level of the data.
    pub noise_limited: bool,
    /// `p = 1`: the grid optimum was moved to the continuous optimum.
    pub polished: bool,
}

/// `E_{p,n}(w; f)` and a minimizer.
pub fn best_poly<F: Fn(f64) -> f64>(
    rec: &Arc<RecurrenceTable>,
    f: F,
    p: Norm,
    n: usize,
    grid: &NormGrid,
) -> Result<BestApprox> {
    if n > rec.n_max() {
        return Err(Error::DegreeTooLarge { requested: n, max: rec.n_max() });
    }
    let f: &dyn Fn(f64) -> f64 = &f;
    match p {
        Norm::L2 => best_l2(rec, f, n, grid),
        Norm::Linf => minimax::remez(rec, f, n, grid),
        Norm::L1 => l1::best_l1(rec, f, n, grid),
    }
}

fn best_l2(rec: &Arc<RecurrenceTable>, f: &dyn Fn(f64) -> f64, n: usize, grid: &NormGrid) -> Result<BestApprox> {
    let v = sample_on_rule(rec, f)?;
    let nn = rec.n_max();
    let b = coeffs_from_samples(rec, &v, nn + 1)?;
    let poly = BasisPoly::new(rec.clone(), b[..=n].to_vec())?;
    let error = norm_dyn(&|x| f(x) - poly.eval(x), Norm::L2, grid)?;
    let fnorm = rec.rule().integrate_values(&v.iter().map(|y| y * y).collect::<Vec<_>>())?.sqrt();
    let tail = b[nn.saturating_sub(2)..].iter().map(|c| c.abs()).fold(0.0, f64::max);
    Ok(BestApprox {
        exact: error <= 1e-13 * fnorm.max(f64::MIN_POSITIVE),
        poly,
        error,
        norm: Norm::L2,
        degree: n,
        certificate: 0.0,
        iterations: 0,
        tail_flag: n < nn && tail > 1e-10 * fnorm,
        noise_limited: false,
        polished: true,
    })
}

/// `E_{p,n}(w; g) / ((a_n / n) ||g' w||_p)`.
pub fn favard_check<G: Fn(f64) -> f64, D: Fn(f64) -> f64>(
    rec: &Arc<RecurrenceTable>,
    g: G,
    gprime: D,
    p: Norm,
    n: usize,
    grid: &NormGrid,
) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("Favard check needs n >= 1".into()));
    }
    let e = best_poly(rec, g, p, n, grid)?;
    if e.exact {
        return Ok(0.0);
    }
    let an = rec.mrs().compute_a(n as f64)?;
    let d = weighted_norm(gprime, p, grid)?;
    Ok(e.error / (an / n as f64 * d))
}

/// `w(x) p_k(x)` for `k <= n`.
pub(crate) fn weighted_basis_at(rec: &RecurrenceTable, n: usize, x: f64) -> Vec<f64> {
    let w = rec.weight().w(x);
    rec.eval_all(n, x).into_iter().map(|p| p * w).collect()
}
