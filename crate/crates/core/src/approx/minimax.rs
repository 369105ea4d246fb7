//! Weighted Chebyshev approximation by the Remez exchange algorithm.
//!
//! The basis `w p_k` is a Haar system, so the best approximation is
//! characterized by `n + 2` alternation points. Each sweep solves the
//! levelled interpolation problem on the current reference, scans the grid,
//! and moves every reference point to a continuous local extremum.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{weighted_basis_at, BestApprox, Norm, NormGrid};
use crate::error::{Error, Result};
use crate::numeric::golden_max;
use crate::operators::BasisPoly;
use crate::orthopoly::RecurrenceTable;

pub const DEFECT_TOL: f64 = 1e-8;
const MAX_SWEEPS: usize = 80;
/// Spread below `NOISE_ULPS * eps * scale` counts as converged.
const NOISE_ULPS: f64 = 256.0;

struct Problem<'a> {
    rec: &'a Arc<RecurrenceTable>,
    f: &'a dyn Fn(f64) -> f64,
    n: usize,
}

impl Problem<'_> {
    fn target(&self, x: f64) -> f64 {
        self.rec.weight().mul_weight((self.f)(x), x, 1.0)
    }

    fn error(&self, c: &[f64], x: f64) -> f64 {
        let phi = weighted_basis_at(self.rec, self.n, x);
        self.target(x) - phi.iter().zip(c).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `|F| + sum |c_k phi_k|`, the size of the terms cancelling in the error.
    fn scale(&self, c: &[f64], x: f64) -> f64 {
        let phi = weighted_basis_at(self.rec, self.n, x);
        self.target(x).abs() + phi.iter().zip(c).map(|(a, b)| (a * b).abs()).sum::<f64>()
    }

    /// Coefficients and level `h` with `e(z_i) = (-1)^i h`.
    fn level(&self, refs: &[f64]) -> Result<(Vec<f64>, f64)> {
        let m = self.n + 1;
        let mut a = DMatrix::zeros(m + 1, m + 1);
        let mut rhs = DVector::zeros(m + 1);
        for (i, &z) in refs.iter().enumerate() {
            for (k, v) in weighted_basis_at(self.rec, self.n, z).into_iter().enumerate() {
                a[(i, k)] = v;
            }
            a[(i, m)] = if i % 2 == 0 { 1.0 } else { -1.0 };
            rhs[i] = self.target(z);
        }
        let sol = a.lu().solve(&rhs).ok_or(Error::Singular("Remez reference system"))?;
        Ok((sol.as_slice()[..m].to_vec(), sol[m]))
    }
}

fn to_result(
    rec: &Arc<RecurrenceTable>,
    c: Vec<f64>,
    error: f64,
    n: usize,
    defect: f64,
    iterations: usize,
    exact: bool,
    noise_limited: bool,
) -> Result<BestApprox> {
    Ok(BestApprox {
        poly: BasisPoly::new(rec.clone(), c)?,
        error,
        norm: Norm::Linf,
        degree: n,
        certificate: defect,
        iterations,
        exact,
        tail_flag: false,
        noise_limited,
        polished: true,
    })
}

pub(super) fn remez(
    rec: &Arc<RecurrenceTable>,
    f: &dyn Fn(f64) -> f64,
    n: usize,
    grid: &NormGrid,
) -> Result<BestApprox> {
    let prob = Problem { rec, f, n };
    let fw = grid.weighted_values(f)?;
    let fmax = fw.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if fmax == 0.0 {
        return to_result(rec, vec![0.0; n + 1], 0.0, n, 0.0, 0, true, false);
    }
    let mut refs = rec.gauss_data(n + 2)?.zeros;
    refs.reverse();
    let nodes = grid.nodes();
    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    for sweep in 1..=MAX_SWEEPS {
        let (c, _level) = prob.level(&refs)?;
        // merge grid nodes and reference points, tagged with the error
        let mut pts: Vec<(f64, f64)> = nodes.iter().map(|&x| (x, prob.error(&c, x))).collect();
        for &z in &refs {
            pts.push((z, prob.error(&c, z)));
        }
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        pts.dedup_by(|a, b| a.0 == b.0);
        let emax_grid = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
        let scale = nodes.iter().map(|&x| prob.scale(&c, x)).fold(0.0, f64::max);
        let noise = NOISE_ULPS * f64::EPSILON * scale;
        if emax_grid <= noise.max(1e-14 * fmax) {
            return to_result(rec, c, emax_grid, n, 0.0, sweep, true, false);
        }

        // one extremum per run of constant sign
        let mut alt: Vec<usize> = Vec::new();
        for (i, p) in pts.iter().enumerate() {
            if p.1 == 0.0 {
                continue;
            }
            match alt.last() {
                Some(&j) if pts[j].1.signum() == p.1.signum() => {
                    if p.1.abs() > pts[j].1.abs() {
                        *alt.last_mut().unwrap() = i;
                    }
                }
                _ => alt.push(i),
            }
        }
        let need = n + 2;
        if alt.len() < need {
            return Err(Error::NoConvergence {
                solver: "Remez exchange",
                iterations: sweep,
                defect: f64::NAN,
            });
        }
        // window of n + 2 consecutive alternants containing the global max,
        // maximizing the smallest error
        let gmax = (0..alt.len())
            .max_by(|&a, &b| pts[alt[a]].1.abs().partial_cmp(&pts[alt[b]].1.abs()).unwrap())
            .unwrap();
        let lo_start = gmax.saturating_sub(need - 1);
        let hi_start = gmax.min(alt.len() - need);
        let start = (lo_start..=hi_start)
            .max_by(|&a, &b| {
                let ma = alt[a..a + need].iter().map(|&i| pts[i].1.abs()).fold(f64::INFINITY, f64::min);
                let mb = alt[b..b + need].iter().map(|&i| pts[i].1.abs()).fold(f64::INFINITY, f64::min);
                ma.partial_cmp(&mb).unwrap().then(b.cmp(&a))
            })
            .unwrap();
        let chosen = &alt[start..start + need];

        // continuous refinement of each alternant
        let mut new_refs = Vec::with_capacity(need);
        let mut vals = Vec::with_capacity(need);
        for &i in chosen {
            let s = pts[i].1.signum();
            let a = if i > 0 { pts[i - 1].0 } else { pts[i].0 };
            let b = if i + 1 < pts.len() { pts[i + 1].0 } else { pts[i].0 };
            let (x, v) = if b > a {
                let (x, v) = golden_max(|t| s * prob.error(&c, t), a, b, 1e-10 * (b - a));
                if v >= s * pts[i].1 {
                    (x, v)
                } else {
                    (pts[i].0, s * pts[i].1)
                }
            } else {
                (pts[i].0, s * pts[i].1)
            };
            new_refs.push(x);
            vals.push(v);
        }
        let emax = vals.iter().cloned().fold(0.0, f64::max).max(emax_grid);
        let emin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let defect = (emax - emin) / emax;
        if best.as_ref().is_none_or(|b| emax < b.1) {
            best = Some((c.clone(), emax, defect));
        }
        if defect < DEFECT_TOL {
            return to_result(rec, c, emax, n, defect, sweep, false, false);
        }
        if emax - emin <= noise {
            return to_result(rec, c, emax, n, defect, sweep, false, true);
        }
        refs = new_refs;
    }
    let (_, _, defect) = best.unwrap();
    Err(Error::NoConvergence { solver: "Remez exchange", iterations: MAX_SWEEPS, defect })
}
