//! Weighted `L^1` approximation.
//!
//! Phase one solves the grid problem `min sum_i omega_i |F_i - (A c)_i|`
//! (trapezoid weights `omega`) by descending along the edges of the
//! piecewise-linear objective: a vertex interpolates `F` on `n + 1` nodes and
//! each step swaps one node, chosen by a ratio test over the breakpoints.
//!
//! Phase two moves to the continuous optimum. If the error changes sign at
//! roots `t` (plus fixed jumps of `f`) and nowhere else, optimality means
//! `int sign(e) w p_k = 0` for all `k <= n`. That system depends on `t` only,
//! so Gauss-Newton on `t` followed by interpolation at `t` gives the
//! minimizer. Usually `|t| = n + 1`; symmetric data can force extra roots.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{norm_dyn, weighted_basis_at, BestApprox, Norm, NormGrid};
use crate::error::{Error, Result};
use crate::numeric::brent;
use crate::operators::BasisPoly;
use crate::orthopoly::RecurrenceTable;
use crate::quadrature::gauss_legendre_cached;

pub const SUBGRADIENT_TOL: f64 = 1e-8;
const NEWTON_MAX: usize = 60;

/// Least-squares (minimum-norm when underdetermined) solution.
fn lstsq(a: DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let svd = a.svd(true, true);
    let tol = 1e-13 * svd.singular_values.max();
    svd.solve(&DVector::from_column_slice(b), tol)
        .map(|v| v.as_slice().to_vec())
        .map_err(|_| Error::Singular("L1 least-squares system"))
}

fn solve(a: DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    a.lu()
        .solve(&DVector::from_column_slice(b))
        .map(|v| v.as_slice().to_vec())
        .ok_or(Error::Singular("L1 interpolation system"))
}

struct Discrete {
    c: Vec<f64>,
    certificate: f64,
    iterations: usize,
}

fn discrete_l1(
    rec: &Arc<RecurrenceTable>,
    n: usize,
    nodes: &[f64],
    fw: &[f64],
    tiny: f64,
) -> Result<Discrete> {
    let m = n + 1;
    let big = nodes.len();
    let omega: Vec<f64> = (0..big)
        .map(|i| {
            let l = if i > 0 { nodes[i] - nodes[i - 1] } else { 0.0 };
            let r = if i + 1 < big { nodes[i + 1] - nodes[i] } else { 0.0 };
            0.5 * (l + r)
        })
        .collect();
    let rows: Vec<Vec<f64>> = nodes.iter().map(|&x| weighted_basis_at(rec, n, x)).collect();

    // start from the zeros of p_{n+1}
    let mut z: Vec<usize> = Vec::with_capacity(m);
    for t in rec.gauss_data(m)?.zeros.iter().rev() {
        let mut i = nodes.partition_point(|&x| x < *t).min(big - 1);
        if i > 0 && (nodes[i - 1] - t).abs() < (nodes[i] - t).abs() {
            i -= 1;
        }
        while z.contains(&i) {
            i += 1;
        }
        z.push(i);
    }

    let cap = 50 * big;
    for it in 1..=cap {
        let az = DMatrix::from_fn(m, m, |r, k| rows[z[r]][k]);
        let fz: Vec<f64> = z.iter().map(|&i| fw[i]).collect();
        let c = solve(az.clone(), &fz)?;
        let resid: Vec<f64> = (0..big)
            .map(|i| fw[i] - rows[i].iter().zip(&c).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        if resid.iter().all(|r| r.abs() <= tiny) {
            return Ok(Discrete { c, certificate: 0.0, iterations: it });
        }
        let mut in_z = vec![false; big];
        z.iter().for_each(|&i| in_z[i] = true);
        // rows off the vertex with a zero residual (to rounding)
        let zero: Vec<usize> = (0..big).filter(|&i| !in_z[i] && resid[i].abs() <= tiny).collect();
        let mut g = vec![0.0; m];
        for i in 0..big {
            if !in_z[i] && resid[i].abs() > tiny {
                let s = omega[i] * resid[i].signum();
                g.iter_mut().zip(&rows[i]).for_each(|(gk, a)| *gk += s * a);
            }
        }
        let v = solve(az.transpose(), &g)?;
        let binv = az.clone().try_inverse().ok_or(Error::Singular("L1 vertex"))?;
        // slope of the objective along each edge, leaving node j in direction sigma
        let dir = |j: usize| -> Vec<f64> { (0..m).map(|k| binv[(k, j)]).collect() };
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..m {
            let d = dir(j);
            let degenerate: f64 = zero
                .iter()
                .map(|&i| omega[i] * rows[i].iter().zip(&d).map(|(x, y)| x * y).sum::<f64>().abs())
                .sum();
            for sigma in [1.0, -1.0] {
                let slope = omega[z[j]] - sigma * v[j] + degenerate;
                if best.is_none_or(|b| slope < b.2) {
                    best = Some((j, sigma, slope));
                }
            }
        }
        let (j, sigma, slope0) = best.unwrap();
        let certificate = (0..m).map(|j| v[j].abs() / omega[z[j]]).fold(0.0, f64::max) - 1.0;
        if slope0 >= -1e-12 * omega[z[j]] {
            return Ok(Discrete { c, certificate: certificate.max(0.0), iterations: it });
        }
        let d: Vec<f64> = dir(j).iter().map(|x| sigma * x).collect();
        let mut breaks: Vec<(f64, usize, f64)> = Vec::new();
        for i in 0..big {
            if in_z[i] || resid[i].abs() <= tiny {
                continue;
            }
            let a: f64 = rows[i].iter().zip(&d).map(|(x, y)| x * y).sum();
            if a != 0.0 {
                let tau = resid[i] / a;
                if tau > 0.0 {
                    breaks.push((tau, i, a));
                }
            }
        }
        breaks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let mut slope = slope0;
        let mut enter = None;
        for &(_, i, a) in &breaks {
            slope += 2.0 * omega[i] * a.abs();
            if slope >= 0.0 {
                enter = Some(i);
                break;
            }
        }
        match enter {
            Some(i) => z[j] = i,
            None => return Err(Error::NoConvergence { solver: "L1 edge descent", iterations: it, defect: -slope0 }),
        }
    }
    Err(Error::NoConvergence { solver: "L1 edge descent", iterations: cap, defect: f64::NAN })
}

/// Sign changes of `e` over the grid: `(location, is_root)`.
fn sign_changes(e: &dyn Fn(f64) -> f64, nodes: &[f64], tiny: f64) -> Result<(Vec<(f64, bool)>, f64)> {
    let vals: Vec<f64> = nodes.iter().map(|&x| e(x)).collect();
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    let mut first_sign = 0.0;
    for i in 0..nodes.len() {
        if vals[i].abs() <= tiny {
            continue;
        }
        if let Some(j) = last {
            if vals[j].signum() != vals[i].signum() {
                let (a, b) = (nodes[j], nodes[i]);
                let r = brent(|x| Ok(e(x)), a, b, 1e-15 * (b - a).max(a.abs().max(b.abs()) * 1e-3), 0.0, 300)?;
                let is_root = e(r).abs() <= 1e-6 * vals[j].abs().max(vals[i].abs()).max(tiny);
                out.push((r, is_root));
            }
        } else {
            first_sign = vals[i].signum();
        }
        last = Some(i);
    }
    Ok((out, first_sign))
}

/// `int_a^b w p_k` for all `k <= n`.
fn basis_integrals(rec: &RecurrenceTable, n: usize, a: f64, b: f64, hmax: f64, out: &mut [f64], sign: f64) {
    if b <= a {
        return;
    }
    let rule = gauss_legendre_cached(20);
    let pieces = ((b - a) / hmax).ceil().max(1.0) as usize;
    let h = (b - a) / pieces as f64;
    for p in 0..pieces {
        let lo = a + p as f64 * h;
        for (&t, &wt) in rule.0.iter().zip(&rule.1) {
            let x = lo + 0.5 * h * (t + 1.0);
            for (o, v) in out.iter_mut().zip(weighted_basis_at(rec, n, x)) {
                *o += sign * 0.5 * h * wt * v;
            }
        }
    }
}

/// `int s(x) w p_k`, with `s = s0` left of the first change and flipping at
/// each point of `changes`.
fn moment_residual(rec: &RecurrenceTable, n: usize, changes: &[f64], s0: f64, r: f64, hmax: f64) -> Vec<f64> {
    let mut g = vec![0.0; n + 1];
    let mut s = s0;
    let mut a = -r;
    for &c in changes {
        basis_integrals(rec, n, a, c, hmax, &mut g, s);
        s = -s;
        a = c;
    }
    basis_integrals(rec, n, a, r, hmax, &mut g, s);
    g
}

struct Polished {
    c: Vec<f64>,
    certificate: f64,
}

fn polish(
    rec: &Arc<RecurrenceTable>,
    f: &dyn Fn(f64) -> f64,
    n: usize,
    grid: &NormGrid,
    c0: &[f64],
    tiny: f64,
) -> Result<Option<Polished>> {
    let m = n + 1;
    let nodes = grid.nodes();
    let r = grid.radius();
    let hmax = grid.inner() / (4.0 * m as f64 + 8.0);
    let weight = rec.weight();
    let target = |x: f64| weight.mul_weight(f(x), x, 1.0);
    let err_of = |c: &[f64]| {
        let c = c.to_vec();
        move |x: f64| target(x) - weighted_basis_at(rec, n, x).iter().zip(&c).map(|(a, b)| a * b).sum::<f64>()
    };
    let (changes, s0) = sign_changes(&err_of(c0), nodes, tiny)?;
    let jumps: Vec<f64> = changes.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let mut t: Vec<f64> = changes.iter().filter(|c| c.1).map(|c| c.0).collect();
    if t.is_empty() || s0 == 0.0 {
        return Ok(None);
    }

    let mut gscale = vec![0.0; m];
    {
        let rule = gauss_legendre_cached(20);
        let pieces = (2.0 * r / hmax).ceil() as usize;
        let h = 2.0 * r / pieces as f64;
        for p in 0..pieces {
            let lo = -r + p as f64 * h;
            for (&u, &wt) in rule.0.iter().zip(&rule.1) {
                let x = lo + 0.5 * h * (u + 1.0);
                for (o, v) in gscale.iter_mut().zip(weighted_basis_at(rec, n, x)) {
                    *o += 0.5 * h * wt * v.abs();
                }
            }
        }
    }
    let gnorm = gscale.iter().cloned().fold(0.0, f64::max);

    let all_changes = |t: &[f64]| {
        let mut s: Vec<f64> = t.iter().chain(&jumps).cloned().collect();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s
    };
    let residual = |t: &[f64]| moment_residual(rec, n, &all_changes(t), s0, r, hmax);
    let mut g = residual(&t);
    let mut gmax = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for _ in 0..NEWTON_MAX {
        if gmax <= 1e-14 * gnorm {
            break;
        }
        let s = all_changes(&t);
        let jac = DMatrix::from_fn(m, t.len(), |k, j| {
            let tj = t[j];
            let before = s.iter().filter(|&&x| x < tj).count();
            let s_left = if before % 2 == 0 { s0 } else { -s0 };
            2.0 * s_left * weighted_basis_at(rec, n, tj)[k]
        });
        let neg: Vec<f64> = g.iter().map(|v| -v).collect();
        let step = lstsq(jac, &neg)?;
        let mut lam = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = t.iter().zip(&step).map(|(a, d)| a + lam * d).collect();
            let ordered = {
                let s = all_changes(&trial);
                s.windows(2).all(|w| w[0] < w[1]) && s[0] > -r && *s.last().unwrap() < r
            };
            if ordered {
                let gt = residual(&trial);
                let gm = gt.iter().map(|v| v.abs()).fold(0.0, f64::max);
                if gm < gmax {
                    t = trial;
                    g = gt;
                    gmax = gm;
                    accepted = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    // interpolate f at the canonical points
    let a = DMatrix::from_fn(t.len(), m, |j, k| weighted_basis_at(rec, n, t[j])[k]);
    let fz: Vec<f64> = t.iter().map(|&x| target(x)).collect();
    let c = lstsq(a, &fz)?;
    let (after, s1) = sign_changes(&err_of(&c), nodes, tiny)?;
    let roots: Vec<f64> = after.iter().filter(|c| c.1).map(|c| c.0).collect();
    let jumps_after: Vec<f64> = after.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let spacing = grid.inner() / (super::NODES_PER_DEGREE * m) as f64;
    let same = roots.len() == t.len()
        && s1 == s0
        && jumps_after.len() == jumps.len()
        && roots.iter().zip(&t).all(|(a, b)| (a - b).abs() <= 1e-3 * spacing);
    if !same {
        return Ok(None);
    }
    Ok(Some(Polished { c, certificate: gmax / gnorm }))
}

pub(super) fn best_l1(
    rec: &Arc<RecurrenceTable>,
    f: &dyn Fn(f64) -> f64,
    n: usize,
    grid: &NormGrid,
) -> Result<BestApprox> {
    let nodes = grid.nodes();
    let fw = grid.weighted_values(f)?;
    let fmax = fw.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let result = |c: Vec<f64>, error: f64, certificate: f64, iterations: usize, exact: bool, polished: bool| {
        Ok(BestApprox {
            poly: BasisPoly::new(rec.clone(), c)?,
            error,
            norm: Norm::L1,
            degree: n,
            certificate,
            iterations,
            exact,
            tail_flag: false,
            noise_limited: false,
            polished,
        })
    };
    if fmax == 0.0 {
        return result(vec![0.0; n + 1], 0.0, 0.0, 0, true, true);
    }
    let tiny = 1e-13 * fmax;
    let disc = discrete_l1(rec, n, nodes, &fw, tiny)?;
    let poly = BasisPoly::new(rec.clone(), disc.c.clone())?;
    let e_disc = norm_dyn(&|x| f(x) - poly.eval(x), Norm::L1, grid)?;
    let sup = nodes
        .iter()
        .map(|&x| rec.weight().mul_weight(f(x) - poly.eval(x), x, 1.0).abs())
        .fold(0.0, f64::max);
    if sup <= tiny {
        return result(disc.c, e_disc, 0.0, disc.iterations, true, true);
    }
    if let Some(p) = polish(rec, f, n, grid, &disc.c, tiny)? {
        let poly = BasisPoly::new(rec.clone(), p.c.clone())?;
        let e = norm_dyn(&|x| f(x) - poly.eval(x), Norm::L1, grid)?;
        if e <= e_disc * (1.0 + 1e-9) && p.certificate < SUBGRADIENT_TOL {
            return result(p.c, e, p.certificate, disc.iterations, false, true);
        }
    }
    result(disc.c, e_disc, disc.certificate, disc.iterations, false, false)
}
