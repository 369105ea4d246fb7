//! Mhaskar–Rakhmanov–Saff numbers and the band functions built on them.
//!
//! `a_x` is the positive root of
//! `x = (2/pi) int_0^{pi/2} a sin(t) Q'(a sin(t)) dt`
//! (the usual `u = sin t` substitution removes the endpoint singularity).

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::numeric::brent;
use crate::quadrature::{gauss_legendre_cached, gl_integrate};
use crate::weights::WeightSpec;

const RHS_START_POINTS: usize = 128;
const RHS_MAX_POINTS: usize = 4096;
const RHS_REL_TOL: f64 = 1e-12;

/// Right-hand side of the MRS equation at scale `a`.
pub fn mrs_rhs(weight: &WeightSpec, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("MRS scale must be positive, got {a}")));
    }
    let integrate = |n: usize| -> Result<f64> {
        let rule = gauss_legendre_cached(n);
        let mut overflow = None;
        let v = gl_integrate(
            |th| {
                let x = a * th.sin();
                let v = x * weight.dq(x);
                if !v.is_finite() {
                    overflow = Some(x);
                }
                v
            },
            0.0,
            FRAC_PI_2,
            &rule,
        );
        match overflow {
            Some(x) => Err(Error::Overflow { x }),
            None => Ok(v / FRAC_PI_2),
        }
    };
    let mut n = RHS_START_POINTS;
    let mut prev = integrate(n)?;
    while n < RHS_MAX_POINTS {
        n *= 2;
        let next = integrate(n)?;
        if (next - prev).abs() <= RHS_REL_TOL * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}

/// A weight together with a cache of its MRS numbers.
#[derive(Debug)]
pub struct MrsTable {
    weight: WeightSpec,
    cache: RwLock<BTreeMap<u64, f64>>,
}

impl Clone for MrsTable {
    fn clone(&self) -> Self {
        Self {
            weight: self.weight.clone(),
            cache: RwLock::new(self.cache.read().unwrap().clone()),
        }
    }
}

impl MrsTable {
    pub fn new(weight: WeightSpec) -> Self {
        Self { weight, cache: RwLock::new(BTreeMap::new()) }
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    /// `a_x`, with `|rhs(a) - x| <= 1e-10 max(1, x)`.
    pub fn compute_a(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Domain(format!("MRS index must be positive, got {x}")));
        }
        // positive doubles order like their bit patterns
        let key = x.to_bits();
        if let Some(&a) = self.cache.read().unwrap().get(&key) {
            return Ok(a);
        }
        let a = self.solve(x)?;
        self.cache.write().unwrap().insert(key, a);
        Ok(a)
    }

    fn solve(&self, x: f64) -> Result<f64> {
        let w = &self.weight;
        let ftol = 1e-10 * x.max(1.0);
        let lo = 1e-8;
        let mut hi = 1.0;
        let mut last_finite = 0.0;
        loop {
            match mrs_rhs(w, hi) {
                Ok(v) if v >= x => break,
                Ok(v) => {
                    last_finite = v;
                    hi *= 2.0;
                }
                Err(Error::Overflow { .. }) => {
                    return Err(Error::MrsRange { x, max_x: last_finite });
                }
                Err(e) => return Err(e),
            }
            if hi > 1e150 {
                return Err(Error::MrsRange { x, max_x: last_finite });
            }
        }
        let f = |a: f64| Ok(mrs_rhs(w, a)? - x);
        let a = brent(f, lo, hi, 1e-15 * hi, 0.25 * ftol, 300)?;
        let resid = (mrs_rhs(w, a)? - x).abs();
        if resid > ftol {
            return Err(Error::RootFinding(format!(
                "MRS residual {resid:.3e} at x = {x} above tolerance"
            )));
        }
        Ok(a)
    }

    /// `T(a_u)`.
    pub fn t_at(&self, u: f64) -> Result<f64> {
        self.weight.t(self.compute_a(u)?)
    }

    /// `delta_u = (u T(a_u))^{-2/3}`.
    pub fn delta(&self, u: f64) -> Result<f64> {
        Ok((u * self.t_at(u)?).powf(-2.0 / 3.0))
    }

    /// Band function `phi_u(x)`, constant beyond `a_u`.
    pub fn phi(&self, u: f64, x: f64) -> Result<f64> {
        let au = self.compute_a(u)?;
        let a2u = self.compute_a(2.0 * u)?;
        let du = self.delta(u)?;
        let s = x.abs().min(au);
        Ok((au / u) * (1.0 - s / a2u) / (1.0 - s / au + du).sqrt())
    }

    /// `T(a_n) / (n / a_n)^{2/3}` for each `n`.
    pub fn check_condition_14(&self, n_list: &[usize]) -> Result<Vec<(usize, f64)>> {
        if n_list.is_empty() || n_list.contains(&0) {
            return Err(Error::Domain("n list must be nonempty with entries >= 1".into()));
        }
        n_list
            .iter()
            .map(|&n| {
                let nf = n as f64;
                let a = self.compute_a(nf)?;
                let t = self.weight.t(a)?;
                Ok((n, t / (nf / a).powf(2.0 / 3.0)))
            })
            .collect()
    }

    /// Cached `(x, a_x)` pairs in increasing `x`.
    pub fn cached(&self) -> Vec<(f64, f64)> {
        self.cache
            .read()
            .unwrap()
            .iter()
            .map(|(&k, &a)| (f64::from_bits(k), a))
            .collect()
    }
}
