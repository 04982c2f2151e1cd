//! Explicit multipliers bounding the Schur operators.
//!
//! `L(x, z) = lambda^2 (z + log(1 + 1/x)) + 1`,
//! `LB_k = sum_{j <= k} (log(L)/2)^j / j!` and `UB_k = L / LB_k`.

use akpz_core::quad::integrate;
use serde::{Deserialize, Serialize};

use crate::error::{ChaosError, Result};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplierParams {
    pub lambda: f64,
    pub z: f64,
    /// Level `k`: the truncation index of `LB_k`/`UB_k`, or the operator index of `sigma_k`.
    pub k: usize,
    pub cutoff_n: u32,
    /// Free constant entering `f_k` and `z_k` only.
    #[serde(default = "one")]
    pub schur_k: f64,
}

fn one() -> f64 {
    1.0
}

impl MultiplierParams {
    pub fn new(lambda: f64, z: f64, k: usize, cutoff_n: u32) -> Self {
        Self { lambda, z, k, cutoff_n, schur_k: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !(self.z >= 1.0) || !(self.schur_k > 0.0) || self.cutoff_n == 0 {
            return Err(ChaosError::Domain(format!(
                "need lambda >= 0, z >= 1, K > 0, N >= 1; got lambda = {}, z = {}, K = {}, N = {}",
                self.lambda, self.z, self.schur_k, self.cutoff_n
            )));
        }
        Ok(())
    }

    /// `f_k(n) = 4 max(lambda sqrt(K) (n + k), 1)`.
    pub fn f(&self, k: usize, n: usize) -> f64 {
        4.0 * (self.lambda * self.schur_k.sqrt() * (n + k) as f64).max(1.0)
    }

    /// `z_k(n) = K (n + k)^2`.
    pub fn z_of(&self, k: usize, n: usize) -> f64 {
        self.schur_k * ((n + k) as f64).powi(2)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Multiplier {
    L,
    Lb,
    Ub,
    Sigma,
    /// Eigenvalue of `S_k` on chaos `chaos` where `-L0` has eigenvalue `x`, with the cutoff rescaling.
    SDiag { mu: f64, chaos: usize },
}

pub fn l(lambda: f64, x: f64, z: f64) -> f64 {
    lambda * lambda * (z + (1.0 / x).ln_1p()) + 1.0
}

pub fn lb(lambda: f64, k: usize, x: f64, z: f64) -> f64 {
    let y = 0.5 * l(lambda, x, z).ln();
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..=k {
        term *= y / j as f64;
        sum += term;
    }
    sum
}

pub fn ub(lambda: f64, k: usize, x: f64, z: f64) -> f64 {
    l(lambda, x, z) / lb(lambda, k, x, z)
}

/// `sigma_k`: `UB_{(k-3)/2}` for odd `k`, `LB_{k/2-1}` for even `k`, defined for `k >= 3`.
pub fn sigma(lambda: f64, k: usize, x: f64, z: f64) -> Result<f64> {
    if k < 3 {
        return Err(ChaosError::Domain(format!("sigma_k needs k >= 3, got {k}")));
    }
    Ok(if k % 2 == 1 { ub(lambda, (k - 3) / 2, x, z) } else { lb(lambda, k / 2 - 1, x, z) })
}

/// `F^N(x, z) = F(x / N^2, z)`.
pub fn scaled<F: Fn(f64, f64) -> f64>(f: F, cutoff_n: u32, x: f64, z: f64) -> f64 {
    let n2 = (cutoff_n as f64).powi(2);
    f(x / n2, z)
}

/// Scalar value of `S_k` on chaos `n` where `-L0 = x`. `S_2 = 0`.
pub fn s_diag(p: &MultiplierParams, k: usize, mu: f64, n: usize, x: f64) -> Result<f64> {
    p.validate()?;
    if k == 2 {
        return Ok(0.0);
    }
    let f = p.f(k, n);
    let z = p.z_of(k, n);
    let sig = |arg: f64| -> Result<f64> { sigma(p.lambda, k, arg / (p.cutoff_n as f64).powi(2), z) };
    if k % 2 == 1 {
        Ok(f * sig(mu + x)?)
    } else {
        Ok((sig(1.25 * (mu + x.max(0.5)))? - f) / f)
    }
}

/// Evaluates a named multiplier at `x`.
pub fn multiplier(m: Multiplier, p: &MultiplierParams, x: f64) -> Result<f64> {
    p.validate()?;
    if !(x > 0.0) {
        return Err(ChaosError::Domain(format!("multipliers need x > 0, got {x}")));
    }
    match m {
        Multiplier::L => Ok(l(p.lambda, x, p.z)),
        Multiplier::Lb => Ok(lb(p.lambda, p.k, x, p.z)),
        Multiplier::Ub => Ok(ub(p.lambda, p.k, x, p.z)),
        Multiplier::Sigma => sigma(p.lambda, p.k, x, p.z),
        Multiplier::SDiag { mu, chaos } => s_diag(p, p.k, mu, chaos, x),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub a: f64,
    pub b: f64,
    pub k: usize,
    /// `lambda^2 int_a^b dx / ((x^2 + x) UB_k)` by quadrature.
    pub ub_integral: f64,
    /// `2 (LB_{k+1}(a) - LB_{k+1}(b))`.
    pub ub_closed_form: f64,
    pub ub_rel_error: f64,
    /// `lambda^2 int_a^b dx / ((x^2 + x) LB_k)` by quadrature.
    pub lb_integral: f64,
    /// `2 (UB_k(a) - UB_k(b))`, an upper bound for `lb_integral`.
    pub lb_bound: f64,
    pub grid_points: usize,
    pub chain_violations: usize,
    pub monotonicity_violations: usize,
    pub passed: bool,
}

/// Integral identity, integral inequality, chains and monotonicity on `[a, b]`.
pub fn multiplier_identities_check(p: &MultiplierParams, a: f64, b: f64, k: usize) -> Result<IdentityReport> {
    p.validate()?;
    if !(0.0 < a && a < b) {
        return Err(ChaosError::Domain(format!("need 0 < a < b, got a = {a}, b = {b}")));
    }
    let (lam, z) = (p.lambda, p.z);
    let lam2 = lam * lam;
    let (ub_integral, _) = integrate(|x| lam2 / ((x * x + x) * ub(lam, k, x, z)), a, b, 1e-13);
    let ub_closed_form = 2.0 * (lb(lam, k + 1, a, z) - lb(lam, k + 1, b, z));
    let ub_rel_error = if ub_closed_form == 0.0 {
        ub_integral.abs()
    } else {
        (ub_integral - ub_closed_form).abs() / ub_closed_form.abs()
    };
    let (lb_integral, _) = integrate(|x| lam2 / ((x * x + x) * lb(lam, k, x, z)), a, b, 1e-13);
    let lb_bound = 2.0 * (ub(lam, k, a, z) - ub(lam, k, b, z));

    let grid_points = 1000;
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (grid_points - 1) as f64).exp())
        .collect();
    let tol = 1e-12;
    let mut chain_violations = 0;
    let mut monotonicity_violations = 0;
    for (i, &x) in grid.iter().enumerate() {
        let lv = l(lam, x, z);
        let (lbv, ubv, sq) = (lb(lam, k, x, z), ub(lam, k, x, z), lv.sqrt());
        let ok = 1.0 <= lbv + tol
            && lbv <= sq * (1.0 + tol)
            && sq <= ubv * (1.0 + tol)
            && ubv <= lv * (1.0 + tol)
            && (lam * z.sqrt()).max(1.0) <= sq * (1.0 + tol);
        if !ok {
            chain_violations += 1;
        }
        if i > 0 {
            let xp = grid[i - 1];
            let dec = l(lam, x, z) <= l(lam, xp, z) && lb(lam, k, x, z) <= lb(lam, k, xp, z) && ub(lam, k, x, z) <= ub(lam, k, xp, z);
            let z2 = z * 1.5;
            let inc = l(lam, x, z2) >= lv && lb(lam, k, x, z2) >= lbv && ub(lam, k, x, z2) >= ubv;
            if !(dec && inc) {
                monotonicity_violations += 1;
            }
        }
    }
    let passed = ub_rel_error <= 1e-8
        && lb_integral <= lb_bound * (1.0 + 1e-10)
        && chain_violations == 0
        && monotonicity_violations == 0;
    Ok(IdentityReport {
        a,
        b,
        k,
        ub_integral,
        ub_closed_form,
        ub_rel_error,
        lb_integral,
        lb_bound,
        grid_points,
        chain_violations,
        monotonicity_violations,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_values() {
        assert!((l(1.0, 1.0, 1.0) - 2.693_147_180_559_945).abs() < 1e-12);
        assert!((lb(1.0, 1, 1.0, 1.0) - 1.495_355_232_673_766).abs() < 1e-12);
        for x in [0.01, 1.0, 50.0] {
            assert_eq!(lb(0.7, 0, x, 2.0), 1.0);
            assert_eq!(ub(0.7, 0, x, 2.0), l(0.7, x, 2.0));
            assert_eq!(sigma(0.7, 3, x, 2.0).unwrap(), ub(0.7, 0, x, 2.0));
            assert_eq!(sigma(0.7, 4, x, 2.0).unwrap(), lb(0.7, 1, x, 2.0));
        }
    }

    #[test]
    fn s_diag_cases() {
        let p = MultiplierParams::new(1.0, 1.0, 3, 2);
        assert_eq!(s_diag(&p, 2, 1.0, 2, 3.0).unwrap(), 0.0);
        // f_3(2) = 4 * 5 = 20, z_3(2) = 25, argument (1 + 3) / 4
        let odd = s_diag(&p, 3, 1.0, 2, 3.0).unwrap();
        assert!((odd - 20.0 * l(1.0, 1.0, 25.0)).abs() < 1e-12);
        // even: (LB_1(5/4 (mu + max(x, 1/2)) / N^2, z_4(2)) - f) / f
        let even = s_diag(&p, 4, 1.0, 2, 0.25).unwrap();
        let want = (lb(1.0, 1, 1.25 * 1.5 / 4.0, 36.0) - 24.0) / 24.0;
        assert!((even - want).abs() < 1e-14);
        assert!(sigma(1.0, 2, 1.0, 1.0).is_err());
    }

    #[test]
    fn domain_errors() {
        let mut p = MultiplierParams::new(1.0, 0.5, 0, 1);
        assert!(multiplier(Multiplier::L, &p, 1.0).is_err());
        p.z = 1.0;
        assert!(multiplier(Multiplier::L, &p, 0.0).is_err());
        assert!(multiplier(Multiplier::L, &p, 1.0).is_ok());
        assert!(multiplier_identities_check(&p, 1.0, 0.5, 0).is_err());
    }

    #[test]
    fn identities_hold() {
        for k in 0..4 {
            for (lambda, z) in [(1.0, 1.0), (0.3, 4.0), (2.0, 1.0)] {
                let r = multiplier_identities_check(&MultiplierParams::new(lambda, z, k, 1), 0.01, 1.0, k).unwrap();
                assert!(r.passed, "{r:?}");
            }
        }
    }
}
