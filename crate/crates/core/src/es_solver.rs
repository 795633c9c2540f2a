//! Ercolani-Sinha constraints for the symmetric curves `w^3 = z^6 + b z^3 - 1`.

use crate::error::{Error, Result};
use crate::linalg::CVec;
use crate::scalar_special::{hyp2f1, hyp2f1_one_minus, rho, ToleranceConfig};
use crate::trigonal_curve::{c0, h_matrix, PeriodData, SymmetricCurve};
use num_complex::Complex64 as C64;
use num_integer::Integer;
use serde::Serialize;

/// Winding data and the solved curve parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ESData {
    pub n1: i64,
    pub m1: i64,
    pub n: [i64; 4],
    pub m: [i64; 4],
    /// Hopf number `2 (n1 + m1)(m1 - 2 n1)`.
    pub d: i64,
    pub t: f64,
    /// `1 - t`, kept separately since `t` can sit within rounding of 1.
    pub one_minus_t: f64,
    pub b: f64,
    pub alpha: f64,
    pub chi: f64,
    pub chi_cuberoot: f64,
    pub xi: f64,
}

impl ESData {
    pub fn curve(&self) -> SymmetricCurve {
        SymmetricCurve { b: self.b, alpha: self.alpha, beta: -1.0 / self.alpha, chi: self.chi, chi_cuberoot: self.chi_cuberoot }
    }
}

pub fn admissible(n1: i64, m1: i64) -> bool {
    n1.gcd(&m1) == 1 && (m1 + n1) * (m1 - 2 * n1) < 0
}

fn require(n1: i64, m1: i64) -> Result<()> {
    if admissible(n1, m1) {
        Ok(())
    } else {
        Err(Error::Inadmissible { n1, m1 })
    }
}

/// `n = (n1, m1 - n1, -m1, 2 n1 - m1)`, `m = (m1, -n1, n1 - m1, -3 n1)`.
pub fn extend_vectors(n1: i64, m1: i64) -> ([i64; 4], [i64; 4]) {
    ([n1, m1 - n1, -m1, 2 * n1 - m1], [m1, -n1, n1 - m1, -3 * n1])
}

/// `n^T H n - m . n + m^T H m`.
pub fn hopf_pairing(n: &[i64; 4], m: &[i64; 4]) -> i64 {
    let h = |u: &[i64; 4], v: &[i64; 4]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2] - u[3] * v[3];
    let dot: i64 = (0..4).map(|k| n[k] * m[k]).sum();
    h(n, n) - dot + h(m, m)
}

/// `2 (n1 + m1)(m1 - 2 n1)`.
pub fn hopf_number(n1: i64, m1: i64) -> i64 {
    2 * (n1 + m1) * (m1 - 2 * n1)
}

const THIRD: f64 = 1.0 / 3.0;

fn f_at(t: f64, cfg: &ToleranceConfig) -> Result<f64> {
    Ok(hyp2f1(C64::from(THIRD), C64::from(2.0 * THIRD), C64::from(1.0), C64::from(t), *cfg)?.re)
}

fn f_one_minus(s: f64, cfg: &ToleranceConfig) -> Result<f64> {
    Ok(hyp2f1_one_minus(C64::from(THIRD), C64::from(2.0 * THIRD), C64::from(1.0), C64::from(s), *cfg)?.re)
}

/// `F(1/3,2/3;1;t) / F(1/3,2/3;1;1-t)` evaluated from `s = min(t, 1-t)`.
fn ratio_small(s: f64, cfg: &ToleranceConfig) -> Result<f64> {
    Ok(f_at(s, cfg)? / f_one_minus(s, cfg)?)
}

/// `F(1/3,2/3;1;t) / F(1/3,2/3;1;1-t)`.
pub fn es_ratio(t: f64, cfg: &ToleranceConfig) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("t = {t} not in (0,1)")));
    }
    if t <= 0.5 {
        ratio_small(t, cfg)
    } else {
        Ok(1.0 / ratio_small(1.0 - t, cfg)?)
    }
}

/// Root of the ratio equation, returned as `(t, 1 - t)`.
///
/// The ratio is increasing in `t` and symmetric under `t -> 1-t` with reciprocal values,
/// so the search runs over `s = min(t, 1-t)` in `log s`; admissible pairs of modest size
/// already put `s` near `1e-21`.
pub fn solve_t_pair(n1: i64, m1: i64, cfg: &ToleranceConfig) -> Result<(f64, f64)> {
    require(n1, m1)?;
    let target = (2 * n1 - m1) as f64 / (m1 + n1) as f64;
    if !(target > 0.0) {
        return Err(Error::Inadmissible { n1, m1 });
    }
    if (target - 1.0).abs() < 1e-15 {
        return Ok((0.5, 0.5));
    }
    let goal = target.min(1.0 / target);
    let (mut lo, mut hi) = ((1e-300f64).ln(), 0.5f64.ln());
    if ratio_small(lo.exp(), cfg)? > goal {
        return Err(Error::Domain(format!("ratio {target} outside the representable range")));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if ratio_small(mid.exp(), cfg)? < goal {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    let s = s.exp();
    Ok(if target < 1.0 { (s, 1.0 - s) } else { (1.0 - s, s) })
}

pub fn solve_t(n1: i64, m1: i64, cfg: &ToleranceConfig) -> Result<f64> {
    Ok(solve_t_pair(n1, m1, cfg)?.0)
}

/// Closed-form roots for the ratios `1/2, 1, 2, 3, 4`.
pub fn ramanujan_t(n1: i64, m1: i64) -> Option<f64> {
    let (p, q) = (2 * n1 - m1, m1 + n1);
    if q == 0 {
        return None;
    }
    let g = p.gcd(&q) * q.signum();
    let (p, q) = (p / g, q / g);
    let s3 = 3f64.sqrt();
    let s2 = 2f64.sqrt();
    let c2 = 2f64.cbrt();
    match (p, q) {
        (1, 2) => Some(0.5 - 5.0 * s3 / 18.0),
        (1, 1) => Some(0.5),
        (2, 1) => Some(0.5 + 5.0 * s3 / 18.0),
        (3, 1) => Some((63.0 + 171.0 * c2 - 18.0 * c2 * c2) / 250.0),
        (4, 1) => Some(0.5 + (153.0 * s3 - 99.0 * s2) / 250.0),
        _ => None,
    }
}

/// Curve parameters from a root `t` (with `1 - t` supplied for accuracy).
pub fn curve_from_t_pair(n1: i64, m1: i64, t: f64, one_minus_t: f64, cfg: &ToleranceConfig) -> Result<ESData> {
    require(n1, m1)?;
    if !(t > 0.0 && one_minus_t > 0.0) {
        return Err(Error::Domain(format!("t = {t} not in (0,1)")));
    }
    let b = (one_minus_t - t) / (t * one_minus_t).sqrt();
    let alpha = (t / one_minus_t).powf(1.0 / 6.0);
    let f = if t <= 0.5 { f_at(t, cfg)? } else { f_one_minus(one_minus_t, cfg)? };
    let k = (n1 + m1) as f64;
    let chi3 = -k * c0() * alpha * (1.0 + alpha.powi(6)).powf(-THIRD) * f;
    let (n, m) = extend_vectors(n1, m1);
    let xi = 3.0 * chi3 / (k * (m1 - 2 * n1) as f64);
    Ok(ESData {
        n1,
        m1,
        n,
        m,
        d: hopf_number(n1, m1),
        t,
        one_minus_t,
        b,
        alpha,
        chi: chi3.powi(3),
        chi_cuberoot: chi3,
        xi,
    })
}

pub fn curve_from_t(n1: i64, m1: i64, t: f64, cfg: &ToleranceConfig) -> Result<ESData> {
    curve_from_t_pair(n1, m1, t, 1.0 - t, cfg)
}

/// Solve the constraints for `(n1, m1)`.
pub fn solve(n1: i64, m1: i64, cfg: &ToleranceConfig) -> Result<ESData> {
    let (t, u) = solve_t_pair(n1, m1, cfg)?;
    curve_from_t_pair(n1, m1, t, u, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ESResidual {
    /// `max |n^T A + m^T B - 6 chi^(1/3) e_1|`.
    pub winding: f64,
    /// `max |x - xi (H n + rho^2 m)|`.
    pub x_form: f64,
}

impl ESResidual {
    pub fn max(&self) -> f64 {
        self.winding.max(self.x_form)
    }
}

pub fn verify_es(p: &PeriodData, es: &ESData) -> ESResidual {
    let nv = CVec::from_iterator(4, es.n.iter().map(|&v| C64::from(v as f64)));
    let mv = CVec::from_iterator(4, es.m.iter().map(|&v| C64::from(v as f64)));
    let mut lhs = (nv.transpose() * &p.a + mv.transpose() * &p.b).transpose();
    lhs[0] -= C64::from(6.0 * es.chi_cuberoot);
    let winding = lhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let r = rho();
    let want = (h_matrix() * &nv + &mv * (r * r)) * C64::from(es.xi);
    let x_form = (&p.x - want).iter().map(|z| z.norm()).fold(0.0, f64::max);
    ESResidual { winding, x_form }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn ratio_reciprocal_symmetry(t in 1e-6f64..0.999999) {
            let cfg = ToleranceConfig::default();
            let p = es_ratio(t, &cfg).unwrap() * es_ratio(1.0 - t, &cfg).unwrap();
            prop_assert!((p - 1.0).abs() < 1e-12);
        }

        #[test]
        fn ratio_increasing(t in 0.01f64..0.98) {
            let cfg = ToleranceConfig::default();
            prop_assert!(es_ratio(t + 0.01, &cfg).unwrap() > es_ratio(t, &cfg).unwrap());
        }
    }
}
