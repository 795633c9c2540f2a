//! Charge 3: the symmetric curves `eta^3 + chi(zeta^6 + b zeta^3 - 1) = 0`.

use super::*;
use crate::es_solver::ESData;
use crate::scalar_special::rho as rho3;
use crate::trigonal_curve::{abel_infinities, riemann_constants, second_kind_infinities, PeriodData};

fn col(v: &[C64]) -> CVec {
    CVec::from_column_slice(v)
}

fn binv_t(p: &PeriodData) -> Result<CMat> {
    Ok(linalg::inverse(&p.b)?.transpose())
}

/// `phi_j = int_{inf_1}^{inf_j} v`, `j = 1..3`.
pub fn abel_images(p: &PeriodData) -> Result<Vec<CVec>> {
    let bt = binv_t(p)?;
    let [to2, to3, _] = abel_infinities(p);
    Ok(vec![CVec::zeros(4), &bt * col(&to2), &bt * col(&to3)])
}

/// `rho_j = -chi^{1/3} e^{2 pi i j / 3}`.
pub fn curve_rho(p: &PeriodData) -> Vec<C64> {
    (1..=3).map(|j| -p.curve.chi_cuberoot * rho3().powi(j)).collect()
}

/// `dv/dt` at `inf_j` in the local parameter `t = 1/zeta`.
fn vprimes_infinity(p: &PeriodData) -> Result<Vec<CVec>> {
    let bt = binv_t(p)?;
    let r = rho3();
    Ok((1..=3).map(|j| &bt * col(&[-r.powi(-j), c(0.0), c(0.0), -r.powi(-2 * j)])).collect())
}

/// Prime forms `E(inf_j, inf_l)` with the frame used.
pub fn prime_form_infinities(p: &PeriodData, cfg: &ToleranceConfig) -> Result<(PrimeFormFrame, CMat)> {
    let ev = ThetaEvaluator::new(&p.tau_b, cfg)?;
    let frame = select_frame(&ev, &vprimes_infinity(p)?)?;
    let e = prime_form_matrix(&ev, &frame, &abel_images(p)?)?;
    Ok((frame, e))
}

/// `nu_j` from the second-kind integrals and the a-periods `y` of `dr_1`.
pub fn nu_closed(p: &PeriodData) -> Result<Vec<C64>> {
    let chi3 = p.curve.chi_cuberoot;
    let r = rho3();
    let yv = CVec::from_iterator(4, (0..4).map(|i| p.y[i] * r * r * if i == 3 { -1.0 } else { 1.0 }));
    let s = second_kind_infinities(p);
    let phi = abel_images(p)?;
    Ok((0..3).map(|j| -chi3 * s[j] - 3.0 * chi3 * dot(&yv, &phi[j])).collect())
}

/// `nu_i - nu_j` from theta logarithmic derivatives at the three points over `zeta = 0`.
pub fn nu_theta(p: &PeriodData, odd: &ThetaCharacteristic, cfg: &ToleranceConfig) -> Result<CMat> {
    let ev = ThetaEvaluator::new(&p.tau_b, cfg)?;
    let bt = binv_t(p)?;
    let phi = abel_images(p)?;
    let sx = p.curve.sextic();
    let labels: Vec<C64> = (1..=3).map(|j| rho3().powi(j)).collect();
    let chi3 = p.curve.chi_cuberoot;
    let mut eta = Vec::new();
    let mut vp0 = Vec::new();
    let mut x = vec![Vec::new(); 3];
    for k in 1..=3 {
        let w0 = sx.w_at_origin(k);
        let (du, lbl) = sx.ray_to_infinity(PI / 6.0, k, cfg)?;
        let (ip, gap) = labels
            .iter()
            .enumerate()
            .map(|(j, l)| (j, (l - lbl).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if gap > 1e-6 {
            return Err(Error::Path(format!("ray from 0_{k} ends at w/z^2 = {lbl}, not a point at infinity")));
        }
        let vint = &bt * col(&du);
        for (i, xi) in x.iter_mut().enumerate() {
            xi.push(&phi[ip] - &phi[i] - &vint);
        }
        eta.push(-chi3 * w0);
        vp0.push(&bt * col(&[1.0 / w0, 1.0 / (w0 * w0), c(0.0), c(0.0)]));
    }
    nu_from_theta(&ev, odd, &x, &eta, &vp0)
}

/// `nu_i - nu_j` from the closed form, cross-checked against the theta form.
pub fn nu_differences(p: &PeriodData, cfg: &ToleranceConfig) -> Result<CMat> {
    let nu = nu_closed(p)?;
    let closed = CMat::from_fn(3, 3, |i, j| nu[i] - nu[j]);
    let (frame, _) = prime_form_infinities(p, cfg)?;
    let th = nu_theta(p, &frame.odd_char, cfg)?;
    let gap = linalg::max_abs(&(&th - &closed));
    if gap > 1e-7 * (1.0 + linalg::max_abs(&closed)) {
        return Err(Error::Consistency(format!("nu differences: closed form and theta form differ by {gap:.2e}")));
    }
    Ok(closed)
}

/// `U = (m + tau n)/2`.
pub fn winding_vector(es: &ESData, p: &PeriodData) -> CVec {
    let n = CVec::from_iterator(4, es.n.iter().map(|&v| c(v as f64)));
    let m = CVec::from_iterator(4, es.m.iter().map(|&v| c(v as f64)));
    (m + p.tau_b.matrix() * n) * c(0.5)
}

/// `Q0` data for `(n1, m1)`; `eps` are the two free signs.
pub fn charge3_data(es: &ESData, p: &PeriodData, eps: &[i64], cfg: &ToleranceConfig) -> Result<Q0Data> {
    if (p.curve.b - es.b).abs() > 1e-9 * (1.0 + es.b.abs()) {
        return Err(Error::Consistency(format!("periods at b = {} but curve has b = {}", p.curve.b, es.b)));
    }
    let rk = riemann_constants(p, cfg)?;
    let two = Rational64::from(2);
    let p_tilde = (0..4).map(|i| Rational64::from(es.m[i]) - two * rk.characteristic.b[i]).collect();
    let q_tilde = (0..4).map(|i| Rational64::from(es.n[i]) - two * rk.characteristic.a[i]).collect();
    Q0Data::new(
        p.tau_b.clone(),
        abel_images(p)?,
        curve_rho(p),
        nu_closed(p)?,
        winding_vector(es, p),
        rk.vector,
        p_tilde,
        q_tilde,
        &vprimes_infinity(p)?,
        eps,
        cfg,
    )
}

/// `Q0` on a grid in `(-1, 1)`.
pub fn charge3_q0(es: &ESData, p: &PeriodData, eps: &[i64], grid: &[f64], cfg: &ToleranceConfig) -> Result<Q0Grid> {
    if let Some(z) = grid.iter().find(|z| !(z.abs() < 1.0)) {
        return Err(Error::Domain(format!("grid node {z} outside (-1, 1)")));
    }
    sample_q0(charge3_data(es, p, eps, cfg)?, grid)
}

/// Coefficient table of `eta^3 + chi(zeta^6 + b zeta^3 - 1)` in the layout of [`spectral_coefficients`].
pub fn symmetric_curve_coefficients(chi: f64, b: f64) -> CMat {
    let mut m = CMat::zeros(4, 7);
    m[(0, 0)] = c(1.0);
    m[(3, 0)] = c(-chi);
    m[(3, 3)] = c(chi * b);
    m[(3, 6)] = c(chi);
    m
}

/// Gauge-flow Nahm data for charge 3.
pub fn charge3_nahm(
    es: &ESData,
    p: &PeriodData,
    eps: &[i64],
    grid: &[f64],
    cfg: &ToleranceConfig,
    fc: &FlowConfig,
) -> Result<NahmSample> {
    let q0 = charge3_q0(es, p, eps, grid, cfg)?;
    if let Some(z) = q0.poles.first() {
        return Err(Error::Pole { what: "Q0", at: format!("z = {z}") });
    }
    solve_gauge_flow(&q0, fc)
}

/// A zero of `theta(s U - K)` on `s in [0, 2]` (`s = z + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaZero {
    pub s: f64,
    pub z: f64,
    pub den_abs: f64,
    /// Normalised `|theta(phi_l - phi_j + s U - K)|`, `j != l` row-major.
    pub num_abs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ZeroScan {
    /// `(s, |theta(s U - K)|)`, normalised.
    pub samples: Vec<(f64, f64)>,
    pub zeros: Vec<ThetaZero>,
    /// Zeros strictly inside `(0, 2)`.
    pub interior: Vec<ThetaZero>,
    pub pole_free: bool,
}

const ZERO_LEVEL: f64 = 1e-8;
/// The endpoint zeros are of second order, so `|theta|` sits at roundoff on a window of width ~1e-4 around them.
/// Zeros closer than this to s = 0 or s = 2 count as endpoint zeros.
pub const END_GAP: f64 = 1e-3;

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Scan `|theta(s U - K)|` over the sorted `s` nodes in `[0, 2]` for zeros.
pub fn zero_scan(es: &ESData, p: &PeriodData, s_grid: &[f64], cfg: &ToleranceConfig) -> Result<ZeroScan> {
    if s_grid.len() < 3 || s_grid.iter().any(|s| !(0.0..=2.0).contains(s)) {
        return Err(Error::Domain("zero scan needs at least 3 nodes inside [0, 2]".into()));
    }
    let data = charge3_data(es, p, &[1, 1], cfg)?;
    let den = |s: f64| data.denominator_modulus(s - 1.0).unwrap_or(f64::NAN);
    let vals: Vec<f64> = s_grid.par_iter().map(|&s| den(s)).collect();
    if vals.iter().any(|v| v.is_nan()) {
        return Err(Error::Singular("theta evaluation failed during zero scan".into()));
    }
    let n = vals.len();
    let mut zeros = Vec::new();
    for i in 0..n {
        let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
        let right = if i + 1 == n { f64::INFINITY } else { vals[i + 1] };
        if !(vals[i] <= left && vals[i] <= right) {
            continue;
        }
        let a = s_grid[i.saturating_sub(1)];
        let b = s_grid[(i + 1).min(n - 1)];
        // flat (higher-order) minima at the bracket ends are resolved by the ends themselves
        let (s, d) = [golden_min(&den, a, b, 1e-10), a, b]
            .into_iter()
            .map(|s| (s, den(s)))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if d < ZERO_LEVEL {
            zeros.push(ThetaZero { s, z: s - 1.0, den_abs: d, num_abs: data.numerator_moduli(s - 1.0)? });
        }
    }
    zeros.dedup_by(|a, b| (a.s - b.s).abs() < 1e-7);
    let interior: Vec<ThetaZero> = zeros.iter().filter(|z| z.s > END_GAP && z.s < 2.0 - END_GAP).cloned().collect();
    Ok(ZeroScan {
        samples: s_grid.iter().cloned().zip(vals).collect(),
        pole_free: interior.is_empty(),
        zeros,
        interior,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::es_solver::solve;
    use crate::trigonal_curve::periods_of;
    use std::sync::OnceLock;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn tetra() -> &'static (ESData, PeriodData) {
        static T: OnceLock<(ESData, PeriodData)> = OnceLock::new();
        T.get_or_init(|| {
            let es = solve(1, 1, &cfg()).unwrap();
            let p = periods_of(&es.curve(), &cfg()).unwrap();
            (es, p)
        })
    }

    #[test]
    fn q0_symmetric_at_origin_with_zero_diagonal() {
        let (es, p) = tetra();
        let d = charge3_data(es, p, &[1, 1], &cfg()).unwrap();
        let q = d.value(0.0).unwrap();
        assert!(linalg::max_abs(&(&q - q.transpose())) < 1e-8 * linalg::max_abs(&q));
        for i in 0..3 {
            assert_eq!(q[(i, i)], c(0.0));
        }
    }

    #[test]
    fn q0_reflection_symmetry() {
        let (es, p) = tetra();
        let g = charge3_q0(es, p, &[1, 1], &symmetric_grid(0.9, 19), &cfg()).unwrap();
        assert!(g.poles.is_empty());
        assert!(g.symmetry_residual() < 1e-8, "{:.2e}", g.symmetry_residual());
        assert_eq!(g.diagonal_residual(), 0.0);
    }

    #[test]
    fn sign_flip_is_diagonal_conjugation() {
        let (es, p) = tetra();
        let a = charge3_data(es, p, &[1, 1], &cfg()).unwrap().value(0.3).unwrap();
        let b = charge3_data(es, p, &[-1, 1], &cfg()).unwrap().value(0.3).unwrap();
        let s = CMat::from_diagonal(&col(&[c(1.0), c(-1.0), c(1.0)]));
        assert_eq!(&s * &a * &s, b);
    }

    #[test]
    fn nu_routes_agree() {
        let (_, p) = tetra();
        let nu = nu_closed(p).unwrap();
        let closed = CMat::from_fn(3, 3, |i, j| nu[i] - nu[j]);
        let (frame, _) = prime_form_infinities(p, &cfg()).unwrap();
        let th = nu_theta(p, &frame.odd_char, &cfg()).unwrap();
        let gap = linalg::max_abs(&(&th - &closed));
        assert!(gap < 1e-8, "{gap:.2e}");
        assert!(nu_differences(p, &cfg()).is_ok());
    }

    #[test]
    fn prime_form_is_antisymmetric_and_odd() {
        let (_, p) = tetra();
        let (frame, e) = prime_form_infinities(p, &cfg()).unwrap();
        assert_eq!(char_parity(&frame.odd_char).unwrap(), Parity::Odd);
        assert!(frame.grad_norm > 1e-6);
        assert!(linalg::max_abs(&(&e + e.transpose())) < 1e-9);
    }

    #[test]
    fn odd_characteristic_choice_is_a_diagonal_gauge() {
        let (es, p) = tetra();
        let d1 = charge3_data(es, p, &[1, 1], &cfg()).unwrap();
        let ev = d1.evaluator();
        let vp = vprimes_infinity(p).unwrap();
        let phi = abel_images(p).unwrap();
        let zero = vec![c(0.0); 4];
        // second admissible odd characteristic
        let alt = half_characteristics(4)
            .into_iter()
            .filter(|ch| char_parity(ch).unwrap() == Parity::Odd && *ch != d1.frame.odd_char)
            .find_map(|ch| {
                let grad = ev.jet(&zero, &ch, 1).unwrap().grad;
                let sq: Vec<C64> = vp.iter().map(|v| dot(&grad, v)).collect();
                if grad.norm() > 1e-3 && sq.iter().all(|s| s.norm() > 1e-6) {
                    Some(PrimeFormFrame { odd_char: ch, half_diff_values: sq.iter().map(|s| s.sqrt()).collect(), grad_norm: grad.norm() })
                } else {
                    None
                }
            })
            .unwrap();
        let e1 = prime_form_matrix(ev, &d1.frame, &phi).unwrap();
        let e2 = prime_form_matrix(ev, &alt, &phi).unwrap();
        for j in 0..3 {
            for l in 0..3 {
                if j != l {
                    let r1 = e1[(j, l)] * e1[(l, j)];
                    let r2 = e2[(j, l)] * e2[(l, j)];
                    assert!((r1 - r2).norm() < 1e-8 * r1.norm(), "{j}{l}: {r1} vs {r2}");
                }
            }
        }
    }

    #[test]
    fn tetrahedral_flow() {
        let (es, p) = tetra();
        let grid = symmetric_grid(0.9, 37);
        let s = charge3_nahm(es, p, &[1, 1], &grid, &cfg(), &FlowConfig::default()).unwrap();
        let expect = symmetric_curve_coefficients(es.chi, es.b);
        assert!(s.curve_deviation(&expect) < 1e-6, "{:.2e}", s.curve_deviation(&expect));
        assert!(s.max_residual() < 1e-6, "{:.2e}", s.max_residual());
        assert!(s.max_anti_hermitian() < 1e-8, "{:.2e}", s.max_anti_hermitian());
        let lax = s.lax.iter().cloned().fold(0.0, f64::max);
        assert!(lax < 1e-6, "{lax:.2e}");
        let reality = s.reality.iter().cloned().fold(0.0, f64::max);
        assert!(reality < 1e-6, "{reality:.2e}");
    }

    #[test]
    fn tetrahedral_scan_has_only_endpoint_zeros() {
        let (es, p) = tetra();
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 / 200.0).collect();
        let sc = zero_scan(es, p, &grid, &cfg()).unwrap();
        assert!(sc.pole_free, "{:?}", sc.interior);
        let ends: Vec<f64> = sc.zeros.iter().map(|z| z.s).collect();
        assert_eq!(ends.len(), 2, "{ends:?}");
        assert!(ends[0].abs() < END_GAP && (ends[1] - 2.0).abs() < END_GAP, "{ends:?}");
    }

    fn scan(n1: i64, m1: i64) -> ZeroScan {
        let es = solve(n1, m1, &cfg()).unwrap();
        let p = periods_of(&es.curve(), &cfg()).unwrap();
        let grid: Vec<f64> = (0..=600).map(|i| i as f64 / 300.0).collect();
        zero_scan(&es, &p, &grid, &cfg()).unwrap()
    }

    #[test]
    fn b_zero_curve_has_unwanted_zeros() {
        let sc = scan(2, 1);
        assert!(!sc.pole_free);
        let s: Vec<f64> = sc.interior.iter().map(|z| z.s).collect();
        assert_eq!(s.len(), 2, "{s:?}");
        assert!((s[0] - 2.0 / 3.0).abs() < 1e-5 && (s[1] - 4.0 / 3.0).abs() < 1e-5, "{s:?}");
        for z in &sc.interior {
            assert!(z.num_abs.iter().all(|v| *v > 1e-4), "{:?}", z.num_abs);
        }
    }

    #[test]
    fn four_minus_one_has_interior_zero() {
        let sc = scan(4, -1);
        assert!(!sc.pole_free, "{:?}", sc.zeros);
    }

    #[test]
    fn scan_rejects_bad_grid() {
        let (es, p) = tetra();
        assert!(zero_scan(es, p, &[0.0, 1.0, 3.0], &cfg()).is_err());
    }
}
