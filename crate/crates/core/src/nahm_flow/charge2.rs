//! Charge 2: the elliptic curve `eta^2 + (K^2/4)(zeta^4 + 2(k^2 - k'^2) zeta^2 + 1) = 0`.

use super::*;
use crate::riemann_theta::jacobi_theta;
use crate::scalar_special::{elliptic_k, jacobi_sn_cn_dn};

fn check_modulus(k: f64) -> Result<()> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::Domain(format!("modulus k = {k} not in (0, 1)")));
    }
    Ok(())
}

fn check_z(z: f64) -> Result<()> {
    if !(z.abs() < 1.0) {
        return Err(Error::Domain(format!("z = {z} not in (-1, 1)")));
    }
    Ok(())
}

/// `(K, K', k')`.
fn moduli(k: f64) -> Result<(f64, f64, f64)> {
    let kp = (1.0 - k * k).sqrt();
    Ok((elliptic_k(k)?, elliptic_k(kp)?, kp))
}

/// `(Q0)_12 = K k' / cn(K z)`.
pub fn charge2_q0(k: f64, z: f64) -> Result<f64> {
    check_modulus(k)?;
    check_z(z)?;
    let (kk, _, kp) = moduli(k)?;
    let (_, cn, _) = jacobi_sn_cn_dn(kk * z, k)?;
    if cn.abs() < 1e-14 {
        return Err(Error::Pole { what: "1/cn", at: format!("z = {z}") });
    }
    Ok(kk * kp / cn)
}

/// `(Q0)_12 = (pi theta_2 theta_4 / 2) theta_4(z/2) / theta_2(z/2)` with `tau = i K'/K`.
pub fn charge2_q0_theta(k: f64, z: f64, cfg: &ToleranceConfig) -> Result<C64> {
    check_modulus(k)?;
    check_z(z)?;
    let (kk, kkp, _) = moduli(k)?;
    let tau = C64::new(0.0, kkp / kk);
    let t2 = jacobi_theta(2, c(0.0), tau, cfg)?;
    let t4 = jacobi_theta(4, c(0.0), tau, cfg)?;
    let den = jacobi_theta(2, c(z / 2.0), tau, cfg)?;
    if den.norm() < 1e-14 {
        return Err(Error::Pole { what: "1/theta_2", at: format!("z = {z}") });
    }
    Ok(t2 * t4 * (PI / 2.0) * jacobi_theta(4, c(z / 2.0), tau, cfg)? / den)
}

/// Closed-form triple and its derivative at `z`.
#[derive(Debug, Clone)]
pub struct Charge2Triple {
    /// `(f1, f2, f3) = (K dn/cn, K k' sn/cn, K k'/cn)` at `K z`.
    pub f: [f64; 3],
    pub t: [CMat; 3],
    pub dt: [CMat; 3],
}

fn sigma(i: usize) -> CMat {
    let o = c(0.0);
    let l = c(1.0);
    match i {
        1 => linalg::from_rows(&[vec![o, l], vec![l, o]]),
        2 => linalg::from_rows(&[vec![o, -I], vec![I, o]]),
        _ => linalg::from_rows(&[vec![l, o], vec![o, -l]]),
    }
}

/// `T1 = (f1/2i) s3`, `T2 = (f2/2i) s2`, `T3 = -(f3/2i) s1`.
pub fn charge2_closed(k: f64, z: f64) -> Result<Charge2Triple> {
    check_modulus(k)?;
    check_z(z)?;
    let (kk, _, kp) = moduli(k)?;
    let (sn, cn, dn) = jacobi_sn_cn_dn(kk * z, k)?;
    if cn.abs() < 1e-14 {
        return Err(Error::Pole { what: "1/cn", at: format!("z = {z}") });
    }
    let f = [kk * dn / cn, kk * kp * sn / cn, kk * kp / cn];
    let cn2 = cn * cn;
    let df = [kk * kk * kp * kp * sn / cn2, kk * kk * kp * dn / cn2, kk * kk * kp * sn * dn / cn2];
    let build = |v: &[f64; 3]| -> [CMat; 3] {
        [sigma(3) * (c(v[0]) / (2.0 * I)), sigma(2) * (c(v[1]) / (2.0 * I)), sigma(1) * (-c(v[2]) / (2.0 * I))]
    };
    Ok(Charge2Triple { f, t: build(&f), dt: build(&df) })
}

/// `(A_{-1}, A_0, A_1)` from a triple.
pub fn lax_from_triple(t: &[CMat; 3]) -> (CMat, CMat, CMat) {
    (&t[0] + &t[1] * I, &t[2] * (-2.0 * I), &t[0] - &t[1] * I)
}

/// `eta^2 + (K^2/4)(zeta^4 + 2(k^2 - k'^2) zeta^2 + 1)` as a coefficient table.
pub fn charge2_curve_coefficients(k: f64) -> Result<CMat> {
    check_modulus(k)?;
    let (kk, _, kp) = moduli(k)?;
    let s = kk * kk / 4.0;
    let mut m = CMat::zeros(3, 5);
    m[(0, 0)] = c(1.0);
    m[(2, 0)] = c(s);
    m[(2, 2)] = c(2.0 * s * (k * k - kp * kp));
    m[(2, 4)] = c(s);
    Ok(m)
}

/// Genus-one data: `tau = i K'/K`, `U = -1/2`, `K = (1 + tau)/2`, `phi(inf_{1,2}) = +-(1 + tau)/4`.
struct Elliptic {
    tau: C64,
    kk: f64,
    rho: [C64; 2],
    phi: [C64; 2],
    phi0: [C64; 2],
}

fn elliptic(k: f64) -> Result<Elliptic> {
    check_modulus(k)?;
    let (kk, kkp, _) = moduli(k)?;
    let tau = C64::new(0.0, kkp / kk);
    let p = (1.0 + tau) / 4.0;
    let p0 = (1.0 - tau) / 4.0;
    Ok(Elliptic { tau, kk, rho: [-I * kk / 2.0, I * kk / 2.0], phi: [p, -p], phi0: [p0, -p0] })
}

fn v1(x: C64) -> CVec {
    CVec::from_element(1, x)
}

fn odd_char() -> ThetaCharacteristic {
    ThetaCharacteristic::half(&[1], &[1]).unwrap()
}

/// `nu_2 - nu_1` from logarithmic derivatives of `theta[1/2, 1/2]` at the points over `zeta = 0`.
pub fn charge2_nu_theta(k: f64, cfg: &ToleranceConfig) -> Result<C64> {
    let e = elliptic(k)?;
    let tau = PeriodMatrixTau::new(CMat::from_element(1, 1, e.tau))?;
    let ev = ThetaEvaluator::new(&tau, cfg)?;
    let eta: Vec<C64> = (1..=2).map(|kk| I * e.kk / 2.0 * if kk % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let vprime0: Vec<CVec> = eta.iter().map(|h| v1(1.0 / (4.0 * h))).collect();
    let x: Vec<Vec<CVec>> = (0..2).map(|i| (0..2).map(|kk| v1(e.phi0[kk] - e.phi[i])).collect()).collect();
    let nu = nu_from_theta(&ev, &odd_char(), &x, &eta, &vprime0)?;
    Ok(nu[(1, 0)])
}

/// `E(inf_1, inf_2)` by the general prime-form code at genus one, and the reference `-2K e^{-i pi tau/4} theta_3 / theta_1'`.
pub fn charge2_prime_form(k: f64, cfg: &ToleranceConfig) -> Result<(C64, C64)> {
    let e = elliptic(k)?;
    let tau = PeriodMatrixTau::new(CMat::from_element(1, 1, e.tau))?;
    let ev = ThetaEvaluator::new(&tau, cfg)?;
    let vp: Vec<CVec> = e.rho.iter().map(|r| v1(-1.0 / (4.0 * r))).collect();
    let frame = select_frame(&ev, &vp)?;
    let phi: Vec<CVec> = e.phi.iter().map(|p| v1(*p)).collect();
    let pf = prime_form_matrix(&ev, &frame, &phi)?;
    let t2 = jacobi_theta(2, c(0.0), e.tau, cfg)?;
    let t3 = jacobi_theta(3, c(0.0), e.tau, cfg)?;
    let t4 = jacobi_theta(4, c(0.0), e.tau, cfg)?;
    let reference = -2.0 * e.kk * (-I * PI * e.tau / 4.0).exp() * t3 / (PI * t2 * t3 * t4);
    Ok((pf[(0, 1)], reference))
}

/// `Q0` data for charge 2; `eps` is the single free sign.
pub fn charge2_data(k: f64, eps: i64, cfg: &ToleranceConfig) -> Result<Q0Data> {
    let e = elliptic(k)?;
    let tau = PeriodMatrixTau::new(CMat::from_element(1, 1, e.tau))?;
    let nu21 = charge2_nu_theta(k, cfg)?;
    let vp: Vec<CVec> = e.rho.iter().map(|r| v1(-1.0 / (4.0 * r))).collect();
    Q0Data::new(
        tau,
        e.phi.iter().map(|p| v1(*p)).collect(),
        e.rho.to_vec(),
        vec![c(0.0), nu21],
        v1(c(-0.5)),
        v1((1.0 + e.tau) / 2.0),
        vec![Rational64::from(-2)],
        vec![Rational64::from(-1)],
        &vp,
        &[eps],
        cfg,
    )
}

/// Closed-form charge-2 sample on a grid.
pub fn charge2_closed_sample(k: f64, grid: &[f64]) -> Result<NahmSample> {
    let mut s = NahmSample {
        z_nodes: grid.to_vec(),
        t1: Vec::new(),
        t2: Vec::new(),
        t3: Vec::new(),
        residual: Vec::new(),
        anti_hermitian: Vec::new(),
        reality: Vec::new(),
        lax: Vec::new(),
        curve: Vec::new(),
        gauge: CMat::identity(2, 2),
    };
    for &z in grid {
        let tr = charge2_closed(k, z)?;
        let (am1, a0, a1) = lax_from_triple(&tr.t);
        s.residual.push(nahm_residual(&tr.t, &tr.dt));
        s.anti_hermitian.push(anti_hermitian_defect(&tr.t));
        s.reality.push(linalg::max_abs(&(&am1 + a1.adjoint())));
        let (dam1, da0, da1) = lax_from_triple(&tr.dt);
        s.lax.push(lax_residual([&am1, &a0, &a1], [&dam1, &da0, &da1]));
        s.curve.push(spectral_coefficients(&am1, &a0, &a1));
        let [t1, t2, t3] = tr.t;
        s.t1.push(t1);
        s.t2.push(t2);
        s.t3.push(t3);
    }
    Ok(s)
}

/// Both routes for charge 2.
#[derive(Debug, Clone)]
pub struct Charge2Report {
    pub closed: NahmSample,
    pub flow: NahmSample,
    /// Largest `|T_i^flow - T_i^closed|`.
    pub deviation: f64,
    pub nu21: C64,
    pub q0_symmetry: f64,
}

pub fn charge2_nahm(k: f64, grid: &[f64], cfg: &ToleranceConfig, fc: &FlowConfig) -> Result<Charge2Report> {
    for &z in grid {
        if !(z.abs() <= 1.0 - fc.margin) {
            return Err(Error::EndpointPole(z));
        }
    }
    let data = charge2_data(k, 1, cfg)?;
    let nu21 = data.nu[1] - data.nu[0];
    let q0 = sample_q0(data, grid)?;
    let flow = solve_gauge_flow(&q0, fc)?;
    let closed = charge2_closed_sample(k, &flow.z_nodes)?;
    Ok(Charge2Report { deviation: flow.deviation(&closed), q0_symmetry: q0.symmetry_residual(), closed, flow, nu21 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn q0_at_origin_is_k_kprime() {
        for k in [0.3, 0.6, 0.9] {
            let (kk, _, kp) = moduli(k).unwrap();
            assert_abs_diff_eq!(charge2_q0(k, 0.0).unwrap(), kk * kp, epsilon = 1e-13);
        }
    }

    #[test]
    fn theta_and_cn_forms_agree() {
        for k in [0.3, 0.6, 0.9] {
            for i in 0..=38 {
                let z = -0.95 + 0.05 * i as f64;
                let a = charge2_q0(k, z).unwrap();
                let b = charge2_q0_theta(k, z, &cfg()).unwrap();
                assert!((b - a).norm() < 1e-10 * a.abs().max(1.0), "k={k} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn nu_difference_is_half_pi_i() {
        for k in [0.3, 0.6, 0.9] {
            let nu = charge2_nu_theta(k, &cfg()).unwrap();
            assert!((nu - I * PI / 2.0).norm() < 1e-10, "k={k}: {nu}");
        }
    }

    #[test]
    fn prime_form_matches_reference() {
        for k in [0.3, 0.6, 0.9] {
            let (e, r) = charge2_prime_form(k, &cfg()).unwrap();
            assert!((e - r).norm() < 1e-10 * r.norm(), "k={k}: {e} vs {r}");
        }
    }

    #[test]
    fn generic_q0_reproduces_oracle() {
        for k in [0.3, 0.6, 0.9] {
            let data = charge2_data(k, 1, &cfg()).unwrap();
            for z in [-0.7, -0.2, 0.0, 0.4, 0.9] {
                let q = data.value(z).unwrap();
                let o = charge2_q0(k, z).unwrap();
                assert!((q[(0, 1)] - o).norm() < 1e-9 * o, "k={k} z={z}: {}", q[(0, 1)]);
                assert!((q[(1, 0)] - o).norm() < 1e-9 * o);
            }
        }
    }

    #[test]
    fn closed_form_initial_values() {
        let k = 0.6;
        let (kk, _, kp) = moduli(k).unwrap();
        let t = charge2_closed(k, 0.0).unwrap();
        assert_abs_diff_eq!(t.f[0], kk, epsilon = 1e-14);
        assert_abs_diff_eq!(t.f[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.f[2], kk * kp, epsilon = 1e-14);
    }

    #[test]
    fn closed_form_solves_nahm() {
        for k in [0.3, 0.6, 0.9] {
            let s = charge2_closed_sample(k, &symmetric_grid(0.9, 37)).unwrap();
            assert!(s.max_residual() < 1e-9);
            assert!(s.max_anti_hermitian() < 1e-14);
            let expect = charge2_curve_coefficients(k).unwrap();
            assert!(s.curve_deviation(&expect) < 1e-9, "{}", s.curve_deviation(&expect));
        }
    }

    #[test]
    fn flow_reproduces_closed_form() {
        for k in [0.3, 0.6, 0.9] {
            let r = charge2_nahm(k, &symmetric_grid(0.9, 19), &cfg(), &FlowConfig::default()).unwrap();
            assert!(r.deviation < 1e-7, "k={k}: {:.2e}", r.deviation);
            assert!(r.flow.max_residual() < 1e-7, "k={k}: {:.2e}", r.flow.max_residual());
            assert!(r.q0_symmetry < 1e-10);
        }
    }

    #[test]
    fn endpoint_grid_rejected() {
        let e = charge2_nahm(0.6, &[0.0, 0.99], &cfg(), &FlowConfig::default()).unwrap_err();
        assert!(matches!(e, Error::EndpointPole(_)));
    }

    #[test]
    fn pole_flagged() {
        assert!(matches!(charge2_q0(0.6, 1.0), Err(Error::Domain(_))));
    }
}
