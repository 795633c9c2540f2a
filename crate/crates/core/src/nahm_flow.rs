//! Nahm data from theta quotients.
//!
//! `Q0(z)` is assembled from prime forms between the points over `zeta = infinity`,
//! the constants `nu_j` and a quotient of theta functions along the line `(z + 1) U - K`.
//! The gauge flow `C' = C Q0 / 2` then conjugates the Lax matrices
//! `A(zeta) = A_{-1} + A_0 zeta + A_1 zeta^2` into the frame of the Nahm triple.

mod charge2;
mod charge3;

pub use charge2::*;
pub use charge3::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::riemann_theta::{char_parity, half_characteristics, Parity, PeriodMatrixTau, ThetaCharacteristic, ThetaEvaluator};
use crate::scalar_special::ToleranceConfig;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use num_rational::Rational64;
use rayon::prelude::*;
use std::f64::consts::PI;

const I: C64 = C64::new(0.0, 1.0);

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn dot(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Odd characteristic behind the prime form, with the half differentials at the points at infinity.
#[derive(Debug, Clone)]
pub struct PrimeFormFrame {
    pub odd_char: ThetaCharacteristic,
    /// `h(inf_j)`, `h^2 = grad theta[odd](0) . dv/dt` in the local parameter `t = 1/zeta`.
    pub half_diff_values: Vec<C64>,
    pub grad_norm: f64,
}

/// First odd half characteristic whose gradient at 0 is nonzero and pairs nontrivially with every `dv/dt`.
pub fn select_frame(ev: &ThetaEvaluator, vprimes: &[CVec]) -> Result<PrimeFormFrame> {
    let g = ev.genus();
    let zero = vec![c(0.0); g];
    for ch in half_characteristics(g) {
        if char_parity(&ch)? != Parity::Odd {
            continue;
        }
        let grad = ev.jet(&zero, &ch, 1)?.full_grad();
        let gn = grad.norm();
        if !(gn > 1e-6) {
            continue;
        }
        let sq: Vec<C64> = vprimes.iter().map(|v| dot(&grad, v)).collect();
        if sq.iter().zip(vprimes).all(|(s, v)| s.norm() > 1e-6 * gn * v.norm()) {
            return Ok(PrimeFormFrame { odd_char: ch, half_diff_values: sq.iter().map(|s| s.sqrt()).collect(), grad_norm: gn });
        }
    }
    Err(Error::Frame("every odd half characteristic is singular at the points at infinity".into()))
}

/// `E(inf_j, inf_l) = theta[odd](phi_j - phi_l) / (h_j h_l)`.
pub fn prime_form_matrix(ev: &ThetaEvaluator, frame: &PrimeFormFrame, phi: &[CVec]) -> Result<CMat> {
    let n = phi.len();
    let mut e = CMat::zeros(n, n);
    for j in 0..n {
        for l in 0..n {
            if j != l {
                let x: Vec<C64> = (&phi[j] - &phi[l]).iter().cloned().collect();
                let th = ev.eval(&x, &frame.odd_char, &[])?;
                e[(j, l)] = th / (frame.half_diff_values[j] * frame.half_diff_values[l]);
            }
        }
    }
    let asym = linalg::max_abs(&(&e + e.transpose()));
    if asym > 1e-7 * (1.0 + linalg::max_abs(&e)) {
        return Err(Error::Consistency(format!("prime form antisymmetry violated by {asym:.2e}")));
    }
    Ok(e)
}

/// `nu_i - nu_j = -sum_k eta(0_k) d/dzeta log(theta[odd](int_{inf_i}^P v) / theta[odd](int_{inf_j}^P v))` at `P = 0_k`.
///
/// `x[i][k] = int_{inf_i}^{0_k} v` along consistent paths, `vprime0[k] = dv/dzeta` at `0_k`.
pub fn nu_from_theta(
    ev: &ThetaEvaluator,
    odd: &ThetaCharacteristic,
    x: &[Vec<CVec>],
    eta0: &[C64],
    vprime0: &[CVec],
) -> Result<CMat> {
    let n = x.len();
    let mut dl = vec![vec![c(0.0); eta0.len()]; n];
    for i in 0..n {
        for k in 0..eta0.len() {
            let z: Vec<C64> = x[i][k].iter().cloned().collect();
            let jet = ev.jet(&z, odd, 1)?;
            dl[i][k] = dot(&jet.grad, &vprime0[k]) / jet.value;
        }
    }
    Ok(CMat::from_fn(n, n, |i, j| -(0..eta0.len()).map(|k| eta0[k] * (dl[i][k] - dl[j][k])).sum::<C64>()))
}

/// Everything entering `Q0(z)` for `n` points at infinity.
#[derive(Debug, Clone)]
pub struct Q0Data {
    pub tau: PeriodMatrixTau,
    ev: ThetaEvaluator,
    /// Abel images `phi_j = int_{inf_1}^{inf_j} v`.
    pub phi: Vec<CVec>,
    /// Eigenvalues of `A_1`.
    pub rho: Vec<C64>,
    /// `nu_j` up to a common constant.
    pub nu: Vec<C64>,
    pub u: CVec,
    pub k_tilde: CVec,
    /// `U - K = p/2 + tau q/2`.
    pub p_tilde: Vec<Rational64>,
    pub q_tilde: Vec<Rational64>,
    pub frame: PrimeFormFrame,
    pub prime: CMat,
    /// `epsilon_jl = s_j s_l` with `s_1 = 1`.
    pub signs: Vec<i64>,
    prefactor: CMat,
}

/// Value and first two `z`-derivatives of `Q0`.
#[derive(Debug, Clone)]
pub struct Q0Jet {
    pub value: CMat,
    pub d1: CMat,
    pub d2: CMat,
}

struct LineJet {
    v: C64,
    d1: C64,
    d2: C64,
    log_scale: f64,
}

impl Q0Data {
    /// Assemble and validate; `eps` holds the `n - 1` free signs.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        tau: PeriodMatrixTau,
        phi: Vec<CVec>,
        rho: Vec<C64>,
        nu: Vec<C64>,
        u: CVec,
        k_tilde: CVec,
        p_tilde: Vec<Rational64>,
        q_tilde: Vec<Rational64>,
        vprimes: &[CVec],
        eps: &[i64],
        cfg: &ToleranceConfig,
    ) -> Result<Self> {
        let n = phi.len();
        let g = tau.genus();
        if rho.len() != n || nu.len() != n || vprimes.len() != n || eps.len() + 1 != n {
            return Err(Error::Dimension(format!("{n} points at infinity with mismatched data")));
        }
        if eps.iter().any(|e| e.abs() != 1) {
            return Err(Error::Domain(format!("signs must be +-1, got {eps:?}")));
        }
        let ev = ThetaEvaluator::new(&tau, cfg)?;
        let to_c = |v: &[Rational64]| CVec::from_iterator(g, v.iter().map(|r| c(*r.numer() as f64 / *r.denom() as f64)));
        let split = (to_c(&p_tilde) + tau.matrix() * to_c(&q_tilde)) * c(0.5);
        let gap = (&u - &k_tilde - split).norm();
        if gap > 1e-9 * (1.0 + u.norm()) {
            return Err(Error::Consistency(format!("U - K differs from (p + tau q)/2 by {gap:.2e}")));
        }
        let frame = select_frame(&ev, vprimes)?;
        let prime = prime_form_matrix(&ev, &frame, &phi)?;
        let mut signs = vec![1];
        signs.extend_from_slice(eps);
        let qf = to_c(&q_tilde);
        let prefactor = CMat::from_fn(n, n, |j, l| {
            if j == l {
                return c(0.0);
            }
            let s = (signs[j] * signs[l]) as f64;
            let phase = (I * PI * dot(&qf, &(&phi[l] - &phi[j]))).exp();
            (rho[j] - rho[l]) / prime[(j, l)] * phase * s
        });
        let data = Q0Data { tau, ev, phi, rho, nu, u, k_tilde, p_tilde, q_tilde, frame, prime, signs, prefactor };
        let d = data.line_jet(&CVec::zeros(g), 0.0, 0)?;
        if d.v.norm() < 1e-10 {
            return Err(Error::Singular(format!("theta(U - K) vanishes (normalised modulus {:.2e})", d.v.norm())));
        }
        Ok(data)
    }

    pub fn n(&self) -> usize {
        self.phi.len()
    }

    pub fn evaluator(&self) -> &ThetaEvaluator {
        &self.ev
    }

    /// Jet of `s -> theta(offset + s U - K)` at `s = z + 1`, normalised by `exp(-log_scale)`.
    fn line_jet(&self, offset: &CVec, z: f64, order: usize) -> Result<LineJet> {
        let x = offset + &self.u * c(z + 1.0) - &self.k_tilde;
        let xs: Vec<C64> = x.iter().cloned().collect();
        let g = self.ev.genus();
        let jet = self.ev.jet(&xs, &ThetaCharacteristic::zero(g), order)?;
        let d1 = if order >= 1 { dot(&jet.grad, &self.u) } else { c(0.0) };
        let d2 = if order >= 2 { dot(&self.u, &(&jet.hess * &self.u)) } else { c(0.0) };
        Ok(LineJet { v: jet.value, d1, d2, log_scale: jet.log_scale })
    }

    /// Normalised modulus of the denominator `theta((z + 1) U - K)`.
    pub fn denominator_modulus(&self, z: f64) -> Result<f64> {
        Ok(self.line_jet(&CVec::zeros(self.ev.genus()), z, 0)?.v.norm())
    }

    /// Normalised moduli of the numerators `theta(phi_l - phi_j + (z + 1) U - K)`, row-major over `j != l`.
    pub fn numerator_moduli(&self, z: f64) -> Result<Vec<f64>> {
        let n = self.n();
        let mut out = Vec::new();
        for j in 0..n {
            for l in 0..n {
                if j != l {
                    out.push(self.line_jet(&(&self.phi[l] - &self.phi[j]), z, 0)?.v.norm());
                }
            }
        }
        Ok(out)
    }

    /// `Q0` and its derivatives up to `order` at `z`.
    pub fn jet(&self, z: f64, order: usize) -> Result<Q0Jet> {
        let n = self.n();
        let g = self.ev.genus();
        let den = self.line_jet(&CVec::zeros(g), z, order)?;
        if den.v.norm() < 1e-13 {
            return Err(Error::Pole { what: "Q0", at: format!("z = {z}") });
        }
        let mut out = Q0Jet { value: CMat::zeros(n, n), d1: CMat::zeros(n, n), d2: CMat::zeros(n, n) };
        let d = den.v;
        for j in 0..n {
            for l in 0..n {
                if j == l {
                    continue;
                }
                let num = self.line_jet(&(&self.phi[l] - &self.phi[j]), z, order)?;
                let f = c((num.log_scale - den.log_scale).exp());
                let dnu = self.nu[l] - self.nu[j];
                let e = (dnu * z).exp() * self.prefactor[(j, l)] * f;
                let q = num.v / d;
                let q1 = (num.d1 * d - num.v * den.d1) / (d * d);
                let q2 = (num.d2 * d - num.v * den.d2) / (d * d) - 2.0 * den.d1 * q1 / d;
                out.value[(j, l)] = e * q;
                out.d1[(j, l)] = e * (q1 + dnu * q);
                out.d2[(j, l)] = e * (q2 + 2.0 * dnu * q1 + dnu * dnu * q);
            }
        }
        Ok(out)
    }

    pub fn value(&self, z: f64) -> Result<CMat> {
        Ok(self.jet(z, 0)?.value)
    }

    /// `nu_j - nu_l` as an antisymmetric matrix.
    pub fn nu_diff(&self) -> CMat {
        let n = self.n();
        CMat::from_fn(n, n, |j, l| self.nu[j] - self.nu[l])
    }
}

/// `Q0` sampled on a grid; nodes where the denominator theta vanishes are flagged, not fatal.
#[derive(Debug, Clone)]
pub struct Q0Grid {
    pub z_nodes: Vec<f64>,
    pub values: Vec<Option<CMat>>,
    pub rho: Vec<C64>,
    pub nu_diff: CMat,
    pub poles: Vec<f64>,
    pub data: Q0Data,
}

pub fn sample_q0(data: Q0Data, grid: &[f64]) -> Result<Q0Grid> {
    let vals: Vec<Result<Option<CMat>>> = grid
        .par_iter()
        .map(|&z| match data.value(z) {
            Ok(v) => Ok(Some(v)),
            Err(Error::Pole { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let values = vals.into_iter().collect::<Result<Vec<_>>>()?;
    let poles = grid.iter().zip(&values).filter(|(_, v)| v.is_none()).map(|(z, _)| *z).collect();
    Ok(Q0Grid { z_nodes: grid.to_vec(), rho: data.rho.clone(), nu_diff: data.nu_diff(), poles, values, data })
}

impl Q0Grid {
    /// Largest `|Q0(z) - Q0(-z)^T|` over node pairs `(z, -z)`.
    pub fn symmetry_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, &z) in self.z_nodes.iter().enumerate() {
            if let Some(j) = self.z_nodes.iter().position(|&w| (w + z).abs() < 1e-12) {
                if let (Some(a), Some(b)) = (&self.values[i], &self.values[j]) {
                    worst = worst.max(linalg::max_abs(&(a - b.transpose())));
                }
            }
        }
        worst
    }

    /// Largest diagonal modulus.
    pub fn diagonal_residual(&self) -> f64 {
        self.values.iter().flatten().flat_map(|m| (0..m.nrows()).map(move |i| m[(i, i)].norm())).fold(0.0, f64::max)
    }
}

/// `Q_{-1}` in the frame where `A_1 = diag(rho)`: off-diagonal from `Q0' = [Q_{-1}, diag rho]`,
/// diagonal from the derivative of that relation with zero trace. Returns the least-squares residual.
pub fn lax_minus(jet: &Q0Jet, rho: &[C64]) -> Result<(CMat, f64)> {
    let n = rho.len();
    let q = &jet.value;
    let mut m = CMat::zeros(n, n);
    let mut m2 = CMat::zeros(n, n);
    for j in 0..n {
        for l in 0..n {
            if j != l {
                let dr = rho[l] - rho[j];
                if dr.norm() < 1e-14 {
                    return Err(Error::Degenerate("repeated eigenvalues of A_1".into()));
                }
                m[(j, l)] = jet.d1[(j, l)] / dr;
                m2[(j, l)] = jet.d2[(j, l)] / dr;
            }
        }
    }
    let rows = n * (n - 1) + 1;
    let mut a = CMat::zeros(rows, n);
    let mut rhs = CVec::zeros(rows);
    let mut r = 0;
    for j in 0..n {
        for l in 0..n {
            if j == l {
                continue;
            }
            let s: C64 = (0..n).filter(|&k| k != j && k != l).map(|k| m[(j, k)] * q[(k, l)] - q[(j, k)] * m[(k, l)]).sum();
            a[(r, j)] = q[(j, l)];
            a[(r, l)] = -q[(j, l)];
            rhs[r] = m2[(j, l)] - s;
            r += 1;
        }
    }
    for k in 0..n {
        a[(r, k)] = c(1.0);
    }
    // normal equations: the n x n system is small and well conditioned when the off-diagonal entries are nonzero
    let ah = a.adjoint();
    let d = (&ah * &a).lu().solve(&(&ah * &rhs)).ok_or_else(|| Error::Singular("diagonal of Q_{-1}".into()))?;
    let resid = (&a * &d - &rhs).norm();
    for k in 0..n {
        m[(k, k)] = d[k];
    }
    Ok((m, resid))
}

/// Hermitian `P > 0` with `Q_{-1} P + P diag(rho)^* = 0` and `Q0 P = P Q0^*`, normalised to unit trace.
/// Returns `P` and the ratio of the two smallest singular values of the linear problem.
pub fn hermitian_gauge(qm: &CMat, q0: &CMat, rho: &[C64]) -> Result<(CMat, f64)> {
    let n = rho.len();
    let rd = CMat::from_diagonal(&CVec::from_iterator(n, rho.iter().map(|r| r.conj())));
    let mut basis = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut e = CMat::zeros(n, n);
            e[(i, j)] = c(1.0);
            e[(j, i)] = c(1.0);
            basis.push(e);
            if i != j {
                let mut e = CMat::zeros(n, n);
                e[(i, j)] = I;
                e[(j, i)] = -I;
                basis.push(e);
            }
        }
    }
    let nn = n * n;
    let mut a = DMatrix::<f64>::zeros(4 * nn, basis.len());
    for (k, e) in basis.iter().enumerate() {
        let img = qm * e + e * &rd;
        let herm = q0 * e - e * q0.adjoint();
        for (r, (v, h)) in img.iter().zip(herm.iter()).enumerate() {
            a[(r, k)] = v.re;
            a[(nn + r, k)] = v.im;
            a[(2 * nn + r, k)] = h.re;
            a[(3 * nn + r, k)] = h.im;
        }
    }
    let svd = a.svd(false, true);
    let sv = &svd.singular_values;
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&x, &y| sv[x].partial_cmp(&sv[y]).unwrap());
    let ratio = sv[idx[0]] / sv[idx[1]];
    let vt = svd.v_t.ok_or_else(|| Error::Singular("no right singular vectors".into()))?;
    let mut p = CMat::zeros(n, n);
    for (k, e) in basis.iter().enumerate() {
        p += e * c(vt[(idx[0], k)]);
    }
    let tr = p.trace().re;
    if tr == 0.0 {
        return Err(Error::Reality("hermitian gauge has zero trace".into()));
    }
    p /= c(tr);
    if !(ratio < 1e-4) {
        return Err(Error::Reality(format!("no hermitian gauge: singular value ratio {ratio:.2e}")));
    }
    Ok((p, ratio))
}

/// Coefficients `c[r][k]` of `eta^(n-r) zeta^k` in `det(eta - A_{-1} - A_0 zeta - A_1 zeta^2)`.
pub fn spectral_coefficients(am1: &CMat, a0: &CMat, a1: &CMat) -> CMat {
    let n = a0.nrows();
    let big = 2 * n + 1;
    let mut samples = vec![vec![c(0.0); n + 1]; big];
    for (k, s) in samples.iter_mut().enumerate() {
        let zeta = C64::from_polar(1.0, 2.0 * PI * k as f64 / big as f64);
        let a = am1 + a0 * zeta + a1 * (zeta * zeta);
        *s = char_poly(&a);
    }
    CMat::from_fn(n + 1, big, |r, m| {
        let mut acc = c(0.0);
        for (k, s) in samples.iter().enumerate() {
            acc += s[r] * C64::from_polar(1.0, -2.0 * PI * (k * m) as f64 / big as f64);
        }
        acc / big as f64
    })
}

/// Faddeev-LeVerrier: `det(eta - A) = sum_k c_k eta^(n-k)`.
fn char_poly(a: &CMat) -> Vec<C64> {
    let n = a.nrows();
    let mut cs = vec![c(1.0)];
    let mut m = CMat::zeros(n, n);
    for k in 1..=n {
        m = a * (&m + CMat::identity(n, n) * cs[k - 1]);
        cs.push(-m.trace() / k as f64);
    }
    cs
}

/// Step size and safety limits of the gauge flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub step: f64,
    /// Minimum distance of grid nodes from the poles at `z = +-1`.
    pub margin: f64,
    pub max_condition: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { step: 5e-4, margin: 0.05, max_condition: 1e8 }
    }
}

/// Nahm triple and diagnostics on a grid.
#[derive(Debug, Clone)]
pub struct NahmSample {
    pub z_nodes: Vec<f64>,
    pub t1: Vec<CMat>,
    pub t2: Vec<CMat>,
    pub t3: Vec<CMat>,
    /// `max_i |T_i' - [T_j, T_k]|` (cyclic).
    pub residual: Vec<f64>,
    /// `max_i |T_i + T_i^*|`.
    pub anti_hermitian: Vec<f64>,
    /// `|A_{-1} + A_1^*|` with `A_{-1}` from the Lax relations of `Q0`.
    pub reality: Vec<f64>,
    /// Largest coefficient of `A' - [A, M]`, `M = A_0/2 + A_1 zeta`.
    pub lax: Vec<f64>,
    /// Spectral-curve coefficients per node, see [`spectral_coefficients`].
    pub curve: Vec<CMat>,
    /// Constant Hermitian gauge `G` with `A -> G^-1 A G`.
    pub gauge: CMat,
}

fn comm(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// `(T1, T2, T3)` from `(A_1, A_0)` with `A_{-1} = -A_1^*`.
pub fn triple_from_lax(a1: &CMat, a0: &CMat) -> [CMat; 3] {
    let am1 = -a1.adjoint();
    let t1 = (a1 + &am1) * c(0.5);
    let t2 = (&am1 - a1) / (2.0 * I);
    let t3 = a0 * (0.5 * I);
    [t1, t2, t3]
}

/// `max_i |T_i' - [T_j, T_k]|`.
pub fn nahm_residual(t: &[CMat; 3], dt: &[CMat; 3]) -> f64 {
    (0..3)
        .map(|i| linalg::max_abs(&(&dt[i] - comm(&t[(i + 1) % 3], &t[(i + 2) % 3]))))
        .fold(0.0, f64::max)
}

/// Coefficients of `A' - [A, M]` for `A = A_{-1} + A_0 zeta + A_1 zeta^2`, `M = A_0/2 + A_1 zeta`.
pub fn lax_residual(a: [&CMat; 3], da: [&CMat; 3]) -> f64 {
    let [am1, a0, a1] = a;
    let half = c(0.5);
    let r0 = da[0] - comm(am1, a0) * half;
    let r1 = da[1] - comm(am1, a1);
    let r2 = da[2] - comm(a0, a1) * half;
    linalg::max_abs(&r0).max(linalg::max_abs(&r1)).max(linalg::max_abs(&r2))
}

fn anti_hermitian_defect(t: &[CMat; 3]) -> f64 {
    t.iter().map(|m| linalg::max_abs(&(m + m.adjoint()))).fold(0.0, f64::max)
}

struct NodeState {
    z: f64,
    c: CMat,
}

fn rk4_step(data: &Q0Data, z: f64, cm: &CMat, h: f64) -> Result<CMat> {
    let f = |zz: f64, m: &CMat| -> Result<CMat> { Ok(m * data.value(zz)? * c(0.5)) };
    let k1 = f(z, cm)?;
    let k2 = f(z + h / 2.0, &(cm + &k1 * c(h / 2.0)))?;
    let k3 = f(z + h / 2.0, &(cm + &k2 * c(h / 2.0)))?;
    let k4 = f(z + h, &(cm + &k3 * c(h)))?;
    Ok(cm + (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0))
}

/// Integrate `C' = C Q0 / 2` from `C(0) = 1` through the sorted `targets` (all of one sign).
fn integrate(data: &Q0Data, targets: &[f64], fc: &FlowConfig) -> Result<Vec<NodeState>> {
    let n = data.n();
    let mut cm = CMat::identity(n, n);
    let mut z = 0.0;
    let mut out = Vec::new();
    for &t in targets {
        while (t - z).abs() > 1e-14 {
            let h = (t - z).signum() * fc.step.min((t - z).abs());
            cm = rk4_step(data, z, &cm, h)?;
            z += h;
            let cond = linalg::condition(&cm);
            if !(cond < fc.max_condition) {
                return Err(Error::Stiffness { z, cond });
            }
        }
        z = t;
        out.push(NodeState { z: t, c: cm.clone() });
    }
    Ok(out)
}

/// Gauge flow from `Q0`: `A_0 = C Q0 C^-1`, `A_1 = C diag(rho) C^-1`, `A_{-1} = -A_1^*`,
/// all conjugated by the constant Hermitian gauge that makes `A_{-1}(0) = -A_1(0)^*` hold.
pub fn solve_gauge_flow(q0: &Q0Grid, fc: &FlowConfig) -> Result<NahmSample> {
    let data = &q0.data;
    for &z in &q0.z_nodes {
        if !(z.abs() <= 1.0 - fc.margin) {
            return Err(Error::EndpointPole(z));
        }
    }
    let rho = &data.rho;
    let dr = CMat::from_diagonal(&CVec::from_vec(rho.clone()));
    let jet0 = data.jet(0.0, 2)?;
    let (qm0, _) = lax_minus(&jet0, rho)?;
    let (p, _) = hermitian_gauge(&qm0, &jet0.value, rho)?;
    let g = linalg::hermitian_sqrt(&p)?;
    let gi = linalg::inverse(&g)?;

    let mut pos: Vec<f64> = q0.z_nodes.iter().cloned().filter(|z| *z >= 0.0).collect();
    let mut neg: Vec<f64> = q0.z_nodes.iter().cloned().filter(|z| *z < 0.0).collect();
    pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
    neg.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let (rp, rn) = rayon::join(|| integrate(data, &pos, fc), || integrate(data, &neg, fc));
    let mut states = rp?;
    states.extend(rn?);

    let per_node: Vec<Result<(f64, [CMat; 3], [f64; 4], CMat)>> = states
        .par_iter()
        .map(|st| {
            let jet = data.jet(st.z, 2)?;
            let ci = linalg::inverse(&st.c)?;
            let conj = |m: &CMat| &gi * &st.c * m * &ci * &g;
            let a1 = conj(&dr);
            let a0 = conj(&jet.value);
            let t = triple_from_lax(&a1, &a0);
            let da1 = comm(&a0, &a1) * c(0.5);
            let da0 = conj(&jet.d1);
            let dt = triple_from_lax(&da1, &da0);
            let (qm, _) = lax_minus(&jet, rho)?;
            let reality = linalg::max_abs(&(conj(&qm) + a1.adjoint()));
            let am1 = -a1.adjoint();
            let lax = lax_residual([&am1, &a0, &a1], [&(-da1.adjoint()), &da0, &da1]);
            let curve = spectral_coefficients(&am1, &a0, &a1);
            Ok((st.z, t.clone(), [nahm_residual(&t, &dt), anti_hermitian_defect(&t), reality, lax], curve))
        })
        .collect();
    let mut rows = per_node.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut s = NahmSample {
        z_nodes: Vec::new(),
        t1: Vec::new(),
        t2: Vec::new(),
        t3: Vec::new(),
        residual: Vec::new(),
        anti_hermitian: Vec::new(),
        reality: Vec::new(),
        lax: Vec::new(),
        curve: Vec::new(),
        gauge: g,
    };
    for (z, [t1, t2, t3], [r, ah, re, lx], cu) in rows {
        s.z_nodes.push(z);
        s.t1.push(t1);
        s.t2.push(t2);
        s.t3.push(t3);
        s.residual.push(r);
        s.anti_hermitian.push(ah);
        s.reality.push(re);
        s.lax.push(lx);
        s.curve.push(cu);
    }
    Ok(s)
}

impl NahmSample {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_anti_hermitian(&self) -> f64 {
        self.anti_hermitian.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest coefficient deviation from `expected` over all nodes.
    pub fn curve_deviation(&self, expected: &CMat) -> f64 {
        self.curve.iter().map(|m| linalg::max_abs(&(m - expected))).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from another sample on the same nodes.
    pub fn deviation(&self, other: &NahmSample) -> f64 {
        let d = |a: &[CMat], b: &[CMat]| a.iter().zip(b).map(|(x, y)| linalg::max_abs(&(x - y))).fold(0.0, f64::max);
        d(&self.t1, &other.t1).max(d(&self.t2, &other.t2)).max(d(&self.t3, &other.t3))
    }
}

/// Evenly spaced nodes on `[-zmax, zmax]` including `0`.
pub fn symmetric_grid(zmax: f64, count: usize) -> Vec<f64> {
    let count = count.max(2) | 1;
    let half = (count - 1) / 2;
    (0..count).map(|i| zmax * (i as f64 - half as f64) / half as f64).collect()
}
