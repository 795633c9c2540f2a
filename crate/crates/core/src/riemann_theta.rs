//! Riemann theta functions with rational characteristics, genus 1 to 4.
//!
//! Convention:
//! `theta[a;b](z; tau) = sum_n exp(i pi (n+a)^T tau (n+a) + 2 i pi (n+a)^T (z+b))`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, RMat};
use crate::scalar_special::ToleranceConfig;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};
use std::f64::consts::PI;

mod properties;

pub use properties::{random_symplectic, random_tau, theta_property_suite, PropertyResiduals};

/// Largest denominator accepted when recognising rational numbers.
pub const MAX_DENOMINATOR: i64 = 420;

/// Rational characteristic `(a, b)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ThetaCharacteristic {
    pub a: Vec<Rational64>,
    pub b: Vec<Rational64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl ThetaCharacteristic {
    pub fn new(a: Vec<Rational64>, b: Vec<Rational64>) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::Dimension(format!("characteristic lengths {} and {}", a.len(), b.len())));
        }
        Ok(ThetaCharacteristic { a, b })
    }

    pub fn zero(g: usize) -> Self {
        ThetaCharacteristic { a: vec![Rational64::zero(); g], b: vec![Rational64::zero(); g] }
    }

    /// Characteristic `(a/den, b/den)` from integer numerators.
    pub fn from_ints(a: &[i64], b: &[i64], den: i64) -> Result<Self> {
        Self::new(
            a.iter().map(|&x| Rational64::new(x, den)).collect(),
            b.iter().map(|&x| Rational64::new(x, den)).collect(),
        )
    }

    /// Half characteristic `(a/2, b/2)` with integer entries.
    pub fn half(a: &[i64], b: &[i64]) -> Result<Self> {
        Self::from_ints(a, b, 2)
    }

    pub fn genus(&self) -> usize {
        self.a.len()
    }

    pub fn a_f64(&self) -> Vec<f64> {
        self.a.iter().map(|r| r.to_f64().unwrap()).collect()
    }

    pub fn b_f64(&self) -> Vec<f64> {
        self.b.iter().map(|r| r.to_f64().unwrap()).collect()
    }

    /// `true` when every entry has denominator at most 2.
    pub fn is_half(&self) -> bool {
        self.a.iter().chain(self.b.iter()).all(|r| *r.denom() <= 2)
    }

    /// Reduce entries into `[0, 1)`; the scalar phase picked up is `exp(2 pi i phase)`.
    pub fn reduced(&self) -> (ThetaCharacteristic, Rational64) {
        let a: Vec<Rational64> = self.a.iter().map(|r| r - r.floor()).collect();
        let b: Vec<Rational64> = self.b.iter().map(|r| r - r.floor()).collect();
        // theta[a+p; b+q] = exp(2 pi i a.q) theta[a; b]
        let mut phase = Rational64::zero();
        for i in 0..a.len() {
            phase += a[i] * self.b[i].floor();
        }
        (ThetaCharacteristic { a, b }, frac(phase))
    }
}

impl std::fmt::Display for ThetaCharacteristic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let j = |v: &[Rational64]| v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "[{};{}]", j(&self.a), j(&self.b))
    }
}

fn frac(r: Rational64) -> Rational64 {
    r - r.floor()
}

/// Parity of a half characteristic: that of `4 a.b`.
pub fn char_parity(ch: &ThetaCharacteristic) -> Result<Parity> {
    if !ch.is_half() {
        return Err(Error::Domain(format!("parity needs a half characteristic, got {ch}")));
    }
    let s: Rational64 = ch.a.iter().zip(&ch.b).map(|(x, y)| x * y * Rational64::from(4)).sum();
    let n = s.to_integer();
    Ok(if n.is_even() { Parity::Even } else { Parity::Odd })
}

/// All `2^(2g)` half characteristics with entries in `{0, 1/2}`, `a` bits first, last bit fastest.
pub fn half_characteristics(g: usize) -> Vec<ThetaCharacteristic> {
    let n = 2 * g;
    (0..(1u32 << n))
        .map(|k| {
            let bits: Vec<i64> = (0..n).map(|i| ((k >> (n - 1 - i)) & 1) as i64).collect();
            ThetaCharacteristic::half(&bits[..g], &bits[g..]).unwrap()
        })
        .collect()
}

/// Symmetric `g x g` matrix with positive definite imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodMatrixTau {
    entries: CMat,
}

impl PeriodMatrixTau {
    pub fn new(entries: CMat) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::Dimension(format!("tau is {}x{}", entries.nrows(), entries.ncols())));
        }
        let asym = linalg::max_abs(&(&entries - entries.transpose()));
        if asym > 1e-10 * (1.0 + linalg::max_abs(&entries)) {
            return Err(Error::Consistency(format!("tau not symmetric (defect {asym:.2e})")));
        }
        let sym = (&entries + entries.transpose()) * C64::new(0.5, 0.0);
        let y = linalg::im(&sym);
        if y.clone().cholesky().is_none() {
            return Err(Error::Conditioning(linalg::sym_eigenvalues(&y)[0]));
        }
        Ok(PeriodMatrixTau { entries: sym })
    }

    pub fn genus(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.entries
    }

    pub fn imag(&self) -> RMat {
        linalg::im(&self.entries)
    }

    pub fn min_imag_eigenvalue(&self) -> f64 {
        linalg::sym_eigenvalues(&self.imag())[0]
    }
}

/// Integer symplectic matrix `[[A, B], [C, D]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticTransform {
    m: DMatrix<i64>,
}

impl SymplecticTransform {
    pub fn new(m: DMatrix<i64>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() || n % 2 != 0 || n == 0 {
            return Err(Error::Dimension(format!("symplectic matrix is {}x{}", m.nrows(), m.ncols())));
        }
        let j = linalg::symplectic_j(n / 2);
        if &m * &j * m.transpose() != j {
            return Err(Error::Consistency("matrix is not symplectic".into()));
        }
        Ok(SymplecticTransform { m })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        let m = DMatrix::from_fn(n, n, |i, j| rows.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0));
        Self::new(m)
    }

    pub fn identity(g: usize) -> Self {
        SymplecticTransform { m: DMatrix::identity(2 * g, 2 * g) }
    }

    pub fn genus(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<i64> {
        &self.m
    }

    fn block(&self, r: usize, c: usize) -> DMatrix<i64> {
        let g = self.genus();
        self.m.view((r * g, c * g), (g, g)).into_owned()
    }

    pub fn a(&self) -> DMatrix<i64> {
        self.block(0, 0)
    }
    pub fn b(&self) -> DMatrix<i64> {
        self.block(0, 1)
    }
    pub fn c(&self) -> DMatrix<i64> {
        self.block(1, 0)
    }
    pub fn d(&self) -> DMatrix<i64> {
        self.block(1, 1)
    }

    /// `sigma^-1 = -J sigma^T J`.
    pub fn inverse(&self) -> Self {
        let j = linalg::symplectic_j(self.genus());
        SymplecticTransform { m: -(&j * self.m.transpose() * &j) }
    }

    pub fn compose(&self, other: &Self) -> Self {
        SymplecticTransform { m: &self.m * &other.m }
    }

    /// `(A tau + B)(C tau + D)^-1`.
    pub fn act(&self, tau: &PeriodMatrixTau) -> Result<PeriodMatrixTau> {
        let c = |m: DMatrix<i64>| m.map(|x| C64::new(x as f64, 0.0));
        let t = tau.matrix();
        let num = c(self.a()) * t + c(self.b());
        let den = c(self.c()) * t + c(self.d());
        PeriodMatrixTau::new(num * linalg::inverse(&den)?)
    }
}

/// Image characteristic and phase `phi` under a symplectic transform.
pub fn modular_transform_char(
    ch: &ThetaCharacteristic,
    sigma: &SymplecticTransform,
) -> Result<(ThetaCharacteristic, Rational64)> {
    let g = sigma.genus();
    if ch.genus() != g {
        return Err(Error::Dimension(format!("characteristic genus {} vs transform genus {g}", ch.genus())));
    }
    let r = |m: DMatrix<i64>| m.map(Rational64::from);
    let (a, b, c, d) = (r(sigma.a()), r(sigma.b()), r(sigma.c()), r(sigma.d()));
    let inv = r(sigma.inverse().m);
    let row: DMatrix<Rational64> =
        DMatrix::from_fn(1, 2 * g, |_, j| if j < g { ch.a[j] } else { ch.b[j - g] });
    let half = Rational64::new(1, 2);
    let cd = &c * d.transpose();
    let ab = &a * b.transpose();
    let img = &row * inv;
    let na: Vec<Rational64> = (0..g).map(|i| img[(0, i)] + half * cd[(i, i)]).collect();
    let nb: Vec<Rational64> = (0..g).map(|i| img[(0, g + i)] + half * ab[(i, i)]).collect();
    let av = DMatrix::from_row_slice(1, g, &ch.a);
    let bv = DMatrix::from_row_slice(1, g, &ch.b);
    let q1 = (&av * d.transpose() * &b * av.transpose())[(0, 0)];
    let q2 = (&av * b.transpose() * &c * bv.transpose())[(0, 0)];
    let q3 = (&bv * c.transpose() * &a * bv.transpose())[(0, 0)];
    let lin = &av * d.transpose() - &bv * c.transpose();
    let dab: Rational64 = (0..g).map(|i| lin[(0, i)] * ab[(i, i)]).sum();
    let phi = -half * (q1 - Rational64::from(2) * q2 + q3) + half * dab;
    Ok((ThetaCharacteristic { a: na, b: nb }, phi))
}

/// Value, gradient and Hessian of a theta function, all carrying a common factor `exp(-log_scale)`.
#[derive(Debug, Clone)]
pub struct ThetaJet {
    pub value: C64,
    pub grad: CVec,
    pub hess: CMat,
    pub log_scale: f64,
}

impl ThetaJet {
    fn unscale(&self) -> C64 {
        C64::from(self.log_scale.exp())
    }
    pub fn full_value(&self) -> C64 {
        self.value * self.unscale()
    }
    pub fn full_grad(&self) -> CVec {
        &self.grad * self.unscale()
    }
    pub fn full_hess(&self) -> CMat {
        &self.hess * self.unscale()
    }
}

/// Per-`tau` data reused across many theta evaluations.
#[derive(Debug, Clone)]
pub struct ThetaEvaluator {
    tau: PeriodMatrixTau,
    y_inv: RMat,
    /// Upper triangular `U` with `pi Im tau = U^T U`.
    u: RMat,
    lambda_min: f64,
    radius: [f64; 3],
}

impl ThetaEvaluator {
    pub fn new(tau: &PeriodMatrixTau, cfg: &ToleranceConfig) -> Result<Self> {
        let y = tau.imag();
        let g = tau.genus();
        if g > 4 {
            return Err(Error::Dimension(format!("genus {g} exceeds 4")));
        }
        let lambda_min = tau.min_imag_eigenvalue();
        if lambda_min < 1e-8 {
            return Err(Error::Conditioning(lambda_min));
        }
        let chol = (&y * PI).cholesky().ok_or(Error::Conditioning(lambda_min))?;
        let u = chol.l().transpose();
        let y_inv = y.clone().try_inverse().ok_or(Error::Conditioning(lambda_min))?;
        let mut radius = [0.0; 3];
        for (k, r) in radius.iter_mut().enumerate() {
            *r = truncation_radius(g, lambda_min, cfg.abs_tol, k);
        }
        Ok(ThetaEvaluator { tau: tau.clone(), y_inv, u, lambda_min, radius })
    }

    pub fn tau(&self) -> &PeriodMatrixTau {
        &self.tau
    }

    pub fn genus(&self) -> usize {
        self.tau.genus()
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    /// Jet up to `order` (0, 1 or 2) at `z`.
    pub fn jet(&self, z: &[C64], ch: &ThetaCharacteristic, order: usize) -> Result<ThetaJet> {
        let g = self.genus();
        if z.len() != g || ch.genus() != g {
            return Err(Error::Dimension(format!("z has {} entries, char genus {}, tau genus {g}", z.len(), ch.genus())));
        }
        if order > 2 {
            return Err(Error::Dimension(format!("derivative order {order} > 2")));
        }
        let a = ch.a_f64();
        let b = ch.b_f64();
        let yz = nalgebra::DVector::from_iterator(g, z.iter().map(|w| w.im));
        let c = -(&self.y_inv * yz);
        let yim = self.tau.imag();
        let s0 = PI * (c.transpose() * &yim * &c)[(0, 0)];
        // lattice points n with |U (n + a - c)| <= R
        let shift: Vec<f64> = (0..g).map(|i| a[i] - c[i]).collect();
        let r = self.radius[order];
        let pts = enumerate_ellipsoid(&self.u, &shift, r);
        let tau = self.tau.matrix();
        let zb: Vec<C64> = (0..g).map(|i| z[i] + b[i]).collect();
        let mut val = C64::new(0.0, 0.0);
        let mut grad = CVec::zeros(g);
        let mut hess = CMat::zeros(g, g);
        let tpi = C64::new(0.0, 2.0 * PI);
        let mut m = vec![0.0; g];
        for n in &pts {
            for i in 0..g {
                m[i] = n[i] as f64 + a[i];
            }
            let mut quad = C64::new(0.0, 0.0);
            for i in 0..g {
                let mut row = C64::new(0.0, 0.0);
                for j in 0..g {
                    row += tau[(i, j)] * m[j];
                }
                quad += row * m[i];
            }
            let mut lin = C64::new(0.0, 0.0);
            for i in 0..g {
                lin += zb[i] * m[i];
            }
            let e = C64::new(0.0, PI) * quad + tpi * lin - s0;
            let t = e.exp();
            val += t;
            if order >= 1 {
                for i in 0..g {
                    grad[i] += t * tpi * m[i];
                }
            }
            if order >= 2 {
                for i in 0..g {
                    for j in 0..g {
                        hess[(i, j)] += t * tpi * tpi * m[i] * m[j];
                    }
                }
            }
        }
        Ok(ThetaJet { value: val, grad, hess, log_scale: s0 })
    }

    /// Value or directional derivative (up to two directions).
    pub fn eval(&self, z: &[C64], ch: &ThetaCharacteristic, deriv: &[Vec<C64>]) -> Result<C64> {
        let jet = self.jet(z, ch, deriv.len())?;
        let g = self.genus();
        for d in deriv {
            if d.len() != g {
                return Err(Error::Dimension(format!("direction has {} entries, genus {g}", d.len())));
            }
        }
        let v = match deriv.len() {
            0 => jet.value,
            1 => (0..g).map(|i| jet.grad[i] * deriv[0][i]).sum(),
            _ => {
                let mut s = C64::new(0.0, 0.0);
                for i in 0..g {
                    for j in 0..g {
                        s += jet.hess[(i, j)] * deriv[0][i] * deriv[1][j];
                    }
                }
                s
            }
        };
        Ok(v * C64::from(jet.log_scale.exp()))
    }
}

/// Radius beyond which the Gaussian tail, inflated for derivatives of the given order, is below `tol`
/// (bound of Deconinck et al. with the shortest lattice vector bounded below by `sqrt(pi lambda_min)`).
fn truncation_radius(g: usize, lambda_min: f64, tol: f64, order: usize) -> f64 {
    let rho = (PI * lambda_min).sqrt();
    let gf = g as f64;
    let bound = |r: f64| {
        let x = (r - rho / 2.0).max(0.0).powi(2);
        let tail = 0.5 * gf * (2.0 / rho).powf(gf) * statrs::function::gamma::gamma_ur(gf / 2.0, x)
            * statrs::function::gamma::gamma(gf / 2.0);
        // derivative factor (2 pi |m|)^order with |m| <= r / rho
        tail * (2.0 * PI * (r / rho + 1.0)).powi(order as i32)
    };
    let mut r = rho / 2.0 + 1.0;
    while bound(r) > tol && r < 1e3 {
        r += 0.25;
    }
    r
}

/// Integer points `n` with `|U (n + shift)| <= r`, in a fixed lexicographic order.
fn enumerate_ellipsoid(u: &RMat, shift: &[f64], r: f64) -> Vec<Vec<i64>> {
    let g = shift.len();
    let mut out = Vec::new();
    let mut n = vec![0i64; g];
    fn rec(
        i: usize,
        u: &RMat,
        shift: &[f64],
        r2: f64,
        partial: f64,
        n: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        let g = shift.len();
        let mut off = 0.0;
        for j in (i + 1)..g {
            off += u[(i, j)] * (n[j] as f64 + shift[j]);
        }
        let uii = u[(i, i)];
        let center = -shift[i] - off / uii;
        let rem = r2 - partial;
        if rem < 0.0 {
            return;
        }
        let half = rem.sqrt() / uii;
        let lo = (center - half).ceil() as i64;
        let hi = (center + half).floor() as i64;
        for k in lo..=hi {
            n[i] = k;
            let t = uii * (k as f64 + shift[i]) + off;
            let p = partial + t * t;
            if p > r2 {
                continue;
            }
            if i == 0 {
                out.push(n.clone());
            } else {
                rec(i - 1, u, shift, r2, p, n, out);
            }
        }
    }
    rec(g - 1, u, shift, r * r, 0.0, &mut n, &mut out);
    out
}

/// One-shot theta value or directional derivative.
pub fn theta(
    z: &[C64],
    tau: &PeriodMatrixTau,
    ch: &ThetaCharacteristic,
    deriv: &[Vec<C64>],
    cfg: &ToleranceConfig,
) -> Result<C64> {
    if deriv.len() > 2 {
        return Err(Error::Dimension(format!("{} derivative directions (max 2)", deriv.len())));
    }
    ThetaEvaluator::new(tau, cfg)?.eval(z, ch, deriv)
}

/// Jacobi theta `theta_i(z | tau)` for `i = 1..4`, with period 1 in `z`.
pub fn jacobi_theta(i: u8, z: C64, tau: C64, cfg: &ToleranceConfig) -> Result<C64> {
    if !(tau.im > 0.0) {
        return Err(Error::Domain(format!("Im tau must be positive, got {tau}")));
    }
    let (a, b, sign) = match i {
        1 => (1, 1, -1.0),
        2 => (1, 0, 1.0),
        3 => (0, 0, 1.0),
        4 => (0, 1, 1.0),
        _ => return Err(Error::Domain(format!("Jacobi theta index {i} not in 1..4"))),
    };
    let t = PeriodMatrixTau::new(CMat::from_element(1, 1, tau))?;
    let ch = ThetaCharacteristic::half(&[a], &[b])?;
    Ok(theta(&[z], &t, &ch, &[], cfg)? * sign)
}

/// Nearest rational with denominator at most `max_den`, if within `tol`.
pub fn recognise_rational(x: f64, max_den: i64, tol: f64) -> Option<Rational64> {
    let mut best: Option<(f64, Rational64)> = None;
    for d in 1..=max_den {
        let n = (x * d as f64).round();
        let err = (x - n / d as f64).abs();
        if err <= tol && best.map_or(true, |(e, _)| err < e - 1e-15) {
            best = Some((err, Rational64::new(n as i64, d)));
            if err < 1e-14 {
                break;
            }
        }
    }
    best.map(|(_, r)| r)
}

/// `theta((z, w); tau')` for `tau' = [[t11, q], [q^T, tau_rest]]` with rational `q`,
/// as a finite sum of genus-1 times genus-(g-1) products.
pub fn theta_reduce(z: C64, w: &[C64], tau_p: &PeriodMatrixTau, cfg: &ToleranceConfig) -> Result<C64> {
    let g = tau_p.genus();
    if g < 2 || w.len() != g - 1 {
        return Err(Error::ReductionShape(format!("genus {g} with {} trailing coordinates", w.len())));
    }
    let t = tau_p.matrix();
    let mut q = Vec::with_capacity(g - 1);
    for j in 1..g {
        let v = t[(0, j)];
        if v.im.abs() > 1e-9 {
            return Err(Error::ReductionShape(format!("off-diagonal entry {v} is not real")));
        }
        let r = recognise_rational(v.re, MAX_DENOMINATOR, 1e-9)
            .ok_or_else(|| Error::ReductionShape(format!("off-diagonal entry {} is not rational", v.re)))?;
        q.push(r);
    }
    let den = q.iter().fold(1i64, |acc, r| acc.lcm(r.denom()));
    let rest = PeriodMatrixTau::new(t.view((1, 1), (g - 1, g - 1)).into_owned())?;
    let big = den as f64;
    let t1 = PeriodMatrixTau::new(CMat::from_element(1, 1, t[(0, 0)] * big * big))?;
    let e1 = ThetaEvaluator::new(&t1, cfg)?;
    let er = ThetaEvaluator::new(&rest, cfg)?;
    let zero = ThetaCharacteristic::zero(g - 1);
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..den {
        let ch1 = ThetaCharacteristic::new(vec![Rational64::new(m, den)], vec![Rational64::zero()])?;
        let f1 = e1.eval(&[z * big], &ch1, &[])?;
        let shifted: Vec<C64> =
            (0..g - 1).map(|j| w[j] + (q[j] * Rational64::from(m)).to_f64().unwrap()).collect();
        let f2 = er.eval(&shifted, &zero, &[])?;
        acc += f1 * f2;
    }
    Ok(acc)
}

/// Exact `exp(2 pi i r)` for rational `r`.
pub fn root_of_unity(r: Rational64) -> C64 {
    let f = frac(r);
    let (n, d) = (*f.numer(), *f.denom());
    if f.is_zero() {
        return C64::one();
    }
    if d == 2 {
        return C64::new(-1.0, 0.0);
    }
    if d == 4 {
        return if n == 1 { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
    }
    let x = 2.0 * PI * (n as f64) / (d as f64);
    C64::new(x.cos(), x.sin())
}

/// `|mu|` in the Igusa transformation law at the point `z` (should equal 1).
pub fn igusa_modulus(
    ch: &ThetaCharacteristic,
    sigma: &SymplecticTransform,
    tau: &PeriodMatrixTau,
    z: &[C64],
    cfg: &ToleranceConfig,
) -> Result<f64> {
    let g = tau.genus();
    let (ch2, _) = modular_transform_char(ch, sigma)?;
    let cm = |m: DMatrix<i64>| m.map(|x| C64::new(x as f64, 0.0));
    let ctd = cm(sigma.c()) * tau.matrix() + cm(sigma.d());
    let inv = linalg::inverse(&ctd)?;
    let zr = CMat::from_row_slice(1, g, z);
    let zp = &zr * &inv;
    let tau2 = sigma.act(tau)?;
    let lhs = theta(zp.as_slice(), &tau2, &ch2, &[], cfg)?;
    let quad = (&zp * cm(sigma.c()) * zr.transpose())[(0, 0)];
    let rhs = (C64::new(0.0, PI) * quad).exp() * linalg::det(&ctd).sqrt() * theta(z, tau, ch, &[], cfg)?;
    if rhs.norm() < 1e-300 {
        return Err(Error::Degenerate("theta vanishes at the sample point".into()));
    }
    Ok((lhs / rhs).norm())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn tetra_tau() -> PeriodMatrixTau {
        let s = 3f64.sqrt();
        let e = |re: f64, im: f64| C64::new(re / 98.0, im * s / 98.0);
        let rows = vec![
            vec![e(-73.0, 51.0), e(9.0, -13.0), e(15.0, 11.0), e(42.0, -28.0)],
            vec![e(9.0, -13.0), e(-34.0, 60.0), e(-24.0, 2.0), e(21.0, 35.0)],
            vec![e(15.0, 11.0), e(-24.0, 2.0), e(-40.0, 36.0), e(-63.0, -7.0)],
            vec![e(42.0, -28.0), e(21.0, 35.0), e(-63.0, -7.0), e(49.0, 49.0)],
        ];
        PeriodMatrixTau::new(linalg::from_rows(&rows)).unwrap()
    }

    pub(crate) fn random_tau(g: usize, seed: u64) -> PeriodMatrixTau {
        // small LCG keeps the fixture deterministic
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let x = RMat::from_fn(g, g, |_, _| next());
        let m = RMat::from_fn(g, g, |_, _| next());
        let y = &m * m.transpose() * 0.6 + RMat::identity(g, g) * 0.6;
        let xs = (&x + x.transpose()) * 0.5;
        PeriodMatrixTau::new(CMat::from_fn(g, g, |i, j| C64::new(xs[(i, j)], y[(i, j)]))).unwrap()
    }

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn naive(z: &[C64], tau: &PeriodMatrixTau, ch: &ThetaCharacteristic, r: i64) -> C64 {
        let g = tau.genus();
        let a = ch.a_f64();
        let b = ch.b_f64();
        let t = tau.matrix();
        let mut acc = C64::new(0.0, 0.0);
        let total = (2 * r + 1).pow(g as u32);
        for k in 0..total {
            let mut kk = k;
            let m: Vec<f64> = (0..g)
                .map(|i| {
                    let v = (kk % (2 * r + 1)) - r;
                    kk /= 2 * r + 1;
                    v as f64 + a[i]
                })
                .collect();
            let mut e = C64::new(0.0, 0.0);
            for i in 0..g {
                for j in 0..g {
                    e += C64::new(0.0, PI) * t[(i, j)] * m[i] * m[j];
                }
                e += C64::new(0.0, 2.0 * PI) * m[i] * (z[i] + b[i]);
            }
            acc += e.exp();
        }
        acc
    }

    #[test]
    fn odd_characteristic_vanishes() {
        let tau = C64::new(0.1, 1.3);
        let v = jacobi_theta(1, C64::new(0.0, 0.0), tau, &cfg()).unwrap();
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn parity_examples() {
        assert_eq!(char_parity(&ThetaCharacteristic::half(&[1], &[1]).unwrap()).unwrap(), Parity::Odd);
        assert_eq!(char_parity(&ThetaCharacteristic::zero(1)).unwrap(), Parity::Even);
        let k = ThetaCharacteristic::half(&[1, 1, 1, 1], &[1, 1, 1, 1]).unwrap();
        assert_eq!(char_parity(&k).unwrap(), Parity::Even);
        let sixth = ThetaCharacteristic::from_ints(&[1], &[3], 6).unwrap();
        assert!(char_parity(&sixth).is_err());
        let evens = half_characteristics(4).iter().filter(|c| char_parity(c).unwrap() == Parity::Even).count();
        assert_eq!(evens, 136);
    }

    #[test]
    fn riemann_constant_of_tetrahedral_tau() {
        let k = ThetaCharacteristic::half(&[1, 1, 1, 1], &[1, 1, 1, 1]).unwrap();
        let z = vec![C64::new(0.0, 0.0); 4];
        let v = theta(&z, &tetra_tau(), &k, &[], &cfg()).unwrap();
        assert!(v.norm() < 1e-10, "{v}");
    }

    #[test]
    fn genus_two_against_large_box() {
        let tau = random_tau(2, 7);
        let ch = ThetaCharacteristic::from_ints(&[1, 3], &[0, 1], 6).unwrap();
        let z = [C64::new(0.3, -0.2), C64::new(-0.1, 0.4)];
        let v = theta(&z, &tau, &ch, &[], &cfg()).unwrap();
        let w = naive(&z, &tau, &ch, 20);
        assert!((v - w).norm() < 1e-11 * (1.0 + w.norm()), "{v} vs {w}");
    }

    #[test]
    fn derivatives_match_lattice_oracle() {
        let tau = random_tau(3, 11);
        let ch = ThetaCharacteristic::half(&[1, 0, 1], &[1, 1, 0]).unwrap();
        let z = [C64::new(0.1, 0.05), C64::new(-0.2, 0.1), C64::new(0.3, -0.1)];
        let ev = ThetaEvaluator::new(&tau, &cfg()).unwrap();
        let v = vec![C64::new(0.5, 0.2), C64::new(-1.0, 0.0), C64::new(0.3, 0.7)];
        let w = vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.2, 0.0)];
        let d1 = ev.eval(&z, &ch, &[v.clone()]).unwrap();
        let d2 = ev.eval(&z, &ch, &[v.clone(), w.clone()]).unwrap();
        // complex-step style central differences as an oracle
        let h = 1e-4;
        let sh = |s: f64, dir: &[C64]| -> Vec<C64> { (0..3).map(|i| z[i] + dir[i] * s).collect() };
        let f = |p: &[C64]| ev.eval(p, &ch, &[]).unwrap();
        let fd1 = (f(&sh(h, &v)) - f(&sh(-h, &v))) / (2.0 * h);
        assert!((d1 - fd1).norm() < 1e-6 * (1.0 + d1.norm()));
        let g = |s: f64| ev.eval(&sh(s, &w), &ch, &[v.clone()]).unwrap();
        let fd2 = (g(h) - g(-h)) / (2.0 * h);
        assert!((d2 - fd2).norm() < 1e-6 * (1.0 + d2.norm()));
    }

    #[test]
    fn jacobi_identities() {
        let tau = C64::new(0.2, 0.9);
        let c = cfg();
        let zero = C64::new(0.0, 0.0);
        let t2 = jacobi_theta(2, zero, tau, &c).unwrap();
        let t3 = jacobi_theta(3, zero, tau, &c).unwrap();
        let t4 = jacobi_theta(4, zero, tau, &c).unwrap();
        let t = PeriodMatrixTau::new(CMat::from_element(1, 1, tau)).unwrap();
        let ch = ThetaCharacteristic::half(&[1], &[1]).unwrap();
        let d1 = -theta(&[zero], &t, &ch, &[vec![C64::new(1.0, 0.0)]], &c).unwrap();
        assert!((d1 - PI * t2 * t3 * t4).norm() < 1e-12);
        // theta_1(x + (1+tau)/2) = exp(-i pi (x + tau/4)) theta_3(x)
        let x = C64::new(0.17, 0.03);
        let lhs = jacobi_theta(1, x + (1.0 + tau) / 2.0, tau, &c).unwrap();
        let rhs = (C64::new(0.0, -PI) * (x + tau / 4.0)).exp() * jacobi_theta(3, x, tau, &c).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        // Jacobi quartic
        assert!((t3.powi(4) - t2.powi(4) - t4.powi(4)).norm() < 1e-12);
    }

    #[test]
    fn jacobi_sn_from_thetas() {
        // sn(u,k) = (theta3/theta2) theta1(v)/theta4(v), u = pi theta3^2 v, k = (theta2/theta3)^2
        let tau = C64::new(0.0, 0.8);
        let c = cfg();
        let zero = C64::new(0.0, 0.0);
        let t2 = jacobi_theta(2, zero, tau, &c).unwrap().re;
        let t3 = jacobi_theta(3, zero, tau, &c).unwrap().re;
        let k = (t2 / t3).powi(2);
        let v = 0.3 / (PI * t3 * t3);
        let th1 = jacobi_theta(1, C64::from(v), tau, &c).unwrap().re;
        let th4 = jacobi_theta(4, C64::from(v), tau, &c).unwrap().re;
        let (sn, _, _) = crate::scalar_special::jacobi_sn_cn_dn(0.3, k).unwrap();
        assert_relative_eq!(sn, t3 / t2 * th1 / th4, max_relative = 1e-12);
    }

    #[test]
    fn conditioning_error() {
        let tau = PeriodMatrixTau::new(CMat::from_element(1, 1, C64::new(0.0, 1e-9))).unwrap();
        let r = theta(&[C64::new(0.0, 0.0)], &tau, &ThetaCharacteristic::zero(1), &[], &cfg());
        assert!(matches!(r, Err(Error::Conditioning(_))));
    }

    #[test]
    fn identity_transform() {
        let ch = ThetaCharacteristic::half(&[1, 0], &[1, 1]).unwrap();
        let (c2, phi) = modular_transform_char(&ch, &SymplecticTransform::identity(2)).unwrap();
        assert_eq!(c2, ch);
        assert_eq!(phi, Rational64::zero());
    }

    #[test]
    fn igusa_modulus_is_one() {
        // products of the standard generators of Sp(4, Z)
        let u = SymplecticTransform::from_rows(&[vec![1, 1, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![0, 0, -1, 1]])
            .unwrap();
        let jm = SymplecticTransform::from_rows(&[vec![0, 0, 1, 0], vec![0, 0, 0, 1], vec![-1, 0, 0, 0], vec![0, -1, 0, 0]])
            .unwrap();
        let t = SymplecticTransform::from_rows(&[vec![1, 0, 1, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 0, 1]])
            .unwrap();
        let tau = random_tau(2, 3);
        let z = [C64::new(0.11, 0.02), C64::new(-0.07, 0.05)];
        for sigma in [jm.clone(), t.clone(), jm.compose(&t), t.compose(&jm).compose(&t), u.compose(&jm)] {
            for ch in half_characteristics(2).iter().take(16).step_by(3) {
                let m = igusa_modulus(ch, &sigma, &tau, &z, &cfg()).unwrap();
                assert!((m - 1.0).abs() < 1e-9, "{ch}: {m}");
            }
        }
    }

    #[test]
    fn reduce_block_diagonal_factorises() {
        let t = CMat::from_fn(2, 2, |i, j| if i == j { C64::new(0.1 * i as f64, 1.0 + i as f64) } else { C64::new(0.0, 0.0) });
        let tau = PeriodMatrixTau::new(t).unwrap();
        let c = cfg();
        let z = C64::new(0.2, 0.1);
        let w = [C64::new(-0.3, 0.05)];
        let v = theta_reduce(z, &w, &tau, &c).unwrap();
        let direct = theta(&[z, w[0]], &tau, &ThetaCharacteristic::zero(2), &[], &c).unwrap();
        assert!((v - direct).norm() < 1e-12);
    }

    #[test]
    fn reduce_rejects_irrational() {
        let t = linalg::from_rows(&[
            vec![C64::new(0.0, 1.0), C64::new(0.123456789123, 0.0)],
            vec![C64::new(0.123456789123, 0.0), C64::new(0.0, 1.0)],
        ]);
        let tau = PeriodMatrixTau::new(t).unwrap();
        let r = theta_reduce(C64::new(0.0, 0.0), &[C64::new(0.0, 0.0)], &tau, &cfg());
        assert!(matches!(r, Err(Error::ReductionShape(_))));
    }

    #[test]
    fn reduce_tetrahedral_shape() {
        // reduced tetrahedral matrix with q = (1/4, 0, 0)
        let r = C64::new(-0.5, 3f64.sqrt() / 2.0);
        let q = C64::new(0.25, 0.0);
        let o = C64::new(0.0, 0.0);
        let rows = vec![
            vec![r / 4.0, q, o, o],
            vec![q, r * 1.25, r, o],
            vec![o, r, r * 2.0, r],
            vec![o, o, r, r * (6.0 / 7.0) + 2.0 / 7.0],
        ];
        let tau = PeriodMatrixTau::new(linalg::from_rows(&rows)).unwrap();
        let c = cfg();
        let z = C64::new(0.13, 0.02);
        let w = [C64::new(-0.21, 0.01), C64::new(0.05, -0.03), C64::new(0.3, 0.02)];
        let v = theta_reduce(z, &w, &tau, &c).unwrap();
        let direct = theta(&[z, w[0], w[1], w[2]], &tau, &ThetaCharacteristic::zero(4), &[], &c).unwrap();
        assert!((v - direct).norm() < 1e-9 * (1.0 + direct.norm()));
    }

    #[test]
    fn root_of_unity_exact() {
        assert_eq!(root_of_unity(Rational64::new(3, 4)), C64::new(0.0, -1.0));
        assert_eq!(root_of_unity(Rational64::new(-1, 2)), C64::new(-1.0, 0.0));
        let w = root_of_unity(Rational64::new(1, 3));
        assert!((w - C64::new(-0.5, 3f64.sqrt() / 2.0)).norm() < 1e-15);
    }
}

#[cfg(test)]
mod proptests {
    use super::tests::random_tau;
    use super::*;
    use proptest::prelude::*;

    fn arb_z(g: usize) -> impl Strategy<Value = Vec<C64>> {
        prop::collection::vec((-0.5f64..0.5, -0.3f64..0.3).prop_map(|(a, b)| C64::new(a, b)), g)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn quasi_periodicity(g in 1usize..=4, seed in 0u64..1000, z in arb_z(4),
                             p in prop::collection::vec(-1i64..=1, 4)) {
            let tau = random_tau(g, seed);
            let z = &z[..g];
            let p = &p[..g];
            let cfg = ToleranceConfig::default();
            let ev = ThetaEvaluator::new(&tau, &cfg).unwrap();
            let zero = ThetaCharacteristic::zero(g);
            let f0 = ev.eval(z, &zero, &[]).unwrap();
            let zp: Vec<C64> = (0..g).map(|i| z[i] + p[i] as f64).collect();
            prop_assert!((ev.eval(&zp, &zero, &[]).unwrap() - f0).norm() < 1e-10 * (1.0 + f0.norm()));
            let t = tau.matrix();
            let tp: Vec<C64> = (0..g).map(|i| (0..g).map(|j| t[(i, j)] * p[j] as f64).sum::<C64>()).collect();
            let zt: Vec<C64> = (0..g).map(|i| z[i] + tp[i]).collect();
            let ptp: C64 = (0..g).map(|i| tp[i] * p[i] as f64).sum();
            let zpp: C64 = (0..g).map(|i| z[i] * p[i] as f64).sum();
            let want = (C64::new(0.0, -PI) * (ptp + 2.0 * zpp)).exp() * f0;
            let got = ev.eval(&zt, &zero, &[]).unwrap();
            prop_assert!((got - want).norm() < 1e-9 * (1.0 + want.norm()));
        }

        #[test]
        fn characteristic_shift_law(seed in 0u64..1000, z in arb_z(2),
                                    a in prop::collection::vec(0i64..6, 2), b in prop::collection::vec(0i64..6, 2),
                                    ap in prop::collection::vec(0i64..2, 2), bp in prop::collection::vec(0i64..2, 2)) {
            let tau = random_tau(2, seed);
            let cfg = ToleranceConfig::default();
            let ev = ThetaEvaluator::new(&tau, &cfg).unwrap();
            let ch = ThetaCharacteristic::from_ints(&a, &b, 6).unwrap();
            let a2 = [ap[0] as f64 / 2.0, ap[1] as f64 / 2.0];
            let b2 = [bp[0] as f64 / 2.0, bp[1] as f64 / 2.0];
            let t = tau.matrix();
            let at: Vec<C64> = (0..2).map(|i| (0..2).map(|j| t[(i, j)] * a2[j]).sum::<C64>()).collect();
            let zs: Vec<C64> = (0..2).map(|i| z[i] + at[i] + b2[i]).collect();
            let lhs = ev.eval(&zs, &ch, &[]).unwrap();
            let bf = ch.b_f64();
            let ata: C64 = (0..2).map(|i| at[i] * a2[i]).sum();
            let az: C64 = (0..2).map(|i| z[i] * a2[i]).sum();
            let ab: f64 = (0..2).map(|i| (bf[i] + b2[i]) * a2[i]).sum();
            let sum_a: Vec<i64> = (0..2).map(|i| a[i] + 3 * ap[i]).collect();
            let sum_b: Vec<i64> = (0..2).map(|i| b[i] + 3 * bp[i]).collect();
            let ch2 = ThetaCharacteristic::from_ints(&sum_a, &sum_b, 6).unwrap();
            let rhs = (C64::new(0.0, -PI) * ata - C64::new(0.0, 2.0 * PI) * az - C64::new(0.0, 2.0 * PI * ab)).exp()
                * ev.eval(&z, &ch2, &[]).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()));
        }

        #[test]
        fn parity_reflection(seed in 0u64..1000, z in arb_z(3),
                             a in prop::collection::vec(-5i64..6, 3), b in prop::collection::vec(-5i64..6, 3)) {
            let tau = random_tau(3, seed);
            let cfg = ToleranceConfig::default();
            let ev = ThetaEvaluator::new(&tau, &cfg).unwrap();
            let ch = ThetaCharacteristic::from_ints(&a, &b, 6).unwrap();
            let na: Vec<i64> = a.iter().map(|x| -x).collect();
            let nb: Vec<i64> = b.iter().map(|x| -x).collect();
            let neg = ThetaCharacteristic::from_ints(&na, &nb, 6).unwrap();
            let mz: Vec<C64> = z.iter().map(|w| -w).collect();
            let l = ev.eval(&z, &neg, &[]).unwrap();
            let r = ev.eval(&mz, &ch, &[]).unwrap();
            prop_assert!((l - r).norm() < 1e-12 * (1.0 + r.norm()));
        }

        #[test]
        fn integer_shift_phase(seed in 0u64..1000, z in arb_z(2),
                               a in prop::collection::vec(0i64..6, 2), b in prop::collection::vec(0i64..6, 2),
                               p in prop::collection::vec(-2i64..=2, 2), q in prop::collection::vec(-2i64..=2, 2)) {
            let tau = random_tau(2, seed);
            let cfg = ToleranceConfig::default();
            let ev = ThetaEvaluator::new(&tau, &cfg).unwrap();
            let ch = ThetaCharacteristic::from_ints(&a, &b, 6).unwrap();
            let sa: Vec<i64> = (0..2).map(|i| a[i] + 6 * p[i]).collect();
            let sb: Vec<i64> = (0..2).map(|i| b[i] + 6 * q[i]).collect();
            let shifted = ThetaCharacteristic::from_ints(&sa, &sb, 6).unwrap();
            let phase: Rational64 = (0..2).map(|i| ch.a[i] * Rational64::from(q[i])).sum();
            let want = root_of_unity(phase) * ev.eval(&z, &ch, &[]).unwrap();
            let got = ev.eval(&z, &shifted, &[]).unwrap();
            prop_assert!((got - want).norm() < 1e-12 * (1.0 + want.norm()));
            // the reduced form reports the same phase
            let (red, ph) = shifted.reduced();
            let back = root_of_unity(ph) * ev.eval(&z, &red, &[]).unwrap();
            prop_assert!((back - got).norm() < 1e-12 * (1.0 + got.norm()));
        }
    }
}
