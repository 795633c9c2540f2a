//! Weierstrass-Poincare reduction of the symmetric-monopole period matrix by its first column.
//!
//! The lattice map `M` (8x2) records the periods of the first differential as
//! `xi * M (1, rho)^T`. Rows of `sigma` are new cycles written in the old basis, so
//! `sigma` acts on `M` from the left; the reduction drives `sigma M` to
//!
//! ```text
//!   a1: (u, -1)   a2: (-alpha, 0)   b1: (d, 0)   all other rows zero
//! ```
//!
//! which gives `tau'` the first row `((u - rho)/d, -alpha/d, 0, 0)` and makes `b1'` the
//! Ercolani-Sinha cycle.

use crate::error::{Error, Result};
use crate::es_solver::ESData;
use crate::linalg::{self, CVec};
use crate::riemann_theta::{PeriodMatrixTau, SymplecticTransform};
use crate::scalar_special::{rho, ToleranceConfig};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::Zero;

mod cycles;

const G: usize = 4;
const GENERATOR_BUDGET: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedForm {
    pub sigma: SymplecticTransform,
    pub tau_prime: PeriodMatrixTau,
    /// Hopf number, negative for every admissible pair.
    pub d: i64,
    /// `alpha` with `tau'_12 = alpha / |d|`.
    pub alpha_entry: i64,
    /// `tau'_11 = (u - rho) / d`; `-2` in the generic form, `0` after the unit-alpha step.
    pub u: i64,
    /// `sigma M`.
    pub lattice_image: DMatrix<i64>,
    pub simplified: bool,
    /// Whether `sigma` came from the short-cycle construction rather than the generator descent.
    pub conditioned: bool,
    pub generators_used: usize,
}

impl ReducedForm {
    /// Expected first row of `tau'`.
    pub fn expected_row(&self) -> [C64; 4] {
        let d = self.d as f64;
        [
            (C64::from(self.u as f64) - rho()) / d,
            C64::from(-self.alpha_entry as f64 / d),
            C64::from(0.0),
            C64::from(0.0),
        ]
    }

    /// Largest deviation of the first row of `tau'` from the reduced shape.
    pub fn shape_residual(&self) -> f64 {
        let t = self.tau_prime.matrix();
        self.expected_row().iter().enumerate().map(|(j, e)| (t[(0, j)] - e).norm()).fold(0.0, f64::max)
    }
}

/// Integer coordinates `(n', m')` of the Ercolani-Sinha cycle after `sigma`, halved so that
/// `U' = m'/2 + tau' n'/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct EsImage {
    pub n_half: Vec<Rational64>,
    pub m_half: Vec<Rational64>,
}

impl EsImage {
    /// Exactly `(1/2, 0, 0, 0)` with no `tau'` part.
    pub fn is_canonical(&self) -> bool {
        self.n_half.iter().all(|r| r.is_zero())
            && self.m_half[0] == Rational64::new(1, 2)
            && self.m_half[1..].iter().all(|r| r.is_zero())
    }
}

/// The 8x2 integer map with columns `(H n - m, H m)` and `(-m, n)`.
pub fn lattice_map(n: &[i64; 4], m: &[i64; 4]) -> DMatrix<i64> {
    let h = [1, 1, 1, -1];
    DMatrix::from_fn(8, 2, |r, c| match (c, r < G) {
        (0, true) => h[r] * n[r] - m[r],
        (0, false) => h[r - G] * m[r - G],
        (_, true) => -m[r],
        (_, false) => n[r - G],
    })
}

/// `M^T J M`, which equals `d [[0, 1], [-1, 0]]`.
pub fn hopf_form(m: &DMatrix<i64>) -> DMatrix<i64> {
    m.transpose() * linalg::symplectic_j(G) * m
}

/// Row operations on `sigma` and `sigma M` by elementary symplectic generators.
struct Work {
    s: DMatrix<i64>,
    m: DMatrix<i64>,
    used: usize,
}

impl Work {
    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > GENERATOR_BUDGET {
            return Err(Error::ReductionFailure(format!(
                "generator budget exhausted; partial image {:?}",
                self.m.as_slice()
            )));
        }
        Ok(())
    }

    fn add_row(&mut self, dst: usize, src: usize, k: i64) {
        for mat in [&mut self.s, &mut self.m] {
            for c in 0..mat.ncols() {
                let v = mat[(src, c)];
                mat[(dst, c)] += k * v;
            }
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        self.s.swap_rows(i, j);
        self.m.swap_rows(i, j);
    }

    fn negate_row(&mut self, i: usize) {
        for mat in [&mut self.s, &mut self.m] {
            for c in 0..mat.ncols() {
                mat[(i, c)] = -mat[(i, c)];
            }
        }
    }

    /// `a_i += k b_i`.
    fn shear_ab(&mut self, i: usize, k: i64) -> Result<()> {
        self.tick()?;
        self.add_row(i, G + i, k);
        Ok(())
    }

    /// `b_i += k a_i`.
    fn shear_ba(&mut self, i: usize, k: i64) -> Result<()> {
        self.tick()?;
        self.add_row(G + i, i, k);
        Ok(())
    }

    /// `(a_i, b_i) -> (b_i, -a_i)`.
    fn rotate(&mut self, i: usize) -> Result<()> {
        self.tick()?;
        self.swap_rows(i, G + i);
        self.negate_row(G + i);
        Ok(())
    }

    /// `(a_i, b_i) -> (-a_i, -b_i)`.
    fn flip(&mut self, i: usize) -> Result<()> {
        self.tick()?;
        self.negate_row(i);
        self.negate_row(G + i);
        Ok(())
    }

    /// `a_i += k a_j`, `b_j -= k b_i`.
    fn gl_add(&mut self, i: usize, j: usize, k: i64) -> Result<()> {
        self.tick()?;
        self.add_row(i, j, k);
        self.add_row(G + j, G + i, -k);
        Ok(())
    }

    fn gl_swap(&mut self, i: usize, j: usize) -> Result<()> {
        self.tick()?;
        self.swap_rows(i, j);
        self.swap_rows(G + i, G + j);
        Ok(())
    }

    /// Clear the `b_i` entry of column `col` into `a_i`.
    fn clear_b(&mut self, i: usize, col: usize) -> Result<()> {
        while self.m[(G + i, col)] != 0 {
            let q = self.m[(i, col)] / self.m[(G + i, col)];
            if q != 0 {
                self.shear_ab(i, -q)?;
            }
            self.rotate(i)?;
        }
        Ok(())
    }

    /// Concentrate column `col` on `a_target` using only the pairs in `idx`.
    fn gather(&mut self, idx: &[usize], target: usize, col: usize) -> Result<()> {
        for &i in idx {
            self.clear_b(i, col)?;
        }
        loop {
            let piv = idx
                .iter()
                .copied()
                .filter(|&i| self.m[(i, col)] != 0)
                .min_by_key(|&i| (self.m[(i, col)].abs(), i != target));
            let Some(p) = piv else { return Ok(()) };
            if p != target {
                self.gl_swap(p, target)?;
            }
            let mut done = true;
            for &j in idx {
                if j == target || self.m[(j, col)] == 0 {
                    continue;
                }
                let q = self.m[(j, col)] / self.m[(target, col)];
                self.gl_add(j, target, -q)?;
                done &= self.m[(j, col)] == 0;
            }
            if done {
                return Ok(());
            }
        }
    }
}

/// Reduce an 8x2 lattice map with `M^T J M = d J_2`, `d != 0`. Returns `(sigma, sigma M,
/// alpha, u, generators)`.
fn reduce_map(m: &DMatrix<i64>, simplify: bool) -> Result<(DMatrix<i64>, DMatrix<i64>, i64, i64, usize)> {
    if m.nrows() != 2 * G || m.ncols() != 2 {
        return Err(Error::Dimension(format!("lattice map is {}x{}", m.nrows(), m.ncols())));
    }
    let hf = hopf_form(m);
    let d = hf[(0, 1)];
    if hf[(1, 0)] != -d || hf[(0, 0)] != 0 || hf[(1, 1)] != 0 {
        return Err(Error::Consistency(format!("lattice map pairing {:?} is not d J", hf.as_slice())));
    }
    if d == 0 {
        return Err(Error::Degenerate("Hopf number d = 0".into()));
    }
    let mut w = Work { s: DMatrix::identity(2 * G, 2 * G), m: m.clone(), used: 0 };

    // second column -> -e_{a1}
    w.gather(&[0, 1, 2, 3], 0, 1)?;
    if w.m[(0, 1)].abs() != 1 {
        return Err(Error::ReductionFailure(format!("second column has content {}", w.m[(0, 1)].abs())));
    }
    if w.m[(0, 1)] == 1 {
        w.flip(0)?;
    }
    if w.m[(G, 0)] != d {
        return Err(Error::Consistency(format!("b1 entry {} differs from d = {d}", w.m[(G, 0)])));
    }

    // first column restricted to pairs 2..4 -> -alpha e_{a2}
    w.gather(&[1, 2, 3], 1, 0)?;
    let alpha = w.m[(1, 0)].abs();
    if alpha == 0 {
        return Err(Error::ReductionFailure("first column has no component off the first pair".into()));
    }
    if w.m[(1, 0)] > 0 {
        w.flip(1)?;
    }
    if d % alpha != 0 {
        return Err(Error::ReductionFailure(format!("alpha = {alpha} does not divide d = {d}")));
    }

    // u -> target using a1 += k a2 (fixed up on b2) and a1 += k b1
    let target = if simplify && alpha == 1 { 0 } else { -2 };
    let mut delta = target - w.m[(0, 0)];
    let kd = Integer::div_floor(&delta, &d);
    if kd != 0 {
        w.shear_ab(0, kd)?;
        delta -= kd * d;
    }
    if delta % alpha != 0 {
        return Err(Error::ReductionFailure(format!(
            "tau'_11 residue {} is not -2 modulo alpha = {alpha}",
            w.m[(0, 0)]
        )));
    }
    if delta != 0 {
        let k = delta / w.m[(1, 0)];
        w.gl_add(0, 1, k)?;
        let fix = -w.m[(G + 1, 0)] / w.m[(1, 0)];
        if fix != 0 {
            w.shear_ba(1, fix)?;
        }
    }
    let u = w.m[(0, 0)];
    let expect = |r: usize, c: usize| match (r, c) {
        (0, 0) => u,
        (0, 1) => -1,
        (1, 0) => -alpha,
        (4, 0) => d,
        _ => 0,
    };
    if (0..2 * G).any(|r| (0..2).any(|c| w.m[(r, c)] != expect(r, c))) {
        return Err(Error::ReductionFailure(format!("unexpected lattice image {:?}", w.m.as_slice())));
    }
    Ok((w.s, w.m, alpha, u, w.used))
}

/// `(a tau + b)(c tau + d)^-1`; a singular denominator is a frame error.
pub fn act_on_tau(sigma: &SymplecticTransform, tau: &PeriodMatrixTau) -> Result<PeriodMatrixTau> {
    sigma.act(tau).map_err(|e| match e {
        Error::Singular(s) => Error::Frame(format!("c tau + d is singular: {s}")),
        other => other,
    })
}

/// Reduce with the unit-alpha simplification applied when available.
pub fn reduce(tau_b: &PeriodMatrixTau, es: &ESData, cfg: &ToleranceConfig) -> Result<ReducedForm> {
    reduce_with(tau_b, es, true, cfg)
}

pub fn reduce_with(tau_b: &PeriodMatrixTau, es: &ESData, simplify: bool, cfg: &ToleranceConfig) -> Result<ReducedForm> {
    if es.d == 0 {
        return Err(Error::Degenerate("Hopf number d = 0".into()));
    }
    reduce_lattice(tau_b, &lattice_map(&es.n, &es.m), simplify, cfg)
}

/// Reduction driven directly by a lattice map.
pub fn reduce_lattice(
    tau_b: &PeriodMatrixTau,
    m: &DMatrix<i64>,
    simplify: bool,
    cfg: &ToleranceConfig,
) -> Result<ReducedForm> {
    if tau_b.genus() != G {
        return Err(Error::Dimension(format!("genus {} period matrix", tau_b.genus())));
    }
    let (s, image, alpha, u, used) = reduce_map(m, simplify)?;
    let d = image[(G, 0)];
    let short = (s != DMatrix::identity(2 * G, 2 * G))
        .then(|| conditioned_sigma(tau_b, m, d, simplify))
        .flatten()
        .filter(|(_, _, a, uu)| *a == alpha && *uu == u);
    let conditioned = short.is_some();
    let (s, image) = match short {
        Some((s, im, _, _)) => (s, im),
        None => (s, image),
    };
    let sigma = SymplecticTransform::new(s)?;
    let tau_prime = act_on_tau(&sigma, tau_b)?;
    let rf = ReducedForm {
        sigma,
        tau_prime,
        d,
        alpha_entry: alpha,
        u,
        lattice_image: image,
        simplified: simplify && alpha == 1,
        conditioned,
        generators_used: used,
    };
    let tol = 1e-9f64.max(1e3 * cfg.abs_tol);
    let res = rf.shape_residual();
    if !(res < tol) {
        return Err(Error::ReductionShape(format!(
            "first row of tau' misses the reduced shape by {res:.3e}; tau_b does not match the winding data"
        )));
    }
    Ok(rf)
}

/// Short symplectic basis with the reduced image, or `None` if the construction does not close.
fn conditioned_sigma(tau_b: &PeriodMatrixTau, m: &DMatrix<i64>, d: i64, simplify: bool) -> Option<(DMatrix<i64>, DMatrix<i64>, i64, i64)> {
    let q = cycles::polarization_gram(tau_b)?;
    let j = linalg::symplectic_j(G);
    let nm = -(&j * m);
    let n1v: cycles::V = std::array::from_fn(|i| nm[(i, 0)]);
    let b1: cycles::V = std::array::from_fn(|i| -nm[(i, 1)]);
    let target = |alpha: i64| if simplify && alpha == 1 { 0 } else { -2 };
    let f = cycles::conditioned_frame(&b1, &n1v, d, target, &q)?;
    let s = DMatrix::from_fn(2 * G, 2 * G, |r, c| f.rows[r][c]);
    if &s * &j * s.transpose() != j {
        return None;
    }
    let image = &s * m;
    let expect = |r: usize, c: usize| match (r, c) {
        (0, 0) => f.u,
        (0, 1) => -1,
        (1, 0) => -f.alpha,
        (4, 0) => d,
        _ => 0,
    };
    if (0..2 * G).any(|r| (0..2).any(|c| image[(r, c)] != expect(r, c))) {
        return None;
    }
    Some((s, image, f.alpha, f.u))
}

/// Exact image of the Ercolani-Sinha cycle `(n; m)`: `sigma^-T (n; m) = -J sigma J (n; m)`.
pub fn es_image(sigma: &SymplecticTransform, n: &[i64; 4], m: &[i64; 4]) -> EsImage {
    let j = linalg::symplectic_j(G);
    let k = DMatrix::from_iterator(2 * G, 1, n.iter().chain(m.iter()).copied());
    let kp = -(&j * sigma.matrix() * &j * k);
    let half = |v: i64| Rational64::new(v, 2);
    EsImage { n_half: (0..G).map(|i| half(kp[i])).collect(), m_half: (G..2 * G).map(|i| half(kp[i])).collect() }
}

/// `U' = ((c tau + d)^-1)^T U` for `U = (m + tau n)/2`.
pub fn transform_vector(sigma: &SymplecticTransform, tau: &PeriodMatrixTau, u: &CVec) -> Result<CVec> {
    let c = |m: DMatrix<i64>| m.map(|x| C64::new(x as f64, 0.0));
    let den = c(sigma.c()) * tau.matrix() + c(sigma.d());
    let inv = linalg::inverse(&den).map_err(|e| Error::Frame(e.to_string()))?;
    Ok(inv.transpose() * u)
}

/// `U = (m + tau n)/2`.
pub fn es_vector(tau: &PeriodMatrixTau, n: &[i64; 4], m: &[i64; 4]) -> CVec {
    let nv = CVec::from_iterator(G, n.iter().map(|&v| C64::from(v as f64)));
    let mv = CVec::from_iterator(G, m.iter().map(|&v| C64::from(v as f64)));
    (mv + tau.matrix() * nv) * C64::from(0.5)
}

fn bezout(a: i64, b: i64) -> (i64, i64) {
    let e = a.extended_gcd(&b);
    let s = e.gcd.signum();
    (e.x * s, e.y * s)
}

/// `gcd(m1 + 4 n1 - q (m1 - 2 n1), n1 - 2 m1 - p (m1 - 2 n1))` for the Bezout pair
/// `p m1 + q n1 = 1` returned by the extended Euclidean algorithm.
pub fn alpha_gcd(n1: i64, m1: i64) -> i64 {
    let (p, q) = bezout(m1, n1);
    alpha_gcd_with(n1, m1, p, q)
}

pub fn alpha_gcd_with(n1: i64, m1: i64, p: i64, q: i64) -> i64 {
    let k = m1 - 2 * n1;
    (m1 + 4 * n1 - q * k).gcd(&(n1 - 2 * m1 - p * k))
}

/// The part of `alpha` fixed by the lattice: `gcd(alpha_gcd, d)`.
pub fn alpha_invariant(n1: i64, m1: i64) -> i64 {
    alpha_gcd(n1, m1).gcd(&crate::es_solver::hopf_number(n1, m1))
}
