//! Randomised identity checks for theta functions.

use super::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest relative residual of each identity over a batch of random instances.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PropertyResiduals {
    /// `theta[a,b](z + p + tau q)` against the automorphy factor.
    pub quasi_periodicity: f64,
    /// `theta[-a,-b](-z) = theta[a,b](z)`.
    pub parity: f64,
    /// `theta[a + a', b + b'](z)` against the shifted argument.
    pub characteristic_shift: f64,
    /// `| |mu| - 1 |` in the Igusa transformation law.
    pub igusa: f64,
    pub instances: usize,
}

impl PropertyResiduals {
    pub fn max(&self) -> f64 {
        self.quasi_periodicity.max(self.parity).max(self.characteristic_shift).max(self.igusa)
    }
}

/// Symmetric real part in `[-1/2, 1/2]`, imaginary part `0.6 (M M^T + 1)`.
pub fn random_tau<R: Rng>(g: usize, rng: &mut R) -> PeriodMatrixTau {
    let x = RMat::from_fn(g, g, |_, _| rng.gen_range(-0.5..0.5));
    let m = RMat::from_fn(g, g, |_, _| rng.gen_range(-0.5..0.5));
    let y = &m * m.transpose() * 0.6 + RMat::identity(g, g) * 0.6;
    let xs = (&x + x.transpose()) * 0.5;
    PeriodMatrixTau::new(CMat::from_fn(g, g, |i, j| C64::new(xs[(i, j)], y[(i, j)]))).expect("positive definite by construction")
}

fn random_char<R: Rng>(g: usize, den: i64, rng: &mut R) -> ThetaCharacteristic {
    let a: Vec<i64> = (0..g).map(|_| rng.gen_range(0..den)).collect();
    let b: Vec<i64> = (0..g).map(|_| rng.gen_range(0..den)).collect();
    ThetaCharacteristic::from_ints(&a, &b, den).unwrap()
}

/// Product of three random generators: `J`, `[[1, B], [0, 1]]` with symmetric `B`, `[[A, 0], [0, A^-T]]` with elementary `A`.
pub fn random_symplectic<R: Rng>(g: usize, rng: &mut R) -> SymplecticTransform {
    let n = 2 * g;
    let mut acc = SymplecticTransform::identity(g);
    for _ in 0..3 {
        let mut m = DMatrix::<i64>::identity(n, n);
        match rng.gen_range(0..3) {
            0 => m = crate::linalg::symplectic_j(g),
            1 => {
                for i in 0..g {
                    for j in i..g {
                        let v = rng.gen_range(-1..=1);
                        m[(i, g + j)] = v;
                        m[(j, g + i)] = v;
                    }
                }
            }
            _ => {
                if g > 1 {
                    let i = rng.gen_range(0..g);
                    let j = (i + rng.gen_range(1..g)) % g;
                    let s = if rng.gen_bool(0.5) { 1 } else { -1 };
                    // A = 1 + s e_ij, A^-T = 1 - s e_ji
                    m[(i, j)] = s;
                    m[(g + j, g + i)] = -s;
                }
            }
        }
        acc = acc.compose(&SymplecticTransform::new(m).expect("generator is symplectic"));
    }
    acc
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}

fn dotc(a: &[C64], b: &[f64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Run the four identities over `instances` random `(tau, z, char)` triples of genus `g`.
pub fn theta_property_suite(g: usize, instances: usize, seed: u64, cfg: &ToleranceConfig) -> Result<PropertyResiduals> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (g as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut out = PropertyResiduals { instances, ..Default::default() };
    let ipi = C64::new(0.0, PI);
    for _ in 0..instances {
        let tau = random_tau(g, &mut rng);
        let ev = ThetaEvaluator::new(&tau, cfg)?;
        let t = tau.matrix();
        let z: Vec<C64> = (0..g).map(|_| C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.3..0.3))).collect();
        let ch = random_char(g, 6, &mut rng);
        let (a, b) = (ch.a_f64(), ch.b_f64());
        let f0 = ev.eval(&z, &ch, &[])?;

        let p: Vec<f64> = (0..g).map(|_| rng.gen_range(-1..=1) as f64).collect();
        let q: Vec<f64> = (0..g).map(|_| rng.gen_range(-1..=1) as f64).collect();
        let tq: Vec<C64> = (0..g).map(|i| (0..g).map(|j| t[(i, j)] * q[j]).sum()).collect();
        let zs: Vec<C64> = (0..g).map(|i| z[i] + p[i] + tq[i]).collect();
        let ap: f64 = a.iter().zip(&p).map(|(x, y)| x * y).sum();
        let bq: f64 = b.iter().zip(&q).map(|(x, y)| x * y).sum();
        let factor = (2.0 * ipi * (ap - bq) - ipi * dotc(&tq, &q) - 2.0 * ipi * dotc(&z, &q)).exp();
        out.quasi_periodicity = out.quasi_periodicity.max(rel(ev.eval(&zs, &ch, &[])?, factor * f0));

        let neg = ThetaCharacteristic::new(ch.a.iter().map(|x| -x).collect(), ch.b.iter().map(|x| -x).collect())?;
        let mz: Vec<C64> = z.iter().map(|w| -w).collect();
        out.parity = out.parity.max(rel(ev.eval(&mz, &neg, &[])?, f0));

        let sh = random_char(g, 2, &mut rng);
        let (a2, b2) = (sh.a_f64(), sh.b_f64());
        let ta: Vec<C64> = (0..g).map(|i| (0..g).map(|j| t[(i, j)] * a2[j]).sum()).collect();
        let zsh: Vec<C64> = (0..g).map(|i| z[i] + ta[i] + b2[i]).collect();
        let sum = ThetaCharacteristic::new(
            (0..g).map(|i| ch.a[i] + sh.a[i]).collect(),
            (0..g).map(|i| ch.b[i] + sh.b[i]).collect(),
        )?;
        let zb: Vec<C64> = (0..g).map(|i| z[i] + b[i] + b2[i]).collect();
        let factor = (ipi * dotc(&ta, &a2) + 2.0 * ipi * dotc(&zb, &a2)).exp();
        out.characteristic_shift = out.characteristic_shift.max(rel(ev.eval(&z, &sum, &[])?, factor * ev.eval(&zsh, &ch, &[])?));

        let sigma = random_symplectic(g, &mut rng);
        let half = random_char(g, 2, &mut rng);
        match igusa_modulus(&half, &sigma, &tau, &z, cfg) {
            Ok(m) => out.igusa = out.igusa.max((m - 1.0).abs()),
            // odd characteristic at a zero of theta: no information
            Err(Error::Degenerate(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
