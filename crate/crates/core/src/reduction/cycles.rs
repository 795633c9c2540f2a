//! Short symplectic cycle bases measured in the polarization norm `c -> Re(l Y^-1 l^*)`,
//! `l = p^T tau + q^T` for the cycle `c = (p; q)`.

use crate::linalg::RMat;
use crate::riemann_theta::PeriodMatrixTau;
use num_complex::Complex64 as C64;
use num_integer::Integer;

pub(super) const G: usize = 4;
pub(super) type V = [i64; 2 * G];

/// `x J y^T`.
pub(super) fn pair(x: &V, y: &V) -> i64 {
    (0..G).map(|i| x[i] * y[G + i] - x[G + i] * y[i]).sum()
}

fn axpy(k: i64, x: &V, y: &V) -> V {
    let mut out = *y;
    for i in 0..2 * G {
        out[i] += k * x[i];
    }
    out
}

fn scaled(k: i64, x: &V) -> V {
    x.map(|v| k * v)
}

pub(super) fn content(x: &V) -> i64 {
    x.iter().fold(0i64, |g, &v| g.gcd(&v))
}

fn unit(k: usize) -> V {
    let mut e = [0; 2 * G];
    e[k] = 1;
    e
}

pub(super) fn polarization_gram(tau: &PeriodMatrixTau) -> Option<RMat> {
    let t = tau.matrix();
    let yinv = tau.imag().try_inverse()?;
    let ell: Vec<Vec<C64>> = (0..2 * G)
        .map(|k| {
            (0..G)
                .map(|j| if k < G { t[(k, j)] } else if k - G == j { C64::from(1.0) } else { C64::from(0.0) })
                .collect()
        })
        .collect();
    let mut q = RMat::zeros(2 * G, 2 * G);
    for k in 0..2 * G {
        for l in 0..2 * G {
            let mut s = C64::from(0.0);
            for i in 0..G {
                for j in 0..G {
                    s += ell[k][i] * yinv[(i, j)] * ell[l][j].conj();
                }
            }
            q[(k, l)] = s.re;
        }
    }
    Some((&q + q.transpose()) * 0.5)
}

fn ip(q: &RMat, x: &V, y: &V) -> f64 {
    let mut s = 0.0;
    for i in 0..2 * G {
        if x[i] == 0 {
            continue;
        }
        for j in 0..2 * G {
            s += x[i] as f64 * q[(i, j)] * y[j] as f64;
        }
    }
    s
}

/// Basis vectors paired with their images under a linear map; the norm is taken on the image.
#[derive(Clone, Copy)]
struct Tracked {
    v: V,
    z: V,
}

fn gso(b: &[Tracked], q: &RMat) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = b.len();
    let mut bb = vec![0.0; n];
    let mut mu = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..i {
            let mut s = ip(q, &b[i].z, &b[j].z);
            for l in 0..j {
                s -= mu[j][l] * mu[i][l] * bb[l];
            }
            mu[i][j] = s / bb[j];
        }
        let mut s = ip(q, &b[i].z, &b[i].z);
        for l in 0..i {
            s -= mu[i][l] * mu[i][l] * bb[l];
        }
        bb[i] = s;
    }
    (bb, mu)
}

fn lll(b: &mut [Tracked], q: &RMat) {
    let n = b.len();
    let mut k = 1;
    let mut guard = 0;
    while k < n && guard < 10_000 {
        guard += 1;
        for j in (0..k).rev() {
            let (_, mu) = gso(b, q);
            let r = mu[k][j].round();
            if r != 0.0 && r.is_finite() {
                let r = r as i64;
                b[k] = Tracked { v: axpy(-r, &b[j].v, &b[k].v), z: axpy(-r, &b[j].z, &b[k].z) };
            }
        }
        let (bb, mu) = gso(b, q);
        if bb[k] >= (0.99 - mu[k][k - 1] * mu[k][k - 1]) * bb[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
}

fn lll_plain(b: &mut Vec<V>, q: &RMat) {
    let mut t: Vec<Tracked> = b.iter().map(|&v| Tracked { v, z: v }).collect();
    lll(&mut t, q);
    *b = t.into_iter().map(|t| t.v).collect();
}

/// Minimise `key(offset + sum c_k z_k)` over integer `c` near the real minimiser of the norm;
/// returns the chosen combination of the `v` parts and of the `z` parts.
fn nearest<K: PartialOrd>(basis: &[Tracked], offset: &V, q: &RMat, key: impl Fn(&V) -> K) -> Option<(V, V)> {
    let n = basis.len();
    if n == 0 {
        return Some(([0; 2 * G], *offset));
    }
    let a = RMat::from_fn(n, n, |k, l| ip(q, &basis[k].z, &basis[l].z));
    let r = nalgebra::DVector::from_fn(n, |k, _| -ip(q, &basis[k].z, offset));
    let c = a.lu().solve(&r)?;
    let c0: Vec<i64> = c.iter().map(|x| x.round() as i64).collect();
    let mut best: Option<(K, V, V)> = None;
    let mut delta = vec![-1i64; n];
    loop {
        let mut v = [0; 2 * G];
        let mut z = *offset;
        for k in 0..n {
            let ck = c0[k] + delta[k];
            v = axpy(ck, &basis[k].v, &v);
            z = axpy(ck, &basis[k].z, &z);
        }
        let kz = key(&z);
        if best.as_ref().map_or(true, |(bk, _, _)| kz < *bk) {
            best = Some((kz, v, z));
        }
        let mut i = 0;
        while i < n && delta[i] == 1 {
            delta[i] = -1;
            i += 1;
        }
        if i == n {
            break;
        }
        delta[i] += 1;
    }
    best.map(|(_, v, z)| (v, z))
}

/// Echelon basis of the lattice generated by `gens`.
fn lattice_basis(gens: &[V]) -> Vec<V> {
    let mut rows: Vec<[i128; 2 * G]> = gens.iter().map(|g| g.map(|v| v as i128)).collect();
    let mut r0 = 0;
    for col in 0..2 * G {
        loop {
            let piv = (r0..rows.len()).filter(|&i| rows[i][col] != 0).min_by_key(|&i| rows[i][col].abs());
            let Some(p) = piv else { break };
            rows.swap(r0, p);
            let mut clean = true;
            for i in r0 + 1..rows.len() {
                if rows[i][col] != 0 {
                    let qt = rows[i][col] / rows[r0][col];
                    for c in 0..2 * G {
                        rows[i][c] -= qt * rows[r0][c];
                    }
                    clean &= rows[i][col] == 0;
                }
            }
            if clean {
                r0 += 1;
                break;
            }
        }
    }
    rows[..r0].iter().map(|r| r.map(|v| v as i64)).collect()
}

/// Rewrite `basis` so that `f` is nonzero on the first vector only.
fn split_functional(mut basis: Vec<V>, f: impl Fn(&V) -> i64) -> Option<(V, i64, Vec<V>)> {
    loop {
        let vals: Vec<i64> = basis.iter().map(&f).collect();
        let p = (0..basis.len()).filter(|&i| vals[i] != 0).min_by_key(|&i| vals[i].abs())?;
        let mut done = true;
        for j in 0..basis.len() {
            if j != p && vals[j] != 0 {
                basis[j] = axpy(-(vals[j] / vals[p]), &basis[p], &basis[j]);
                done &= f(&basis[j]) == 0;
            }
        }
        if done {
            let piv = basis.remove(p);
            return Some((piv, vals[p], basis));
        }
    }
}

/// `c - <c, b> a + <c, a> b`: projection onto the symplectic complement of a hyperbolic pair.
fn project(c: &V, a: &V, b: &V) -> V {
    axpy(pair(c, a), b, &axpy(-pair(c, b), a, c))
}

/// Shortest vector pairing to one with `b` inside the lattice `basis`, plus the kernel of `<., b>`.
fn partner(basis: Vec<V>, b: &V, q: &RMat) -> Option<(V, Vec<V>)> {
    let (mut piv, val, mut ker) = split_functional(basis, |c| pair(c, b))?;
    if val.abs() != 1 {
        return None;
    }
    piv = scaled(val, &piv);
    lll_plain(&mut ker, q);
    let t: Vec<Tracked> = ker.iter().map(|&v| Tracked { v, z: v }).collect();
    let (_, a) = nearest(&t, &piv, q, |z| ip(q, z, z))?;
    Some((a, ker))
}

pub(super) struct Frame {
    pub rows: [V; 2 * G],
    pub alpha: i64,
    pub u: i64,
}

/// Reduced cycle basis with `b1` the Ercolani-Sinha cycle and short remaining cycles.
/// `n1v` is the cycle with `c . M_col1 = <c, n1v>`; `target(alpha)` picks `u`.
pub(super) fn conditioned_frame(b1: &V, n1v: &V, d: i64, target: impl Fn(i64) -> i64, q: &RMat) -> Option<Frame> {
    // a1_0 with <a1_0, b1> = 1
    let v: V = std::array::from_fn(|i| if i < G { b1[G + i] } else { -b1[i - G] });
    let (mut g, mut a10) = (0i64, [0i64; 2 * G]);
    for i in 0..2 * G {
        let e = g.extended_gcd(&v[i]);
        a10 = axpy(e.y, &unit(i), &scaled(e.x, &a10));
        g = e.gcd;
    }
    if g != 1 || pair(&a10, b1) != 1 {
        return None;
    }
    let mut w = lattice_basis(&(0..2 * G).map(|k| project(&unit(k), &a10, b1)).collect::<Vec<_>>());
    if w.len() != 2 * G - 2 {
        return None;
    }
    lll_plain(&mut w, q);

    // a1 = a1_0 + x with u = <a1, n1v> fixed modulo d, chosen to make R short
    let phi = |c: &V| pair(c, n1v);
    let u0 = phi(&a10);
    let (mut piv, alpha, ker) = split_functional(w.clone(), phi)?;
    if alpha < 0 {
        piv = scaled(-1, &piv);
    }
    let alpha = alpha.abs();
    let dd = d.abs();
    let u_t = target(alpha);
    if dd % alpha != 0 || (u_t - u0) % alpha != 0 {
        return None;
    }
    let big = dd / alpha;
    let t = ((u_t - u0) / alpha).rem_euclid(big);
    let lmap = |y: &V| axpy(-phi(y), b1, &scaled(d, y));
    let xp = scaled(t, &piv);
    let a1p = axpy(1, &xp, &a10);
    let rp = axpy(-phi(&a1p), b1, &axpy(d, &a1p, n1v));
    let mut w0: Vec<Tracked> = std::iter::once(scaled(big, &piv))
        .chain(ker)
        .map(|y| Tracked { v: y, z: lmap(&y) })
        .collect();
    lll(&mut w0, q);
    let (x, _) = nearest(&w0, &rp, q, |r| (content(r) != alpha, ip(q, r, r)))?;
    let mut a1 = axpy(1, &x, &a1p);
    let u = phi(&a1);
    if (u_t - u) % d != 0 {
        return None;
    }
    a1 = axpy((u_t - u) / d, b1, &a1);
    let r = axpy(-u_t, b1, &axpy(d, &a1, n1v));
    let alpha = content(&r);
    if alpha == 0 {
        return None;
    }
    let b2 = r.map(|v| -v / alpha);

    let mut w1: Vec<V> = w.iter().map(|c| project(c, &a1, b1)).collect();
    lll_plain(&mut w1, q);
    let (a2, k2) = partner(w1, &b2, q)?;
    let mut w2 = lattice_basis(&k2.iter().map(|c| project(c, &a2, &b2)).collect::<Vec<_>>());
    if w2.len() != 4 {
        return None;
    }
    lll_plain(&mut w2, q);
    let b3 = w2[0];
    let (a3, k3) = partner(w2, &b3, q)?;
    let mut w3 = lattice_basis(&k3.iter().map(|c| project(c, &a3, &b3)).collect::<Vec<_>>());
    if w3.len() != 2 {
        return None;
    }
    lll_plain(&mut w3, q);
    let (b4, f) = (w3[0], w3[1]);
    let s = pair(&f, &b4);
    if s.abs() != 1 {
        return None;
    }
    let mut a4 = scaled(s, &f);
    let k = (ip(q, &a4, &b4) / ip(q, &b4, &b4)).round() as i64;
    a4 = axpy(-k, &b4, &a4);
    Some(Frame { rows: [a1, a2, a3, a4, *b1, b2, b3, b4], alpha, u: u_t })
}
