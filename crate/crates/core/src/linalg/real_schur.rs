//! Francis double-shift QR on a real upper Hessenberg matrix.

use super::{aed, balance, ComplexMatrix, Spectrum};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Eigenvalues of an exactly real square matrix via the real Schur form.
///
/// Eigenvalues from 1×1 blocks (and 2×2 blocks with real roots) carry
/// `real_flag = true` and an imaginary part of exactly zero. Complex
/// eigenvalues come in exact conjugate pairs.
pub fn eigenvalues_real_schur(m: &ComplexMatrix) -> Result<Spectrum> {
    let n = m.require_square()?;
    let a = m.to_real().ok_or(Error::NotReal)?;
    eigenvalues_real(a, n)
}

/// Same as [`eigenvalues_real_schur`] on a row-major real array.
pub fn eigenvalues_real(mut a: Vec<f64>, n: usize) -> Result<Spectrum> {
    if a.len() != n * n || n == 0 {
        return Err(Error::DimensionMismatch(format!("{} entries for an {n}x{n} matrix", a.len())));
    }
    let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
    balance(&mut a, n, f64::abs);
    hessenberg(&mut a, n);
    let mut out = Eigen::new(n);
    if n < aed::MIN_DIM {
        hqr_block(&mut a, n, 0, n - 1, &mut out)?;
    } else {
        aed::hqr_multishift(&mut a, n, &mut out)?;
    }
    let eig = out.wr.iter().zip(&out.wi).map(|(&re, &im)| Complex64::new(re, im)).collect();
    Ok(Spectrum::new(eig, out.real, Complex64::new(trace, 0.0)))
}

/// Householder reduction to upper Hessenberg form in place.
///
/// Each step applies the reflector from both sides in two passes over the
/// trailing block: one computes `Bᵀv` and `Bv`, the other a rank-2 update.
pub(crate) fn hessenberg(a: &mut [f64], n: usize) {
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut u = vec![0.0; n];
    for k in 0..n - 2 {
        let c0 = k + 1;
        let m = n - c0;
        let mut norm2 = 0.0;
        for i in 0..m {
            let x = a[(c0 + i) * n + k];
            v[i] = x;
            norm2 += x * x;
        }
        let tail2 = norm2 - v[0] * v[0];
        if tail2 == 0.0 {
            continue;
        }
        let norm = norm2.sqrt();
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let tau = 2.0 / (v[0] * v[0] + tail2);
        let v = &v[..m];
        let w = &mut w[..m];
        let u = &mut u[..m];

        // Trailing block B = a[c0.., c0..]: w = Bᵀv, u = Bv.
        w.iter_mut().for_each(|x| *x = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            let row = &a[(c0 + i) * n + c0..(c0 + i + 1) * n];
            for (wj, &x) in w.iter_mut().zip(row) {
                *wj += vi * x;
            }
            u[i] = dot(row, v);
        }
        // (I − τvvᵀ) B (I − τvvᵀ) = B − τ v wᵀ − g vᵀ with g = τ(u − τ(w·v)v).
        let wv = dot(w, v);
        for (i, &vi) in v.iter().enumerate() {
            let f = tau * vi;
            let g = tau * (u[i] - tau * wv * vi);
            let row = &mut a[(c0 + i) * n + c0..(c0 + i + 1) * n];
            for ((x, &wj), &vj) in row.iter_mut().zip(w.iter()).zip(v) {
                *x -= f * wj + g * vj;
            }
        }
        a[c0 * n + k] = alpha;
        for i in c0 + 1..n {
            a[i * n + k] = 0.0;
        }
        // Rows above the block see only the right reflector.
        for r in 0..c0 {
            let row = &mut a[r * n + c0..(r + 1) * n];
            let d = dot(row, v);
            if d != 0.0 {
                let f = tau * d;
                for (x, &vi) in row.iter_mut().zip(v) {
                    *x -= f * vi;
                }
            }
        }
    }
}

/// Dot product with four independent accumulators.
#[inline]
fn dot(x: &[f64], y: &[f64]) -> f64 {
    let (xc, yc) = (x.chunks_exact(4), y.chunks_exact(4));
    let tail: f64 = xc.remainder().iter().zip(yc.remainder()).map(|(a, b)| a * b).sum();
    let mut acc = [0.0; 4];
    for (a, b) in xc.zip(yc) {
        for k in 0..4 {
            acc[k] += a[k] * b[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Eigenvalues by diagonal position, filled in as blocks deflate.
pub(crate) struct Eigen {
    pub wr: Vec<f64>,
    pub wi: Vec<f64>,
    pub real: Vec<bool>,
}

impl Eigen {
    pub(crate) fn new(n: usize) -> Self {
        Self { wr: vec![0.0; n], wi: vec![0.0; n], real: vec![false; n] }
    }

    pub(crate) fn set_real(&mut self, i: usize, x: f64) {
        self.wr[i] = x;
        self.wi[i] = 0.0;
        self.real[i] = true;
    }

    /// Conjugate pair `re ± i·im` at positions i, i+1.
    pub(crate) fn set_pair(&mut self, i: usize, re: f64, im: f64) {
        self.wr[i] = re;
        self.wr[i + 1] = re;
        self.wi[i] = im;
        self.wi[i + 1] = -im;
        self.real[i] = false;
        self.real[i + 1] = false;
    }
}

/// Shift pair of one double-shift sweep: the eigenvalues of a 2×2 block with
/// diagonal `x`, `y` and off-diagonal product `w`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Shifts {
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

impl Shifts {
    pub(crate) fn real(s1: f64, s2: f64) -> Self {
        Self { x: s1, y: s2, w: 0.0 }
    }

    pub(crate) fn complex(re: f64, im: f64) -> Self {
        Self { x: re, y: re, w: -im * im }
    }
}

/// Eigenvalues of the diagonal block `lo..=hi` of an upper Hessenberg matrix
/// (its entries are destroyed) by double-shift QR with Francis shifts.
pub(crate) fn hqr_block(a: &mut [f64], n: usize, lo: usize, hi: usize, out: &mut Eigen) -> Result<()> {
    let idx = |i: usize, j: usize| i * n + j;
    let mut refl: Vec<Option<Reflector>> = Vec::with_capacity(hi + 1 - lo);
    let mut anorm = 0.0;
    for i in lo..=hi {
        for j in i.saturating_sub(1).max(lo)..=hi {
            anorm += a[idx(i, j)].abs();
        }
    }
    let max_sweeps = 40 * (hi + 1 - lo);
    let mut total = 0usize;
    let mut t = 0.0;
    let mut nn = hi as isize;
    while nn >= lo as isize {
        let nu = nn as usize;
        let mut its = 0;
        loop {
            let mut l = nu;
            while l > lo {
                let mut s = a[idx(l - 1, l - 1)].abs() + a[idx(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[idx(l, l - 1)].abs() <= f64::EPSILON * s {
                    a[idx(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[idx(nu, nu)];
            if l == nu {
                out.set_real(nu, x + t);
                nn -= 1;
                break;
            }
            let mut y = a[idx(nu - 1, nu - 1)];
            let mut w = a[idx(nu, nu - 1)] * a[idx(nu - 1, nu)];
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + z.copysign(p);
                    out.set_real(nu - 1, x + z);
                    out.set_real(nu, if z != 0.0 { x - w / z } else { x + z });
                } else {
                    out.set_pair(nu - 1, x + p, z);
                }
                nn -= 2;
                break;
            }
            total += 1;
            if total > max_sweeps {
                return Err(Error::NoConvergence(total - 1));
            }
            if its > 0 && its % 10 == 0 {
                t += x;
                for i in lo..=nu {
                    a[idx(i, i)] -= x;
                }
                let s = a[idx(nu, nu - 1)].abs() + a[idx(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            sweep(a, n, l, nu, Shifts { x, y, w }, &mut refl);
        }
    }
    Ok(())
}

/// One implicit double-shift sweep over the unreduced block `l..=nu`
/// (at least 3×3). Only entries inside the block are updated.
pub(crate) fn sweep(a: &mut [f64], n: usize, l: usize, nu: usize, sh: Shifts, refl: &mut Vec<Option<Reflector>>) {
    let idx = |i: usize, j: usize| i * n + j;
    let Shifts { x, y, w } = sh;
    let (mut p, mut q, mut r);
    let mut m = nu - 2;
    loop {
        let z = a[idx(m, m)];
        let rr = x - z;
        let ss = y - z;
        p = (rr * ss - w) / a[idx(m + 1, m)] + a[idx(m, m + 1)];
        q = a[idx(m + 1, m + 1)] - z - rr - ss;
        r = a[idx(m + 2, m + 1)];
        let s = p.abs() + q.abs() + r.abs();
        p /= s;
        q /= s;
        r /= s;
        if m == l {
            break;
        }
        let u = a[idx(m, m - 1)].abs() * (q.abs() + r.abs());
        let v = p.abs() * (a[idx(m - 1, m - 1)].abs() + z.abs() + a[idx(m + 1, m + 1)].abs());
        if u <= f64::EPSILON * v {
            break;
        }
        m -= 1;
    }
    for i in m + 2..=nu {
        a[idx(i, i - 2)] = 0.0;
        if i != m + 2 {
            a[idx(i, i - 3)] = 0.0;
        }
    }
    // Column updates on rows above the bulge are deferred and applied
    // row by row after the sweep; rows k+1..=k+3 are updated at once
    // because the next reflector reads them.
    refl.clear();
    // Row updates right of column j1 are deferred and applied in
    // column blocks just before those columns are read.
    let mut j1 = (m + COL_BLOCK).min(nu + 1);
    let mut xk = 0.0;
    for k in m..nu {
        if k != m {
            p = a[idx(k, k - 1)];
            q = a[idx(k + 1, k - 1)];
            r = if k != nu - 1 { a[idx(k + 2, k - 1)] } else { 0.0 };
            xk = p.abs() + q.abs() + r.abs();
            if xk != 0.0 {
                p /= xk;
                q /= xk;
                r /= xk;
            }
        }
        let s = (p * p + q * q + r * r).sqrt().copysign(p);
        if s == 0.0 {
            refl.push(None);
            flush_columns(a, n, m, nu, k, &mut j1, refl);
            continue;
        }
        if k == m {
            if l != m {
                a[idx(k, k - 1)] = -a[idx(k, k - 1)];
            }
        } else {
            a[idx(k, k - 1)] = -s * xk;
        }
        p += s;
        let rf = Reflector { x: p / s, y: q / s, z: r / s, q: q / p, r: r / p, last: k == nu - 1 };
        q = rf.q;
        r = rf.r;
        apply_rows(a, n, k, k, j1, &rf);
        for i in k + 1..=nu.min(k + 3) {
            rf.apply_cols(&mut a[i * n + k..i * n + k + 3 - rf.last as usize]);
        }
        refl.push(Some(rf));
        flush_columns(a, n, m, nu, k, &mut j1, refl);
    }
    const BLOCK: usize = 16;
    let mut i0 = l;
    while i0 < nu {
        let i1 = (i0 + BLOCK).min(nu);
        for k in m.max(i0)..nu {
            if let Some(rf) = &refl[k - m] {
                let width = 3 - rf.last as usize;
                for i in i0..i1.min(k + 1) {
                    rf.apply_cols(&mut a[i * n + k..i * n + k + width]);
                }
            }
        }
        i0 = i1;
    }
}

/// 3-element Householder reflector of one Francis sweep step.
pub(crate) struct Reflector {
    x: f64,
    y: f64,
    z: f64,
    q: f64,
    r: f64,
    last: bool,
}

impl Reflector {
    /// Column update restricted to one row: `c` holds columns k..k+2 (or k..k+1).
    #[inline]
    fn apply_cols(&self, c: &mut [f64]) {
        let mut pp = self.x * c[0] + self.y * c[1];
        if !self.last {
            pp += self.z * c[2];
            c[2] -= pp * self.r;
        }
        c[1] -= pp * self.q;
        c[0] -= pp;
    }
}

const COL_BLOCK: usize = 32;

/// Brings columns up to k+3 current after step k of a sweep starting at m.
#[inline]
fn flush_columns(a: &mut [f64], n: usize, m: usize, nu: usize, k: usize, j1: &mut usize, refl: &[Option<Reflector>]) {
    while *j1 <= nu && k + 4 >= *j1 {
        let j2 = (*j1 + COL_BLOCK).min(nu + 1);
        for (t, rf) in refl.iter().enumerate() {
            if let Some(rf) = rf {
                apply_rows(a, n, m + t, *j1, j2, rf);
            }
        }
        *j1 = j2;
    }
}

/// Row update of rows k..k+2 over columns c0..c1.
#[inline]
fn apply_rows(a: &mut [f64], n: usize, k: usize, c0: usize, c1: usize, rf: &Reflector) {
    let (q, r) = (rf.q, rf.r);
    let (hx, hy, hz) = (rf.x, rf.y, rf.z);
    let (r0, rest) = a.split_at_mut((k + 1) * n);
    let row_k = &mut r0[k * n + c0..k * n + c1];
    if rf.last {
        let row_k1 = &mut rest[c0..c1];
        for (ak, ak1) in row_k.iter_mut().zip(row_k1.iter_mut()) {
            let pp = *ak + q * *ak1;
            *ak1 -= pp * hy;
            *ak -= pp * hx;
        }
    } else {
        let (r1, r2) = rest.split_at_mut(n);
        let row_k1 = &mut r1[c0..c1];
        let row_k2 = &mut r2[c0..c1];
        for ((ak, ak1), ak2) in row_k.iter_mut().zip(row_k1.iter_mut()).zip(row_k2.iter_mut()) {
            let pp = *ak + q * *ak1 + r * *ak2;
            *ak2 -= pp * hz;
            *ak1 -= pp * hy;
            *ak -= pp * hx;
        }
    }
}
