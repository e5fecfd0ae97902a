//! Multishift QR with aggressive early deflation for larger Hessenberg matrices.
//!
//! Each iteration computes the real Schur form of a trailing window, deflates
//! the window eigenvalues whose spike components are negligible, and spends
//! the remaining ones as shifts for a batch of double-shift sweeps.

use super::real_schur::{hqr_block, sweep, Eigen, Shifts};
use crate::error::{Error, Result};
use std::ops::Range;

/// Matrices below this order use plain double-shift QR.
pub(crate) const MIN_DIM: usize = 75;
/// A batch of sweeps is skipped when more than this percentage of the window deflated.
const NIBBLE: usize = 14;
/// Iterations without deflation before the window grows.
const GROW_WINDOW: usize = 5;
/// Iterations without deflation between exceptional shift batches.
const EXCEPTIONAL: usize = 6;
const ULP: f64 = f64::EPSILON;

/// Shifts per batch for an active block of order `nh`.
fn shift_count(nh: usize) -> usize {
    match nh {
        0..=29 => 2,
        30..=59 => 4,
        60..=149 => 10,
        150..=589 => (nh / (nh as f64).log2().round() as usize).max(10),
        590..=2999 => 64,
        3000..=5999 => 128,
        _ => 256,
    }
}

/// Eigenvalues of an upper Hessenberg matrix of order at least [`MIN_DIM`]
/// (its entries are destroyed).
pub(crate) fn hqr_multishift(a: &mut [f64], n: usize, out: &mut Eigen) -> Result<()> {
    let idx = |i: usize, j: usize| i * n + j;
    let smlnum = f64::MIN_POSITIVE * (n as f64 / ULP);
    let ns0 = shift_count(n);
    let nsmax = (n + 6) / 9;
    let nsr = {
        let s = ns0.min(nsmax).min(n - 1);
        (s - s % 2).max(2)
    };
    let nwmax = (n - 1) / 3;
    let nwr = ns0.clamp(2, nwmax);
    let itmax = 30 * n.max(10);

    let mut ws = Workspace::new(nwmax + 1);
    let mut refl = Vec::new();
    let mut kbot = n as isize - 1;
    let mut nw = nwr;
    let mut ndfl = 1usize;
    let mut ndec: isize = -1;
    for _ in 0..itmax {
        if kbot < 0 {
            return Ok(());
        }
        let kb = kbot as usize;
        let mut ktop = kb;
        while ktop > 0 && a[idx(ktop, ktop - 1)] != 0.0 {
            ktop -= 1;
        }
        let nh = kb + 1 - ktop;

        // Window size: grows after repeated failures to deflate, and starts
        // below the smaller of two candidate subdiagonal entries.
        let nwupbd = nh.min(nwmax);
        nw = if ndfl < GROW_WINDOW { nwupbd.min(nwr) } else { nwupbd.min(2 * nw) };
        if nw < nwmax {
            if nw + 1 >= nh {
                nw = nh;
            } else {
                let kwtop = kb + 1 - nw;
                if a[idx(kwtop, kwtop - 1)].abs() > a[idx(kwtop - 1, kwtop - 2)].abs() {
                    nw += 1;
                }
            }
        }
        if ndfl < GROW_WINDOW {
            ndec = -1;
        } else if ndec >= 0 || nw >= nwupbd {
            ndec += 1;
            if (nw as isize) - ndec < 2 {
                ndec = 0;
            }
            nw = (nw as isize - ndec) as usize;
        }

        let (ld, window_eigs) = aed(a, n, ktop, kb, nw, smlnum, out, &mut ws)?;
        kbot -= ld as isize;
        let active = kbot + 1 - ktop as isize;
        let sweep_now = ld == 0 || (100 * ld <= nw * NIBBLE && active > MIN_DIM.min(nwmax) as isize);
        if sweep_now && active >= 3 {
            let kb = kbot as usize;
            let ns = {
                let s = nsmax.min(nsr).min((kb - ktop).max(2));
                s - s % 2
            };
            let pairs = if ndfl.is_multiple_of(EXCEPTIONAL) {
                exceptional_shifts(a, n, ktop, kb, ns)
            } else {
                let mut eigs = window_eigs;
                if eigs.len() <= ns / 2 {
                    eigs = trailing_eigenvalues(a, n, kb, ns);
                }
                pair_shifts(&eigs, ns, a[idx(kb, kb)])
            };
            let pairs = if pairs.is_empty() { vec![bottom_shifts(a, n, kb)] } else { pairs };
            for sh in pairs {
                sweep(a, n, ktop, kb, sh, &mut refl);
                if split_negligible(a, n, ktop, kb, smlnum) {
                    break;
                }
            }
        }
        ndfl = if ld > 0 { 1 } else { ndfl + 1 };
    }
    Err(Error::NoConvergence(itmax))
}

/// Sets negligible subdiagonal entries of the block to zero; true if any were.
fn split_negligible(a: &mut [f64], n: usize, ktop: usize, kbot: usize, smlnum: f64) -> bool {
    let mut found = false;
    for k in ktop + 1..=kbot {
        let h = a[k * n + k - 1].abs();
        let tst = a[(k - 1) * n + k - 1].abs() + a[k * n + k].abs();
        if h <= smlnum.max(ULP * tst) {
            a[k * n + k - 1] = 0.0;
            found = true;
        }
    }
    found
}

/// Ad hoc shifts from the subdiagonal magnitudes, used when deflation stalls.
fn exceptional_shifts(a: &[f64], n: usize, ktop: usize, kbot: usize, ns: usize) -> Vec<Shifts> {
    let ks = kbot + 1 - ns;
    let mut pairs = Vec::with_capacity(ns / 2);
    let mut i = kbot;
    while i >= (ks + 1).max(ktop + 2) {
        let ss = a[i * n + i - 1].abs() + a[(i - 1) * n + i - 2].abs();
        let aa = 0.75 * ss + a[i * n + i];
        pairs.push(Shifts { x: aa, y: aa, w: -0.4375 * ss * ss });
        i -= 2;
    }
    pairs
}

/// Francis shifts from the trailing 2×2 block.
fn bottom_shifts(a: &[f64], n: usize, kbot: usize) -> Shifts {
    Shifts {
        x: a[kbot * n + kbot],
        y: a[(kbot - 1) * n + kbot - 1],
        w: a[kbot * n + kbot - 1] * a[(kbot - 1) * n + kbot],
    }
}

/// Eigenvalues of the trailing `ns`×`ns` block, used as shifts when the
/// window supplied too few.
fn trailing_eigenvalues(a: &[f64], n: usize, kbot: usize, ns: usize) -> Vec<(f64, f64)> {
    let ks = kbot + 1 - ns;
    let mut h = vec![0.0; ns * ns];
    for i in 0..ns {
        for j in i.saturating_sub(1)..ns {
            h[i * ns + j] = a[(ks + i) * n + ks + j];
        }
    }
    let mut e = Eigen::new(ns);
    match hqr_block(&mut h, ns, 0, ns - 1, &mut e) {
        Ok(()) => e.wr.into_iter().zip(e.wi).collect(),
        Err(_) => Vec::new(),
    }
}

/// Groups eigenvalues (conjugates adjacent) into at most `ns/2` shift pairs,
/// taken from the bottom of the list.
fn pair_shifts(eigs: &[(f64, f64)], ns: usize, h_bottom: f64) -> Vec<Shifts> {
    let mut pairs = Vec::with_capacity(ns / 2);
    let mut pending: Option<f64> = None;
    let mut i = eigs.len();
    while i > 0 && pairs.len() < ns / 2 {
        i -= 1;
        let (re, im) = eigs[i];
        if im != 0.0 {
            if i > 0 && eigs[i - 1] == (re, -im) {
                i -= 1;
            }
            pairs.push(Shifts::complex(re, im.abs()));
        } else if let Some(r) = pending.take() {
            pairs.push(Shifts::real(r, re));
        } else {
            pending = Some(re);
        }
    }
    if pairs.is_empty() {
        if let Some(r) = pending {
            pairs.push(Shifts::real(r, r));
        }
    }
    // A lone pair of distinct real shifts: use the one nearer the corner twice.
    if let [sh] = pairs.as_mut_slice() {
        if sh.w == 0.0 && sh.x != sh.y {
            let s = if (sh.x - h_bottom).abs() <= (sh.y - h_bottom).abs() { sh.x } else { sh.y };
            *sh = Shifts::real(s, s);
        }
    }
    pairs
}

struct Workspace {
    t: Vec<f64>,
    v: Vec<f64>,
    row: Vec<f64>,
}

impl Workspace {
    fn new(max_window: usize) -> Self {
        Self {
            t: vec![0.0; max_window * max_window],
            v: vec![0.0; max_window * max_window],
            row: vec![0.0; max_window],
        }
    }
}

/// One deflation window of order `nw` at the bottom of the active block
/// `ktop..=kbot`. Deflated eigenvalues are written to `out`; returns their
/// count and the undeflated window eigenvalues as `(re, im)`, top to bottom.
#[allow(clippy::too_many_arguments)]
fn aed(
    a: &mut [f64],
    n: usize,
    ktop: usize,
    kbot: usize,
    nw: usize,
    smlnum: f64,
    out: &mut Eigen,
    ws: &mut Workspace,
) -> Result<(usize, Vec<(f64, f64)>)> {
    let idx = |i: usize, j: usize| i * n + j;
    let jw = nw.min(kbot + 1 - ktop);
    let kwtop = kbot + 1 - jw;
    if kwtop == ktop {
        hqr_block(a, n, ktop, kbot, out)?;
        return Ok((jw, Vec::new()));
    }
    let mut s = a[idx(kwtop, kwtop - 1)];
    if jw == 1 {
        let t = a[idx(kbot, kbot)];
        if s.abs() <= smlnum.max(ULP * t.abs()) {
            a[idx(kwtop, kwtop - 1)] = 0.0;
            out.set_real(kbot, t);
            return Ok((1, Vec::new()));
        }
        return Ok((0, vec![(t, 0.0)]));
    }

    let t = &mut ws.t[..jw * jw];
    let v = &mut ws.v[..jw * jw];
    for i in 0..jw {
        for j in 0..jw {
            t[i * jw + j] = if j + 1 >= i { a[idx(kwtop + i, kwtop + j)] } else { 0.0 };
            v[i * jw + j] = if i == j { 1.0 } else { 0.0 };
        }
    }
    if schur_window(t, v, jw).is_err() {
        return Ok((0, Vec::new()));
    }

    // The spike is s·(first row of V). Deflate trailing blocks whose spike
    // entries are negligible; move the others to the top of the window.
    let mut ns = jw;
    let mut ilst = 0;
    while ilst < ns {
        let two = ns >= 2 && t[(ns - 1) * jw + ns - 2] != 0.0;
        let size = 1 + two as usize;
        let top = ns - size;
        if top < ilst {
            break;
        }
        let d = t[(ns - 1) * jw + ns - 1].abs();
        let mut scale =
            if two { d + t[(ns - 1) * jw + ns - 2].abs().sqrt() * t[(ns - 2) * jw + ns - 1].abs().sqrt() } else { d };
        if scale == 0.0 {
            scale = s.abs();
        }
        let mut spike = (s * v[ns - 1]).abs();
        if two {
            spike = spike.max((s * v[ns - 2]).abs());
        }
        if spike <= smlnum.max(ULP * scale) {
            ns = top;
        } else {
            if move_up(t, v, jw, top, ilst, smlnum).is_err() {
                break;
            }
            ilst += size;
        }
    }
    if ns == 0 {
        s = 0.0;
    }

    for (i, re, im) in diagonal_blocks(t, jw, ns..jw) {
        if im == 0.0 {
            out.set_real(kwtop + i, re);
        } else {
            out.set_pair(kwtop + i, re, im);
        }
    }
    let mut window_eigs = Vec::with_capacity(ns);
    for (_, re, im) in diagonal_blocks(t, jw, 0..ns) {
        window_eigs.push((re, im));
        if im != 0.0 {
            window_eigs.push((re, -im));
        }
    }

    if ns < jw || s == 0.0 {
        if ns > 1 && s != 0.0 {
            // Reflect the spike onto its first entry, then restore Hessenberg
            // form of the undeflated part.
            let z = v[..ns].to_vec();
            if let Some((u, tau)) = householder(&z) {
                reflect_left(t, jw, 0, 0..jw, &u, tau);
                reflect_right(t, jw, 0..ns, 0, &u, tau);
                reflect_right(v, jw, 0..jw, 0, &u, tau);
            }
            hessenberg_window(t, v, jw, ns);
        }
        a[idx(kwtop, kwtop - 1)] = s * v[0];
        for i in 0..jw {
            a[idx(kwtop + i, kwtop)..idx(kwtop + i, kwtop) + jw].copy_from_slice(&t[i * jw..(i + 1) * jw]);
        }
        // Rows of the active block above the window: H ← H·V.
        let row = &mut ws.row[..jw];
        for r in ktop..kwtop {
            row.iter_mut().for_each(|x| *x = 0.0);
            for k in 0..jw {
                let h = a[idx(r, kwtop + k)];
                for (x, &vk) in row.iter_mut().zip(&v[k * jw..(k + 1) * jw]) {
                    *x += h * vk;
                }
            }
            a[idx(r, kwtop)..idx(r, kwtop) + jw].copy_from_slice(row);
        }
    }
    Ok((jw - ns, window_eigs))
}

/// Diagonal blocks of a standardized quasi-triangular `t` within `range` as
/// `(start, re, im)`, with `im > 0` for a 2×2 block.
fn diagonal_blocks(t: &[f64], m: usize, range: Range<usize>) -> Vec<(usize, f64, f64)> {
    let mut out = Vec::new();
    let mut i = range.start;
    while i < range.end {
        if i + 1 < range.end && t[(i + 1) * m + i] != 0.0 {
            let im = t[i * m + i + 1].abs().sqrt() * t[(i + 1) * m + i].abs().sqrt();
            out.push((i, t[i * m + i], im));
            i += 2;
        } else {
            out.push((i, t[i * m + i], 0.0));
            i += 1;
        }
    }
    out
}

/// Reflector `(u, τ)` with `(I − τuuᵀ)x = βe₁`; `None` if x is already a
/// multiple of e₁.
fn householder(x: &[f64]) -> Option<(Vec<f64>, f64)> {
    let tail2: f64 = x[1..].iter().map(|y| y * y).sum();
    if tail2 == 0.0 {
        return None;
    }
    let norm = (x[0] * x[0] + tail2).sqrt();
    let mut u = x.to_vec();
    u[0] += norm.copysign(x[0]);
    let tau = 2.0 / (u[0] * u[0] + tail2);
    Some((u, tau))
}

/// `M ← (I − τuuᵀ) M` on rows `r0..r0+u.len()` and the given columns.
fn reflect_left(m: &mut [f64], ld: usize, r0: usize, cols: Range<usize>, u: &[f64], tau: f64) {
    for j in cols {
        let d: f64 = u.iter().enumerate().map(|(i, &ui)| ui * m[(r0 + i) * ld + j]).sum();
        let f = tau * d;
        for (i, &ui) in u.iter().enumerate() {
            m[(r0 + i) * ld + j] -= f * ui;
        }
    }
}

/// `M ← M (I − τuuᵀ)` on the given rows and columns `c0..c0+u.len()`.
fn reflect_right(m: &mut [f64], ld: usize, rows: Range<usize>, c0: usize, u: &[f64], tau: f64) {
    for r in rows {
        let seg = &mut m[r * ld + c0..r * ld + c0 + u.len()];
        let d: f64 = seg.iter().zip(u).map(|(x, y)| x * y).sum();
        let f = tau * d;
        for (x, &ui) in seg.iter_mut().zip(u) {
            *x -= f * ui;
        }
    }
}

/// Reduces the leading `ns`×`ns` block of the window to Hessenberg form,
/// updating the coupling columns and accumulating into `v`.
fn hessenberg_window(t: &mut [f64], v: &mut [f64], jw: usize, ns: usize) {
    for k in 0..ns.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..ns).map(|i| t[i * jw + k]).collect();
        if let Some((u, tau)) = householder(&x) {
            reflect_left(t, jw, k + 1, k..jw, &u, tau);
            reflect_right(t, jw, 0..ns, k + 1, &u, tau);
            reflect_right(v, jw, 0..jw, k + 1, &u, tau);
        }
        for i in k + 2..ns {
            t[i * jw + k] = 0.0;
        }
    }
}

/// `(x, y) ← (c·x + s·y, c·y − s·x)`.
#[inline]
fn rot(x: &mut f64, y: &mut f64, c: f64, s: f64) {
    let (a, b) = (*x, *y);
    *x = c * a + s * b;
    *y = c * b - s * a;
}

fn rot_rows(m: &mut [f64], ld: usize, r1: usize, r2: usize, cols: Range<usize>, c: f64, s: f64) {
    debug_assert!(r1 < r2);
    let (top, bottom) = m.split_at_mut(r2 * ld);
    let (row1, row2) = (&mut top[r1 * ld..(r1 + 1) * ld], &mut bottom[..ld]);
    for j in cols {
        rot(&mut row1[j], &mut row2[j], c, s);
    }
}

fn rot_cols(m: &mut [f64], ld: usize, c1: usize, c2: usize, rows: Range<usize>, c: f64, s: f64) {
    for r in rows {
        let (mut x, mut y) = (m[r * ld + c1], m[r * ld + c2]);
        rot(&mut x, &mut y, c, s);
        m[r * ld + c1] = x;
        m[r * ld + c2] = y;
    }
}

/// Plane rotation `(c, s)` with `c·f + s·g = r`, `c·g − s·f = 0`.
fn givens(f: f64, g: f64) -> (f64, f64) {
    if g == 0.0 {
        (1.0, 0.0)
    } else if f == 0.0 {
        (0.0, 1.0)
    } else {
        let r = f.hypot(g);
        (f / r, g / r)
    }
}

/// Standard-form Schur factorization of a real 2×2 block:
/// `[a b; c d] = Q [a' b'; c' d'] Qᵀ` with `Q = [cs −sn; sn cs]`, where
/// either `c' = 0` (real eigenvalues) or `a' = d'` and `b'c' < 0`.
fn lanv2(mut a: f64, mut b: f64, mut c: f64, mut d: f64) -> ([f64; 4], f64, f64) {
    const MULTPL: f64 = 4.0;
    let (mut cs, mut sn);
    if c == 0.0 {
        cs = 1.0;
        sn = 0.0;
    } else if b == 0.0 {
        cs = 0.0;
        sn = 1.0;
        std::mem::swap(&mut a, &mut d);
        b = -c;
        c = 0.0;
    } else if a - d == 0.0 && b.signum() != c.signum() {
        cs = 1.0;
        sn = 0.0;
    } else {
        let temp = a - d;
        let p = 0.5 * temp;
        let bcmax = b.abs().max(c.abs());
        let bcmis = b.abs().min(c.abs()) * b.signum() * c.signum();
        let scale = p.abs().max(bcmax);
        let z = p / scale * p + bcmax / scale * bcmis;
        if z >= MULTPL * ULP {
            // Real eigenvalues: triangularize.
            let z = p + (scale.sqrt() * z.sqrt()).copysign(p);
            a = d + z;
            d -= bcmax / z * bcmis;
            let tau = c.hypot(z);
            cs = z / tau;
            sn = c / tau;
            b -= c;
            c = 0.0;
        } else {
            // Complex or nearly equal real eigenvalues: equalize the diagonal.
            let sigma = b + c;
            let tau = sigma.hypot(temp);
            cs = (0.5 * (1.0 + sigma.abs() / tau)).sqrt();
            sn = -(p / (tau * cs)) * sigma.signum();
            let aa = a * cs + b * sn;
            let bb = -a * sn + b * cs;
            let cc = c * cs + d * sn;
            let dd = -c * sn + d * cs;
            a = aa * cs + cc * sn;
            b = bb * cs + dd * sn;
            c = -aa * sn + cc * cs;
            d = -bb * sn + dd * cs;
            let mid = 0.5 * (a + d);
            a = mid;
            d = mid;
            if c != 0.0 {
                if b != 0.0 {
                    if b.signum() == c.signum() {
                        let sab = b.abs().sqrt();
                        let sac = c.abs().sqrt();
                        let p = (sab * sac).copysign(c);
                        let tau = 1.0 / (b + c).abs().sqrt();
                        a = mid + p;
                        d = mid - p;
                        b -= c;
                        c = 0.0;
                        let (cs1, sn1) = (sab * tau, sac * tau);
                        let c2 = cs * cs1 - sn * sn1;
                        sn = cs * sn1 + sn * cs1;
                        cs = c2;
                    }
                } else {
                    b = -c;
                    c = 0.0;
                    let c2 = cs;
                    cs = -sn;
                    sn = c2;
                }
            }
        }
    }
    ([a, b, c, d], cs, sn)
}

/// Brings the 2×2 block at `j` of a quasi-triangular `t` to standard form.
fn standardize_block(t: &mut [f64], v: &mut [f64], m: usize, j: usize) {
    let ([a, b, c, d], cs, sn) = lanv2(t[j * m + j], t[j * m + j + 1], t[(j + 1) * m + j], t[(j + 1) * m + j + 1]);
    t[j * m + j] = a;
    t[j * m + j + 1] = b;
    t[(j + 1) * m + j] = c;
    t[(j + 1) * m + j + 1] = d;
    rot_rows(t, m, j, j + 1, j + 2..m, cs, sn);
    rot_cols(t, m, j, j + 1, 0..j, cs, sn);
    rot_cols(v, m, j, j + 1, 0..m, cs, sn);
}

/// Real Schur form `T ← Vᵀ T V` of an upper Hessenberg `t` (m×m) with
/// standardized 2×2 blocks, accumulating the transformations into `v`.
fn schur_window(t: &mut [f64], v: &mut [f64], m: usize) -> Result<()> {
    let idx = |i: usize, j: usize| i * m + j;
    let mut anorm = 0.0;
    for i in 0..m {
        for j in i.saturating_sub(1)..m {
            anorm += t[idx(i, j)].abs();
        }
    }
    let max_sweeps = 40 * m;
    let mut total = 0;
    let mut hi = m as isize - 1;
    while hi >= 0 {
        let nu = hi as usize;
        let mut its = 0;
        loop {
            let mut l = nu;
            while l > 0 {
                let mut s = t[idx(l - 1, l - 1)].abs() + t[idx(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if t[idx(l, l - 1)].abs() <= ULP * s {
                    t[idx(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            if l == nu {
                hi -= 1;
                break;
            }
            if l + 1 == nu {
                standardize_block(t, v, m, l);
                hi -= 2;
                break;
            }
            total += 1;
            if total > max_sweeps {
                return Err(Error::NoConvergence(total - 1));
            }
            its += 1;
            let sh = if its % 30 == 10 {
                let s = t[idx(l + 1, l)].abs() + t[idx(l + 2, l + 1)].abs();
                let h = 0.75 * s + t[idx(l, l)];
                Shifts { x: h, y: h, w: -0.4375 * s * s }
            } else if its % 30 == 20 {
                let s = t[idx(nu, nu - 1)].abs() + t[idx(nu - 1, nu - 2)].abs();
                let h = 0.75 * s + t[idx(nu, nu)];
                Shifts { x: h, y: h, w: -0.4375 * s * s }
            } else {
                bottom_shifts(t, m, nu)
            };
            sweep_full(t, v, m, l, nu, sh);
        }
    }
    for i in 2..m {
        for j in 0..i - 1 {
            t[idx(i, j)] = 0.0;
        }
    }
    Ok(())
}

/// Double-shift sweep over the block `l..=nu` updating all of `t` and `v`.
fn sweep_full(t: &mut [f64], v: &mut [f64], m: usize, l: usize, nu: usize, sh: Shifts) {
    let idx = |i: usize, j: usize| i * m + j;
    let Shifts { x, y, w } = sh;
    let (mut p, mut q, mut r);
    let mut mm = nu - 2;
    loop {
        let z = t[idx(mm, mm)];
        let rr = x - z;
        let ss = y - z;
        p = (rr * ss - w) / t[idx(mm + 1, mm)] + t[idx(mm, mm + 1)];
        q = t[idx(mm + 1, mm + 1)] - z - rr - ss;
        r = t[idx(mm + 2, mm + 1)];
        let s = p.abs() + q.abs() + r.abs();
        p /= s;
        q /= s;
        r /= s;
        if mm == l {
            break;
        }
        let u = t[idx(mm, mm - 1)].abs() * (q.abs() + r.abs());
        let vv = p.abs() * (t[idx(mm - 1, mm - 1)].abs() + z.abs() + t[idx(mm + 1, mm + 1)].abs());
        if u <= ULP * vv {
            break;
        }
        mm -= 1;
    }
    for i in mm + 2..=nu {
        t[idx(i, i - 2)] = 0.0;
        if i != mm + 2 {
            t[idx(i, i - 3)] = 0.0;
        }
    }
    for k in mm..nu {
        let last = k == nu - 1;
        let mut xk = 0.0;
        if k != mm {
            p = t[idx(k, k - 1)];
            q = t[idx(k + 1, k - 1)];
            r = if last { 0.0 } else { t[idx(k + 2, k - 1)] };
            xk = p.abs() + q.abs() + r.abs();
            if xk != 0.0 {
                p /= xk;
                q /= xk;
                r /= xk;
            }
        }
        let s = (p * p + q * q + r * r).sqrt().copysign(p);
        if s == 0.0 {
            continue;
        }
        if k == mm {
            if l != mm {
                t[idx(k, k - 1)] = -t[idx(k, k - 1)];
            }
        } else {
            t[idx(k, k - 1)] = -s * xk;
        }
        p += s;
        let (hx, hy, hz) = (p / s, q / s, r / s);
        q /= p;
        r /= p;
        for j in k..m {
            let mut pp = t[idx(k, j)] + q * t[idx(k + 1, j)];
            if !last {
                pp += r * t[idx(k + 2, j)];
                t[idx(k + 2, j)] -= pp * hz;
            }
            t[idx(k + 1, j)] -= pp * hy;
            t[idx(k, j)] -= pp * hx;
        }
        let cols = |mat: &mut [f64], rows: Range<usize>| {
            for i in rows {
                let mut pp = hx * mat[idx(i, k)] + hy * mat[idx(i, k + 1)];
                if !last {
                    pp += hz * mat[idx(i, k + 2)];
                    mat[idx(i, k + 2)] -= pp * r;
                }
                mat[idx(i, k + 1)] -= pp * q;
                mat[idx(i, k)] -= pp;
            }
        };
        cols(t, 0..nu.min(k + 3) + 1);
        cols(v, 0..m);
    }
}

/// Solves `A X − X B = C` for the blocks of `d` (A is n1×n1 at the top left,
/// B is n2×n2 at the bottom right, C the n1×n2 coupling), by Gaussian
/// elimination with complete pivoting on the Kronecker system.
fn sylvester(d: &[[f64; 4]; 4], n1: usize, n2: usize, smlnum: f64) -> [[f64; 2]; 2] {
    let k = n1 * n2;
    let mut sys = [[0.0; 5]; 4];
    for p in 0..n1 {
        for q in 0..n2 {
            let row = p * n2 + q;
            for rr in 0..n1 {
                sys[row][rr * n2 + q] += d[p][rr];
            }
            for s in 0..n2 {
                sys[row][p * n2 + s] -= d[n1 + s][n1 + q];
            }
            sys[row][4] = d[p][n1 + q];
        }
    }
    let kmax = sys[..k].iter().flat_map(|r| r[..k].iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    let smin = (ULP * kmax).max(smlnum);
    let mut perm = [0, 1, 2, 3];
    for c in 0..k {
        let (mut pi, mut pj, mut best) = (c, c, -1.0);
        for (i, row) in sys.iter().enumerate().take(k).skip(c) {
            for (j, x) in row.iter().enumerate().take(k).skip(c) {
                if x.abs() > best {
                    (pi, pj, best) = (i, j, x.abs());
                }
            }
        }
        sys.swap(c, pi);
        for row in sys.iter_mut() {
            row.swap(c, pj);
        }
        perm.swap(c, pj);
        if sys[c][c].abs() < smin {
            sys[c][c] = smin;
        }
        let pivot = sys[c];
        for row in sys.iter_mut().take(k).skip(c + 1) {
            let f = row[c] / pivot[c];
            for (x, &p) in row[c..k].iter_mut().zip(&pivot[c..k]) {
                *x -= f * p;
            }
            row[4] -= f * pivot[4];
        }
    }
    let mut y = [0.0; 4];
    for c in (0..k).rev() {
        let s: f64 = (c + 1..k).map(|j| sys[c][j] * y[j]).sum();
        y[c] = (sys[c][4] - s) / sys[c][c];
    }
    let mut x = [[0.0; 2]; 2];
    for c in 0..k {
        let u = perm[c];
        x[u / n2][u % n2] = y[c];
    }
    x
}

/// Swaps the adjacent diagonal blocks of sizes n1 (at j1) and n2 of a
/// quasi-triangular `t`, updating `v`. Returns false, leaving both
/// untouched, if the swap would be inaccurate.
fn swap_blocks(t: &mut [f64], v: &mut [f64], m: usize, j1: usize, n1: usize, n2: usize, smlnum: f64) -> bool {
    let idx = |i: usize, j: usize| i * m + j;
    if n1 == 1 && n2 == 1 {
        let j2 = j1 + 1;
        let (t11, t22) = (t[idx(j1, j1)], t[idx(j2, j2)]);
        let (cs, sn) = givens(t[idx(j1, j2)], t22 - t11);
        rot_rows(t, m, j1, j2, j2 + 1..m, cs, sn);
        rot_cols(t, m, j1, j2, 0..j1, cs, sn);
        t[idx(j1, j1)] = t22;
        t[idx(j2, j2)] = t11;
        rot_cols(v, m, j1, j2, 0..m, cs, sn);
        return true;
    }
    let nb = n1 + n2;
    let mut d = [[0.0; 4]; 4];
    for (i, row) in d.iter_mut().enumerate().take(nb) {
        for (j, x) in row.iter_mut().enumerate().take(nb) {
            *x = t[idx(j1 + i, j1 + j)];
        }
    }
    let dnorm = d.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let thresh = (10.0 * ULP * dnorm).max(smlnum);
    let x = sylvester(&d, n1, n2, smlnum);

    // Orthogonal Q whose leading n2 columns span range([−X; I]), the
    // invariant subspace belonging to the lower block. Columns of the basis
    // are stored as rows.
    let mut basis = [[0.0; 4]; 2];
    for (j, col) in basis.iter_mut().enumerate().take(n2) {
        for i in 0..n1 {
            col[i] = -x[i][j];
        }
        col[n1 + j] = 1.0;
    }
    let mut q = [[0.0; 4]; 4];
    for (i, row) in q.iter_mut().enumerate().take(nb) {
        row[i] = 1.0;
    }
    for c in 0..n2 {
        if let Some((u, tau)) = householder(&basis[c][c..nb]) {
            for col in basis.iter_mut().take(n2).skip(c) {
                let f = tau * u.iter().zip(&col[c..nb]).map(|(a, b)| a * b).sum::<f64>();
                for (x, &ui) in col[c..nb].iter_mut().zip(&u) {
                    *x -= f * ui;
                }
            }
            for row in q.iter_mut().take(nb) {
                let f = tau * u.iter().zip(&row[c..nb]).map(|(a, b)| a * b).sum::<f64>();
                for (x, &ui) in row[c..nb].iter_mut().zip(&u) {
                    *x -= f * ui;
                }
            }
        }
    }
    // E = Qᵀ D Q must be block upper triangular to working accuracy.
    let mut e = [[0.0; 4]; 4];
    for i in 0..nb {
        for j in 0..nb {
            e[i][j] = (0..nb).map(|a| q[a][i] * (0..nb).map(|b| d[a][b] * q[b][j]).sum::<f64>()).sum();
        }
    }
    for row in e.iter().take(nb).skip(n2) {
        if row[..n2].iter().any(|x| x.abs() > thresh) {
            return false;
        }
    }

    let mut buf = [0.0; 4];
    for j in j1 + nb..m {
        for (i, b) in buf.iter_mut().enumerate().take(nb) {
            *b = (0..nb).map(|a| q[a][i] * t[idx(j1 + a, j)]).sum();
        }
        for (i, b) in buf.iter().enumerate().take(nb) {
            t[idx(j1 + i, j)] = *b;
        }
    }
    let right = |mat: &mut [f64], rows: Range<usize>| {
        let mut buf = [0.0; 4];
        for r in rows {
            for (j, b) in buf.iter_mut().enumerate().take(nb) {
                *b = (0..nb).map(|a| mat[idx(r, j1 + a)] * q[a][j]).sum();
            }
            mat[idx(r, j1)..idx(r, j1) + nb].copy_from_slice(&buf[..nb]);
        }
    };
    right(t, 0..j1);
    right(v, 0..m);
    for i in 0..nb {
        for j in 0..nb {
            t[idx(j1 + i, j1 + j)] = if i >= n2 && j < n2 { 0.0 } else { e[i][j] };
        }
    }
    if n2 == 2 {
        standardize_block(t, v, m, j1);
    }
    if n1 == 2 {
        standardize_block(t, v, m, j1 + n2);
    }
    true
}

/// Moves the diagonal block starting at `ifst` up to start at `ilst` by
/// adjacent swaps. Fails if a swap is rejected or the block splits.
fn move_up(
    t: &mut [f64],
    v: &mut [f64],
    m: usize,
    ifst: usize,
    ilst: usize,
    smlnum: f64,
) -> std::result::Result<(), ()> {
    let nb = if ifst + 1 < m && t[(ifst + 1) * m + ifst] != 0.0 { 2 } else { 1 };
    let mut here = ifst;
    while here > ilst {
        let nbp = if here >= 2 && t[(here - 1) * m + here - 2] != 0.0 { 2 } else { 1 };
        if here < ilst + nbp || !swap_blocks(t, v, m, here - nbp, nbp, nb, smlnum) {
            return Err(());
        }
        here -= nbp;
        if nb == 2 && t[(here + 1) * m + here] == 0.0 {
            return Err(());
        }
    }
    Ok(())
}
