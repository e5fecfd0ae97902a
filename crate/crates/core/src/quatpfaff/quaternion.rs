use super::pfaffian::pfaffian;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

const SELF_DUAL_TOL: f64 = 1e-12;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Complexified quaternion `q0 + q1 e1 + q2 e2 + q3 e3` with
/// `e1² = e2² = e3² = e1 e2 e3 = −1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion(pub [Complex64; 4]);

impl Quaternion {
    pub const fn new(q0: Complex64, q1: Complex64, q2: Complex64, q3: Complex64) -> Self {
        Self([q0, q1, q2, q3])
    }

    pub fn scalar(a: Complex64) -> Self {
        Self([a, ZERO, ZERO, ZERO])
    }

    pub fn one() -> Self {
        Self::scalar(Complex64::new(1.0, 0.0))
    }

    /// Basis element `e_k` (k = 0 gives 1).
    pub fn basis(k: usize) -> Self {
        let mut q = [ZERO; 4];
        q[k] = Complex64::new(1.0, 0.0);
        Self(q)
    }

    /// Dual `q*`: the 2×2 form [[a, b], [c, d]] maps to [[d, −b], [−c, a]].
    pub fn dual(self) -> Self {
        let [a, b, c, d] = self.0;
        Self([a, -b, -c, -d])
    }

    /// 2×2 complex representation, row-major `[[a, b], [c, d]]`.
    pub fn to_matrix(self) -> [[Complex64; 2]; 2] {
        let [q0, q1, q2, q3] = self.0;
        [[q0 + I * q3, I * q1 - q2], [I * q1 + q2, q0 - I * q3]]
    }

    /// Inverse of [`Quaternion::to_matrix`].
    pub fn from_matrix(m: [[Complex64; 2]; 2]) -> Self {
        let [[a, b], [c, d]] = m;
        Self([(a + d) * 0.5, (b + c) / (I * 2.0), (c - b) * 0.5, (a - d) / (I * 2.0)])
    }

    /// Largest magnitude among the non-scalar coefficients.
    pub fn vector_norm(self) -> f64 {
        self.0[1..].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn norm_max(self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self(std::array::from_fn(|k| self.0[k] + o.0[k]))
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self(std::array::from_fn(|k| self.0[k] - o.0[k]))
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|z| -z))
    }
}

impl Mul<Complex64> for Quaternion {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        Self(self.0.map(|z| z * s))
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let [a0, a1, a2, a3] = self.0;
        let [b0, b1, b2, b3] = o.0;
        Self([
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ])
    }
}

/// Bilinear quaternion product.
pub fn quat_mul(a: Quaternion, b: Quaternion) -> Quaternion {
    a * b
}

pub fn quat_dual(q: Quaternion) -> Quaternion {
    q.dual()
}

/// Square matrix of complexified quaternions.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionMatrix {
    n: usize,
    entries: Vec<Quaternion>,
}

impl QuaternionMatrix {
    pub fn new(n: usize, entries: Vec<Quaternion>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!("{} quaternions for an {n}x{n} matrix", entries.len())));
        }
        Ok(Self { n, entries })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        Self { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { Quaternion::one() } else { Quaternion::default() })
    }

    pub fn diagonal(d: &[Complex64]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { Quaternion::scalar(d[i]) } else { Quaternion::default() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Quaternion {
        self.entries[i * self.n + j]
    }

    /// Largest deviation from `q_ij = q_ji*`.
    pub fn self_dual_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                d = d.max((self.get(i, j) - self.get(j, i).dual()).norm_max());
            }
        }
        d
    }

    pub fn is_self_dual(&self) -> bool {
        self.self_dual_defect() <= SELF_DUAL_TOL
    }

    fn require_self_dual(&self) -> Result<()> {
        let d = self.self_dual_defect();
        if d > SELF_DUAL_TOL {
            Err(Error::NotSelfDual(d))
        } else {
            Ok(())
        }
    }
}

/// Blockwise 2×2 complex embedding, 2n×2n.
pub fn phi(q: &QuaternionMatrix) -> ComplexMatrix {
    let n = q.n();
    let mut m = ComplexMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let b = q.get(i, j).to_matrix();
            for (r, row) in b.iter().enumerate() {
                for (c, &v) in row.iter().enumerate() {
                    m[(2 * i + r, 2 * j + c)] = v;
                }
            }
        }
    }
    m
}

/// Moore–Dyson determinant by the cycle expansion.
///
/// Each permutation is split into cycles written with their largest element
/// first, the cycles ordered by decreasing leader; the signed ordered
/// products of quaternion entries are summed. For self-dual input the
/// non-scalar part cancels, which is checked.
pub fn moore_dyson_det(q: &QuaternionMatrix) -> Result<Complex64> {
    q.require_self_dual()?;
    let n = q.n();
    if n > 7 {
        return Err(Error::Unsupported(format!("cycle expansion at n = {n}")));
    }
    let total = cycle_expansion(q);
    let scale = 1.0f64.max(total.0[0].norm());
    if total.vector_norm() > 1e-10 * scale {
        return Err(Error::NotSelfDual(total.vector_norm()));
    }
    Ok(total.0[0])
}

/// Full quaternion-valued cycle-expansion sum (no self-duality check).
pub fn cycle_expansion(q: &QuaternionMatrix) -> Quaternion {
    let n = q.n();
    let mut total = Quaternion::default();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut visited = vec![false; n];
    loop {
        // Cycles by decreasing leader: scan candidate leaders from n-1 down.
        visited.iter_mut().for_each(|v| *v = false);
        let mut term = Quaternion::one();
        let mut sign = 1.0;
        for lead in (0..n).rev() {
            if visited[lead] {
                continue;
            }
            // A cycle is led by its largest element; skip if a larger one is in it.
            let mut j = perm[lead];
            let mut is_leader = true;
            while j != lead {
                if j > lead {
                    is_leader = false;
                    break;
                }
                j = perm[j];
            }
            if !is_leader {
                continue;
            }
            let mut cur = lead;
            let mut len = 0;
            loop {
                visited[cur] = true;
                let next = perm[cur];
                term = term * q.get(cur, next);
                len += 1;
                cur = next;
                if cur == lead {
                    break;
                }
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        total = total + term * Complex64::new(sign, 0.0);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    total
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// `Z φ(Q)` with `Z` block-diagonal in [[0, 1], [−1, 0]].
pub fn z_phi(q: &QuaternionMatrix) -> ComplexMatrix {
    let m = phi(q);
    let k = m.rows();
    ComplexMatrix::from_fn(k, k, |i, j| if i % 2 == 0 { m[(i + 1, j)] } else { -m[(i - 1, j)] })
}

/// Moore–Dyson determinant as `Pf(Z φ(Q))`; polynomial cost.
pub fn det_via_pfaffian(q: &QuaternionMatrix) -> Result<Complex64> {
    let a = z_phi(q);
    let scale = a.data().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let defect = a.skew_defect();
    if defect > SELF_DUAL_TOL * scale {
        return Err(Error::NotSelfDual(defect));
    }
    pfaffian(&a)
}
