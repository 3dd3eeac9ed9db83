//! Dense complex linear algebra used throughout the synthesizer.
//!
//! Qubit 0 is the most significant bit of a basis-state index. Every
//! embedding, partial trace and local kernel below follows that ordering.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Index, IndexMut, Mul};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Singular values at or below this are treated as zero by [`closest_unitary`].
pub const DEGENERACY_THRESHOLD: f64 = 1e-14;

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major data. Panics if `data.len()` is not a square.
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), dim * dim, "row-major data has wrong length");
        assert!(dim >= 1);
        Self { dim, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of qubits when the dimension is a power of two.
    pub fn n_qubits(&self) -> Option<usize> {
        self.dim.is_power_of_two().then(|| self.dim.trailing_zeros() as usize)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * factor).collect() }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `max |U^dag U - I|` over all entries.
    pub fn unitarity_error(&self) -> f64 {
        let prod = self.adjoint().matmul(self);
        prod.max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        let n = m.nrows();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(m[(i, j)]);
            }
        }
        Self { dim: n, data }
    }

    /// Phase-insensitive closeness: `dim - |Tr(self^dag other)|`.
    pub fn phase_distance(&self, other: &Self) -> f64 {
        self.dim as f64 - trace_of_adjoint_product(self, other).norm()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl From<Mat2> for ComplexMatrix {
    fn from(m: Mat2) -> Self {
        Self::from_row_major(2, m.0.to_vec())
    }
}

/// `Tr(a^dag b)` without forming the product.
pub fn trace_of_adjoint_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    assert_eq!(a.dim, b.dim);
    a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum()
}

/// Kronecker product; the first factor occupies the most significant index bits.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim, b.dim);
    let n = da * db;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..da {
        for j in 0..da {
            let aij = a.data[i * da + j];
            if aij == ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out.data[(i * db + k) * n + j * db + l] = aij * b.data[k * db + l];
                }
            }
        }
    }
    out
}

/// 2x2 complex matrix stored row-major as `[m00, m01, m10, m11]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [C64; 4]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([ONE, ZERO, ZERO, ONE]);

    pub fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Mat2([m00, m01, m10, m11])
    }

    pub fn adjoint(&self) -> Self {
        let [a, b, c, d] = self.0;
        Mat2([a.conj(), c.conj(), b.conj(), d.conj()])
    }

    pub fn det(&self) -> C64 {
        let [a, b, c, d] = self.0;
        a * d - b * c
    }

    pub fn trace(&self) -> C64 {
        self.0[0] + self.0[3]
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2(self.0.map(|z| z * s))
    }

    /// `Tr(self^dag other)`.
    pub fn inner(&self, other: &Mat2) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Singular values `(sigma_max, sigma_min)` in closed form.
    pub fn singular_values(&self) -> (f64, f64) {
        let p = self.det().norm();
        let s = (self.frobenius_sq() + 2.0 * p).sqrt();
        let disc = (s * s - 4.0 * p).max(0.0).sqrt();
        let smax = 0.5 * (s + disc);
        let smin = if smax > 0.0 { p / smax } else { 0.0 };
        (smax, smin)
    }

    pub fn try_from_matrix(m: &ComplexMatrix) -> Result<Self> {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: m.dim() });
        }
        let s = m.as_slice();
        Ok(Mat2([s[0], s[1], s[2], s[3]]))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = rhs.0;
        Mat2([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }
}

pub fn pauli_x() -> Mat2 {
    Mat2([ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> Mat2 {
    let i = C64::i();
    Mat2([ZERO, -i, i, ZERO])
}

pub fn pauli_z() -> Mat2 {
    Mat2([ONE, ZERO, ZERO, -ONE])
}

pub fn hadamard() -> Mat2 {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    Mat2([h, h, h, -h])
}

/// `exp(-i theta X / 2)`
pub fn rx(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    Mat2([C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)])
}

/// `exp(-i theta Y / 2)`
pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    Mat2([C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)])
}

/// `exp(-i theta Z / 2)`
pub fn rz(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    Mat2([C64::new(c, -s), ZERO, ZERO, C64::new(c, s)])
}

/// Euler angles of a single-qubit gate `Rz(theta2) Ry(theta1) Rz(theta3)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EulerTriple {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl EulerTriple {
    pub const ZERO: EulerTriple = EulerTriple { theta1: 0.0, theta2: 0.0, theta3: 0.0 };

    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Self {
        Self { theta1, theta2, theta3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.theta1, self.theta2, self.theta3]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    /// Angles reduced into `[0, 4pi)`, for display only.
    pub fn reduced(&self) -> Self {
        let r = |t: f64| t.rem_euclid(4.0 * std::f64::consts::PI);
        Self::new(r(self.theta1), r(self.theta2), r(self.theta3))
    }
}

/// `Rz(theta2) Ry(theta1) Rz(theta3)`, written out in closed form.
pub fn euler_to_su2(t: EulerTriple) -> Mat2 {
    let (s1, c1) = (t.theta1 / 2.0).sin_cos();
    let sum = 0.5 * (t.theta2 + t.theta3);
    let diff = 0.5 * (t.theta2 - t.theta3);
    Mat2([
        C64::from_polar(c1, -sum),
        -C64::from_polar(s1, -diff),
        C64::from_polar(s1, diff),
        C64::from_polar(c1, sum),
    ])
}

/// Inverse of [`euler_to_su2`] up to the SU(2) sign.
pub fn su2_to_euler(u: &Mat2) -> Result<EulerTriple> {
    let det_error = (u.det() - ONE).norm();
    let unitarity_error = (u.adjoint() * *u).max_abs_diff(&Mat2::IDENTITY);
    if det_error > 1e-10 || unitarity_error > 1e-10 {
        return Err(Error::NotSpecialUnitary { det_error, unitarity_error });
    }
    Ok(su2_to_euler_unchecked(u))
}

/// Euler extraction without validation; callers guarantee `u` is in SU(2).
pub(crate) fn su2_to_euler_unchecked(u: &Mat2) -> EulerTriple {
    let [u00, _, u10, u11] = u.0;
    let theta1 = 2.0 * u10.norm().atan2(u00.norm().max(u11.norm()));
    // u11 = e^{i sum} cos, u10 = e^{i diff} sin; a vanishing factor leaves its phase free.
    let half_sum = if u11.norm() > 1e-300 { u11.arg() } else { 0.0 };
    let half_diff = if u10.norm() > 1e-300 { u10.arg() } else { 0.0 };
    EulerTriple::new(theta1, half_sum + half_diff, half_sum - half_diff)
}

/// Divides out a square root of the determinant, choosing the root with
/// argument in `(-pi/2, pi/2]`.
pub fn project_to_su2(u: &Mat2) -> Mat2 {
    let det = u.det();
    let mut root = det.sqrt();
    // principal sqrt has arg in (-pi/2, pi/2]; guard the -pi branch cut
    if root.arg() <= -std::f64::consts::FRAC_PI_2 {
        root = -root;
    }
    u.scale(root.inv())
}

/// Haar-random unitary on `n_qubits` qubits: QR of a complex Ginibre matrix
/// with the phases of `R`'s diagonal folded back into `Q`.
pub fn haar_random_unitary<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> ComplexMatrix {
    assert!(n_qubits >= 1, "need at least one qubit");
    haar_random_unitary_dim(1 << n_qubits, rng)
}

pub fn haar_random_unitary_dim<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut entries = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        entries.push(C64::new(re, im) * FRAC_1_SQRT_2);
    }
    let ginibre = DMatrix::from_row_slice(dim, dim, &entries);
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..dim {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { ONE };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    ComplexMatrix::from_nalgebra(&q)
}

/// Polar factor of a 2x2 matrix: `(A + e^{i arg det A} adj(A)^dag) / (sigma_1 + sigma_2)`.
pub fn closest_unitary_2x2(a: &Mat2) -> Result<Mat2> {
    let (_, smin) = a.singular_values();
    if smin <= DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateEnvironment { sigma_min: smin, threshold: DEGENERACY_THRESHOLD });
    }
    let det = a.det();
    let phase = det / det.norm();
    let [p, q, r, s] = a.0;
    let adj_dag = Mat2([s.conj(), -r.conj(), -q.conj(), p.conj()]);
    let denom = (a.frobenius_sq() + 2.0 * det.norm()).sqrt();
    let mut u = Mat2([p + phase * adj_dag.0[0], q + phase * adj_dag.0[1], r + phase * adj_dag.0[2], s + phase * adj_dag.0[3]]);
    u = u.scale(C64::new(1.0 / denom, 0.0));
    Ok(u)
}

/// Unitary `X Y^dag` from the SVD `a = X Sigma Y^dag`; maximizes `Re Tr(U^dag a)`.
pub fn closest_unitary(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim() == 2 {
        return closest_unitary_2x2(&Mat2::try_from_matrix(a)?).map(ComplexMatrix::from);
    }
    closest_unitary_svd(a)
}

/// General-dimension route through a full SVD.
pub fn closest_unitary_svd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let svd = a.to_nalgebra().svd(true, true);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin <= DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateEnvironment { sigma_min: smin, threshold: DEGENERACY_THRESHOLD });
    }
    let (u, v_t) = (svd.u.expect("requested U"), svd.v_t.expect("requested V^T"));
    Ok(ComplexMatrix::from_nalgebra(&(u * v_t)))
}

/// `A[p][q] = sum_r m[(p, r)][(q, r)]`, with `qubit` as the explicit factor.
///
/// Satisfies `Tr((G (x) I_rest)^dag m) = Tr(G^dag A)` for every 2x2 `G`.
pub fn partial_trace_to_qubit(m: &ComplexMatrix, qubit: usize, n_qubits: usize) -> Result<Mat2> {
    if m.dim() != 1 << n_qubits {
        return Err(Error::DimensionMismatch { expected: 1 << n_qubits, found: m.dim() });
    }
    if qubit >= n_qubits {
        return Err(Error::QubitOutOfRange { index: qubit, n_qubits });
    }
    Ok(ptrace_qubit(m.as_slice(), m.dim(), qubit_mask(qubit, n_qubits)))
}

#[inline]
pub(crate) fn qubit_mask(qubit: usize, n_qubits: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

#[inline]
pub(crate) fn ptrace_qubit(m: &[C64], dim: usize, mask: usize) -> Mat2 {
    let mut acc = [ZERO; 4];
    for i in 0..dim {
        if i & mask != 0 {
            continue;
        }
        let j = i | mask;
        acc[0] += m[i * dim + i];
        acc[1] += m[i * dim + j];
        acc[2] += m[j * dim + i];
        acc[3] += m[j * dim + j];
    }
    Mat2(acc)
}

/// `m <- (g on qubit) * m`.
pub(crate) fn apply_1q_left(m: &mut [C64], dim: usize, mask: usize, g: &Mat2) {
    let [a, b, c, d] = g.0;
    for i in 0..dim {
        if i & mask != 0 {
            continue;
        }
        let j = i | mask;
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let (head, tail) = m.split_at_mut(hi * dim);
        let row0 = &mut head[lo * dim..(lo + 1) * dim];
        let row1 = &mut tail[..dim];
        for (x, y) in row0.iter_mut().zip(row1.iter_mut()) {
            let (x0, y0) = (*x, *y);
            *x = a * x0 + b * y0;
            *y = c * x0 + d * y0;
        }
    }
}

/// `m <- m * (g on qubit)`.
pub(crate) fn apply_1q_right(m: &mut [C64], dim: usize, mask: usize, g: &Mat2) {
    let [a, b, c, d] = g.0;
    for row in m.chunks_exact_mut(dim) {
        for k in 0..dim {
            if k & mask != 0 {
                continue;
            }
            let l = k | mask;
            let (x0, y0) = (row[k], row[l]);
            row[k] = x0 * a + y0 * c;
            row[l] = x0 * b + y0 * d;
        }
    }
}

/// `m <- CNOT * m`; the permutation swaps rows whose control bit is set.
pub(crate) fn apply_cnot_left(m: &mut [C64], dim: usize, cmask: usize, tmask: usize) {
    for i in 0..dim {
        if i & cmask != 0 && i & tmask == 0 {
            let j = i | tmask;
            let (head, tail) = m.split_at_mut(j * dim);
            head[i * dim..(i + 1) * dim].swap_with_slice(&mut tail[..dim]);
        }
    }
}

/// `m <- m * CNOT`.
pub(crate) fn apply_cnot_right(m: &mut [C64], dim: usize, cmask: usize, tmask: usize) {
    for row in m.chunks_exact_mut(dim) {
        for k in 0..dim {
            if k & cmask != 0 && k & tmask == 0 {
                row.swap(k, k | tmask);
            }
        }
    }
}

/// Dense CNOT on `n_qubits`, mostly for tests and oracles.
pub fn cnot_matrix(control: usize, target: usize, n_qubits: usize) -> ComplexMatrix {
    let dim = 1 << n_qubits;
    let mut m = ComplexMatrix::identity(dim);
    apply_cnot_left(m.as_mut_slice(), dim, qubit_mask(control, n_qubits), qubit_mask(target, n_qubits));
    m
}

/// Dense embedding of a single-qubit gate.
pub fn embed_1q(g: &Mat2, qubit: usize, n_qubits: usize) -> ComplexMatrix {
    let dim = 1 << n_qubits;
    let mut m = ComplexMatrix::identity(dim);
    apply_1q_left(m.as_mut_slice(), dim, qubit_mask(qubit, n_qubits), g);
    m
}
