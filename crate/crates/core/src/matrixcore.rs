//! Dense complex linear algebra for small open-system problems.
//!
//! Everything here works on row-major [`CMatrix`] values. Operators are
//! vectorized row by row, so `vec(A X B) = (A ⊗ Bᵀ) vec(X)`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Largest Hilbert-space dimension accepted by the decompositions.
pub const MAX_DIMENSION: usize = 256;

/// Relative tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Relative threshold on the rank-revealing pivots of the kernel solve.
pub const KERNEL_RANK_TOL: f64 = 1e-9;

/// Relative residual bound for the kernel solve.
pub const KERNEL_RESIDUAL_TOL: f64 = 1e-10;

/// Iterative refinement passes after the kernel solve.
pub const REFINEMENT_SWEEPS: usize = 3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("shape mismatch: {op} on {lhs:?} and {rhs:?}")]
    Shape {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix is not Hermitian: max |M - M†| = {deviation:.3e} (allowed {allowed:.3e})")]
    NotHermitian { deviation: f64, allowed: f64 },
    #[error("dimension {dim} exceeds the supported maximum {max}")]
    TooLarge { dim: usize, max: usize },
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("generator has {rows} rows, which is not a perfect square")]
    NotVectorized { rows: usize },
    #[error("degenerate steady state: smallest pivot ratio {ratio:.3e} below {threshold:.1e}")]
    DegenerateKernel { ratio: f64, threshold: f64 },
    #[error("kernel residual {residual:.3e} exceeds {allowed:.3e}")]
    Residual { residual: f64, allowed: f64 },
    #[error("Jacobi iteration did not converge (off-diagonal norm {0:.3e})")]
    NoConvergence(f64),
}

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::Shape {
                op: "from_vec",
                lhs: (rows, cols),
                rhs: (data.len(), 1),
            });
        }
        let m = Self { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self, MatrixError> {
        Self::from_vec(rows, cols, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn check_finite(&self) -> Result<(), MatrixError> {
        for (k, z) in self.data.iter().enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(MatrixError::NonFinite(k / self.cols, k % self.cols));
            }
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// `max |M[i][j] - conj(M[j][i])|`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= HERMITIAN_TOL * self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn matmul(&self, rhs: &CMatrix) -> Result<CMatrix, MatrixError> {
        if self.cols != rhs.rows {
            return Err(MatrixError::Shape {
                op: "matmul",
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>, MatrixError> {
        if v.len() != self.cols {
            return Err(MatrixError::Shape {
                op: "apply",
                lhs: self.shape(),
                rhs: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Row-major vectorization.
    pub fn vectorize(&self) -> Vec<Complex64> {
        self.data.clone()
    }

    /// Inverse of [`CMatrix::vectorize`] for a square `d x d` operator.
    pub fn unvectorize(v: &[Complex64]) -> Result<CMatrix, MatrixError> {
        let d = exact_sqrt(v.len()).ok_or(MatrixError::NotVectorized { rows: v.len() })?;
        CMatrix::from_vec(d, d, v.to_vec())
    }

    fn zip_with(&self, rhs: &CMatrix, op: &'static str, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<CMatrix, MatrixError> {
        if self.shape() != rhs.shape() {
            return Err(MatrixError::Shape {
                op,
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn try_add(&self, rhs: &CMatrix) -> Result<CMatrix, MatrixError> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn try_sub(&self, rhs: &CMatrix) -> Result<CMatrix, MatrixError> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    /// `self += s * rhs`, shapes must agree.
    pub fn add_scaled(&mut self, s: Complex64, rhs: &CMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "add_scaled shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += s * b;
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

pub(crate) fn exact_sqrt(n: usize) -> Option<usize> {
    let d = (n as f64).sqrt().round() as usize;
    (d * d == n).then_some(d)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, each with its largest component real and positive.
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    /// `V Λ V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let v = &self.eigenvectors;
        let lambda = CMatrix::from_diagonal(&self.eigenvalues);
        &(v * &lambda) * &v.adjoint()
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// The rotation order is fixed, so identical input bits give identical output bits.
pub fn eigh(m: &CMatrix) -> Result<EigenDecomposition, MatrixError> {
    if !m.is_square() {
        return Err(MatrixError::NotSquare(m.rows, m.cols));
    }
    let n = m.rows;
    if n > MAX_DIMENSION {
        return Err(MatrixError::TooLarge {
            dim: n,
            max: MAX_DIMENSION,
        });
    }
    m.check_finite()?;
    let scale = m.max_abs();
    let deviation = m.hermitian_deviation();
    let allowed = HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE);
    if deviation > allowed {
        return Err(MatrixError::NotHermitian { deviation, allowed });
    }

    let mut a = m.hermitian_part();
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
    }
    let mut v = CMatrix::identity(n);

    let off_norm = |a: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let frob = a.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = 1e-15 * frob.max(f64::MIN_POSITIVE);

    let mut converged = n < 2;
    for _sweep in 0..100 {
        if off_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE || mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J restricted to (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
                let j_pp = Complex64::new(c, 0.0);
                let j_pq = Complex64::new(s, 0.0);
                let j_qp = -phase.conj() * s;
                let j_qq = phase.conj() * c;
                // A <- A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * j_pp + akq * j_qp;
                    a[(k, q)] = akp * j_pq + akq * j_qq;
                }
                // A <- J† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
                    a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                // V <- V J
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * j_pp + vkq * j_qp;
                    v[(k, q)] = vkp * j_pq + vkq * j_qq;
                }
            }
        }
    }
    if !converged {
        let off = off_norm(&a);
        if off > 1e-12 * frob.max(f64::MIN_POSITIVE) {
            return Err(MatrixError::NoConvergence(off));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        // phase convention: largest-magnitude component real positive (first one on ties)
        let max_mag = (0..n).map(|k| v[(k, src)].norm()).fold(0.0, f64::max);
        let pivot = (0..n)
            .find(|&k| v[(k, src)].norm() >= max_mag * (1.0 - 1e-12))
            .unwrap_or(0);
        let z = v[(pivot, src)];
        let rot = if z.norm() > 0.0 { z.conj() / z.norm() } else { ONE };
        for k in 0..n {
            vectors[(k, col)] = v[(k, src)] * rot;
        }
        vectors[(pivot, col)] = Complex64::new(vectors[(pivot, col)].norm(), 0.0);
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// Solution of `A x = 0` subject to one linear normalization `n · x = 1`.
///
/// The normalization row is appended to `A` and the stacked system is solved
/// in the least-squares sense by Householder QR with column pivoting. The
/// pivoted diagonal of `R` doubles as the rank check: a kernel of dimension
/// two or more leaves a vanishing pivot.
pub fn solve_kernel_normalized(a: &CMatrix, normalization: &[Complex64]) -> Result<Vec<Complex64>, MatrixError> {
    let (m, n) = a.shape();
    if normalization.len() != n {
        return Err(MatrixError::Shape {
            op: "solve_kernel_normalized",
            lhs: a.shape(),
            rhs: (1, normalization.len()),
        });
    }
    a.check_finite()?;
    let scale = a.max_abs();
    let norm_scale = normalization.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 || norm_scale == 0.0 {
        return Err(MatrixError::DegenerateKernel {
            ratio: 0.0,
            threshold: KERNEL_RANK_TOL,
        });
    }
    // normalization row scaled to the magnitude of the generator
    let w = scale / norm_scale;
    let qr = PivotedQr::factor(a, normalization, w)?;
    let mut rhs = vec![ZERO; m + 1];
    rhs[m] = Complex64::new(w, 0.0);
    let mut x = qr.solve(&rhs);

    let defect = |x: &[Complex64]| -> Vec<Complex64> {
        let mut r: Vec<Complex64> = (0..m).map(|i| (0..n).map(|j| a[(i, j)] * x[j]).sum()).collect();
        let t: Complex64 = normalization.iter().zip(x).map(|(u, v)| u * v).sum();
        r.push((t - ONE) * w);
        r
    };
    // the trace is renormalized by callers, so only the generator rows count
    let size = |r: &[Complex64]| r[..m].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut r = defect(&x);
    for _ in 0..REFINEMENT_SWEEPS {
        let before = size(&r);
        if before == 0.0 {
            break;
        }
        let neg: Vec<Complex64> = r.iter().map(|z| -z).collect();
        let dx = qr.solve(&neg);
        let trial: Vec<Complex64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let r_trial = defect(&trial);
        if size(&r_trial) >= before {
            break;
        }
        x = trial;
        r = r_trial;
    }
    Ok(x)
}

/// Column-pivoted Householder QR of `[A; w n]`, reusable across right-hand sides.
struct PivotedQr {
    rows: usize,
    n: usize,
    qr: Vec<Complex64>,
    perm: Vec<usize>,
    reflectors: Vec<(usize, Vec<Complex64>, f64)>,
}

impl PivotedQr {
    fn factor(a: &CMatrix, normalization: &[Complex64], w: f64) -> Result<Self, MatrixError> {
        let (m, n) = a.shape();
        let rows = m + 1;
        let mut qr: Vec<Complex64> = Vec::with_capacity(rows * n);
        qr.extend_from_slice(a.as_slice());
        qr.extend(normalization.iter().map(|z| z * w));

        let idx = |i: usize, j: usize| i * n + j;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut col_norms: Vec<f64> = (0..n)
            .map(|j| (0..rows).map(|i| qr[idx(i, j)].norm_sqr()).sum::<f64>())
            .collect();
        let steps = n.min(rows);
        let mut diag = Vec::with_capacity(steps);
        let mut reflectors = Vec::with_capacity(steps);

        for k in 0..steps {
            // pivot: column with the largest remaining norm
            let (best, _) = col_norms[k..]
                .iter()
                .enumerate()
                .fold((k, -1.0), |acc, (off, &v)| if v > acc.1 { (k + off, v) } else { acc });
            if best != k {
                for i in 0..rows {
                    qr.swap(idx(i, k), idx(i, best));
                }
                col_norms.swap(k, best);
                perm.swap(k, best);
            }
            let alpha_norm = (k..rows).map(|i| qr[idx(i, k)].norm_sqr()).sum::<f64>().sqrt();
            if alpha_norm == 0.0 {
                diag.push(0.0);
                continue;
            }
            let x0 = qr[idx(k, k)];
            let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
            let alpha = -phase * alpha_norm;
            // v = x - alpha e1
            let mut v: Vec<Complex64> = (k..rows).map(|i| qr[idx(i, k)]).collect();
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if vnorm2 > 0.0 {
                for j in k..n {
                    let dot: Complex64 = v.iter().enumerate().map(|(t, vt)| vt.conj() * qr[idx(k + t, j)]).sum();
                    let f = dot * (2.0 / vnorm2);
                    for (t, vt) in v.iter().enumerate() {
                        qr[idx(k + t, j)] -= vt * f;
                    }
                }
                reflectors.push((k, v, vnorm2));
            }
            diag.push(qr[idx(k, k)].norm());
            for j in (k + 1)..n {
                col_norms[j] = (k + 1..rows).map(|i| qr[idx(i, j)].norm_sqr()).sum();
            }
        }

        let lead = diag.first().copied().unwrap_or(0.0);
        let smallest = diag.iter().copied().fold(f64::INFINITY, f64::min);
        let ratio = if lead > 0.0 { smallest / lead } else { 0.0 };
        if steps < n || ratio < KERNEL_RANK_TOL {
            return Err(MatrixError::DegenerateKernel {
                ratio,
                threshold: KERNEL_RANK_TOL,
            });
        }
        Ok(Self {
            rows,
            n,
            qr,
            perm,
            reflectors,
        })
    }

    /// Least-squares solution of `[A; w n] x = rhs`.
    fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        debug_assert_eq!(rhs.len(), self.rows);
        let mut b = rhs.to_vec();
        for (k, v, vnorm2) in &self.reflectors {
            let dot: Complex64 = v.iter().enumerate().map(|(t, vt)| vt.conj() * b[k + t]).sum();
            let f = dot * (2.0 / vnorm2);
            for (t, vt) in v.iter().enumerate() {
                b[k + t] -= vt * f;
            }
        }
        // back substitution on the leading n x n block of R
        let mut y = vec![ZERO; n];
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in (i + 1)..n {
                acc -= self.qr[i * n + j] * y[j];
            }
            y[i] = acc / self.qr[i * n + i];
        }
        let mut x = vec![ZERO; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }
}

/// Unit-trace kernel of a vectorized Liouvillian `l` of size `d² x d²`.
///
/// The result is Hermitian by construction (`(ρ + ρ†)/2`, renormalized).
pub fn solve_nullspace_with_trace(l: &CMatrix) -> Result<CMatrix, MatrixError> {
    if !l.is_square() {
        return Err(MatrixError::NotSquare(l.rows, l.cols));
    }
    let d = exact_sqrt(l.rows).ok_or(MatrixError::NotVectorized { rows: l.rows })?;
    if d > MAX_DIMENSION {
        return Err(MatrixError::TooLarge {
            dim: d,
            max: MAX_DIMENSION,
        });
    }
    let mut trace_row = vec![ZERO; d * d];
    for i in 0..d {
        trace_row[i * d + i] = ONE;
    }
    let x = solve_kernel_normalized(l, &trace_row)?;
    let rho = CMatrix::unvectorize(&x)?.hermitian_part();
    let tr = rho.trace().re;
    let rho = rho.scale_real(1.0 / tr);

    let residual = l.apply(&rho.vectorize())?.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let allowed = KERNEL_RESIDUAL_TOL * l.max_abs();
    if residual > allowed {
        return Err(MatrixError::Residual { residual, allowed });
    }
    Ok(rho)
}

/// Single-qubit Pauli matrices and ladder operators (|0⟩ = excited, |1⟩ = ground).
pub mod pauli {
    use super::CMatrix;
    use num_complex::Complex64;

    fn m(v: [[(f64, f64); 2]; 2]) -> CMatrix {
        CMatrix::from_fn(2, 2, |i, j| Complex64::new(v[i][j].0, v[i][j].1))
    }

    pub fn x() -> CMatrix {
        m([[(0.0, 0.0), (1.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)]])
    }

    pub fn y() -> CMatrix {
        m([[(0.0, 0.0), (0.0, -1.0)], [(0.0, 1.0), (0.0, 0.0)]])
    }

    pub fn z() -> CMatrix {
        m([[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (-1.0, 0.0)]])
    }

    /// Lowering operator `|g⟩⟨e|`.
    pub fn lower() -> CMatrix {
        m([[(0.0, 0.0), (0.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)]])
    }

    pub fn raise() -> CMatrix {
        lower().adjoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn eigh_identity_keeps_identity() {
        let e = eigh(&CMatrix::identity(4)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0; 4]);
        assert_eq!(e.eigenvectors, CMatrix::identity(4));
    }

    #[test]
    fn eigh_diagonal_sorted() {
        let e = eigh(&CMatrix::from_diagonal(&[0.5, -0.5])).unwrap();
        assert_eq!(e.eigenvalues, vec![-0.5, 0.5]);
    }

    #[test]
    fn eigh_pauli_x() {
        let e = eigh(&pauli::x()).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.eigenvalues[1], 1.0, epsilon = 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = &e.eigenvectors;
        assert_abs_diff_eq!((v[(0, 0)] - c(h)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((v[(1, 0)] - c(-h)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((v[(0, 1)] - c(h)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((v[(1, 1)] - c(h)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        match eigh(&m) {
            Err(MatrixError::NotHermitian { deviation, .. }) => assert_abs_diff_eq!(deviation, 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eigh_rejects_oversized() {
        let m = CMatrix::identity(MAX_DIMENSION + 1);
        assert!(matches!(eigh(&m), Err(MatrixError::TooLarge { .. })));
    }

    #[test]
    fn kron_identities_and_blocks() {
        let i2 = CMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4));
        let zx = kron(&pauli::z(), &pauli::x());
        let x = pauli::x();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(zx[(i, j)], x[(i, j)]);
                assert_eq!(zx[(i + 2, j + 2)], -x[(i, j)]);
                assert_eq!(zx[(i, j + 2)], ZERO);
                assert_eq!(zx[(i + 2, j)], ZERO);
            }
        }
    }

    #[test]
    fn kron_trace_multiplies() {
        let a = CMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = CMatrix::from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, -2.0, 0.0, 5.0, 0.0, 7.5]).unwrap();
        assert_abs_diff_eq!((kron(&a, &b).trace() - a.trace() * b.trace()).norm(), 0.0, epsilon = 1e-14);
    }

    /// Generator of amplitude damping at rate `down` plus pumping at `up`.
    fn qubit_generator(down: f64, up: f64) -> CMatrix {
        let d = 2;
        let mut l = CMatrix::zeros(4, 4);
        for (op, rate) in [(pauli::lower(), down), (pauli::raise(), up)] {
            let ad_a = &op.adjoint() * &op;
            let term = &(&kron(&op, &op.conj()) - &kron(&ad_a, &CMatrix::identity(d)).scale_real(0.5))
                - &kron(&CMatrix::identity(d), &ad_a.transpose()).scale_real(0.5);
            l.add_scaled(c(rate), &term);
        }
        l
    }

    #[test]
    fn nullspace_single_qubit_detailed_balance() {
        let (omega, temp) = (1.0f64, 0.7f64);
        let nbar = 1.0 / (omega / temp).exp_m1();
        let l = qubit_generator(1e-3 * (1.0 + nbar), 1e-3 * nbar);
        let rho = solve_nullspace_with_trace(&l).unwrap();
        let ratio = rho[(0, 0)].re / rho[(1, 1)].re;
        assert_abs_diff_eq!(ratio, (-omega / temp).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(rho[(0, 1)].norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn nullspace_zero_generator_is_degenerate() {
        let l = CMatrix::zeros(4, 4);
        assert!(matches!(solve_nullspace_with_trace(&l), Err(MatrixError::DegenerateKernel { .. })));
    }

    #[test]
    fn nullspace_detects_two_dimensional_kernel() {
        // pure dephasing: every diagonal state is stationary
        let z = pauli::z();
        let term = &kron(&z, &z.conj()) - &CMatrix::identity(4);
        assert!(matches!(solve_nullspace_with_trace(&term), Err(MatrixError::DegenerateKernel { .. })));
    }

    #[test]
    fn nullspace_rejects_non_square_count() {
        assert!(matches!(
            solve_nullspace_with_trace(&CMatrix::identity(5)),
            Err(MatrixError::NotVectorized { rows: 5 })
        ));
    }

    #[test]
    fn unvectorize_roundtrip() {
        let m = CMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(CMatrix::unvectorize(&m.vectorize()).unwrap(), m);
    }

    #[test]
    fn vectorization_identity_for_sandwich() {
        // vec(A X B) = (A ⊗ Bᵀ) vec(X)
        let a = CMatrix::from_fn(2, 2, |i, j| Complex64::new(i as f64 + 1.0, j as f64 - 0.5));
        let x = CMatrix::from_fn(2, 2, |i, j| Complex64::new((i * 2 + j) as f64, 1.0));
        let b = CMatrix::from_fn(2, 2, |i, j| Complex64::new(0.3 * j as f64, i as f64));
        let lhs = (&(&a * &x) * &b).vectorize();
        let rhs = kron(&a, &b.transpose()).apply(&x.vectorize()).unwrap();
        for (l, r) in lhs.iter().zip(&rhs) {
            assert_abs_diff_eq!((l - r).norm(), 0.0, epsilon = 1e-13);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn complex() -> impl Strategy<Value = Complex64> {
            (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
        }

        fn matrix(n: usize) -> impl Strategy<Value = CMatrix> {
            prop::collection::vec(complex(), n * n).prop_map(move |v| CMatrix::from_vec(n, n, v).unwrap())
        }

        fn hermitian(n: usize) -> impl Strategy<Value = CMatrix> {
            matrix(n).prop_map(|m| m.hermitian_part())
        }

        /// Unitary from the eigenvectors of a random Hermitian matrix.
        fn unitary(n: usize) -> impl Strategy<Value = CMatrix> {
            hermitian(n).prop_map(|h| eigh(&h).unwrap().eigenvectors)
        }

        proptest! {
            #[test]
            fn eigh_sum_is_trace(h in (2usize..7).prop_flat_map(hermitian)) {
                let e = eigh(&h).unwrap();
                let sum: f64 = e.eigenvalues.iter().sum();
                let tr = h.trace().re;
                prop_assert!((sum - tr).abs() <= 1e-10 * tr.abs().max(1.0));
            }

            #[test]
            fn eigh_unitary_invariance((h, u) in (2usize..7).prop_flat_map(|n| (hermitian(n), unitary(n)))) {
                let conj = &(&u * &h) * &u.adjoint();
                let a = eigh(&h).unwrap().eigenvalues;
                let b = eigh(&conj.hermitian_part()).unwrap().eigenvalues;
                for (x, y) in a.iter().zip(&b) {
                    prop_assert!((x - y).abs() <= 1e-10);
                }
            }

            #[test]
            fn eigh_reconstructs(h in (2usize..7).prop_flat_map(hermitian)) {
                prop_assert!((&eigh(&h).unwrap().reconstruct() - &h).max_abs() <= 1e-12);
            }

            #[test]
            fn kron_mixed_product(a in matrix(2), b in matrix(2), c in matrix(2), d in matrix(2)) {
                let lhs = &kron(&a, &b) * &kron(&c, &d);
                let rhs = kron(&(&a * &c), &(&b * &d));
                prop_assert!((&lhs - &rhs).max_abs() <= 1e-12);
            }

            #[test]
            fn nullspace_is_a_state(down in 1e-4..1.0f64, up in 0.0..1.0f64, mix in 0.0..1.0f64) {
                // damping plus σ_x dephasing
                let mut l = qubit_generator(down, up);
                let x = pauli::x();
                let dephase = &kron(&x, &x.conj()) - &CMatrix::identity(4);
                l.add_scaled(c(mix), &dephase);
                let rho = solve_nullspace_with_trace(&l).unwrap();
                prop_assert!((rho.trace().re - 1.0).abs() <= 1e-12);
                prop_assert!(eigh(&rho.hermitian_part()).unwrap().eigenvalues[0] >= -1e-10);
            }
        }
    }
}
