//! Dense complex linear algebra on small matrices.
//!
//! Everything here operates on [`CMat`] (row-major dense complex matrix) and
//! [`CVec`]: tensor products, the row-major vec/unvec isomorphism, swap and
//! bipartite-reordering permutations, Hermitian eigendecomposition (cyclic
//! Jacobi), Schatten norms, and partial traces. All functions are pure;
//! values are freely shareable across threads.

use num_complex::Complex64 as C64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITICITY_RTOL: f64 = 1e-10;
/// Eigenvalues below this fraction of the largest are clamped to zero
/// before entering logs or square roots.
pub const SPECTRUM_CLAMP_RTOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    /// Build from nested rows; all rows must share a length.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::DimensionMismatch("empty matrix".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let nrows = rows.len();
        Ok(Self { rows: nrows, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in entries.iter().enumerate() {
            m.data[i * n + i] = C64::new(x, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: C64) -> Self {
        let data = self.data.iter().map(|a| a * s).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &CVec) -> CVec {
        assert_eq!(self.cols, v.dim(), "matrix-vector shape mismatch");
        let mut out = vec![ZERO; self.rows];
        for i in 0..self.rows {
            let mut acc = ZERO;
            for (a, b) in self.row(i).iter().zip(v.data.iter()) {
                acc += a * b;
            }
            out[i] = acc;
        }
        CVec { data: out }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        let data = self.data.iter().map(|a| a.conj()).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self.data[i * self.cols + i]).sum()
    }

    /// Frobenius norm squared == tr(M† M).
    pub fn fro_norm_sq(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.fro_norm_sq().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max_{i,j} |M[i][j] − conj(M[j][i])|, the raw Hermiticity residual.
    pub fn hermiticity_residual(&self) -> f64 {
        assert!(self.is_square());
        let mut r: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                r = r.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        r
    }

    pub fn is_hermitian(&self, rtol: f64) -> bool {
        self.is_square() && self.hermiticity_residual() <= rtol * (1.0 + self.max_abs())
    }

    /// (M + M†)/2.
    pub fn hermitized(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * 0.5
        })
    }

    /// Serialization form used by all file formats: rows of [re, im] pairs.
    pub fn to_reim_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|c| [c.re, c.im]).collect())
            .collect()
    }

    pub fn from_reim_rows(rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        let converted = rows
            .iter()
            .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
            .collect();
        Self::from_rows(converted)
    }
}

impl Serialize for CMat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_reim_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CMat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(deserializer)?;
        CMat::from_reim_rows(&rows).map_err(D::Error::custom)
    }
}

/// Dense complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVec {
    data: Vec<C64>,
}

impl CVec {
    pub fn new(data: Vec<C64>) -> Self {
        assert!(!data.is_empty(), "vector must be nonempty");
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![ZERO; dim])
    }

    /// Computational basis vector |index⟩.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut v = Self::zeros(dim);
        v.data[index] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize) -> C64 {
        self.data[i]
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero vector");
        Self { data: self.data.iter().map(|c| c / n).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self { data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { data: self.data.iter().map(|a| a * s).collect() }
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim());
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// |self⟩⟨other|.
    pub fn outer(&self, other: &Self) -> CMat {
        CMat::from_fn(self.dim(), other.dim(), |i, j| self.data[i] * other.data[j].conj())
    }
}

/// Kronecker product: block (i,j) of the result equals A[i][j] · B.
pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.rows * b.rows, a.cols * b.cols);
    let oc = out.cols;
    for ia in 0..a.rows {
        for ja in 0..a.cols {
            let x = a.get(ia, ja);
            if x == ZERO {
                continue;
            }
            for ib in 0..b.rows {
                let orow = (ia * b.rows + ib) * oc + ja * b.cols;
                for jb in 0..b.cols {
                    out.data[orow + jb] = x * b.get(ib, jb);
                }
            }
        }
    }
    out
}

pub fn tensor_vec(a: &CVec, b: &CVec) -> CVec {
    let mut data = Vec::with_capacity(a.dim() * b.dim());
    for x in a.data() {
        for y in b.data() {
            data.push(x * y);
        }
    }
    CVec::new(data)
}

/// Row-major stacking: vec(A)[i·cols + j] = A[i][j], so vec(|i⟩⟨j|) = |i⟩⊗|j⟩
/// and vec(Iₙ) = Σᵢ |ii⟩.
pub fn vec(a: &CMat) -> CVec {
    CVec::new(a.data.clone())
}

pub fn unvec(v: &CVec, rows: usize, cols: usize) -> Result<CMat> {
    if v.dim() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "unvec: vector of length {} cannot fill a {rows}x{cols} matrix",
            v.dim()
        )));
    }
    Ok(CMat { rows, cols, data: v.data.clone() })
}

/// Swap operator S(|μ⟩⊗|ν⟩) = |ν⟩⊗|μ⟩ for μ in dim `n`, ν in dim `m`.
/// Real permutation matrix; for n == m it is symmetric and involutive.
pub fn swap_operator(n: usize, m: usize) -> CMat {
    assert!(n >= 1 && m >= 1);
    let mut s = CMat::zeros(n * m, n * m);
    for mu in 0..n {
        for nu in 0..m {
            s.set(nu * n + mu, mu * m + nu, ONE);
        }
    }
    s
}

/// Permutation P with P·vec(A⊗B) = vec(A)⊗vec(B) for all A: mA→nA, B: mB→nB.
pub fn bipartite_vec_permutation(na: usize, nb: usize, ma: usize, mb: usize) -> CMat {
    assert!(na >= 1 && nb >= 1 && ma >= 1 && mb >= 1);
    let dim = na * nb * ma * mb;
    let mut p = CMat::zeros(dim, dim);
    for a in 0..na {
        for b in 0..nb {
            for al in 0..ma {
                for be in 0..mb {
                    // vec(A⊗B) index: row (a·nb+b), col (al·mb+be)
                    let src = (a * nb + b) * (ma * mb) + (al * mb + be);
                    // vec(A)⊗vec(B) index
                    let dst = (a * ma + al) * (nb * mb) + (b * mb + be);
                    p.set(dst, src, ONE);
                }
            }
        }
    }
    p
}

/// Result of a Hermitian eigendecomposition: M = V·diag(λ)·V†,
/// eigenvalues sorted descending, eigenvectors as columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi eigendecomposition for Hermitian matrices.
///
/// Rejects inputs whose Hermiticity residual exceeds
/// [`HERMITICITY_RTOL`]·(1+maxabs); symmetrizes before iterating. Ties in
/// the descending eigenvalue order keep first-encountered eigenvectors.
pub fn hermitian_eig(m: &CMat) -> Result<HermitianEig> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let scale = 1.0 + m.max_abs();
    let residual = m.hermiticity_residual();
    if residual > HERMITICITY_RTOL * scale {
        return Err(Error::NotHermitian { residual: residual / scale });
    }

    let n = m.rows;
    let mut a = m.hermitized();
    let mut v = CMat::identity(n);

    let fro = a.fro_norm();
    let stop = f64::EPSILON * fro.max(f64::MIN_POSITIVE);

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off_sq = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off_sq += 2.0 * a.get(i, j).norm_sqr();
            }
        }
        if off_sq.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());

    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok(HermitianEig { values, vectors })
}

/// Eigenvalues only (still runs the full decomposition; matrices are small).
pub fn hermitian_eigenvalues(m: &CMat) -> Result<Vec<f64>> {
    hermitian_eig(m).map(|e| e.values)
}

fn jacobi_rotate(a: &mut CMat, v: &mut CMat, p: usize, q: usize) {
    let beta = a.get(p, q);
    let babs = beta.norm();
    if babs < 1e-300 {
        a.set(p, q, ZERO);
        a.set(q, p, ZERO);
        return;
    }
    let alpha = a.get(p, p).re;
    let gamma = a.get(q, q).re;
    let phase = beta / babs;

    // Zero A[p][q]: t² − 2τt − 1 = 0 with τ = (γ−α)/(2|β|); smaller-|t| root.
    let tau = (gamma - alpha) / (2.0 * babs);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = a.rows();
    // A ← U†AU with U = [[c, −s·phase], [s·conj(phase), c]] on (p,q).
    for j in 0..n {
        if j == p || j == q {
            continue;
        }
        let apj = a.get(p, j);
        let aqj = a.get(q, j);
        let new_p = apj * c + aqj * (phase * s);
        let new_q = aqj * c - apj * (phase.conj() * s);
        a.set(p, j, new_p);
        a.set(q, j, new_q);
        a.set(j, p, new_p.conj());
        a.set(j, q, new_q.conj());
    }
    let app = c * c * alpha + 2.0 * c * s * babs + s * s * gamma;
    let aqq = s * s * alpha - 2.0 * c * s * babs + c * c * gamma;
    a.set(p, p, C64::new(app, 0.0));
    a.set(q, q, C64::new(aqq, 0.0));
    a.set(p, q, ZERO);
    a.set(q, p, ZERO);

    // V ← V·U.
    for i in 0..n {
        let vip = v.get(i, p);
        let viq = v.get(i, q);
        v.set(i, p, vip * c + viq * (phase.conj() * s));
        v.set(i, q, viq * c - vip * (phase * s));
    }
}

/// Clamp eigenvalues below `SPECTRUM_CLAMP_RTOL`·λ_max to exactly zero.
pub fn clamp_spectrum(values: &[f64]) -> Vec<f64> {
    let max = values.iter().cloned().fold(0.0, f64::max);
    let cut = SPECTRUM_CLAMP_RTOL * max;
    values.iter().map(|&l| if l < cut { 0.0 } else { l }).collect()
}

/// Schatten p-norm (Σ σᵢᵖ)^{1/p} over singular values, p ≥ 1.
pub fn schatten_norm(m: &CMat, p: f64) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::InvalidParameter(format!("Schatten norm needs p ≥ 1, got {p}")));
    }
    let gram = m.dagger().matmul(m);
    let evals = hermitian_eigenvalues(&gram)?;
    let sum: f64 = clamp_spectrum(&evals).iter().map(|l| l.sqrt().powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

/// Which tensor factor a partial trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of an operator on C^dimA ⊗ C^dimB.
pub fn partial_trace(m: &CMat, dim_a: usize, dim_b: usize, keep: Subsystem) -> Result<CMat> {
    let d = dim_a * dim_b;
    if m.rows != d || m.cols != d {
        return Err(Error::DimensionMismatch(format!(
            "partial trace: matrix is {}x{}, expected {d}x{d}",
            m.rows, m.cols
        )));
    }
    let out = match keep {
        Subsystem::A => CMat::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|b| m.get(i * dim_b + b, j * dim_b + b)).sum()
        }),
        Subsystem::B => CMat::from_fn(dim_b, dim_b, |a, b| {
            (0..dim_a).map(|i| m.get(i * dim_b + a, i * dim_b + b)).sum()
        }),
    };
    Ok(out)
}
