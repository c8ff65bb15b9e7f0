//! Dense operator arithmetic, standard operator bases, Hilbert–Schmidt
//! geometry and static structure constants.
//!
//! Vectorization is column-stacking throughout the crate: entry `(r, c)` of a
//! `D×D` operator lands at index `c·D + r`, so that
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use faer::linalg::solvers::{FullPivLu, Solve};
use faer::{Col, Mat, MatRef};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Relative span tolerance used by [`OperatorBasis::expand`].
pub const SPAN_TOL: f64 = 1e-10;

/// A dense complex `D×D` matrix: observable, state or jump operator.
#[derive(Clone, PartialEq)]
pub struct OperatorMatrix {
    mat: Mat<C64>,
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "OperatorMatrix({}x{}) [", self.dim(), self.dim())?;
        for r in 0..self.dim() {
            write!(f, "  ")?;
            for c in 0..self.dim() {
                let z = self.mat[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: Mat::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: Mat::identity(dim, dim),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            mat: Mat::from_fn(dim, dim, f),
        }
    }

    /// Wraps a square faer matrix.
    pub fn from_mat(mat: Mat<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::Dimension {
                expected: mat.nrows(),
                found: mat.ncols(),
            });
        }
        Ok(Self { mat })
    }

    /// Builds a matrix from rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let d = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::Dimension {
                expected: d,
                found: bad.len(),
            });
        }
        Ok(Self::from_fn(d, |r, c| rows[r][c]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        Self::from_fn(entries.len(), |r, c| if r == c { entries[r] } else { ZERO })
    }

    /// `|r⟩⟨s|`
    pub fn ket_bra(dim: usize, r: usize, s: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == r && j == s { ONE } else { ZERO })
    }

    /// Inverse of [`OperatorMatrix::to_vec`].
    pub fn from_vec(dim: usize, v: &[C64]) -> Result<Self> {
        if v.len() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                found: v.len(),
            });
        }
        Ok(Self::from_fn(dim, |r, c| v[c * dim + r]))
    }

    pub(crate) fn from_col(dim: usize, v: faer::ColRef<'_, C64>) -> Self {
        Self::from_fn(dim, |r, c| v[c * dim + r])
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.mat[(r, c)]
    }

    pub fn set(&mut self, r: usize, c: usize, value: C64) {
        self.mat[(r, c)] = value;
    }

    pub fn as_mat(&self) -> MatRef<'_, C64> {
        self.mat.as_ref()
    }

    /// Column-stacked vectorization.
    pub fn to_vec(&self) -> Vec<C64> {
        let d = self.dim();
        let mut v = Vec::with_capacity(d * d);
        for c in 0..d {
            for r in 0..d {
                v.push(self.mat[(r, c)]);
            }
        }
        v
    }

    pub(crate) fn to_col(&self) -> Col<C64> {
        let d = self.dim();
        Col::from_fn(d * d, |k| self.mat[(k % d, k / d)])
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint().to_owned(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            mat: self.mat.transpose().to_owned(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            mat: self.mat.conjugate().to_owned(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|k| self.mat[(k, k)]).sum()
    }

    /// Frobenius (Hilbert–Schmidt) norm.
    pub fn norm(&self) -> f64 {
        self.mat.norm_l2()
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.norm_max()
    }

    pub fn scale(&self, k: C64) -> Self {
        let d = self.dim();
        Self::from_fn(d, |r, c| self.mat[(r, c)] * k)
    }

    pub fn scale_re(&self, k: f64) -> Self {
        self.scale(C64::new(k, 0.0))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = self.norm().max(f64::MIN_POSITIVE);
        (self - &self.adjoint()).max_abs() <= tol * scale
    }

    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_re(0.5)
    }

    /// `(X − X†) / 2i`, so that `X = re + i·im` with both parts Hermitian.
    pub fn imaginary_part(&self) -> Self {
        (self - &self.adjoint()).scale(C64::new(0.0, -0.5))
    }

    /// Copy of the top-left `k×k` block.
    pub fn top_left(&self, k: usize) -> Self {
        Self::from_fn(k, |r, c| self.mat[(r, c)])
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim(), other.dim());
        Self::from_fn(da * db, |r, c| {
            self.mat[(r / db, c / db)] * other.mat[(r % db, c % db)]
        })
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let h = self.hermitian_part();
        h.mat
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::Numerical(format!("{e:?}")))
    }
}

impl<'a> Add<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl<'a> Sub<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl<'a> Mul<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            mat: &self.mat * &rhs.mat,
        }
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        self.scale_re(-1.0)
    }
}

/// Hilbert–Schmidt inner product `Tr[A†B]`.
pub fn hs_inner(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let d = a.dim();
    let mut acc = ZERO;
    for c in 0..d {
        for r in 0..d {
            acc += a.mat[(r, c)].conj() * b.mat[(r, c)];
        }
    }
    Ok(acc)
}

/// Pauli matrices with `σ0 = 𝟙` and `σ3 = diag(1, −1)`.
pub fn pauli(alpha: usize) -> OperatorMatrix {
    let m = match alpha {
        0 => [[ONE, ZERO], [ZERO, ONE]],
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        3 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => panic!("Pauli index {alpha} out of range 0..=3"),
    };
    OperatorMatrix::from_fn(2, |r, c| m[r][c])
}

/// `σ+ = (σ1 + iσ2)/2 = |0⟩⟨1|`.
pub fn sigma_plus() -> OperatorMatrix {
    OperatorMatrix::ket_bra(2, 0, 1)
}

/// `σ− = (σ1 − iσ2)/2 = |1⟩⟨0|`.
pub fn sigma_minus() -> OperatorMatrix {
    OperatorMatrix::ket_bra(2, 1, 0)
}

/// `P± = (σ0 ± σ3)/2`.
pub fn qubit_projector(upper: bool) -> OperatorMatrix {
    if upper {
        OperatorMatrix::ket_bra(2, 0, 0)
    } else {
        OperatorMatrix::ket_bra(2, 1, 1)
    }
}

/// Truncated annihilation operator with `a[n, n+1] = √(n+1)`.
pub fn annihilation(dim: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(dim, |r, c| {
        if c == r + 1 {
            C64::new((c as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    })
}

pub fn creation(dim: usize) -> OperatorMatrix {
    annihilation(dim).adjoint()
}

/// `N = diag(0, 1, …, D−1)`.
pub fn number(dim: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(dim, |r, c| {
        if r == c {
            C64::new(r as f64, 0.0)
        } else {
            ZERO
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Pauli,
    MatrixUnits,
    FockLadder,
}

impl BasisKind {
    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Pauli => "pauli",
            BasisKind::MatrixUnits => "matrix_units",
            BasisKind::FockLadder => "fock_ladder",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "pauli" => Some(BasisKind::Pauli),
            "matrix_units" => Some(BasisKind::MatrixUnits),
            "fock_ladder" => Some(BasisKind::FockLadder),
            _ => None,
        }
    }
}

/// An ordered, linearly independent family of operators `{A_j}`.
///
/// Elements are kept exactly as given (no normalization) so that structure
/// constants come out in the conventional Pauli / ladder normalization.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<OperatorMatrix>,
    labels: Vec<String>,
    /// Vectorized elements as columns, `D² × K`.
    columns: Mat<C64>,
    gram: Mat<C64>,
    gram_lu: FullPivLu<C64>,
}

impl OperatorBasis {
    pub fn new(elements: Vec<OperatorMatrix>, labels: Vec<String>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::Basis("empty basis".into()));
        };
        let dim = first.dim();
        if let Some(bad) = elements.iter().find(|e| e.dim() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                found: bad.dim(),
            });
        }
        if labels.len() != elements.len() {
            return Err(Error::Basis(format!(
                "{} labels for {} elements",
                labels.len(),
                elements.len()
            )));
        }
        if elements.len() > dim * dim {
            return Err(Error::Basis(format!(
                "{} elements exceed operator-space dimension {}",
                elements.len(),
                dim * dim
            )));
        }
        let k = elements.len();
        let columns = Mat::from_fn(dim * dim, k, |row, j| {
            elements[j].get(row % dim, row / dim)
        });
        let gram = columns.adjoint() * &columns;
        let sv = gram
            .singular_values()
            .map_err(|e| Error::Numerical(format!("{e:?}")))?;
        let (smax, smin) = (sv[0], sv[sv.len() - 1]);
        if !(smin > 1e-13 * smax) {
            return Err(Error::Basis(format!(
                "elements are linearly dependent (Gram condition {:.3e})",
                smax / smin
            )));
        }
        let gram_lu = gram.full_piv_lu();
        Ok(Self {
            dim,
            elements,
            labels,
            columns,
            gram,
            gram_lu,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.len() == self.dim * self.dim
    }

    pub fn elements(&self) -> &[OperatorMatrix] {
        &self.elements
    }

    pub fn element(&self, j: usize) -> &OperatorMatrix {
        &self.elements[j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn gram(&self) -> MatRef<'_, C64> {
        self.gram.as_ref()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Least-squares coordinates of `a` together with the residual norm.
    pub fn expand_lenient(&self, a: &OperatorMatrix) -> Result<(Vec<C64>, f64)> {
        if a.dim() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: a.dim(),
            });
        }
        let v = a.to_col();
        let rhs = self.columns.adjoint() * &v;
        let x = self.gram_lu.solve(&rhs);
        let resid = (&v - &self.columns * &x).norm_l2();
        Ok((x.iter().copied().collect(), resid))
    }

    /// Coordinates `v` with `a = Σ v_j A_j`; fails when `a` leaves the span.
    pub fn expand(&self, a: &OperatorMatrix) -> Result<Vec<C64>> {
        let (x, resid) = self.expand_lenient(a)?;
        if resid > SPAN_TOL * a.norm() {
            return Err(Error::NotInSpan {
                residual: resid,
                pair: None,
            });
        }
        Ok(x)
    }

    /// Coordinates of many vectorized operators at once (columns of `vecs`),
    /// without a span check; returns `(K × n coordinates, per-column residuals)`.
    pub(crate) fn expand_columns(&self, vecs: MatRef<'_, C64>) -> (Mat<C64>, Vec<f64>) {
        let rhs = self.columns.adjoint() * vecs;
        let x = self.gram_lu.solve(&rhs);
        let r = vecs - &self.columns * &x;
        let resid = (0..r.ncols()).map(|j| r.col(j).norm_l2()).collect();
        (x, resid)
    }

    pub fn reconstruct(&self, coeffs: &[C64]) -> Result<OperatorMatrix> {
        if coeffs.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: coeffs.len(),
            });
        }
        let mut out = OperatorMatrix::zeros(self.dim);
        for (c, e) in coeffs.iter().zip(&self.elements) {
            if *c != ZERO {
                out = &out + &e.scale(*c);
            }
        }
        Ok(out)
    }
}

/// Standard bases: Pauli `{σ0..σ3}`, row-major matrix units `{|r⟩⟨s|}`, or
/// the ladder family `{𝟙, a, a†, N}` on a truncated Fock space.
pub fn build_basis(kind: BasisKind, dim: usize) -> Result<OperatorBasis> {
    match kind {
        BasisKind::Pauli => {
            if dim != 2 {
                return Err(Error::Basis(format!("pauli basis requires dim 2, got {dim}")));
            }
            OperatorBasis::new(
                (0..4).map(pauli).collect(),
                (0..4).map(|a| format!("σ{a}")).collect(),
            )
        }
        BasisKind::MatrixUnits => {
            if dim == 0 {
                return Err(Error::Basis("matrix_units requires dim >= 1".into()));
            }
            let mut elements = Vec::with_capacity(dim * dim);
            let mut labels = Vec::with_capacity(dim * dim);
            for r in 0..dim {
                for s in 0..dim {
                    elements.push(OperatorMatrix::ket_bra(dim, r, s));
                    labels.push(format!("|{r}⟩⟨{s}|"));
                }
            }
            OperatorBasis::new(elements, labels)
        }
        BasisKind::FockLadder => {
            if dim < 2 {
                return Err(Error::Basis(format!("fock_ladder requires dim >= 2, got {dim}")));
            }
            OperatorBasis::new(
                vec![
                    OperatorMatrix::identity(dim),
                    annihilation(dim),
                    creation(dim),
                    number(dim),
                ],
                ["𝟙", "a", "a†", "N"].iter().map(|s| s.to_string()).collect(),
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureKind {
    Product,
    Commutator,
    Anticommutator,
}

impl StructureKind {
    pub fn name(self) -> &'static str {
        match self {
            StructureKind::Product => "product",
            StructureKind::Commutator => "commutator",
            StructureKind::Anticommutator => "anticommutator",
        }
    }

    /// Applies the bracket to two operators.
    pub fn apply(self, a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
        match self {
            StructureKind::Product => a * b,
            StructureKind::Commutator => a.commutator(b),
            StructureKind::Anticommutator => a.anticommutator(b),
        }
    }
}

/// Three-index tensor `T[i][j][k]` with `A_i ⋆ A_j = Σ_k T_ij^k A_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTensor {
    pub kind: StructureKind,
    size: usize,
    coeffs: Vec<C64>,
    /// Labels of the basis the tensor was built over.
    pub basis_labels: Vec<String>,
}

impl StructureTensor {
    pub fn zeros(kind: StructureKind, basis_labels: Vec<String>) -> Self {
        let size = basis_labels.len();
        Self {
            kind,
            size,
            coeffs: vec![ZERO; size * size * size],
            basis_labels,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.size + j) * self.size + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.coeffs[self.idx(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: C64) {
        let idx = self.idx(i, j, k);
        self.coeffs[idx] = value;
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn max_modulus(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `T_ij^k ∓ T_ji^k` built from a product tensor.
    pub fn bracket_from_product(alpha: &StructureTensor, kind: StructureKind) -> StructureTensor {
        let sign = match kind {
            StructureKind::Product => return alpha.clone(),
            StructureKind::Commutator => -1.0,
            StructureKind::Anticommutator => 1.0,
        };
        let n = alpha.size;
        let mut out = StructureTensor::zeros(kind, alpha.basis_labels.clone());
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out.set(i, j, k, alpha.get(i, j, k) + alpha.get(j, i, k) * sign);
                }
            }
        }
        out
    }

    /// Largest entrywise deviation from another tensor of the same shape.
    pub fn max_deviation(&self, other: &StructureTensor) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Expands every pairwise bracket `A_i ⋆ A_j` in the basis, failing with the
/// offending pair when a result leaves the span.
pub(crate) fn expand_pairs(
    basis: &OperatorBasis,
    kind: StructureKind,
    mut bracket: impl FnMut(usize, usize) -> Result<OperatorMatrix>,
) -> Result<StructureTensor> {
    let n = basis.len();
    let d = basis.dim();
    let mut tensor = StructureTensor::zeros(kind, basis.labels().to_vec());
    let mut vecs = Mat::<C64>::zeros(d * d, n * n);
    let mut norms = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let op = bracket(i, j).map_err(|e| e.with_pair(i, j))?;
            norms[i * n + j] = op.norm();
            for (row, z) in op.to_vec().into_iter().enumerate() {
                vecs[(row, i * n + j)] = z;
            }
        }
    }
    let (coords, resid) = basis.expand_columns(vecs.as_ref());
    for i in 0..n {
        for j in 0..n {
            let col = i * n + j;
            if resid[col] > SPAN_TOL * norms[col] {
                return Err(Error::NotInSpan {
                    residual: resid[col],
                    pair: Some((i, j)),
                });
            }
            for k in 0..n {
                tensor.set(i, j, k, coords[(k, col)]);
            }
        }
    }
    Ok(tensor)
}

/// Static structure constants of the ordinary product or its brackets.
///
/// When the basis is closed under multiplication the bracket tensors are
/// derived from `α` so that `c = α − αᵀ` and `s = α + αᵀ` hold exactly;
/// otherwise brackets are expanded directly (Lie-closed families such as
/// `{σ1, σ2, σ3}`).
pub fn structure_constants(basis: &OperatorBasis, kind: StructureKind) -> Result<StructureTensor> {
    let els = basis.elements();
    let alpha = expand_pairs(basis, StructureKind::Product, |i, j| Ok(&els[i] * &els[j]));
    match (kind, alpha) {
        (StructureKind::Product, alpha) => alpha,
        (_, Ok(alpha)) => Ok(StructureTensor::bracket_from_product(&alpha, kind)),
        (_, Err(Error::NotInSpan { .. })) => {
            expand_pairs(basis, kind, |i, j| Ok(kind.apply(&els[i], &els[j])))
        }
        (_, Err(e)) => Err(e),
    }
}

/// A density matrix, with its Bloch vector cached for qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    matrix: OperatorMatrix,
    bloch: Option<[f64; 3]>,
}

impl DensityState {
    /// Validates trace one, Hermiticity and positivity (to `1e-12`).
    pub fn new(matrix: OperatorMatrix) -> Result<Self> {
        let tr = matrix.trace();
        if (tr - ONE).norm() > 1e-12 {
            return Err(Error::Model(format!("density matrix has trace {tr}")));
        }
        if !matrix.is_hermitian(1e-12) {
            return Err(Error::Model("density matrix is not Hermitian".into()));
        }
        let min_eig = matrix.hermitian_eigenvalues()?[0];
        if min_eig < -1e-12 {
            return Err(Error::Model(format!(
                "density matrix has negative eigenvalue {min_eig:.3e}"
            )));
        }
        let bloch = (matrix.dim() == 2).then(|| {
            let x = |a: usize| hs_inner(&pauli(a), &matrix).unwrap().re;
            [x(1), x(2), x(3)]
        });
        Ok(Self { matrix, bloch })
    }

    /// `ρ = (σ0 + x·σ)/2`
    pub fn from_bloch(x: [f64; 3]) -> Result<Self> {
        let len = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if len > 1.0 + 1e-12 {
            return Err(Error::Model(format!("Bloch vector length {len} exceeds 1")));
        }
        let mut m = pauli(0);
        for (a, &xa) in x.iter().enumerate() {
            m = &m + &pauli(a + 1).scale_re(xa);
        }
        Self::new(m.scale_re(0.5))
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub fn bloch(&self) -> Option<[f64; 3]> {
        self.bloch
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `Tr[ρA]`
    pub fn expectation(&self, a: &OperatorMatrix) -> Result<C64> {
        if a.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: a.dim(),
            });
        }
        Ok((&self.matrix * a).trace())
    }
}
