//! GKSL generators and their adjoints as `D²×D²` superoperator matrices,
//! propagation, spectral decomposition and stationary states.

use std::collections::BTreeMap;

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{Col, Mat, MatRef};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::operator::{DensityState, OperatorMatrix};

/// Eigenvector-matrix condition number above which a superoperator is
/// treated as non-diagonalizable.
pub const KAPPA_MAX: f64 = 1e8;

/// A jump operator with its non-negative rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    pub operator: OperatorMatrix,
    pub rate: f64,
}

impl Jump {
    pub fn new(operator: OperatorMatrix, rate: f64) -> Self {
        Self { operator, rate }
    }
}

/// `L[ρ] = −i[H, ρ] + Σ_k γ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})`
#[derive(Debug, Clone, PartialEq)]
pub struct GkslModel {
    dim: usize,
    hamiltonian: OperatorMatrix,
    jumps: Vec<Jump>,
    /// Named scalar parameters recorded for reporting (γ, n, m, βħΩ, …).
    pub params: BTreeMap<String, f64>,
}

impl GkslModel {
    pub fn new(hamiltonian: OperatorMatrix, jumps: Vec<Jump>) -> Result<Self> {
        let dim = hamiltonian.dim();
        if !hamiltonian.is_hermitian(1e-12) {
            return Err(Error::Model("Hamiltonian is not Hermitian".into()));
        }
        for (k, j) in jumps.iter().enumerate() {
            if j.operator.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: j.operator.dim(),
                });
            }
            if !j.rate.is_finite() || j.rate < 0.0 {
                return Err(Error::Model(format!("jump {k} has invalid rate {}", j.rate)));
            }
        }
        Ok(Self {
            dim,
            hamiltonian,
            jumps,
            params: BTreeMap::new(),
        })
    }

    /// Purely dissipative model (`H = 0`).
    pub fn dissipative(dim: usize, jumps: Vec<Jump>) -> Result<Self> {
        Self::new(OperatorMatrix::zeros(dim), jumps)
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// Largest jump rate; the natural time unit is its inverse.
    pub fn max_rate(&self) -> f64 {
        self.jumps.iter().map(|j| j.rate).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SuperRole {
    /// `L` (Schrödinger picture).
    Generator,
    /// `L♯` (Heisenberg picture).
    AdjointGenerator,
    /// `Λ_t = e^{tL}`.
    Propagator,
    /// `Λ♯_t = e^{tL♯}`.
    AdjointPropagator,
}

impl SuperRole {
    pub fn is_generator(self) -> bool {
        matches!(self, SuperRole::Generator | SuperRole::AdjointGenerator)
    }

    fn dual(self) -> Self {
        match self {
            SuperRole::Generator => SuperRole::AdjointGenerator,
            SuperRole::AdjointGenerator => SuperRole::Generator,
            SuperRole::Propagator => SuperRole::AdjointPropagator,
            SuperRole::AdjointPropagator => SuperRole::Propagator,
        }
    }
}

/// A linear map on `D×D` operators acting on column-stacked vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: Mat<C64>,
    role: SuperRole,
    /// Propagation time; `f64::INFINITY` marks an asymptotic map.
    time: Option<f64>,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: Mat<C64>, role: SuperRole, time: Option<f64>) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self {
            dim,
            matrix,
            role,
            time,
        })
    }

    pub fn identity(dim: usize, role: SuperRole) -> Self {
        Self {
            dim,
            matrix: Mat::identity(dim * dim, dim * dim),
            role,
            time: (!role.is_generator()).then_some(0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> MatRef<'_, C64> {
        self.matrix.as_ref()
    }

    pub fn role(&self) -> SuperRole {
        self.role
    }

    pub fn time(&self) -> Option<f64> {
        self.time
    }

    pub fn apply(&self, x: &OperatorMatrix) -> Result<OperatorMatrix> {
        if x.dim() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: x.dim(),
            });
        }
        let y = &self.matrix * &x.to_col();
        Ok(OperatorMatrix::from_col(self.dim, y.as_ref()))
    }

    /// Hilbert–Schmidt adjoint (conjugate-transposed matrix, dual role).
    pub fn hs_adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.adjoint().to_owned(),
            role: self.role.dual(),
            time: self.time,
        }
    }

    pub fn max_deviation(&self, other: &Superoperator) -> f64 {
        (&self.matrix - &other.matrix).norm_max()
    }

    /// Choi matrix `Σ_rs |r⟩⟨s| ⊗ Φ[|r⟩⟨s|]`.
    pub fn choi(&self) -> OperatorMatrix {
        let d = self.dim;
        let mut out = OperatorMatrix::zeros(d * d);
        for r in 0..d {
            for s in 0..d {
                // Φ[|r⟩⟨s|] is column s·D + r of the matrix.
                let col = self.matrix.col(s * d + r);
                for c in 0..d {
                    for rr in 0..d {
                        out.set(r * d + rr, s * d + c, col[c * d + rr]);
                    }
                }
            }
        }
        out
    }
}

fn kron_mat(a: &OperatorMatrix, b: &OperatorMatrix) -> Mat<C64> {
    let k = a.kron(b);
    k.as_mat().to_owned()
}

fn check_model(model: &GkslModel) -> Result<()> {
    for j in model.jumps() {
        if j.rate < 0.0 {
            return Err(Error::Model(format!("negative rate {}", j.rate)));
        }
    }
    Ok(())
}

/// Matrix of `L` in the column-stacking convention:
/// `−i(𝟙⊗H − Hᵀ⊗𝟙) + Σγ(conj(L)⊗L − ½𝟙⊗L†L − ½(L†L)ᵀ⊗𝟙)`.
pub fn build_generator(model: &GkslModel) -> Result<Superoperator> {
    check_model(model)?;
    let d = model.dim();
    let id = OperatorMatrix::identity(d);
    let h = model.hamiltonian();
    let mut m = kron_mat(&id, h) - kron_mat(&h.transpose(), &id);
    m = Mat::from_fn(d * d, d * d, |r, c| m[(r, c)] * C64::new(0.0, -1.0));
    for j in model.jumps() {
        let l = &j.operator;
        let ldl = &l.adjoint() * l;
        let term = kron_mat(&l.conj(), l)
            - (kron_mat(&id, &ldl) + kron_mat(&ldl.transpose(), &id)) * faer::Scale(C64::new(0.5, 0.0));
        m = m + term * faer::Scale(C64::new(j.rate, 0.0));
    }
    Superoperator::from_matrix(d, m, SuperRole::Generator, None)
}

/// Matrix of `L♯[A] = i[H, A] + Σγ(L†AL − ½{L†L, A})`.
pub fn adjoint_generator(model: &GkslModel) -> Result<Superoperator> {
    check_model(model)?;
    let d = model.dim();
    let id = OperatorMatrix::identity(d);
    let h = model.hamiltonian();
    let mut m = kron_mat(&id, h) - kron_mat(&h.transpose(), &id);
    m = Mat::from_fn(d * d, d * d, |r, c| m[(r, c)] * C64::new(0.0, 1.0));
    for j in model.jumps() {
        let l = &j.operator;
        let ldl = &l.adjoint() * l;
        let term = kron_mat(&l.transpose(), &l.adjoint())
            - (kron_mat(&id, &ldl) + kron_mat(&ldl.transpose(), &id)) * faer::Scale(C64::new(0.5, 0.0));
        m = m + term * faer::Scale(C64::new(j.rate, 0.0));
    }
    Superoperator::from_matrix(d, m, SuperRole::AdjointGenerator, None)
}

/// `e^{tG}` for a generator `G`, as a propagator superoperator.
pub fn propagator(generator: &Superoperator, t: f64) -> Result<Superoperator> {
    if !generator.role.is_generator() {
        return Err(Error::Model(format!(
            "propagation needs a generator, got {:?}",
            generator.role
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Time(t));
    }
    let role = match generator.role {
        SuperRole::Generator => SuperRole::Propagator,
        _ => SuperRole::AdjointPropagator,
    };
    if t == 0.0 {
        let mut id = Superoperator::identity(generator.dim, role);
        id.time = Some(0.0);
        return Ok(id);
    }
    let scaled = &generator.matrix * faer::Scale(C64::new(t, 0.0));
    Superoperator::from_matrix(generator.dim, expm(scaled.as_ref()), role, Some(t))
}

/// `e^{tG}[X]`
pub fn propagate(generator: &Superoperator, t: f64, x: &OperatorMatrix) -> Result<OperatorMatrix> {
    propagator(generator, t)?.apply(x)
}

/// Eigenvalues and biorthogonal right/left eigen-operators of a
/// diagonalizable superoperator.
///
/// Eigenvalues are sorted by descending real part, then ascending `|Im|`.
/// Near-degenerate eigenvalues (within `1e-9·max|λ|`) are merged into a
/// cluster sharing their mean value; the right modes of a cluster are
/// orthonormalized and the left modes are the rows of `V⁻¹`.
#[derive(Debug, Clone)]
pub struct SpectralData {
    dim: usize,
    eigenvalues: Vec<C64>,
    right: Mat<C64>,
    left: Mat<C64>,
    clusters: Vec<std::ops::Range<usize>>,
    condition: f64,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn clusters(&self) -> &[std::ops::Range<usize>] {
        &self.clusters
    }

    /// Eigenvector-matrix condition number.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Right eigen-operator `E_a`.
    pub fn right_mode(&self, a: usize) -> OperatorMatrix {
        OperatorMatrix::from_col(self.dim, self.right.col(a))
    }

    /// Dual operator `F_a` with `Tr[F_a† E_b] = δ_ab`.
    pub fn left_mode(&self, a: usize) -> OperatorMatrix {
        OperatorMatrix::from_col(self.dim, self.left.col(a))
    }

    pub(crate) fn right_mat(&self) -> MatRef<'_, C64> {
        self.right.as_ref()
    }

    pub(crate) fn left_mat(&self) -> MatRef<'_, C64> {
        self.left.as_ref()
    }

    /// Matrix of `Tr[F_a† E_b]`.
    pub fn biorthogonality(&self) -> Mat<C64> {
        self.left.adjoint() * &self.right
    }

    /// `Σ_a λ_a E_a ⟨F_a, ·⟩` as a matrix.
    pub fn reconstruct(&self) -> Mat<C64> {
        let n = self.len();
        let scaled = Mat::from_fn(n, n, |r, c| self.right[(r, c)] * self.eigenvalues[c]);
        scaled * self.left.adjoint()
    }

    /// Coordinates `⟨F_a, X⟩` of an operator in the eigenbasis.
    pub fn coordinates(&self, x: &OperatorMatrix) -> Vec<C64> {
        let c = self.left.adjoint() * &x.to_col();
        c.iter().copied().collect()
    }

    /// Spectral evaluation of `e^{t·S}[X]`; valid for any real `t`.
    pub fn evolve(&self, t: f64, x: &OperatorMatrix) -> OperatorMatrix {
        let coords = self.coordinates(x);
        let weighted = Col::from_fn(self.len(), |a| coords[a] * (self.eigenvalues[a] * t).exp());
        OperatorMatrix::from_col(self.dim, (&self.right * &weighted).as_ref())
    }

    /// Projector `Σ_{a∈cluster} E_a ⟨F_a, ·⟩` applied to `X`.
    pub fn project_cluster(&self, cluster: usize, x: &OperatorMatrix) -> OperatorMatrix {
        let range = self.clusters[cluster].clone();
        let v = x.to_col();
        let w = self.left.subcols(range.start, range.len());
        let e = self.right.subcols(range.start, range.len());
        let y = e * (w.adjoint() * &v);
        OperatorMatrix::from_col(self.dim, y.as_ref())
    }

    /// Indices of eigenvalues with `|λ| ≤ tol`.
    pub fn kernel_indices(&self, tol: f64) -> Vec<usize> {
        (0..self.len()).filter(|&a| self.eigenvalues[a].norm() <= tol).collect()
    }
}

fn singular_values(m: MatRef<'_, C64>) -> Result<Vec<f64>> {
    m.singular_values().map_err(|e| Error::Numerical(format!("{e:?}")))
}

/// Condition number `σ_max / σ_min` of a square matrix.
pub(crate) fn condition_number(m: MatRef<'_, C64>) -> Result<f64> {
    let sv = singular_values(m)?;
    let (smax, smin) = (sv[0], sv[sv.len() - 1]);
    Ok(if smin > 0.0 { smax / smin } else { f64::INFINITY })
}

fn cluster_eigenvalues(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if (values[a] - values[b]).norm() <= tol {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for a in 0..n {
        let r = find(&mut parent, a);
        groups.entry(r).or_default().push(a);
    }
    groups.into_values().collect()
}

pub fn spectral_decompose(superop: &Superoperator) -> Result<SpectralData> {
    let n = superop.matrix.nrows();
    let evd = superop
        .matrix
        .eigen()
        .map_err(|e| Error::Numerical(format!("{e:?}")))?;
    let raw_vals: Vec<C64> = evd.S().column_vector().iter().copied().collect();
    let raw_vecs = evd.U();

    let scale = raw_vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = 1e-9 * scale;
    let groups = cluster_eigenvalues(&raw_vals, tol);

    // Order clusters: descending Re (ties within tol), then ascending |Im|, then Im.
    let mut reps: Vec<(C64, Vec<usize>)> = groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().map(|&a| raw_vals[a]).sum::<C64>() / g.len() as f64;
            (mean, g)
        })
        .collect();
    reps.sort_by(|a, b| b.0.re.total_cmp(&a.0.re));
    let mut ordered: Vec<(C64, Vec<usize>)> = Vec::with_capacity(reps.len());
    let mut start = 0;
    while start < reps.len() {
        let head = reps[start].0.re;
        let mut end = start + 1;
        while end < reps.len() && (head - reps[end].0.re).abs() <= tol {
            end += 1;
        }
        let mut tie: Vec<(C64, Vec<usize>)> = reps[start..end].to_vec();
        tie.sort_by(|a, b| {
            a.0.im
                .abs()
                .total_cmp(&b.0.im.abs())
                .then(a.0.im.total_cmp(&b.0.im))
        });
        ordered.extend(tie);
        start = end;
    }

    let mut eigenvalues = Vec::with_capacity(n);
    let mut right = Mat::<C64>::zeros(n, n);
    let mut clusters = Vec::with_capacity(ordered.len());
    let mut col = 0;
    for (mean, members) in &ordered {
        let block = Mat::from_fn(n, members.len(), |r, c| raw_vecs[(r, members[c])]);
        let q = if members.len() == 1 {
            let norm = block.col(0).norm_l2();
            Mat::from_fn(n, 1, |r, _| block[(r, 0)] / norm)
        } else {
            block.qr().compute_thin_Q()
        };
        let begin = col;
        for c in 0..members.len() {
            for r in 0..n {
                right[(r, col)] = q[(r, c)];
            }
            eigenvalues.push(*mean);
            col += 1;
        }
        clusters.push(begin..col);
    }

    let condition = condition_number(right.as_ref())?;
    if !(condition <= KAPPA_MAX) {
        return Err(Error::NonDiagonalizable { condition });
    }
    // F = V^{-†}, so that F†V = 𝟙.
    let left = right.adjoint().partial_piv_lu().inverse();
    Ok(SpectralData {
        dim: superop.dim,
        eigenvalues,
        right,
        left,
        clusters,
        condition,
    })
}

/// Null spaces of `M` and `M†` from one SVD, with relative threshold `rel_tol`.
fn null_spaces(m: MatRef<'_, C64>, rel_tol: f64) -> Result<(Mat<C64>, Mat<C64>)> {
    let svd = m.svd().map_err(|e| Error::Numerical(format!("{e:?}")))?;
    let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let smax = s.first().copied().unwrap_or(0.0);
    let zero: Vec<usize> = (0..s.len()).filter(|&k| s[k] <= rel_tol * smax).collect();
    let n = m.nrows();
    let right = Mat::from_fn(n, zero.len(), |r, c| svd.V()[(r, zero[c])]);
    let left = Mat::from_fn(n, zero.len(), |r, c| svd.U()[(r, zero[c])]);
    Ok((right, left))
}

/// Spectral projector onto `ker G` along `ran G` (zero is semisimple for
/// GKSL generators), as a `D²×D²` matrix.
pub fn kernel_projector(generator: &Superoperator) -> Result<Mat<C64>> {
    let (k, kl) = null_spaces(generator.matrix(), 1e-10)?;
    if k.ncols() == 0 {
        return Ok(Mat::zeros(generator.matrix.nrows(), generator.matrix.nrows()));
    }
    let overlap = kl.adjoint() * &k;
    let inner = overlap.partial_piv_lu().solve(kl.adjoint().to_owned());
    Ok(&k * inner)
}

/// A spanning set of stationary density matrices of a Schrödinger generator.
///
/// The first state is the maximal-support state `P₀[𝟙/D]`; the remaining
/// ones are small Hermitian perturbations of it along an orthonormal
/// Hermitian basis of `ker L`.
pub fn stationary_states(generator: &Superoperator) -> Result<Vec<DensityState>> {
    if generator.role != SuperRole::Generator {
        return Err(Error::Model(format!(
            "stationary states need a Schrödinger generator, got {:?}",
            generator.role
        )));
    }
    let d = generator.dim;
    let (kernel, _) = null_spaces(generator.matrix(), 1e-10)?;
    if kernel.ncols() == 0 {
        return Err(Error::StationaryState("generator has trivial kernel".into()));
    }
    let p0 = kernel_projector(generator)?;
    let mixed = OperatorMatrix::identity(d).scale_re(1.0 / d as f64);
    let rho_star = OperatorMatrix::from_col(d, (&p0 * &mixed.to_col()).as_ref()).hermitian_part();
    let tr = rho_star.trace().re;
    if !(tr > 1e-12) {
        return Err(Error::StationaryState(format!("projected state has trace {tr:.3e}")));
    }
    let rho_star = rho_star.scale_re(1.0 / tr);

    // Orthonormal Hermitian basis of the kernel, starting from ρ*.
    let mut herm: Vec<OperatorMatrix> = vec![rho_star.scale_re(1.0 / rho_star.norm())];
    for c in 0..kernel.ncols() {
        let x = OperatorMatrix::from_col(d, kernel.col(c));
        for cand in [x.hermitian_part(), x.imaginary_part()] {
            let mut v = cand;
            for h in &herm {
                let proj = crate::operator::hs_inner(h, &v)?.re;
                v = &v - &h.scale_re(proj);
            }
            let nv = v.norm();
            if nv > 1e-8 {
                herm.push(v.scale_re(1.0 / nv));
            }
        }
    }

    let eig = rho_star.hermitian_eigenvalues()?;
    let lam_min = eig
        .iter()
        .copied()
        .filter(|&x| x > 1e-10)
        .fold(f64::INFINITY, f64::min);
    let mut states = vec![rho_star.clone()];
    for h in herm.iter().skip(1) {
        let eps = 0.5 * lam_min / h.norm();
        let x = &rho_star + &h.scale_re(eps);
        let tr = x.trace().re;
        states.push(x.scale_re(1.0 / tr));
    }

    let mut out = Vec::with_capacity(states.len());
    for s in states {
        let resid = generator.apply(&s)?.norm();
        if resid > 1e-10 {
            return Err(Error::StationaryState(format!("residual ‖L[ρ]‖ = {resid:.3e}")));
        }
        let s = s.hermitian_part();
        let s = s.scale_re(1.0 / s.trace().re);
        out.push(DensityState::new(s).map_err(|e| Error::StationaryState(e.to_string()))?);
    }
    Ok(out)
}
