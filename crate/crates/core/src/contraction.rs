//! Structure constants of `∘ₜ` as exact exponential polynomials in `t`,
//! their `t → ∞` limits, and the contracted algebra they define.
//!
//! With cluster projectors `Π_μ` of `L♯` (eigenvalue `λ_μ`),
//! `A ∘ₜ B = Σ_{μ,ν,κ} e^{(λ_μ+λ_ν−λ_κ)t} Π_κ[Π_μ A · Π_ν B]`, so every
//! coefficient is a finite sum of exponentials whose limit can be read off
//! term by term.

use std::fmt;

use faer::{Col, Mat};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{
    hs_inner, DensityState, OperatorBasis, OperatorMatrix, StructureKind, StructureTensor, SPAN_TOL,
};
use crate::superop::{SpectralData, SuperRole, Superoperator};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Relative tolerance factors; resolved against a spectrum and a tensor
/// scale by [`TolerancePolicy::resolve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolerancePolicy {
    pub spec_rel: f64,
    pub coeff_rel: f64,
    /// Rate scale (typically `γ`) entering `ε_spec` next to `max|λ|`.
    pub rate_scale: Option<f64>,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            spec_rel: 1e-9,
            coeff_rel: 1e-12,
            rate_scale: None,
        }
    }
}

impl TolerancePolicy {
    pub fn with_rate_scale(mut self, rate: f64) -> Self {
        self.rate_scale = Some(rate);
        self
    }

    /// Absolute spectral tolerance `spec_rel · max(max|λ|, rate)`.
    pub fn spec_tol(&self, spectral: &SpectralData) -> f64 {
        let scale = spectral.max_abs_eigenvalue().max(self.rate_scale.unwrap_or(0.0));
        let scale = if scale > 0.0 { scale } else { 1.0 };
        self.spec_rel * scale
    }

    pub fn resolve(&self, spectral: &SpectralData, coeff_scale: f64) -> Tolerances {
        Tolerances {
            spec: self.spec_tol(spectral),
            coeff: self.coeff_rel * coeff_scale,
        }
    }
}

/// Absolute tolerances used by [`take_limit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub spec: f64,
    pub coeff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub exponent: C64,
    pub power: u32,
}

/// `Σ coeff · t^power · e^{exponent·t}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExponentialPolynomial {
    terms: Vec<Term>,
}

impl ExponentialPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::from_terms(vec![Term {
            coeff: c,
            exponent: ZERO,
            power: 0,
        }])
    }

    pub fn from_terms(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.terms
            .iter()
            .map(|term| term.coeff * t.powi(term.power as i32) * (term.exponent * t).exp())
            .sum()
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    /// Merges terms whose exponents agree within `exponent_tol` and share a
    /// power, then drops coefficients with `|c| ≤ coeff_tol`.
    pub fn normalized(&self, exponent_tol: f64, coeff_tol: f64) -> Self {
        let mut merged: Vec<Term> = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            match merged
                .iter_mut()
                .find(|m| m.power == term.power && (m.exponent - term.exponent).norm() <= exponent_tol)
            {
                Some(m) => m.coeff += term.coeff,
                None => merged.push(*term),
            }
        }
        merged.retain(|t| t.coeff.norm() > coeff_tol);
        Self { terms: merged }
    }

    pub fn scale(&self, k: C64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff * k,
                    ..*t
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self { terms }
    }
}

impl fmt::Display for ExponentialPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, t) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i)", t.coeff.re, t.coeff.im)?;
            if t.power > 0 {
                write!(f, "·t^{}", t.power)?;
            }
            if t.exponent != ZERO {
                write!(f, "·exp(({:.6}{:+.6}i)t)", t.exponent.re, t.exponent.im)?;
            }
        }
        Ok(())
    }
}

/// Large-`t` behaviour of one structure-constant entry.
#[derive(Debug, Clone, PartialEq)]
pub enum LimitClass {
    Converges(C64),
    VanishesIdentically,
    /// Carries the exponent with the largest real part.
    DivergesExponentially(C64),
    /// Carries the undamped angular frequencies.
    Oscillates(Vec<f64>),
    PolynomialGrowth(u32),
}

impl LimitClass {
    pub fn name(&self) -> &'static str {
        match self {
            LimitClass::Converges(_) => "Converges",
            LimitClass::VanishesIdentically => "VanishesIdentically",
            LimitClass::DivergesExponentially(_) => "DivergesExponentially",
            LimitClass::Oscillates(_) => "Oscillates",
            LimitClass::PolynomialGrowth(_) => "PolynomialGrowth",
        }
    }

    /// The limit value when it exists.
    pub fn value(&self) -> Option<C64> {
        match self {
            LimitClass::Converges(v) => Some(*v),
            LimitClass::VanishesIdentically => Some(ZERO),
            _ => None,
        }
    }

    pub fn converges(&self) -> bool {
        self.value().is_some()
    }
}

pub fn take_limit(poly: &ExponentialPolynomial, tol: &Tolerances) -> LimitClass {
    let live: Vec<&Term> = poly.terms.iter().filter(|t| t.coeff.norm() > tol.coeff).collect();

    if let Some(worst) = live
        .iter()
        .filter(|t| t.exponent.re > tol.spec)
        .max_by(|a, b| a.exponent.re.total_cmp(&b.exponent.re))
    {
        return LimitClass::DivergesExponentially(worst.exponent);
    }

    let peripheral: Vec<&&Term> = live.iter().filter(|t| t.exponent.re.abs() <= tol.spec).collect();
    if let Some(p) = peripheral.iter().map(|t| t.power).max().filter(|&p| p > 0) {
        return LimitClass::PolynomialGrowth(p);
    }
    let mut freqs: Vec<f64> = peripheral
        .iter()
        .filter(|t| t.exponent.im.abs() > tol.spec)
        .map(|t| t.exponent.im)
        .collect();
    if !freqs.is_empty() {
        freqs.sort_by(f64::total_cmp);
        freqs.dedup_by(|a, b| (*a - *b).abs() <= tol.spec);
        return LimitClass::Oscillates(freqs);
    }

    let value: C64 = peripheral.iter().map(|t| t.coeff).sum();
    if value.norm() <= tol.coeff {
        LimitClass::VanishesIdentically
    } else {
        LimitClass::Converges(value)
    }
}

/// Tensor of exponential polynomials `T_ij^k(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicTensor {
    pub kind: StructureKind,
    size: usize,
    entries: Vec<ExponentialPolynomial>,
    pub basis_labels: Vec<String>,
    tolerances: Tolerances,
}

impl SymbolicTensor {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &ExponentialPolynomial {
        &self.entries[(i * self.size + j) * self.size + k]
    }

    pub fn entries(&self) -> &[ExponentialPolynomial] {
        &self.entries
    }

    /// Tolerances the tensor was normalized with.
    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
    }

    pub fn eval(&self, t: f64) -> StructureTensor {
        let mut out = StructureTensor::zeros(self.kind, self.basis_labels.clone());
        let n = self.size;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out.set(i, j, k, self.get(i, j, k).eval(t));
                }
            }
        }
        out
    }

    pub fn limits(&self) -> LimitTensor {
        let n = self.size;
        let classes: Vec<LimitClass> = self.entries.iter().map(|p| take_limit(p, &self.tolerances)).collect();
        let mut values = StructureTensor::zeros(self.kind, self.basis_labels.clone());
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if let Some(v) = classes[(i * n + j) * n + k].value() {
                        values.set(i, j, k, v);
                    }
                }
            }
        }
        LimitTensor { values, classes }
    }

    /// `T_ij ± T_ji`, the bracket tensors derived from a product tensor.
    fn bracket_from_product(&self, kind: StructureKind) -> SymbolicTensor {
        let sign = match kind {
            StructureKind::Product => return self.clone(),
            StructureKind::Commutator => -1.0,
            StructureKind::Anticommutator => 1.0,
        };
        let n = self.size;
        let mut entries = Vec::with_capacity(self.entries.len());
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let p = self.get(i, j, k).add(&self.get(j, i, k).scale(C64::new(sign, 0.0)));
                    entries.push(p.normalized(self.tolerances.spec, self.tolerances.coeff));
                }
            }
        }
        SymbolicTensor {
            kind,
            size: n,
            entries,
            basis_labels: self.basis_labels.clone(),
            tolerances: self.tolerances,
        }
    }
}

/// Limit values with a classification per entry; entries without a limit
/// hold zero in `values`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitTensor {
    pub values: StructureTensor,
    pub classes: Vec<LimitClass>,
}

impl LimitTensor {
    pub fn size(&self) -> usize {
        self.values.size()
    }

    pub fn class(&self, i: usize, j: usize, k: usize) -> &LimitClass {
        let n = self.size();
        &self.classes[(i * n + j) * n + k]
    }

    pub fn value(&self, i: usize, j: usize, k: usize) -> Option<C64> {
        self.class(i, j, k).value()
    }

    /// True when every `k` entry of the pair `(i, j)` converges.
    pub fn pair_converges(&self, i: usize, j: usize) -> bool {
        (0..self.size()).all(|k| self.class(i, j, k).converges())
    }

    pub fn all_converge(&self) -> bool {
        self.classes.iter().all(LimitClass::converges)
    }
}

/// Cluster components `Π_μ X` of an operator, skipping numerically empty ones.
fn cluster_components(spectral: &SpectralData, x: &OperatorMatrix) -> Vec<(usize, OperatorMatrix)> {
    let floor = 1e-14 * x.norm();
    (0..spectral.clusters().len())
        .filter_map(|c| {
            let p = spectral.project_cluster(c, x);
            (p.norm() > floor).then_some((c, p))
        })
        .collect()
}

fn cluster_value(spectral: &SpectralData, c: usize) -> C64 {
    spectral.eigenvalues()[spectral.clusters()[c].start]
}

/// `A ⋆ₜ B` grouped by exponent as vectorized operators.
fn deformed_terms(
    spectral: &SpectralData,
    za: &[(usize, OperatorMatrix)],
    zb: &[(usize, OperatorMatrix)],
    kind: StructureKind,
    exponent_tol: f64,
) -> Vec<(C64, Col<C64>)> {
    let n = spectral.len();
    let left_adj = spectral.left_mat().adjoint().to_owned();
    let right = spectral.right_mat();
    let mut groups: Vec<(C64, Col<C64>)> = Vec::new();
    for (mu, a) in za {
        for (nu, b) in zb {
            let x = kind.apply(a, b).to_col();
            let y = &left_adj * &x;
            let scale = y.norm_l2();
            if scale == 0.0 {
                continue;
            }
            let base = cluster_value(spectral, *mu) + cluster_value(spectral, *nu);
            for (kappa, range) in spectral.clusters().iter().enumerate() {
                let yk = y.subrows(range.start, range.len());
                if yk.norm_l2() <= 1e-15 * scale {
                    continue;
                }
                let z = right.subcols(range.start, range.len()) * yk;
                let e = base - cluster_value(spectral, kappa);
                match groups.iter_mut().find(|(g, _)| (*g - e).norm() <= exponent_tol) {
                    Some((_, acc)) => *acc += &z,
                    None => groups.push((e, z)),
                }
            }
        }
    }
    debug_assert!(groups.iter().all(|(_, z)| z.nrows() == n));
    groups
}

/// Symbolic structure constants over `basis` from the spectral data of `L♯`.
pub fn symbolic_structure_constants(
    basis: &OperatorBasis,
    spectral: &SpectralData,
    kind: StructureKind,
    policy: &TolerancePolicy,
) -> Result<SymbolicTensor> {
    check_spectral(basis, spectral)?;
    match symbolic_raw(basis, spectral, StructureKind::Product, policy) {
        Ok(alpha) => Ok(alpha.bracket_from_product(kind)),
        Err(Error::NotInSpan { .. }) if kind != StructureKind::Product => {
            symbolic_raw(basis, spectral, kind, policy)
        }
        Err(e) => Err(e),
    }
}

fn check_spectral(basis: &OperatorBasis, spectral: &SpectralData) -> Result<()> {
    if basis.dim() != spectral.dim() {
        return Err(Error::Dimension {
            expected: spectral.dim(),
            found: basis.dim(),
        });
    }
    let expected = spectral.dim() * spectral.dim();
    if spectral.len() < expected {
        return Err(Error::SpectralSpan {
            rank: spectral.len(),
            expected,
        });
    }
    Ok(())
}

fn symbolic_raw(
    basis: &OperatorBasis,
    spectral: &SpectralData,
    kind: StructureKind,
    policy: &TolerancePolicy,
) -> Result<SymbolicTensor> {
    let n = basis.len();
    let d2 = spectral.len();
    let spec_tol = policy.spec_tol(spectral);
    let comps: Vec<Vec<(usize, OperatorMatrix)>> =
        basis.elements().iter().map(|e| cluster_components(spectral, e)).collect();

    let mut exponents: Vec<Vec<C64>> = Vec::with_capacity(n * n);
    let mut columns: Vec<Col<C64>> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let groups = deformed_terms(spectral, &comps[i], &comps[j], kind, spec_tol);
            exponents.push(groups.iter().map(|(e, _)| *e).collect());
            columns.extend(groups.into_iter().map(|(_, z)| z));
        }
    }

    let stacked = Mat::from_fn(d2, columns.len(), |r, c| columns[c][r]);
    let (coords, resid) = basis.expand_columns(stacked.as_ref());

    let mut col = 0;
    let mut max_coeff: f64 = 0.0;
    for (pair, exps) in exponents.iter().enumerate() {
        for _ in exps {
            let norm = columns[col].norm_l2();
            if resid[col] > SPAN_TOL * norm.max(1.0) {
                return Err(Error::NotInSpan {
                    residual: resid[col],
                    pair: Some((pair / n, pair % n)),
                });
            }
            for k in 0..n {
                max_coeff = max_coeff.max(coords[(k, col)].norm());
            }
            col += 1;
        }
    }
    let tolerances = Tolerances {
        spec: spec_tol,
        coeff: policy.coeff_rel * max_coeff,
    };

    let mut raw: Vec<Vec<Term>> = vec![Vec::new(); n * n * n];
    let mut col = 0;
    for (pair, exps) in exponents.iter().enumerate() {
        for e in exps {
            for k in 0..n {
                let c = coords[(k, col)];
                if c.norm() > tolerances.coeff {
                    raw[pair * n + k].push(Term {
                        coeff: c,
                        exponent: *e,
                        power: 0,
                    });
                }
            }
            col += 1;
        }
    }
    let entries = raw
        .into_iter()
        .map(|terms| ExponentialPolynomial::from_terms(terms).normalized(tolerances.spec, tolerances.coeff))
        .collect();
    Ok(SymbolicTensor {
        kind,
        size: n,
        entries,
        basis_labels: basis.labels().to_vec(),
        tolerances,
    })
}

/// Operator-valued exponential sum `Σ_e e^{e·t} X_e`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSeries {
    dim: usize,
    terms: Vec<(C64, OperatorMatrix)>,
}

impl OperatorSeries {
    pub fn terms(&self) -> &[(C64, OperatorMatrix)] {
        &self.terms
    }

    pub fn eval(&self, t: f64) -> OperatorMatrix {
        let mut acc = OperatorMatrix::zeros(self.dim);
        for (e, x) in &self.terms {
            acc = &acc + &x.scale((e * t).exp());
        }
        acc
    }

    /// Limit operator, or the limit class of the first obstruction found.
    pub fn limit(&self, tol: &Tolerances) -> std::result::Result<OperatorMatrix, LimitClass> {
        let mut acc = OperatorMatrix::zeros(self.dim);
        for (e, x) in &self.terms {
            if x.max_abs() <= tol.coeff {
                continue;
            }
            if e.re > tol.spec {
                return Err(LimitClass::DivergesExponentially(*e));
            }
            if e.re.abs() <= tol.spec {
                if e.im.abs() > tol.spec {
                    return Err(LimitClass::Oscillates(vec![e.im]));
                }
                acc = &acc + x;
            }
        }
        Ok(acc)
    }
}

/// `A ⋆ₜ B` as an exact exponential sum in `t`; usable at times where the
/// linear-solve path is ill-conditioned.
pub fn symbolic_bracket(
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    spectral: &SpectralData,
    kind: StructureKind,
    policy: &TolerancePolicy,
) -> Result<OperatorSeries> {
    let dim = spectral.dim();
    for x in [a, b] {
        if x.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: x.dim(),
            });
        }
    }
    let spec_tol = policy.spec_tol(spectral);
    let za = cluster_components(spectral, a);
    let zb = cluster_components(spectral, b);
    let groups = deformed_terms(spectral, &za, &zb, kind, spec_tol);
    let floor = policy.coeff_rel * groups.iter().map(|(_, z)| z.norm_max()).fold(0.0, f64::max);
    let terms = groups
        .into_iter()
        .filter(|(_, z)| z.norm_max() > floor)
        .map(|(e, z)| (e, OperatorMatrix::from_col(dim, z.as_ref())))
        .collect();
    Ok(OperatorSeries { dim, terms })
}

/// Diagnostics of the limiting algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraReport {
    pub is_abelian: bool,
    /// Dimension of the centre computed from the converging `c(∞)` entries.
    pub center_dim: usize,
    /// Largest associativity defect of `α(∞)` over fully converging index
    /// quadruples.
    pub associativity_residual: f64,
    /// Maximal index sets with vanishing mutual `c(∞)`.
    pub abelian_subalgebra_witness: Vec<Vec<usize>>,
    /// Whether the survivors commute among themselves under `[·,·]∞`.
    pub survivors_abelian: bool,
}

#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub basis: OperatorBasis,
    pub alpha_inf: LimitTensor,
    pub c_inf: LimitTensor,
    pub s_inf: LimitTensor,
    /// Hilbert–Schmidt orthonormal Hermitian basis of `ker L♯`.
    pub survivors: OperatorBasis,
    /// `Λ♯∞ = Σ_{λ≈0} E_a ⟨F_a, ·⟩`.
    pub asymptotic_map: Superoperator,
    pub diagnostics: AlgebraReport,
    pub tolerances: Tolerances,
}

impl ContractionReport {
    /// `A ∘∞ B` assembled from `α(∞)`; fails on the first non-converging
    /// entry that the expansion needs.
    pub fn limit_product(&self, a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
        let ca = self.basis.expand(a)?;
        let cb = self.basis.expand(b)?;
        let n = self.basis.len();
        let mut out = vec![ZERO; n];
        for i in 0..n {
            if ca[i] == ZERO {
                continue;
            }
            for j in 0..n {
                if cb[j] == ZERO {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    let v = self
                        .alpha_inf
                        .value(i, j, k)
                        .ok_or(Error::NonConvergentEntry { i, j, k })?;
                    *o += ca[i] * cb[j] * v;
                }
            }
        }
        self.basis.reconstruct(&out)
    }
}

fn is_peripheral_oscillation(z: C64, tol: f64) -> bool {
    z.re.abs() <= tol && z.im.abs() > tol
}

/// Builds the contracted algebra of `basis` under the dynamics with adjoint
/// generator `adjoint_gen` and its spectral data.
pub fn contract(
    basis: &OperatorBasis,
    spectral: &SpectralData,
    adjoint_gen: &Superoperator,
    policy: &TolerancePolicy,
) -> Result<ContractionReport> {
    if adjoint_gen.role() != SuperRole::AdjointGenerator {
        return Err(Error::Model(format!(
            "contraction needs the adjoint generator, got {:?}",
            adjoint_gen.role()
        )));
    }
    check_spectral(basis, spectral)?;
    let spec_tol = policy.spec_tol(spectral);
    let oscillating: Vec<C64> = spectral
        .eigenvalues()
        .iter()
        .copied()
        .filter(|&z| is_peripheral_oscillation(z, spec_tol))
        .collect();
    if !oscillating.is_empty() {
        return Err(Error::OscillatoryPeripheralSpectrum {
            eigenvalues: oscillating,
        });
    }

    let alpha = symbolic_structure_constants(basis, spectral, StructureKind::Product, policy)?;
    let tolerances = alpha.tolerances();
    let alpha_inf = alpha.limits();
    let c_inf = alpha.bracket_from_product(StructureKind::Commutator).limits();
    let s_inf = alpha.bracket_from_product(StructureKind::Anticommutator).limits();

    let kernel = spectral.kernel_indices(spec_tol);
    let asymptotic_map = asymptotic_map(spectral, &kernel)?;
    let survivors = survivor_basis(basis, &asymptotic_map, adjoint_gen)?;
    let mut diagnostics = algebra_report(&alpha_inf, &c_inf);
    diagnostics.survivors_abelian = survivors_commute(&survivors, spectral, policy)?;

    Ok(ContractionReport {
        basis: basis.clone(),
        alpha_inf,
        c_inf,
        s_inf,
        survivors,
        asymptotic_map,
        diagnostics,
        tolerances,
    })
}

fn asymptotic_map(spectral: &SpectralData, kernel: &[usize]) -> Result<Superoperator> {
    let n = spectral.len();
    let e = Mat::from_fn(n, kernel.len(), |r, c| spectral.right_mat()[(r, kernel[c])]);
    let f = Mat::from_fn(n, kernel.len(), |r, c| spectral.left_mat()[(r, kernel[c])]);
    Superoperator::from_matrix(
        spectral.dim(),
        &e * f.adjoint(),
        SuperRole::AdjointPropagator,
        Some(f64::INFINITY),
    )
}

fn survivor_basis(
    basis: &OperatorBasis,
    asymptotic: &Superoperator,
    adjoint_gen: &Superoperator,
) -> Result<OperatorBasis> {
    let mut found: Vec<OperatorMatrix> = Vec::new();
    for el in basis.elements() {
        let p = asymptotic.apply(el)?;
        for cand in [p.hermitian_part(), p.imaginary_part()] {
            let mut v = cand;
            for s in &found {
                let proj = hs_inner(s, &v)?;
                v = &v - &s.scale(proj);
            }
            let nv = v.norm();
            if nv > 1e-8 * el.norm().max(1.0) {
                found.push(v.scale_re(1.0 / nv));
            }
        }
    }
    // Re-orthogonalize once more to clean up accumulated drift.
    let mut clean: Vec<OperatorMatrix> = Vec::with_capacity(found.len());
    for v in found {
        let mut w = v;
        for s in &clean {
            let proj = hs_inner(s, &w)?;
            w = &w - &s.scale(proj);
        }
        let nw = w.norm();
        clean.push(w.scale_re(1.0 / nw));
    }
    for s in &clean {
        let r = adjoint_gen.apply(s)?.norm();
        if r > 1e-10 {
            return Err(Error::Numerical(format!(
                "survivor leaves the kernel of the adjoint generator (residual {r:.3e})"
            )));
        }
    }
    let labels = clean.iter().map(|s| survivor_label(basis, s)).collect();
    OperatorBasis::new(clean, labels)
}

fn survivor_label(basis: &OperatorBasis, s: &OperatorMatrix) -> String {
    let Ok((coords, _)) = basis.expand_lenient(s) else {
        return "survivor".into();
    };
    let max = coords.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let nonzero: Vec<usize> = (0..coords.len()).filter(|&k| coords[k].norm() > 1e-9 * max).collect();
    if let [only] = nonzero.as_slice() {
        return basis.labels()[*only].clone();
    }
    // Scale so the largest coordinate has unit modulus, keeping phases.
    let pivot = nonzero.iter().map(|&k| coords[k].norm()).fold(0.0, f64::max);
    let mut parts = Vec::new();
    for &k in &nonzero {
        let c = coords[k] / pivot;
        let label = &basis.labels()[k];
        let near = |z: C64| (c - z).norm() < 1e-9;
        let text = if near(C64::new(1.0, 0.0)) {
            label.clone()
        } else if near(C64::new(-1.0, 0.0)) {
            format!("-{label}")
        } else if near(C64::new(0.0, 1.0)) {
            format!("i{label}")
        } else if near(C64::new(0.0, -1.0)) {
            format!("-i{label}")
        } else if c.im.abs() < 1e-9 {
            format!("{:.6}{}", c.re, label)
        } else {
            format!("({:.6}{:+.6}i){}", c.re, c.im, label)
        };
        parts.push(text);
    }
    parts.join(" + ")
}

fn survivors_commute(survivors: &OperatorBasis, spectral: &SpectralData, policy: &TolerancePolicy) -> Result<bool> {
    let els = survivors.elements();
    for (i, a) in els.iter().enumerate() {
        for b in &els[i + 1..] {
            let series = symbolic_bracket(a, b, spectral, StructureKind::Commutator, policy)?;
            let tol = Tolerances {
                spec: policy.spec_tol(spectral),
                coeff: policy.coeff_rel,
            };
            match series.limit(&tol) {
                Ok(x) if x.max_abs() <= 1e-9 => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}

fn algebra_report(alpha_inf: &LimitTensor, c_inf: &LimitTensor) -> AlgebraReport {
    let n = alpha_inf.size();
    let commute = |i: usize, j: usize| {
        (0..n).all(|k| matches!(c_inf.value(i, j, k), Some(v) if v.norm() <= 1e-9))
    };

    let is_abelian = c_inf
        .classes
        .iter()
        .all(|c| matches!(c.value(), Some(v) if v.norm() <= 1e-9));

    // Centre: x with Σ_i x_i c_ij^k = 0 for every converging (j, k).
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for j in 0..n {
        for k in 0..n {
            if (0..n).all(|i| c_inf.value(i, j, k).is_some()) {
                rows.push((0..n).map(|i| c_inf.value(i, j, k).unwrap_or(ZERO)).collect());
            }
        }
    }
    let center_dim = if rows.is_empty() {
        n
    } else {
        let m = Mat::from_fn(rows.len(), n, |r, c| rows[r][c]);
        let sv = m.singular_values().unwrap_or_default();
        let smax = sv.first().copied().unwrap_or(0.0);
        let rank = sv.iter().filter(|&&s| s > 1e-9 * smax.max(1.0)).count();
        n - rank
    };

    let mut associativity_residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if !alpha_inf.pair_converges(i, j) {
                continue;
            }
            for k in 0..n {
                if !alpha_inf.pair_converges(j, k) {
                    continue;
                }
                let ok = (0..n).all(|m| alpha_inf.pair_converges(m, k) && alpha_inf.pair_converges(i, m));
                if !ok {
                    continue;
                }
                for l in 0..n {
                    let mut lhs = ZERO;
                    let mut rhs = ZERO;
                    for m in 0..n {
                        lhs += alpha_inf.values.get(i, j, m) * alpha_inf.values.get(m, k, l);
                        rhs += alpha_inf.values.get(j, k, m) * alpha_inf.values.get(i, m, l);
                    }
                    associativity_residual = associativity_residual.max((lhs - rhs).norm());
                }
            }
        }
    }

    let mut witness: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        let mut set = vec![start];
        for cand in 0..n {
            if cand != start && set.iter().all(|&s| commute(s, cand) && commute(cand, s)) {
                set.push(cand);
            }
        }
        set.sort_unstable();
        if !witness.contains(&set) {
            witness.push(set);
        }
    }

    AlgebraReport {
        is_abelian,
        center_dim,
        associativity_residual,
        abelian_subalgebra_witness: witness,
        survivors_abelian: true,
    }
}

/// Mean and variance of a Hermitian observable on an asymptotic state, with
/// the square taken in the limiting product.
pub fn weak_stats(a: &OperatorMatrix, rho_inf: &DensityState, report: &ContractionReport) -> Result<(f64, f64)> {
    if !a.is_hermitian(1e-12 * a.norm().max(1.0)) {
        return Err(Error::Model("weak statistics need a Hermitian observable".into()));
    }
    let mean = rho_inf.expectation(a)?.re;
    let square = report.limit_product(a, a)?;
    let second = rho_inf.expectation(&square)?.re;
    Ok((mean, second - mean * mean))
}
