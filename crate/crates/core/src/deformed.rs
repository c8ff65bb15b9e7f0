//! The time-deformed product `A ∘ₜ B = (Λ♯ₜ)⁻¹[Λ♯ₜ[A] Λ♯ₜ[B]]` evaluated at
//! finite `t` by forward propagation followed by a linear solve.

use faer::linalg::solvers::{PartialPivLu, Solve};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{expand_pairs, OperatorBasis, OperatorMatrix, StructureKind, StructureTensor};
use crate::superop::{condition_number, propagator, SuperRole, Superoperator};

/// Condition estimate of `Λ♯ₜ` beyond which the numeric path refuses.
pub const COND_MAX: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeBracketRequest {
    pub a: OperatorMatrix,
    pub b: OperatorMatrix,
    pub t: f64,
    pub kind: StructureKind,
}

impl TimeBracketRequest {
    pub fn new(a: OperatorMatrix, b: OperatorMatrix, t: f64, kind: StructureKind) -> Self {
        Self { a, b, t, kind }
    }
}

/// `Λ♯ₜ` together with its LU factorization, shared across many products at
/// one time.
pub struct DeformedProduct {
    propagator: Superoperator,
    lu: Option<PartialPivLu<C64>>,
    condition: f64,
}

impl std::fmt::Debug for DeformedProduct {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DeformedProduct")
            .field("t", &self.time())
            .field("dim", &self.propagator.dim())
            .field("condition", &self.condition)
            .finish()
    }
}

impl DeformedProduct {
    pub fn new(adjoint_gen: &Superoperator, t: f64) -> Result<Self> {
        if adjoint_gen.role() != SuperRole::AdjointGenerator {
            return Err(Error::Model(format!(
                "deformed product needs the adjoint generator, got {:?}",
                adjoint_gen.role()
            )));
        }
        let propagator = propagator(adjoint_gen, t)?;
        if t == 0.0 {
            return Ok(Self {
                propagator,
                lu: None,
                condition: 1.0,
            });
        }
        let condition = condition_number(propagator.matrix())?;
        if !(condition <= COND_MAX) {
            return Err(Error::IllConditioned { condition, pair: None });
        }
        let lu = propagator.matrix().partial_piv_lu();
        Ok(Self {
            propagator,
            lu: Some(lu),
            condition,
        })
    }

    pub fn time(&self) -> f64 {
        self.propagator.time().unwrap_or(0.0)
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// The forward map `Λ♯ₜ`.
    pub fn propagator(&self) -> &Superoperator {
        &self.propagator
    }

    /// `(Λ♯ₜ)⁻¹[X]` by a linear solve.
    pub fn pull_back(&self, x: &OperatorMatrix) -> Result<OperatorMatrix> {
        let dim = self.propagator.dim();
        if x.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: x.dim(),
            });
        }
        match &self.lu {
            None => Ok(x.clone()),
            Some(lu) => {
                let y = lu.solve(x.to_col());
                Ok(OperatorMatrix::from_col(dim, y.as_ref()))
            }
        }
    }

    pub fn bracket(&self, a: &OperatorMatrix, b: &OperatorMatrix, kind: StructureKind) -> Result<OperatorMatrix> {
        if self.lu.is_none() {
            if a.dim() != self.propagator.dim() || b.dim() != self.propagator.dim() {
                return Err(Error::Dimension {
                    expected: self.propagator.dim(),
                    found: if a.dim() != self.propagator.dim() { a.dim() } else { b.dim() },
                });
            }
            return Ok(kind.apply(a, b));
        }
        let fa = self.propagator.apply(a)?;
        let fb = self.propagator.apply(b)?;
        self.pull_back(&kind.apply(&fa, &fb))
    }

    pub fn product(&self, a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.bracket(a, b, StructureKind::Product)
    }
}

/// `A ⋆ₜ B` for the requested bracket.
pub fn bracket_t(request: &TimeBracketRequest, adjoint_gen: &Superoperator) -> Result<OperatorMatrix> {
    if !request.t.is_finite() {
        return Err(Error::Time(request.t));
    }
    DeformedProduct::new(adjoint_gen, request.t)?.bracket(&request.a, &request.b, request.kind)
}

/// Structure constants of `∘ₜ` (or its brackets) over `basis`.
pub fn structure_constants_t(
    basis: &OperatorBasis,
    t: f64,
    adjoint_gen: &Superoperator,
    kind: StructureKind,
) -> Result<StructureTensor> {
    if basis.dim() != adjoint_gen.dim() {
        return Err(Error::Dimension {
            expected: adjoint_gen.dim(),
            found: basis.dim(),
        });
    }
    let engine = DeformedProduct::new(adjoint_gen, t)?;
    structure_constants_with(basis, &engine, kind)
}

pub(crate) fn structure_constants_with(
    basis: &OperatorBasis,
    engine: &DeformedProduct,
    kind: StructureKind,
) -> Result<StructureTensor> {
    let els = basis.elements();
    let alpha = expand_pairs(basis, StructureKind::Product, |i, j| engine.product(&els[i], &els[j]));
    match (kind, alpha) {
        (StructureKind::Product, alpha) => alpha,
        (_, Ok(alpha)) => Ok(StructureTensor::bracket_from_product(&alpha, kind)),
        (_, Err(Error::NotInSpan { .. })) => {
            expand_pairs(basis, kind, |i, j| engine.bracket(&els[i], &els[j], kind))
        }
        (_, Err(e)) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_basis, pauli, structure_constants, BasisKind};
    use crate::superop::{adjoint_generator, GkslModel, Jump};

    fn phase_qubit_adjoint(gamma: f64) -> Superoperator {
        let m = GkslModel::dissipative(2, vec![Jump::new(pauli(3), gamma / 2.0)]).unwrap();
        adjoint_generator(&m).unwrap()
    }

    #[test]
    fn sigma1_squared_decays() {
        let ls = phase_qubit_adjoint(1.0);
        for t in [0.0, 0.5, 2.0] {
            let req = TimeBracketRequest::new(pauli(1), pauli(1), t, StructureKind::Product);
            let out = bracket_t(&req, &ls).unwrap();
            let want = pauli(0).scale_re((-2.0 * t).exp());
            assert!((&out - &want).max_abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn zero_time_matches_static_tensor() {
        let ls = phase_qubit_adjoint(0.7);
        let basis = build_basis(BasisKind::Pauli, 2).unwrap();
        for kind in [StructureKind::Product, StructureKind::Commutator] {
            let a = structure_constants_t(&basis, 0.0, &ls, kind).unwrap();
            let b = structure_constants(&basis, kind).unwrap();
            assert!(a.max_deviation(&b) < 1e-12);
        }
    }

    #[test]
    fn refuses_ill_conditioned_time() {
        let ls = phase_qubit_adjoint(1.0);
        let r = DeformedProduct::new(&ls, 40.0);
        assert!(matches!(r, Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn requires_adjoint_generator() {
        let m = GkslModel::dissipative(2, vec![Jump::new(pauli(3), 0.5)]).unwrap();
        let l = crate::superop::build_generator(&m).unwrap();
        assert!(DeformedProduct::new(&l, 1.0).is_err());
    }

    #[test]
    fn negative_time_rejected() {
        let ls = phase_qubit_adjoint(1.0);
        let req = TimeBracketRequest::new(pauli(1), pauli(2), -1.0, StructureKind::Product);
        assert!(matches!(bracket_t(&req, &ls), Err(Error::Time(_))));
    }
}
