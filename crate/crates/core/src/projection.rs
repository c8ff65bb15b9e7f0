//! Dissipators of the form `L = −γ(id − 𝒫)` for a pinching projection
//! `𝒫[A] = Σ_k P_k A P_k`, and the limiting product they induce.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{DensityState, OperatorBasis, OperatorMatrix};
use crate::superop::{GkslModel, Jump, SuperRole, Superoperator};

const FAMILY_TOL: f64 = 1e-12;

/// A complete family of mutually orthogonal Hermitian projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PinchingProjection {
    dim: usize,
    blocks: Vec<OperatorMatrix>,
}

impl PinchingProjection {
    pub fn new(blocks: Vec<OperatorMatrix>) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::Projection("empty projector family".into()));
        };
        let dim = first.dim();
        let mut sum = OperatorMatrix::zeros(dim);
        for (k, p) in blocks.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if !p.is_hermitian(FAMILY_TOL) {
                return Err(Error::Projection(format!("block {k} is not Hermitian")));
            }
            for (l, q) in blocks.iter().enumerate() {
                let pq = p * q;
                let want = if k == l { p.clone() } else { OperatorMatrix::zeros(dim) };
                if (&pq - &want).max_abs() > FAMILY_TOL {
                    return Err(Error::Projection(format!("blocks {k} and {l} violate P_k P_l = δ_kl P_k")));
                }
            }
            sum = &sum + p;
        }
        if (&sum - &OperatorMatrix::identity(dim)).max_abs() > FAMILY_TOL {
            return Err(Error::Projection("blocks do not sum to the identity".into()));
        }
        Ok(Self { dim, blocks })
    }

    /// Coordinate projectors onto the given index sets, which must partition
    /// `0..dim`.
    pub fn from_index_sets(dim: usize, sets: &[Vec<usize>]) -> Result<Self> {
        let mut seen = vec![false; dim];
        let mut blocks = Vec::with_capacity(sets.len());
        for set in sets {
            if set.is_empty() {
                return Err(Error::Projection("empty index set".into()));
            }
            let mut p = OperatorMatrix::zeros(dim);
            for &i in set {
                if i >= dim {
                    return Err(Error::Projection(format!("index {i} out of range for dimension {dim}")));
                }
                if seen[i] {
                    return Err(Error::Projection(format!("index {i} appears in two blocks")));
                }
                seen[i] = true;
                p.set(i, i, C64::new(1.0, 0.0));
            }
            blocks.push(p);
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Projection(format!("index {missing} is not covered")));
        }
        Self::new(blocks)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[OperatorMatrix] {
        &self.blocks
    }

    /// `Σ_k P_k A P_k`
    pub fn pinch(&self, a: &OperatorMatrix) -> Result<OperatorMatrix> {
        if a.dim() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: a.dim(),
            });
        }
        let mut out = OperatorMatrix::zeros(self.dim);
        for p in &self.blocks {
            out = &out + &(&(p * a) * p);
        }
        Ok(out)
    }

    /// `A − Σ_k P_k A P_k`
    pub fn complement(&self, a: &OperatorMatrix) -> Result<OperatorMatrix> {
        Ok(a - &self.pinch(a)?)
    }

    /// `Σ_k conj(P_k) ⊗ P_k`, the pinching as a column-stacked matrix.
    pub fn matrix(&self) -> Mat<C64> {
        let n = self.dim * self.dim;
        let mut m = Mat::<C64>::zeros(n, n);
        for p in &self.blocks {
            let k = p.conj().kron(p);
            m += k.as_mat();
        }
        m
    }

    /// The same dissipator written with jump operators `P_k` at rate `γ`.
    pub fn gksl_model(&self, gamma: f64) -> Result<GkslModel> {
        check_rate(gamma)?;
        let jumps = self.blocks.iter().map(|p| Jump::new(p.clone(), gamma)).collect();
        Ok(GkslModel::dissipative(self.dim, jumps)?.with_param("gamma", gamma))
    }
}

fn check_rate(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::Projection(format!("rate must be positive, got {gamma}")))
    }
}

fn complement_matrix(p: &PinchingProjection) -> Mat<C64> {
    let n = p.dim * p.dim;
    Mat::<C64>::identity(n, n) - p.matrix()
}

/// `(L, L♯)` with `L = L♯ = −γ(id − 𝒫)`.
pub fn projection_generator(p: &PinchingProjection, gamma: f64) -> Result<(Superoperator, Superoperator)> {
    check_rate(gamma)?;
    let m = complement_matrix(p) * faer::Scale(C64::new(-gamma, 0.0));
    let l = Superoperator::from_matrix(p.dim, m.clone(), SuperRole::Generator, None)?;
    let ls = Superoperator::from_matrix(p.dim, m, SuperRole::AdjointGenerator, None)?;
    Ok((l, ls))
}

/// `𝒫 + e^{−γt}(id − 𝒫)`; `t = ∞` gives `𝒫`.
pub fn projection_propagator(p: &PinchingProjection, gamma: f64, t: f64) -> Result<Superoperator> {
    check_rate(gamma)?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::Time(t));
    }
    let decay = (-gamma * t).exp();
    let m = p.matrix() + complement_matrix(p) * faer::Scale(C64::new(decay, 0.0));
    Superoperator::from_matrix(p.dim, m, SuperRole::Propagator, Some(t))
}

/// `A ∘∞ B = AB − 𝒫⊥[A] 𝒫⊥[B]`
pub fn limit_product_pinching(a: &OperatorMatrix, b: &OperatorMatrix, p: &PinchingProjection) -> Result<OperatorMatrix> {
    let pa = p.complement(a)?;
    let pb = p.complement(b)?;
    Ok(&(a * b) - &(&pa * &pb))
}

/// `𝒫[𝒫A·𝒫B] + 𝒫⊥[𝒫⊥A·𝒫B + 𝒫A·𝒫⊥B]` for an arbitrary idempotent
/// superoperator `𝒫`.
pub fn limit_product_general(a: &OperatorMatrix, b: &OperatorMatrix, projection: &Superoperator) -> Result<OperatorMatrix> {
    let m = projection.matrix();
    let defect = (&(m * m) - m).norm_max();
    if defect > 1e-10 * m.norm_max().max(1.0) {
        return Err(Error::Projection(format!("superoperator is not idempotent (defect {defect:.3e})")));
    }
    let pa = projection.apply(a)?;
    let pb = projection.apply(b)?;
    let qa = a - &pa;
    let qb = b - &pb;
    let kept = projection.apply(&(&pa * &pb))?;
    let mixed = &(&qa * &pb) + &(&pa * &qb);
    let mixed = &mixed - &projection.apply(&mixed)?;
    Ok(&kept + &mixed)
}

/// Decides `A ∘∞ B = AB` for every probe `B` and cross-checks the answer
/// against `𝒫⊥[A] = 0`.
pub fn proposition_membership(a: &OperatorMatrix, p: &PinchingProjection, probe_basis: &OperatorBasis) -> Result<bool> {
    let needed = p.dim * p.dim;
    if probe_basis.dim() != p.dim || probe_basis.len() < needed {
        return Err(Error::IncompleteProbeBasis {
            found: if probe_basis.dim() == p.dim { probe_basis.len() } else { 0 },
            needed,
        });
    }
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let by_products = probe_basis.elements().iter().try_fold(true, |acc, b| {
        let diff = &limit_product_pinching(a, b, p)? - &(a * b);
        Ok::<bool, Error>(acc && diff.norm() <= 1e-10 * scale * b.norm())
    })?;
    let by_complement = p.complement(a)?.norm() <= 1e-10 * scale;
    if by_products != by_complement {
        return Err(Error::Projection(
            "product test and complement test disagree on membership".into(),
        ));
    }
    Ok(by_products)
}

/// Long-time state of the 3-level model that dephases level 0 from the
/// block `{1, 2}`.
pub fn three_level_asymptotics(rho: &DensityState, gamma: f64) -> Result<DensityState> {
    check_rate(gamma)?;
    if rho.dim() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            found: rho.dim(),
        });
    }
    let p = three_level_projection();
    DensityState::new(p.pinch(rho.matrix())?)
}

/// Blocks `{|0⟩⟨0|, |1⟩⟨1| + |2⟩⟨2|}`.
pub fn three_level_projection() -> PinchingProjection {
    PinchingProjection::from_index_sets(3, &[vec![0], vec![1, 2]]).expect("valid partition")
}
