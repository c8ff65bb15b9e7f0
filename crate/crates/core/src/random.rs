//! Random operators, states and GKSL models for property tests and
//! benchmarks.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::operator::{DensityState, OperatorMatrix};
use crate::superop::{GkslModel, Jump};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_operator<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(dim, |_, _| gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> OperatorMatrix {
    random_operator(rng, dim).hermitian_part()
}

/// Full-rank density matrix `G G† / Tr[G G†]`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityState {
    let g = random_operator(rng, dim);
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    DensityState::new(rho.scale_re(1.0 / tr).hermitian_part()).expect("Wishart sample is a valid state")
}

/// GKSL model with a random Hamiltonian of scale `h_scale` and `jumps`
/// random jump operators with rates in `[0.2, 1]`.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, dim: usize, jumps: usize, h_scale: f64) -> Result<GkslModel> {
    let h = random_hermitian(rng, dim).scale_re(h_scale);
    let list = (0..jumps)
        .map(|_| {
            let op = random_operator(rng, dim);
            let norm = op.norm();
            Jump::new(op.scale_re(1.0 / norm), rng.random_range(0.2..1.0))
        })
        .collect();
    GkslModel::new(h, list)
}
