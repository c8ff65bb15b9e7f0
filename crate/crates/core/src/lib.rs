//! Time-deformed operator products for Markovian open quantum systems and
//! their contraction in the long-time limit.

pub mod contraction;
pub mod deformed;
pub mod error;
pub mod expm;
pub mod operator;
pub mod projection;
pub mod random;
pub mod superop;
pub mod zoo;

pub use contraction::{
    contract, symbolic_bracket, symbolic_structure_constants, take_limit, weak_stats, AlgebraReport,
    ContractionReport, ExponentialPolynomial, LimitClass, LimitTensor, SymbolicTensor, TolerancePolicy, Tolerances,
};
pub use deformed::{bracket_t, structure_constants_t, DeformedProduct, TimeBracketRequest};
pub use error::{Error, Result};
pub use operator::{
    build_basis, hs_inner, structure_constants, BasisKind, DensityState, OperatorBasis, OperatorMatrix,
    StructureKind, StructureTensor,
};
pub use projection::{
    limit_product_general, limit_product_pinching, projection_generator, projection_propagator,
    proposition_membership, three_level_asymptotics, PinchingProjection,
};
pub use superop::{
    adjoint_generator, build_generator, propagate, propagator, spectral_decompose, stationary_states, GkslModel,
    Jump, SpectralData, SuperRole, Superoperator,
};
pub use zoo::{analogy_check, golden_rule_quadrature, oracle_check, ModelId, OracleSet, ZooParams};

pub use num_complex::Complex64 as C64;
