//! Reconstruction of Wigner symmetries on finite-dimensional complex Hilbert
//! spaces.
//!
//! A map on rank-one projections that preserves orthogonality in one
//! direction and sends one complete orthogonal system onto another is
//! induced by a unitary or an antiunitary operator. This crate recovers that
//! operator from an evaluable map ([`reconstruct_symmetry`]), recovers a
//! density operator from frame-function samples ([`fit_density`]) and
//! serializes maps and reports as canonical JSON.
//!
//! Everything is generic over the real scalar ([`Real`]); the `*F64` and
//! `*F32` aliases fix it.
//!
//! ```
//! use wignerkit::{induced_oracle, random_unitary, reconstruct_symmetry, seeded, gauge_compare};
//! use wignerkit::{CospF64, SymmetryOperatorF64, TolerancesF64};
//!
//! let tol = TolerancesF64::default();
//! let u = SymmetryOperatorF64::new(random_unitary(4, &mut seeded(1)), true, &tol).unwrap();
//! let report = reconstruct_symmetry(&induced_oracle(u.clone()), &CospF64::standard(4), 4, &tol).unwrap();
//! assert!(report.global.is_antilinear());
//! assert!(gauge_compare(&report.global, &u, &tol).unwrap());
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gleason;
pub mod linalg;
pub mod mapspec;
pub mod projspace;
pub mod rng;
pub mod scalar;
pub mod tolerance;
pub mod uhlhorn;
pub mod wigner;

pub use error::{Error, Result};
pub use gleason::{
    check_frame_additivity, conjugate_density, fit_density, frame_value, pushforward_frame,
    DensityOperator, FitReport, FrameSample,
};
pub use mapspec::{
    adversarial_oracle, induced_oracle, parse_mapspec, parse_mapspec_with, serialize_mapspec,
    serialize_report, AdversarialKind, FnMap, MapOracle, ProjectionMap, Table,
};
pub use projspace::{
    ic_family, ic_vectors, inner, is_cosp, is_orthogonal, projector, projector_of,
    random_orthogonal_pair, random_projection, random_unit_vector, random_unitary, transition,
    triple_overlap, Cosp, Projection, UnitVector,
};
pub use rng::{seeded, seeded_stream, SeededRng, PRNG_ALGORITHM};
pub use scalar::{CMatrix, CVector, Real};
pub use tolerance::Tolerances;
pub use uhlhorn::{
    align_cosp, block_operator, patch_blocks, reconstruct_symmetry, reconstruct_symmetry_with,
    restrict_to_block, verify_orth_preserving, BlockIndex, BlockOperator, PipelineFailure,
    PipelineOptions, PipelineReport, StageEntry,
};
pub use wigner::{
    apply_symmetry, detect_antilinearity, gauge_compare, gauge_defect, reconstruct_isometry,
    witness_triple, ReconstructionResult, SymmetryOperator,
};

pub type UnitVectorF64 = UnitVector<f64>;
pub type ProjectionF64 = Projection<f64>;
pub type CospF64 = Cosp<f64>;
pub type SymmetryOperatorF64 = SymmetryOperator<f64>;
pub type DensityOperatorF64 = DensityOperator<f64>;
pub type MapOracleF64 = MapOracle<f64>;
pub type TolerancesF64 = Tolerances<f64>;
pub type PipelineReportF64 = PipelineReport<f64>;

pub type UnitVectorF32 = UnitVector<f32>;
pub type ProjectionF32 = Projection<f32>;
pub type CospF32 = Cosp<f32>;
pub type SymmetryOperatorF32 = SymmetryOperator<f32>;
pub type DensityOperatorF32 = DensityOperator<f32>;
pub type MapOracleF32 = MapOracle<f32>;
pub type TolerancesF32 = Tolerances<f32>;
pub type PipelineReportF32 = PipelineReport<f32>;
