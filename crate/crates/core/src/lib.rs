//! Maximal quadratic-free sets `C_Γ = {(x, y) : Γ(β)^T x - β^T y >= 0 ∀β ∈ D^m}`:
//! Γ families, sample-certified maximality and polyhedrality checks, exposing
//! sequences, reduction of quadratics to `‖x‖ <= ‖y‖`, and intersection cuts.

pub mod cover;
pub mod cuts;
pub mod error;
pub mod exposing;
pub mod fixtures;
pub mod gamma;
pub mod geometry;
pub mod linalg;
pub mod lp;
pub mod mesh;
pub mod reduction;
pub mod sphere;
pub mod verifier;

pub use cover::{build_cover, Anchor, IsometricCover};
pub use cuts::{build_cut, step_length, validate_cut, IntersectionCut, SimplicialCone};
pub use error::{Error, Result};
pub use exposing::{exposing_point, find_exposing_vector, trace_convergence, ConvergenceTrace, ExposingWitness};
pub use gamma::{Gamma, GammaSpec};
pub use geometry::{in_q, in_q_beta, HalfspaceCoeff, QFreeSet, Refinement, SplitPoint, Strategy, UnitVector};
pub use geometry::{TAU_CERT, TAU_ISO, TAU_MEMBER, TAU_UNIT};
pub use mesh::{slice_mesh, Mesh, SliceSpec};
pub use reduction::{homogenize, pullback_inequality, reduce, to_standard_form, QuadraticProblem, StandardFormMap};
pub use sphere::{SampleLayout, SampleSet};
pub use verifier::{
    check_nonexpansive, check_origin_exclusion, check_polyhedrality, classify_pair, cone_membership, maximality_verdict,
    VerificationReport,
};
