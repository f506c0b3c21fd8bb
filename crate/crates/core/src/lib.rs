//! Exact geometry of monomial valuations under tame polynomial automorphisms.
//!
//! A *monomial valuation* on `k[x1,…,xn]` is determined by a positive weight
//! vector `α`: it sends a nonzero polynomial to the negated maximum of the
//! `α`-weighted degrees of its monomials. Tame automorphisms (compositions of
//! affine maps and elementary maps `xi ↦ xi + P(other variables)`) act on
//! these valuations by pullback, sweeping out a space of valuation points on
//! which this crate computes exactly:
//!
//! * sparse polynomial arithmetic over `ℚ` or a prime field ([`field_poly`]),
//! * automorphism words: composition, inversion, differentials, Bruhat
//!   permutations ([`tame_group`]),
//! * the valuation action, point equality, retractions onto weight space, and
//!   faithfulness witnesses ([`valuation_space`]),
//! * admissible hyperplane arrangements and local neighborhoods
//!   ([`admissible_geometry`]),
//! * point stabilizers `M_α ⋊ L_α` and sector classification ([`stabilizer`]),
//! * the log-Euclidean metric: apartment distances, angles, chain bounds, and
//!   the `n = 2` tree ([`metric`]),
//! * link graphs of directions at a valuation with girth/CAT(1) checks for
//!   `n = 3` ([`link_curvature`]),
//! * linearization of finite stabilizer subgroups by averaging ([`linearize`]).
//!
//! All algebraic predicates are exact (rational arithmetic); floating point
//! appears only in metric quantities (logarithms and angles), with explicit
//! tolerances at the call sites that compare them.

pub mod admissible_geometry;
pub mod error;
pub mod field_poly;
pub mod linearize;
pub mod link_curvature;
pub mod metric;
pub mod stabilizer;
pub mod tame_group;
pub mod valuation_space;

pub use error::{Error, Result};
pub use field_poly::{Field, Monomial, Polynomial, Scalar};
pub use tame_group::{Generator, TameWord};
pub use admissible_geometry::{AdmissibleInequality, FixedRegion, LocalCells};
pub use valuation_space::{ProjWeight, ValuationPoint, Value, Weight};
pub use stabilizer::{BlockStructure, SectorDescriptor, StabDecomposition};
pub use metric::{ChainWitness, LogPoint, MetricKind, RayDirection, X2Ball};
pub use linearize::{FiniteGroup, Linearization};
pub use link_curvature::{
    affine_words_f2, build_link, example_angles_cycle, local_rays, shear_stabilizer_f2,
    ApartmentTrace, Cat1Report, LinkEdge, LinkGraph, LinkVertex, LocalRay, OctangleReport,
};

/// Default bound on the total degree of any polynomial produced by word
/// expansion or substitution. Word expansion can blow up doubly exponentially;
/// operations that could do so take a cap and fail loudly instead of hanging.
pub const DEFAULT_DEGREE_CAP: u32 = 128;
