//! Exact symbolic computation in the differential Ore extension
//! `A_h = k[x][t; h d/dx]`: normal-form arithmetic, the automorphism group,
//! derivations in Nowicki form, Ore localization at psi = gcd(h, h'), and
//! decision/description procedures for the isotropy groups of derivations.

pub mod aut;
pub mod coeff;
pub mod constraint;
pub mod cyclotomic;
pub mod deriv;
pub mod error;
pub mod frac;
pub mod isotropy;
mod linalg;
pub mod localization;
pub mod ore;
pub mod poly;
pub mod selftest;

pub use aut::{
    aut_group, field_pow, normalize_h, validate, validate_param, validate_symbolic, AutGroupInfo,
    Automorphism, IsoWitness, Validity,
};
pub use coeff::{FieldCoeff, Rational};
pub use constraint::{resolve_constraint, UnitConstraint};
pub use cyclotomic::{cyclotomic_poly, euler_phi, Scalar, UnitParam};
pub use deriv::{
    conjugate, decompose_images, derivation_check, dp_decompose, exp_lnd, is_lnd, loc_decompose,
    transport_derivation, Derivation, LocSplit,
};
pub use error::{Error, Result};
pub use frac::{AField, Frac};
pub use isotropy::{
    check, check_oracle, delta_torsion, describe, equality_constraint, lnd_isotropy,
    vanishing_constraint, DescribeBounds, IsotropyDescription, MembershipReport, RRule,
    TorsionKind,
};
pub use localization::{
    commutator_decompose, is_constant_kernel, w_star, LocElement, PsiFraction, SpecialPoly,
};
pub use ore::{AlgebraContext, OreElement};
pub use poly::{Poly, QPoly};
