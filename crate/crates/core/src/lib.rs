//! Bending hyperbolic planes along finite measured laminations.
//!
//! The crate builds pleated surfaces in H³ by folding the plane `z = 0` of the
//! hyperboloid model along finitely many weighted geodesics, measures their
//! bending with polygonal approximations, and provides the combinatorial and
//! measure-theoretic tools (train tracks, truncation at π, convergence checks)
//! used to study sequences of such surfaces.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod hypgeom;
pub mod lam2;
pub mod pleat;
pub mod rquotient;
pub mod seqlab;
pub mod tolerance;
pub mod traintrack;
