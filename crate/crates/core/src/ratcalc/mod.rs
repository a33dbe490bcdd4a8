//! Rational, Laurent and bivariate function algebra.
//!
//! Rational functions are split by pole location into one piece per domain
//! component and each piece is precomposed with the inverse Möbius
//! coordinate, giving a function on the closed polydisk that agrees with the
//! original on the image of the domain.

mod laurent;
mod lift;
mod multi;
mod poly;
mod supnorm;

pub use laurent::{
    fejer_means, laurent_coeffs_matrix, laurent_coeffs_of_realization, laurent_eval, laurent_eval_matrix,
    LaurentPoly, LAURENT_AGREEMENT_TOL, LAURENT_MAX_SAMPLES,
};
pub use lift::{
    compose_mobius, eval_lifted, gamma_operators, gamma_point, lift_to_polydisk, partial_fractions_grouped,
    LiftArgument, LiftedFunction, COMMUTATION_TOL, POLE_MARGIN, POLE_SNAP_TOL,
};
pub use multi::{taylor_coeffs_ratio2, taylor_ratio2_dense, DivBy, MultiPoly};
pub use poly::{
    clustered_roots, ratfun_eval_at_matrix, MatRatFun1, Poly1, RatFun1, RatFunFile, CANCEL_TOL, ROOT_CLUSTER_TOL,
};
pub use supnorm::{
    sup_norm_boundary, sup_norm_with, PointFunction, ScalarFn, SupEstimate, SupRegion, SUP_REFINE_ROUNDS,
};
