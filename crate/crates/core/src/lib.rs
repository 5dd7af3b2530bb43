//! Exact q-expansions of generalized elliptic lambda functions.
//!
//! The crate works over cyclotomic fields `Q(ζ_N)` and covers the weight-2
//! functions `E(τ; r, s)`, the lambda functions built from them, the monic
//! polynomial `Ψ_k` over `Z[ζ][j]`, and ball-arithmetic certification of
//! values at imaginary quadratic points.

pub mod arith;
pub mod cm;
pub mod cyclotomic;
pub mod eisenstein;
pub mod error;
pub mod hp;
pub mod lambda;
pub mod modpoly;
pub mod qseries;
pub mod sl2;

pub use cm::{cm_certify, e_value, fundamental_reduce, j_value, lambda_value, CMPoint, CmCertificate};
pub use cyclotomic::{CycField, CycNum, CycPolynomial};
pub use eisenstein::{brace_mu, e_diff_series, e_series, index_transform, theta_leading, IndexPair};
pub use error::{Error, Result};
pub use hp::HPComplex;
pub use lambda::{c_constant, decompose_basis, lambda_basis, lambda_composed, lambda_k_series, BasisPair};
pub use modpoly::{express_in_j, j_series, psi_poly, PsiPoly};
pub use qseries::QSeries;
pub use sl2::{coset_reps, lift_sl2, SL2Mat};
