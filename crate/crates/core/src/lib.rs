//! Rational matrix functions on bounded intersections of disks.
//!
//! The crate covers domains made of disks, holes and half-planes
//! ([`cdomain`]), dense complex kernels ([`numlin`]), rational and Laurent
//! function algebra with polydisk lifts ([`ratcalc`]), contractive
//! realizations ([`realize`]), operator-class membership and Agler-norm
//! bounds ([`agler`]), and exact-arithmetic Bohr-radius certificates
//! ([`bohr`]).

pub mod agler;
pub mod bohr;
pub mod cdomain;
pub mod error;
pub mod numlin;
pub mod ratcalc;
pub mod realize;

pub use cdomain::{DomainComponent, DomainSpec, MobiusMap, PencilPair};
pub use error::{Error, Result};
pub use numlin::{CMatrix, C64};
pub use ratcalc::{LaurentPoly, LiftedFunction, MatRatFun1, MultiPoly, Poly1, RatFun1};
pub use realize::Colligation;
