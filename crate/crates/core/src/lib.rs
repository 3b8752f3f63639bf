//! Verification workbench for binomial-coefficient series.
//!
//! The crate is organised bottom-up: [`exact`] and [`poly`] hold the exact
//! arithmetic, [`ball`] the rigorous high-precision reals, [`identity`] the
//! claim model and bundled corpus, and the verifiers ([`telescope`],
//! [`series`], [`congruence`], [`certificate`], [`pslq`]) consume them.

pub mod ball;
pub mod certificate;
pub mod closed_form;
pub mod congruence;
pub mod dsl;
pub mod error;
pub mod exact;
pub mod identity;
pub mod parallel;
pub mod poly;
pub mod pslq;
pub mod series;
pub mod telescope;

pub use error::{Error, Result};
pub use exact::Rational;
