//! Exact moments, approximations and distributional results for the site
//! frequency spectrum of the Bolthausen–Sznitman coalescent, together with
//! the simulators and exact small-sample oracles used to check them.
//!
//! The modules build on each other: [`specfun`] and [`quad`] supply special
//! functions and adaptive quadrature, [`moments`] evaluates the exact
//! integrals, [`approx`] the closed-form approximations, [`dist`] the laws of
//! large-family branch lengths, and [`simulate`] the stochastic and Markov
//! chain references. [`validation`] bundles the acceptance checks.

pub mod approx;
pub mod dist;
pub mod error;
pub mod moments;
pub mod quad;
pub mod simulate;
pub mod specfun;
pub mod validation;

pub use approx::{ApproxVariant, Regime};
pub use dist::{JointNormalization, LargeFamilyChain, RootEdgeLaw};
pub use error::{Error, Result};
pub use moments::{CoalescentQuery, PairQuery, PdFunctional, SecondMomentMode};
pub use quad::{IntegralResult, QuadratureSpec};
pub use validation::{CriterionReport, ValidationConfig};
