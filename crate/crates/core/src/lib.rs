//! K-theory of Cantor minimal systems and their ℤ₂ and circle extensions.
//!
//! The crate is organised bottom-up:
//!
//! * [`exact`]: symbolic reals over declared irrational generators,
//!   circle values, supernatural numbers.
//! * [`cantor`]: odometers, clopen towers, ℤ₂ skew products, induced
//!   systems.
//! * [`kgroup`]: K⁰ groups, order-isomorphism decisions, K⁰/2K⁰ and the
//!   quotient by the skew-product subgroup.
//! * [`cocycle`]: circle cocycles, coboundary and minimality tests,
//!   perturbation and the Bott element.
//! * [`crossed`]: projection construction and verification, traces,
//!   crossed-product invariants.
//! * [`circlemaps`]: PL circle homeomorphisms, rotation numbers, orbit
//!   simulation.

pub mod cantor;
mod error;
pub mod circlemaps;
pub mod cocycle;
pub mod crossed;
pub mod exact;
pub mod kgroup;

pub use error::{Error, Result};
