//! Exact arithmetic and certificates for extrinsic rational approximation.
//!
//! Given a point `x` on a fractal (the limit set of a finite similarity IFS)
//! or on the unit circle, an *extrinsic* approximation is a rational point
//! `p/q` close to `x` that lies outside the set. This crate builds such
//! approximations and checks every claim it makes with exact arithmetic:
//!
//! * [`exact`]: big rationals, real quadratic numbers `(a + b√D)/c` with exact
//!   sign, rational intervals, and refinable target points.
//! * [`contfrac`]: certified continued fractions, convergents and
//!   semiconvergents.
//! * [`lattice`]: good pairs of simultaneous approximations found by height
//!   enumeration, the progressions `r_0 + i·r_∞`, and their quality bounds.
//! * [`rap`]: roughly arithmetic progressions, their certificates and searches.
//! * [`ifs`]: exact iterated function systems, open set condition, covers,
//!   membership, porosity and segment scans.
//! * [`extrinsic`]: the approximation pipelines, segment and circle
//!   obstructions, and the circle census.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod contfrac;
pub mod exact;
pub mod extrinsic;
pub mod ifs;
pub mod lattice;
pub mod rap;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

pub use exact::{Coordinate, DigitGenerator, DigitStream, QuadScalar, RationalInterval, TargetPoint};
