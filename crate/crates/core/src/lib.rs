//! Computational tools around polynomial progressions in the primes.

pub mod polyalg;
pub mod localfactors;
pub mod convexlat;
pub mod cyclic;
pub mod sieve;
pub mod gowers;
pub mod pet;
pub mod structure;
pub mod progressions;
pub mod acceptance;
