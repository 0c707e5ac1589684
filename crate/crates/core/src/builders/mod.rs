//! Fixture constructors, seeded random generators and brute-force oracles.

pub mod fixtures;
pub mod oracle;
pub mod random;
