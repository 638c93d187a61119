//! Empirical side of the expansion-translation error bounds: random
//! scenario sampling for the three translation chains, acceleration
//! error measurement against the closed-form bounds, leading-constant
//! estimation with machine-readable reports, and the property-suite
//! driver behind `lexp verify`.

pub mod experiments;
pub mod report;
pub mod verify;
