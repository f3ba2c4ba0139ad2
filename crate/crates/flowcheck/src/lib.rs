//! Exact-arithmetic toolkit for sequence-indexed flow formulations of the
//! travelling-salesman problem: model generation (x / y / z dimensions),
//! counterexample instance families, fractional flow construction, constraint
//! checking over arbitrary-precision rationals, and exact integer solving.

pub mod assignment;
pub mod blp;
pub mod checker;
pub mod config;
pub mod constraint;
pub mod error;
pub mod expressiveness;
pub mod instance;
pub mod lpio;
pub mod manifest;
pub mod model_x;
pub mod oracle;
pub mod rational;
pub mod valleys;
pub mod varkey;
