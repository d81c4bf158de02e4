//! q,k-deformed gamma and beta functions.
//!
//! The crate is layered bottom-up: [`qcore`] holds q-number arithmetic and
//! Jackson integration, [`qproducts`] the shifted products, [`qexp`] the two
//! q,k-exponentials, [`gammabeta`] the closed and product forms of
//! `Γ_{q,k}` and `B_{q,k}`, [`integral_reps`] their Jackson-integral
//! representations and [`identities`] the bilateral identities behind them.
//! [`suites`] bundles everything into named verification suites.

pub mod error;
pub mod gammabeta;
pub mod grid;
pub mod identities;
pub mod integral_reps;
pub mod qcore;
pub mod qexp;
pub mod qproducts;
pub mod report;
pub mod suites;

pub use error::{ProductSide, QkError, Result};
pub use grid::GridSpec;
pub use identities::verify_identity;
pub use qcore::{Approx, QKContext, Truncation};
pub use report::{AggregateReport, CheckRecord, IdentityReport, Status};
pub use suites::{run_all, run_suite, SuiteConfig};
