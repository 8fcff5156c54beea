//! Command-line front end for `olfkit`: single runs, the benchmark matrix
//! and trajectory verification.

pub mod commands;
pub mod config;
pub mod trajectory_csv;

use olfkit::integrate::Status;

/// Exit code for a configuration, schema or IO error.
pub const EXIT_CONFIG: u8 = 1;

/// Exit code for a solver status: 0 Converged, 2 SingularStall or
/// HorizonReached, 3 StepFailure or DomainViolation.
pub fn status_exit_code(status: Status) -> u8 {
    match status {
        Status::Converged => 0,
        Status::SingularStall | Status::HorizonReached => 2,
        Status::StepFailure | Status::DomainViolation => 3,
    }
}
