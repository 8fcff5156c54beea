mod bench;
mod run;
mod verify;

pub use bench::{bench_cases, cmd_bench, BenchArgs, BenchCase, CaseResult, Suite};
pub use run::{cmd_run, seeded_jacobian_check};
pub use verify::{cmd_verify, verify_file, VerifyArgs, VerifyOutcome, DECAY_TOL};
