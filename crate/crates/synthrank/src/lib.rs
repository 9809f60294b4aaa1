//! Role-aware command-line client for the generator-ranking ledger.
//!
//! Verbs cover the full workflow: key generation, network initialization,
//! registration of indicators/weights/measurements, rank computation,
//! audits, and reads of everything registered. Write verbs sign with a
//! role's key, submit a batch, and poll its status to a terminal state;
//! read verbs print registered content back in input-file shape so a
//! register/read pair round-trips exactly.
//!
//! Exit codes: 0 success, 1 user error (flags, files, unknown purposes),
//! 2 node rejection (refused submission, failed execution, timeout).

pub mod cli;
pub mod commands;
pub mod endpoint;
pub mod error;
pub mod keys;

use clap::Parser;

/// Parses `std::env::args`, runs the verb, and returns the process exit
/// code. Kept in the library so the binary stays a one-liner.
pub fn run_from_args() -> i32 {
    match cli::Cli::try_parse() {
        Ok(parsed) => match cli::run(parsed) {
            Ok(()) => 0,
            Err(error) => {
                eprintln!("error: {error}");
                error.exit_code()
            }
        },
        Err(parse_error) => {
            // --help/--version land here too; they are not user errors.
            let code = if parse_error.use_stderr() { 1 } else { 0 };
            let _ = parse_error.print();
            code
        }
    }
}
