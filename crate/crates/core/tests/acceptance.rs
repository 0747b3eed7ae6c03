//! Runs every headline reproduction check and prints one line per check.
//! Built without the libtest harness so the table shows up in plain
//! `cargo test` output.

use std::process::ExitCode;

use lingame_core::demo;

fn main() -> ExitCode {
    let checks = demo::run_all();
    for c in &checks {
        println!("{c}");
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    println!("{} of {} checks passed", checks.len() - failed.len(), checks.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed checks: {failed:?}");
        ExitCode::FAILURE
    }
}
