use clap::Parser;
use mep_qlab_cli::{configure_threads, run, Args};
use std::process::ExitCode;

fn main() -> ExitCode {
    let args = Args::parse();
    let result = configure_threads().and_then(|()| run(&args));
    match result {
        Ok(summary) => {
            for c in &summary.criteria {
                println!("{} criterion {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.title);
                for check in c.checks.iter().filter(|k| !k.pass) {
                    println!("  {}: {:e} (threshold {:e})", check.name, check.value, check.threshold);
                }
            }
            if summary.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("mep-qlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
