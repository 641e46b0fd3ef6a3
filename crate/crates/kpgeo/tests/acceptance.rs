use std::process::ExitCode;

use kpgeo::acceptance::{run, select};

fn main() -> ExitCode {
    let only = std::env::var("KPGEO_ONLY").ok();
    let mut failed = 0;
    for c in select(only.as_deref()) {
        let r = run(c);
        println!("{}", r.line());
        if !r.passed {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        eprintln!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
