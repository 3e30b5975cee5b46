use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut out = std::io::stdout();
    let mut err = std::io::stderr();
    // An escaped panic means a broken internal invariant, reported as exit 2.
    let code = catch_unwind(AssertUnwindSafe(|| parafree::cli::run(&args, &mut out, &mut err)))
        .unwrap_or_else(|_| {
            let _ = writeln!(
                std::io::stderr(),
                "{}",
                serde_json::json!({"error": "internal", "message": "internal invariant violation"})
            );
            parafree::cli::EXIT_INTERNAL
        });
    std::process::exit(code);
}
