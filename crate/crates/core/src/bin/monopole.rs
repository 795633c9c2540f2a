use std::process::ExitCode;

fn main() -> ExitCode {
    if let Some(n) = std::env::var("MONOPOLE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: MONOPOLE_THREADS ignored: {e}");
        }
    }
    ExitCode::from(monopole_core::cli::run(std::env::args_os()) as u8)
}
