use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let status = specbench_cli::run(
        std::env::args_os(),
        std::env::vars_os().filter_map(|(k, v)| Some((k.into_string().ok()?, v.into_string().ok()?))).collect(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    ExitCode::from(status as u8)
}
