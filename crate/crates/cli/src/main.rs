use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(imhyp::main_with_args(std::env::args_os()))
}
