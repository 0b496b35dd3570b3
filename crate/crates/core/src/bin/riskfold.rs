fn main() -> std::process::ExitCode {
    riskfold::cli::main_with_args(std::env::args_os())
}
