fn main() -> std::process::ExitCode {
    clmls::experiment::cli::main()
}
