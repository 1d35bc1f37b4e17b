fn main() -> std::process::ExitCode {
    granular_gates::cli::main()
}
