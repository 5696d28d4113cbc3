fn main() -> std::process::ExitCode {
    ugkp::cli::main()
}
