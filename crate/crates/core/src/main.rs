fn main() -> std::process::ExitCode {
    deformnet::cli::main()
}
