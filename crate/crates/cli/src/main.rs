fn main() -> std::process::ExitCode {
    stokes_cli::run()
}
