fn main() -> std::process::ExitCode {
    pdfgraph::cli::run(std::env::args_os())
}
