use clap::Parser;

fn main() -> std::process::ExitCode {
    runlog::run(runlog::Cli::parse())
}
