use clap::Parser;
use orbitq::cli::{emit, execute, Cli, Command};
use orbitq::report::CommandResults;

fn main() {
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::Orbit(a)
        | Command::Infchar(a)
        | Command::Kappa(a)
        | Command::Character(a)
        | Command::Verify(a) => a.out.clone(),
    };
    let (report, code) = execute(cli);
    if let Some(report) = report {
        if let CommandResults::Verify(summary) = &report.results {
            for line in orbitq::cli::suite_lines(summary) {
                eprintln!("{line}");
            }
        }
        if let Err(e) = emit(&report, out.as_ref()) {
            eprintln!("error: cannot write report: {e}");
            std::process::exit(3);
        }
    }
    std::process::exit(code);
}
