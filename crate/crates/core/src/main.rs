use clap::Parser;
use gridmargin::cli::{run, StudyConfig};

fn main() {
    let config = StudyConfig::parse();
    let code = run(
        &config,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
