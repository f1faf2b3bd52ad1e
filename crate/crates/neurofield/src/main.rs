use clap::Parser;
use neurofield::commands::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr());
    if let Err(e) = run(cli, &mut out, &mut err) {
        drop(out);
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
