use std::io;

fn main() {
    env_logger::init();
    let code = auction_sensitivity_cli::run_args(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
