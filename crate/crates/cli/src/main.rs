fn main() { std::process::exit(diskchain_cli::run(std::env::args().collect())); }
