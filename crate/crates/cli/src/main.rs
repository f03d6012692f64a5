fn main() {
    std::process::exit(frac_talenti_cli::run(std::env::args_os()));
}
