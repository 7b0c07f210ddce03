fn main() {
    std::process::exit(annealing_cli::run(std::env::args_os()));
}
