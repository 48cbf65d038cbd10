fn main() {
    std::process::exit(tendon_biped::cli::main_with_args(std::env::args_os()));
}
