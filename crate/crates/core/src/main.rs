fn main() {
    std::process::exit(poisson_vqa::cli::main_with_args(std::env::args_os()));
}
