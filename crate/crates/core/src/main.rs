fn main() {
    std::process::exit(rectiso::cli::run(std::env::args_os()));
}
