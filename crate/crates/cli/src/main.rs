fn main() {
    std::process::exit(qaconv_cli::run(std::env::args_os()).code());
}
