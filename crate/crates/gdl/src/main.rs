fn main() {
    std::process::exit(gdl::run(std::env::args_os()));
}
