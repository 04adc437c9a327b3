fn main() {
    std::process::exit(hdgcn::cli::run());
}
