fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(vem_harness::cli::run(&args));
}
