fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(hcmu_lab::cli::run(&args));
}
