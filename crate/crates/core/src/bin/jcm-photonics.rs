fn main() {
    let code = jcm_photonics::cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
