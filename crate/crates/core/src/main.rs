fn main() {
    std::process::exit(mfcorr::cli::run(std::env::args_os()));
}
