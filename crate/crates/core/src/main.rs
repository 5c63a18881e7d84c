fn main() {
    std::process::exit(mloewner::cli::dispatch(std::env::args_os()));
}
