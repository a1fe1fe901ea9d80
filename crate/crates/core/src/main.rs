fn main() {
    std::process::exit(magic_ladder::cli::dispatch(std::env::args_os()));
}
