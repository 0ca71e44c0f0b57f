fn main() {
    std::process::exit(chatsumm::cli::run(std::env::args_os()));
}
