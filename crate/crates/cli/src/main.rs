fn main() {
    std::process::exit(sobstab::run(std::env::args_os()));
}
