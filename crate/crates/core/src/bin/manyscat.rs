fn main() {
    std::process::exit(manyscat::scene_io::cli_main(std::env::args_os()));
}
