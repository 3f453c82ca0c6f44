fn main() {
    std::process::exit(bolab_cli::cli_run(std::env::args_os()));
}
