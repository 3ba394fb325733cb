fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SKINSEG_LOG", "warn")).init();
    std::process::exit(skinseg_cli::run(std::env::args_os()));
}
