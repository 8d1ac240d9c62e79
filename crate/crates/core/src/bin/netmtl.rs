fn main() {
    std::process::exit(netmtl::cli::main_from_env());
}
