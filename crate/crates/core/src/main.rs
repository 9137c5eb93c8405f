fn main() -> std::process::ExitCode {
    kritzinger::cli::main_entry()
}
