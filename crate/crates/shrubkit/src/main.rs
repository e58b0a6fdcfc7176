fn main() {
    let (code, out) = shrubkit::cli::run(std::env::args_os());
    if !out.is_empty() {
        if code == 2 || code == 3 {
            eprintln!("{out}");
        } else {
            println!("{out}");
        }
    }
    std::process::exit(code);
}
