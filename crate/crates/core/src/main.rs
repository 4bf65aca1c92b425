use multirisk::cli::{parse_args, run};

fn main() {
    let plan = match parse_args(std::env::args_os()) {
        Ok(p) => p,
        Err(e) => e.exit(),
    };
    std::process::exit(run(&plan));
}
