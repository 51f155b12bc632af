//! The OU example: start at x0 = 3 and watch the conditioned law settle on
//! N(−1, 2). Writes the same artifacts as `qsmc simulate --preset figure1`.
//!
//!     cargo run --release --example figure1 -- [replicas] [out_dir]

use std::path::PathBuf;

use qsmc::runner::{self, Command, Options, RunConfig};

fn main() -> qsmc::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = RunConfig::preset("figure1")?;
    if let Some(n) = args.next() {
        cfg.ensemble.replicas = n.parse().map_err(|_| qsmc::Error::Config(format!("bad replica count {n}")))?;
    }
    let opts = Options {
        out: Some(args.next().map(PathBuf::from).unwrap_or_else(|| "out/figure1".into())),
        ..Options::default()
    };
    let outcome = runner::run(Command::Simulate, &cfg, &opts)?;
    for line in outcome.lines {
        println!("{line}");
    }
    Ok(())
}
