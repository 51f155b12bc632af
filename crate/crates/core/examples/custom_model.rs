//! A user-defined model from a JSON config: a quartic target under an OU
//! drift, checked and tabulated through the runner.

use qsmc::runner::{self, Command, Options, RunConfig};

const CONFIG: &str = r#"{
  "model": {
    "key": "custom",
    "log_density": { "value": "-x^4/4", "grad": ["-x^3"], "laplacian": "-3*x^2" },
    "potential": { "value": "-x^2/4", "grad": ["-x/2"], "laplacian": "-1/2" }
  },
  "killing": { "search_box": [-10, 10] },
  "kappa": { "lo": -3, "hi": 3, "n": 13 },
  "check": { "quad_box": [-10, 10] }
}"#;

fn main() -> qsmc::Result<()> {
    let cfg = RunConfig::from_json(CONFIG)?;
    let opts = Options {
        out: Some("out/custom".into()),
        ..Options::default()
    };
    for cmd in [Command::Check, Command::Kappa] {
        let outcome = runner::run(cmd, &cfg, &opts)?;
        for line in outcome.lines {
            println!("{line}");
        }
    }
    Ok(())
}
