//! The Q-process of the OU example is a Langevin diffusion targeting π²/γ,
//! here N(−2, 4/3). Long-run moments from many independent runs.

use qsmc::catalog::OuParams;
use qsmc::dynamics::{langevin_drift, long_run_moments, SchemeConfig};
use qsmc::spectral::ou_qprocess;
use qsmc::Model;

fn main() -> qsmc::Result<()> {
    let p = OuParams::figure1();
    let m = Model::ou_example(p)?;
    let drift = langevin_drift(&m.target, &m.drift)?;
    let (mean, var) = ou_qprocess(&p)?;
    let r = long_run_moments(&drift, &[3.0], 200.0, &SchemeConfig::euler(0.01), 200, 0.5, 1)?;
    println!("oracle   mean {mean:.4}  var {var:.4}");
    println!(
        "estimate mean {:.4} ± {:.4}  var {:.4} ({} runs)",
        r.mean[0], r.se_mean[0], r.var[0], r.replicas
    );
    Ok(())
}
