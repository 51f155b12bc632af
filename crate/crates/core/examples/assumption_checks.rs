//! Numerical checks of integrability, the κ̃ lower bound and the
//! spectral-gap condition. The OU example with τ² < σ²/2 breaks the lower bound.

use qsmc::catalog::OuParams;
use qsmc::model::{check_assumptions, SearchBox};
use qsmc::Model;

fn main() -> qsmc::Result<()> {
    let quad = SearchBox::cube(1, -40.0, 40.0)?;
    let models = [
        Model::ou_example(OuParams::figure1())?,
        Model::ou_example(OuParams { tau2: 1.0, ..OuParams::figure1() })?,
        Model::cauchy(),
        Model::exp_tail(1.0)?,
    ];
    for m in &models {
        let r = check_assumptions(&m.target, &m.drift, &quad, 1e-10)?;
        println!(
            "{}: passed {}, ∫π²/γ = {:.6e}, inf κ̃ = {:.6}, sup π/γ = {:?}, gap condition {}",
            m.name,
            r.passed(),
            r.l2_integral,
            r.kappa_lower_bound,
            r.sup_ratio,
            r.spectral_gap_condition
        );
        for v in r.violations.iter().chain(&r.warnings) {
            println!("  {v}");
        }
    }
    Ok(())
}
