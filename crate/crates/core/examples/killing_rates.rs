//! κ̃ and the shift K for the built-in models, tabulated on a few points.

use qsmc::catalog::OuParams;
use qsmc::model::{build_killing, kappa_tilde_direct, kappa_tilde_log, SearchBox};
use qsmc::Model;

fn main() -> qsmc::Result<()> {
    let models = [
        Model::gaussian(vec![0.0], vec![1.0])?,
        Model::gaussian_matched(vec![0.0], vec![1.0])?,
        Model::exp_tail(1.0)?,
        Model::cauchy(),
        Model::ou_example(OuParams::figure1())?,
    ];
    let search = SearchBox::cube(1, -50.0, 50.0)?;
    let ys = [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0];
    for m in &models {
        let k = build_killing(&m.target, &m.drift, None, &search, 1e-10)?;
        println!("{}: K = {:.6}, argmin κ̃ = {:?}", m.name, k.shift_k(), k.minimizer());
        for &y in &ys {
            let direct = kappa_tilde_direct(&m.target, &m.drift, &[y])?;
            let log = kappa_tilde_log(&m.target, &m.drift, &[y])?;
            println!("  y = {y:>5}: κ̃ = {direct:>12.6}  (log form {log:>12.6})  κ = {:>12.6}", k.kappa(&[y]));
        }
        for w in k.warnings() {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
