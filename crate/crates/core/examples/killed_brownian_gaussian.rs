//! Brownian motion killed at rate y²/2 has a standard normal quasi-limiting law.

use qsmc::ensemble::{ks_statistic, normal_cdf, run_ensemble, summarize, Binning, EnsembleConfig, InitialState};
use qsmc::model::{build_killing, SearchBox};
use qsmc::dynamics::{Scheme, SchemeConfig};
use qsmc::Model;

fn main() -> qsmc::Result<()> {
    let m = Model::gaussian(vec![0.0], vec![1.0])?;
    let k = build_killing(&m.target, &m.drift, None, &SearchBox::cube(1, -50.0, 50.0)?, 1e-10)?;
    println!("K = {}, κ(2) = {}", k.shift_k(), k.kappa(&[2.0]));

    let cfg = EnsembleConfig {
        replicas: 100_000,
        horizon: 10.0,
        checkpoints: vec![1.0, 2.0, 5.0, 10.0],
        scheme: SchemeConfig { dt: 0.01, scheme: Scheme::ExactBm },
        seed: 7,
        initial: InitialState::Point(vec![0.0]),
        binning: Binning::FreedmanDiaconis,
    };
    let r = run_ensemble(&m.drift, &k, &cfg)?;
    println!("{:>5} {:>9} {:>9} {:>9} {:>7}", "t", "survivors", "mean", "var", "KS");
    for law in &r.laws {
        let s = summarize(law)?[0];
        let ks = ks_statistic(&law.coordinate(0), normal_cdf(0.0, 1.0))?;
        println!("{:>5} {:>9} {:>9.4} {:>9.4} {:>7.4}", law.t, law.n_survivors, s.mean, s.var, ks);
    }
    Ok(())
}
