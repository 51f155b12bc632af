//! The C′e^{−t·gap} bound on the distance to quasi-stationarity for a
//! N(3, 1/4) start, beside a Monte Carlo estimate of P(X_t ≤ −1 | τ∂ > t).

use qsmc::catalog::OuParams;
use qsmc::dynamics::SchemeConfig;
use qsmc::ensemble::{run_ensemble, Binning, EnsembleConfig, InitialState};
use qsmc::model::{build_killing, SearchBox};
use qsmc::spectral::{gamma_density, qsd_bound, GridSpec};
use qsmc::Model;

fn main() -> qsmc::Result<()> {
    let m = Model::ou_example(OuParams::figure1())?;
    let k = build_killing(&m.target, &m.drift, None, &SearchBox::cube(1, -50.0, 50.0)?, 1e-10)?;
    let grid = GridSpec::new(-30.0, 30.0, 6000)?;
    let psi = gamma_density(|y| -(y - 3.0) * (y - 3.0) / 0.5, &m.drift, &grid);
    let bound = qsd_bound(&psi, &m.target, &m.drift, 0.375, &grid)?;
    println!("C′ = {:.3}, bound below 0.05 from t = {:.2}", bound.c_prime, bound.time_to(0.05));

    let cfg = EnsembleConfig {
        replicas: 200_000,
        horizon: 12.0,
        checkpoints: vec![0.5, 1.0, 2.0, 4.0, 8.0, 12.0],
        scheme: SchemeConfig::euler(0.01),
        seed: 3,
        initial: InitialState::Normal { mean: vec![3.0], var: vec![0.25] },
        binning: Binning::FreedmanDiaconis,
    };
    let r = run_ensemble(&m.drift, &k, &cfg)?;
    println!("{:>5} {:>9} {:>10} {:>10}", "t", "survivors", "|P̂ − 1/2|", "bound");
    for law in &r.laws {
        let n = law.n_survivors as f64;
        let below = law.coordinate(0).iter().filter(|&&x| x <= -1.0).count() as f64;
        println!("{:>5} {:>9} {:>10.4} {:>10.4}", law.t, law.n_survivors, (below / n - 0.5).abs(), bound.at(law.t));
    }
    Ok(())
}
