//! Low spectrum of the discretized killed OU generator against K + 3n/8
//! (the closed form is the unkilled spectrum 3n/8 shifted by K)
//! and the Langevin generator it translates to.

use qsmc::catalog::OuParams;
use qsmc::model::{build_killing, SearchBox};
use qsmc::spectral::{discretize_generator, discretize_langevin, eigenfunction_residual, ou_spectrum, GridSpec};
use qsmc::Model;

fn main() -> qsmc::Result<()> {
    let p = OuParams::figure1();
    let m = Model::ou_example(p)?;
    let k = build_killing(&m.target, &m.drift, None, &SearchBox::cube(1, -50.0, 50.0)?, 1e-10)?;
    let (analytic, gap) = ou_spectrum(&p, 4)?;
    for n in [500, 1000, 2000] {
        let grid = GridSpec::new(-20.0, 15.0, n)?;
        let killed = discretize_generator(&m.target, &m.drift, &k, grid)?.low_eigenvalues(4)?;
        let lang = discretize_langevin(&m.target, &m.drift, grid)?.low_eigenvalues(4)?;
        let res = eigenfunction_residual(&m.target, &m.drift, &k, k.shift_k(), grid)?;
        println!("n = {n}, residual of the ground relation {res:.3e}");
        for i in 0..4 {
            println!(
                "  λ{i}: killed {:.6}  closed form {:.6}  Langevin + K {:.6}",
                killed[i],
                analytic[i] + k.shift_k(),
                lang[i] + k.shift_k()
            );
        }
    }
    println!("spectral gap {gap}");
    Ok(())
}
