//! CSV emitters. Floats are written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::ensemble::{summarize, ConditionalLaw, SurvivalCurve};
use crate::error::Result;

/// Formats `v` with 17 significant digits (`NaN`/`inf` spelled out).
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn write(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, body)?;
    Ok(())
}

/// `t,p_hat,stderr`
pub fn survival_csv(curve: &SurvivalCurve) -> String {
    let mut s = String::from("t,p_hat,stderr\n");
    for ((t, p), e) in curve.times.iter().zip(&curve.survival).zip(&curve.stderr) {
        let _ = writeln!(s, "{},{},{}", num(*t), num(*p), num(*e));
    }
    s
}

/// `bin_lo,bin_hi,count,density` for coordinate `coord`.
pub fn law_csv(law: &ConditionalLaw, coord: usize) -> String {
    let mut s = String::from("bin_lo,bin_hi,count,density\n");
    if let Some(h) = law.histograms.get(coord) {
        for ((e, c), d) in h.edges.windows(2).zip(&h.counts).zip(h.densities()) {
            let _ = writeln!(s, "{},{},{},{}", num(e[0]), num(e[1]), c, num(d));
        }
    }
    s
}

/// File name for a checkpoint law, e.g. `law_t20.csv`, `law_t0.5.csv`.
pub fn law_file_name(t: f64, coord: usize, dim: usize) -> String {
    let base = format!("{t}");
    if dim == 1 {
        format!("law_t{base}.csv")
    } else {
        format!("law_t{base}_x{}.csv", coord + 1)
    }
}

/// `t,n_survivors,mean,var,se_mean,se_var` (with a `coord` column when d > 1).
/// Checkpoints with fewer than two survivors get empty moment fields.
pub fn moments_csv(laws: &[ConditionalLaw], dim: usize) -> String {
    let multi = dim > 1;
    let mut s = String::from(if multi {
        "t,coord,n_survivors,mean,var,se_mean,se_var\n"
    } else {
        "t,n_survivors,mean,var,se_mean,se_var\n"
    });
    for law in laws {
        let summary = summarize(law).ok();
        for k in 0..dim {
            let prefix = if multi {
                format!("{},{},{}", num(law.t), k + 1, law.n_survivors)
            } else {
                format!("{},{}", num(law.t), law.n_survivors)
            };
            match &summary {
                Some(m) => {
                    let m = m[k];
                    let _ = writeln!(s, "{prefix},{},{},{},{}", num(m.mean), num(m.var), num(m.se_mean), num(m.se_var));
                }
                None => {
                    let _ = writeln!(s, "{prefix},,,,");
                }
            }
        }
    }
    s
}

/// `index,numeric_eigenvalue,analytic_eigenvalue_if_known,abs_error`
pub fn spectrum_csv(numeric: &[f64], analytic: Option<&[f64]>) -> String {
    let mut s = String::from("index,numeric_eigenvalue,analytic_eigenvalue_if_known,abs_error\n");
    for (i, v) in numeric.iter().enumerate() {
        match analytic.and_then(|a| a.get(i)) {
            Some(a) => {
                let _ = writeln!(s, "{i},{},{},{}", num(*v), num(*a), num((v - a).abs()));
            }
            None => {
                let _ = writeln!(s, "{i},{},,", num(*v));
            }
        }
    }
    s
}

/// `y,kappa_tilde,kappa`
pub fn kappa_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut s = String::from("y,kappa_tilde,kappa\n");
    for (y, kt, k) in rows {
        let _ = writeln!(s, "{},{},{}", num(*y), num(*kt), num(*k));
    }
    s
}

/// `time,x_1,…,x_d`
pub fn path_csv(times: &[f64], states: &[Vec<f64>]) -> String {
    let d = states.first().map_or(0, Vec::len);
    let mut s = String::from("time");
    for k in 1..=d {
        let _ = write!(s, ",x_{k}");
    }
    s.push('\n');
    for (t, x) in times.iter().zip(states) {
        s.push_str(&num(*t));
        for v in x {
            s.push(',');
            s.push_str(&num(*v));
        }
        s.push('\n');
    }
    s
}

pub fn write_file(dir: &Path, name: &str, body: &str) -> Result<()> {
    write(&dir.join(name), body)
}
