//! Summary statistics for survivor samples.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n − F|`.
pub fn ks_statistic(samples: &[f64], reference_cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = reference_cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        d.max(above).max(below)
    });
    Ok(d.clamp(0.0, 1.0))
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_n − G_m|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// CDF of `N(mean, var)`.
pub fn normal_cdf(mean: f64, var: f64) -> impl Fn(f64) -> f64 {
    let n = Normal::new(mean, var.sqrt()).expect("positive variance");
    move |x| n.cdf(x)
}

/// Least-squares line through `(t, log v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub window: (f64, f64),
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits `log(values) ≈ intercept + slope·t` over `t ∈ [lo, hi]`.
pub fn fit_exp_rate(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit> {
    let (lo, hi) = window;
    let werr = |reason: String| Error::Window { lo, hi, reason };
    if times.len() != values.len() {
        return Err(werr("times and values differ in length".into()));
    }
    let mut pts = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t >= lo && t <= hi {
            if !(v > 0.0) {
                return Err(werr(format!("nonpositive value {v} at t = {t}")));
            }
            pts.push((t, v.ln()));
        }
    }
    if pts.len() < 3 {
        return Err(werr(format!("{} points in window, need 3", pts.len())));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let r_squared = if syy == 0.0 { 1.0 } else { (sty * sty) / (stt * syy) };
    Ok(RateFit {
        window,
        slope,
        intercept,
        r_squared,
        points: pts.len(),
    })
}

/// Mean, unbiased variance and jackknife standard errors of one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub var: f64,
    pub se_mean: f64,
    /// NaN with only two samples (the leave-one-out variance is undefined).
    pub se_var: f64,
}

/// Moments of `xs`. The samples are sorted first so the result does not depend
/// on their order.
pub fn moments(xs: &[f64]) -> Result<Moments> {
    if xs.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: xs.len(),
        });
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let (s1, s2) = v.iter().fold((0.0, 0.0), |(a, b), x| {
        let d = x - mean;
        (a + d, b + d * d)
    });
    let var = (s2 - s1 * s1 / n) / (n - 1.0);
    // Jackknife: the leave-one-out mean reproduces s/√n exactly; the
    // leave-one-out variances have closed forms in the centered sums.
    let se_mean = (var / n).sqrt();
    let se_var = if v.len() < 3 {
        f64::NAN
    } else {
        let loo: Vec<f64> = v
            .iter()
            .map(|x| {
                let d = x - mean;
                let (a, b) = (s1 - d, s2 - d * d);
                (b - a * a / (n - 1.0)) / (n - 2.0)
            })
            .collect();
        let mbar = loo.iter().sum::<f64>() / n;
        ((n - 1.0) / n * loo.iter().map(|l| (l - mbar).powi(2)).sum::<f64>()).sqrt()
    };
    Ok(Moments {
        n: v.len(),
        mean,
        var,
        se_mean,
        se_var,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binning {
    FreedmanDiaconis,
    Bins(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `counts.len() + 1` increasing edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Count per unit length, normalized by `total`.
    pub fn densities(&self) -> Vec<f64> {
        let total = self.total().max(1) as f64;
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(c, e)| *c as f64 / (total * (e[1] - e[0])))
            .collect()
    }
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q * (v.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 < v.len() {
        v[i] + frac * (v[i + 1] - v[i])
    } else {
        v[i]
    }
}

const MAX_BINS: usize = 10_000;

pub fn histogram(xs: &[f64], binning: Binning) -> Result<Histogram> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let (lo, hi) = (v[0], v[v.len() - 1]);
    let bins = match binning {
        Binning::Bins(b) if b > 0 => b,
        Binning::Bins(_) => return Err(Error::Parameter("histogram needs at least one bin".into())),
        Binning::FreedmanDiaconis => {
            let iqr = quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25);
            let width = 2.0 * iqr / (v.len() as f64).cbrt();
            if width > 0.0 && hi > lo {
                (((hi - lo) / width).ceil() as usize).clamp(1, MAX_BINS)
            } else {
                // degenerate spread: square-root rule
                ((v.len() as f64).sqrt().ceil() as usize).max(1)
            }
        }
    };
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0u64; bins];
    for x in &v {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(Histogram { edges, counts })
}
