//! Adaptive Simpson quadrature on boxes (1-d and nested 2-d).

const INITIAL_PANELS: usize = 256;
const MAX_DEPTH: u32 = 48;

fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps || !delta.is_finite() {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}

/// ∫_a^b f with relative tolerance `rtol` (relative to a coarse first pass).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rtol: f64) -> f64 {
    let h = (b - a) / INITIAL_PANELS as f64;
    let nodes: Vec<f64> = (0..=2 * INITIAL_PANELS).map(|i| f(a + 0.5 * h * i as f64)).collect();
    let coarse: Vec<f64> = (0..INITIAL_PANELS)
        .map(|p| h / 6.0 * (nodes[2 * p] + 4.0 * nodes[2 * p + 1] + nodes[2 * p + 2]))
        .collect();
    let total: f64 = coarse.iter().sum();
    let eps = rtol * total.abs().max(f64::MIN_POSITIVE) / INITIAL_PANELS as f64;
    (0..INITIAL_PANELS)
        .map(|p| {
            let lo = a + h * p as f64;
            simpson_rec(
                &f,
                lo,
                lo + h,
                nodes[2 * p],
                nodes[2 * p + 1],
                nodes[2 * p + 2],
                coarse[p],
                eps,
                MAX_DEPTH,
            )
        })
        .sum()
}

/// ∫∫ f over `[a0,b0] × [a1,b1]`, by nesting the 1-d rule.
pub fn adaptive_simpson_2d<F: Fn(f64, f64) -> f64>(f: F, lo: [f64; 2], hi: [f64; 2], rtol: f64) -> f64 {
    adaptive_simpson(|x| adaptive_simpson(|y| f(x, y), lo[1], hi[1], rtol), lo[0], hi[0], rtol)
}
