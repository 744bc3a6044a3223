use num_complex::Complex64;

use super::primes_up_to;

/// `Σ_{p <= X} (1 - Re(ν(p) p^{-it})) / p`; `nu[n]` holds `ν(n)` (index 0 unused).
pub fn pretentious_distance(nu: &[Complex64], t: f64, x: u64) -> f64 {
    assert!(nu.len() as u64 > x, "value table shorter than X");
    primes_up_to(x)
        .into_iter()
        .map(|p| {
            let pf = p as f64;
            let twist = Complex64::from_polar(1.0, -t * pf.ln());
            (1.0 - (nu[p as usize] * twist).re) / pf
        })
        .sum()
}

/// Minimum of [`pretentious_distance`] over a grid of twists.
pub fn pretentious_m(nu: &[Complex64], x: u64, t_grid: &[f64]) -> f64 {
    t_grid
        .iter()
        .map(|&t| pretentious_distance(nu, t, x))
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

/// `avg_{X <= L < 2X} |avg_{L <= n < L + len} ν(n)|²`, a desk-scale diagnostic
/// for short-interval cancellation.
pub fn short_interval_mean_square(nu: &[Complex64], x: u64, len: u64) -> f64 {
    assert!(x >= 1 && len >= 1);
    assert!(nu.len() as u64 >= 2 * x + len, "value table too short");
    let window: Complex64 = (x..x + len).map(|n| nu[n as usize]).sum();
    let mut s = window;
    let mut acc = 0.0;
    for l in x..2 * x {
        acc += (s / len as f64).norm_sqr();
        s += nu[(l + len) as usize] - nu[l as usize];
    }
    acc / x as f64
}
