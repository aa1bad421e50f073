/// Number of interior grid points `p = i / N` scanned for the peak.
pub const PEAK_GRID_POINTS: usize = 10_000;

/// Grid argmax of `W_f(p) = -f'(p) p (1 - p)`, with `f'` taken by central
/// differences.
pub fn peak_location(f: impl Fn(f64) -> f64) -> f64 {
    let h = 1e-7;
    peak_location_with_derivative(|p| {
        let lo = (p - h).max(p * 0.5);
        let hi = (p + h).min(0.5 * (p + 1.0));
        (f(hi) - f(lo)) / (hi - lo)
    })
}

/// Grid argmax of `W_f(p)` given `f'` directly. Ties resolve to the smallest `p`.
pub fn peak_location_with_derivative(df: impl Fn(f64) -> f64) -> f64 {
    let n = PEAK_GRID_POINTS as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 1..PEAK_GRID_POINTS {
        let p = i as f64 / n;
        let w = -df(p) * p * (1.0 - p);
        if w > best.1 {
            best = (p, w);
        }
    }
    best.0
}
