//! Richardson extrapolation for second-order discretizations.

/// Extrapolates values computed on grids refined by a factor of two
/// (`values[k]` at spacing `h / 2^k`), eliminating the `h²`, `h⁴`, ...
/// error terms in turn. A single value is returned unchanged.
pub fn extrapolate_h2(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "nothing to extrapolate");
    let mut table = values.to_vec();
    let mut factor = 4.0;
    while table.len() > 1 {
        for k in 0..table.len() - 1 {
            table[k] = (factor * table[k + 1] - table[k]) / (factor - 1.0);
        }
        table.pop();
        factor *= 4.0;
    }
    table[0]
}

/// Observed convergence order from errors on grids refined by two.
pub fn observed_order(coarse_error: f64, fine_error: f64) -> f64 {
    (coarse_error / fine_error).log2()
}
