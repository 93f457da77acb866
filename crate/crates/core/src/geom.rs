//! Small geometric helpers shared across modules.

/// Volume (m-dimensional measure) of the unit sphere S^m(1) in R^{m+1}.
///
/// Vol(S^m) = 2 pi^{(m+1)/2} / Gamma((m+1)/2), evaluated with exact
/// half-integer Gamma values. m = 1 gives 2*pi, m = 2 gives 4*pi.
pub fn unit_sphere_volume(m: u32) -> f64 {
    let k = m + 1; // Gamma argument is k/2
    let pi = std::f64::consts::PI;
    2.0 * pi.powf(k as f64 / 2.0) / gamma_half_integer(k)
}

/// Gamma(k/2) for integer k >= 1, exact recurrences.
fn gamma_half_integer(k: u32) -> f64 {
    let pi = std::f64::consts::PI;
    if k % 2 == 0 {
        // Gamma(n) = (n-1)!
        let n = k / 2;
        (1..n).map(|i| i as f64).product::<f64>()
    } else {
        // Gamma(1/2 + n) = (2n-1)!! / 2^n * sqrt(pi)
        let n = (k - 1) / 2;
        let mut v = pi.sqrt();
        for i in 0..n {
            v *= 0.5 + i as f64;
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_volumes_match_closed_forms() {
        assert!((unit_sphere_volume(0) - 2.0).abs() < 1e-14); // two points
        assert!((unit_sphere_volume(1) - 2.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_volume(2) - 4.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-13);
    }
}
