//! Thin wrappers over `libm` so the crate produces identical results
//! with and without `std`.

pub(crate) use libm::{cos, exp, fabs, hypot, log, sin, sqrt};

/// `x^n` for integer `n` by binary exponentiation.
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    if n < 0 {
        return 1.0 / powi(x, -n);
    }
    let mut base = x;
    let mut exp = n as u32;
    let mut acc = 1.0;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base *= base;
        exp >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powi_matches_definition() {
        assert_eq!(powi(2.0, 0), 1.0);
        assert_eq!(powi(2.0, 10), 1024.0);
        assert!((powi(3.0, -2) - 1.0 / 9.0).abs() < 1e-15);
        assert!((powi(1.5, 7) - 1.5f64.powi(7)).abs() < 1e-12);
    }
}
