//! Scalar special functions used by the BER oracles.

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

/// Uncoded Gray-mapped QPSK bit error rate on AWGN with matched filtering.
pub fn qpsk_ber(eb_n0: f64) -> f64 {
    q_function(libm::sqrt(2.0 * eb_n0))
}

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * libm::log10(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    

    #[test]
    fn q_function_values() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        assert!((q_function(3.090232306167813) - 1e-3).abs() < 1e-9);
        assert!((q_function(-1.0) + q_function(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn db_roundtrip() {
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((linear_to_db(db_to_linear(-3.3)) + 3.3).abs() < 1e-12);
    }
}
