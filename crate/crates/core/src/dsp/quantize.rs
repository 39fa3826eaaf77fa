use super::ComplexSignal;
use crate::Complex64;

/// Sign of each rail, with `sign(0) = +1`.
#[inline]
pub fn sign_1bit(z: Complex64) -> Complex64 {
    let s = |v: f64| if v < 0.0 { -1.0 } else { 1.0 };
    Complex64::new(s(z.re), s(z.im))
}

/// 1-bit converter on the in-phase and quadrature rails.
pub fn quantize_1bit(x: &ComplexSignal) -> ComplexSignal {
    ComplexSignal::from_parts(x.samples().iter().map(|&z| sign_1bit(z)).collect(), x.rate())
}

#[cfg(test)]
mod tests {
    use super::*;
    
    use proptest::prelude::*;

    #[test]
    fn maps_to_rails() {
        assert_eq!(sign_1bit(Complex64::new(0.3, -0.7)), Complex64::new(1.0, -1.0));
        assert_eq!(sign_1bit(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 1.0));
        assert_eq!(sign_1bit(Complex64::new(-0.0, -2.0)), Complex64::new(1.0, -1.0));
    }

    proptest! {
        #[test]
        fn idempotent_with_power_two(v in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..64)) {
            let x = ComplexSignal::new(v.iter().map(|&(a, b)| Complex64::new(a, b)).collect(), 2).unwrap();
            let q = quantize_1bit(&x);
            prop_assert_eq!(&quantize_1bit(&q), &q);
            prop_assert!(q.samples().iter().all(|z| z.norm_sqr() == 2.0));
            prop_assert_eq!(q.mean_power(), 2.0);
        }
    }
}
