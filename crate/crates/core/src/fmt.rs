//! Round-trip float formatting for CSV/OBJ output.

use std::fmt;

/// Displays an `f64` with the shortest representation that parses back to
/// the same bits, switching to exponent notation for very small or large
/// magnitudes.
#[derive(Debug, Clone, Copy)]
pub struct Float(pub f64);

pub fn float(v: f64) -> Float {
    Float(v)
}

impl fmt::Display for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.0;
        let a = v.abs();
        if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
            write!(f, "{v}")
        } else {
            write!(f, "{v:e}")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn short_forms() {
        assert_eq!(float(0.5).to_string(), "0.5");
        assert_eq!(float(1e-20).to_string(), "1e-20");
        assert_eq!(float(-3.0).to_string(), "-3");
    }

    proptest! {
        #[test]
        fn parses_back_bit_exact(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let back: f64 = float(v).to_string().parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
