//! The interaction kernel of the regularized nonlinearity.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::Mode;

/// `c(l, m) = l2 m2 - l1 m1`.
pub fn c_coeff(l: Mode, m: Mode) -> i64 {
    l.1 as i64 * m.1 as i64 - l.0 as i64 * m.0 as i64
}

/// Triple cutoff indicator: `0 < |l|, |m| <= N` and `|l + m| <= N`.
pub fn indicator(l: Mode, m: Mode, cutoff_n: u32) -> bool {
    let n2 = (cutoff_n as i64) * (cutoff_n as i64);
    !l.is_zero() && !m.is_zero() && l.norm2() <= n2 && m.norm2() <= n2 && (l + m).norm2() <= n2
}

/// `K^N_{l,m} = c(l,m) / (2 pi |l| |m|)` on the support of the indicator, zero elsewhere.
pub fn kernel(l: Mode, m: Mode, cutoff_n: u32) -> Result<f64> {
    if l.is_zero() {
        return Err(Error::ZeroMode((l.0, l.1)));
    }
    if m.is_zero() {
        return Err(Error::ZeroMode((m.0, m.1)));
    }
    Ok(kernel_unchecked(l, m, cutoff_n))
}

/// Same as [`kernel`] for callers that already excluded the zero mode.
#[inline]
pub fn kernel_unchecked(l: Mode, m: Mode, cutoff_n: u32) -> f64 {
    if !indicator(l, m, cutoff_n) {
        return 0.0;
    }
    let c = c_coeff(l, m);
    if c == 0 {
        return 0.0;
    }
    c as f64 / (2.0 * PI * ((l.norm2() * m.norm2()) as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ModeLattice;

    #[test]
    fn reference_values() {
        assert_eq!(kernel(Mode(1, 0), Mode(0, 1), 2).unwrap(), 0.0);
        let v = kernel(Mode(1, 0), Mode(1, 0), 2).unwrap();
        assert!((v + 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((v + 0.159155).abs() < 1e-6);
        assert_eq!(kernel(Mode(1, 0), Mode(1, 0), 1).unwrap(), 0.0);
        assert!(kernel(Mode(0, 0), Mode(1, 0), 2).is_err());
        assert!(kernel(Mode(1, 0), Mode(0, 0), 2).is_err());
    }

    #[test]
    fn exhaustive_symmetries() {
        for n in 1..=4 {
            let lat = ModeLattice::new(n).unwrap();
            for &l in lat.modes() {
                for &m in lat.modes() {
                    let v = kernel(l, m, n).unwrap();
                    assert_eq!(v, kernel(m, l, n).unwrap());
                    assert_eq!(kernel(l.swap(), m.swap(), n).unwrap(), -v);
                    assert_eq!(kernel(-l, -m, n).unwrap(), v);
                    assert!(v.abs() <= 1.0 / (2.0 * PI) + 1e-15);
                    if !indicator(l, m, n) {
                        assert_eq!(v, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn cyclic_identity() {
        // |a|^2 c(b,c) + |b|^2 c(a,c) + |c|^2 c(a,b) = 0 whenever a + b + c = 0
        for a1 in -4..=4 {
            for a2 in -4..=4 {
                for b1 in -4..=4 {
                    for b2 in -4..=4 {
                        let a = Mode(a1, a2);
                        let b = Mode(b1, b2);
                        let c = -(a + b);
                        let s = a.norm2() * c_coeff(b, c)
                            + b.norm2() * c_coeff(a, c)
                            + c.norm2() * c_coeff(a, b);
                        assert_eq!(s, 0);
                    }
                }
            }
        }
    }
}
