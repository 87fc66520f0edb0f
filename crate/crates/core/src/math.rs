//! Float math for the `no_std` build, backed by libm.
//!
//! Only the handful of transcendentals the solvers actually use. All of
//! libm's implementations are pure Rust, so results are identical across
//! platforms, which keeps file outputs byte-reproducible.

/// Extension trait supplying the `f64` math methods that live in `std`
/// but not in `core`.
pub trait F64Ext {
    fn powf(self, y: f64) -> f64;
    fn sqrt(self) -> f64;
    fn exp(self) -> f64;
    fn ln(self) -> f64;
    fn floor(self) -> f64;
    fn ceil(self) -> f64;
    fn sin(self) -> f64;
    fn cos(self) -> f64;
    /// Integer power by repeated squaring; exact for small exponents.
    fn powi_(self, n: i32) -> f64;
}

impl F64Ext for f64 {
    #[inline]
    fn powf(self, y: f64) -> f64 {
        libm::pow(self, y)
    }
    #[inline]
    fn sqrt(self) -> f64 {
        libm::sqrt(self)
    }
    #[inline]
    fn exp(self) -> f64 {
        libm::exp(self)
    }
    #[inline]
    fn ln(self) -> f64 {
        libm::log(self)
    }
    #[inline]
    fn floor(self) -> f64 {
        libm::floor(self)
    }
    #[inline]
    fn ceil(self) -> f64 {
        libm::ceil(self)
    }
    #[inline]
    fn sin(self) -> f64 {
        libm::sin(self)
    }
    #[inline]
    fn cos(self) -> f64 {
        libm::cos(self)
    }
    #[inline]
    fn powi_(self, n: i32) -> f64 {
        let mut base = if n < 0 { 1.0 / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = 1.0;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }
}
