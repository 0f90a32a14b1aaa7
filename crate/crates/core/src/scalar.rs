//! Scalar abstraction shared by every real-valued quantity in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type usable for scores, proportions and interval bounds.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).unwrap_or_else(Self::infinity)
    }

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn hundred() -> Self {
        Self::from_f64_lossy(100.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Round half away from zero to `places` decimals.
///
/// The value is nudged by a relative epsilon first so that decimal ties
/// that are not representable in binary (`0.125` is, `0.345` is not) round
/// the way a reader of the printed decimal expects.
pub fn round_half_up<S: Scalar>(value: S, places: u32) -> S {
    let scale = S::from_f64_lossy(10f64.powi(places as i32));
    let eps = S::from_f64_lossy(1e-9);
    let scaled = value * scale;
    let nudged = scaled + scaled.signum() * eps;
    nudged.round() / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_half_up() {
        assert_eq!(round_half_up(0.125f64, 2), 0.13);
        assert_eq!(round_half_up(0.345f64, 2), 0.35);
        assert_eq!(round_half_up(0.3449f64, 2), 0.34);
        assert_eq!(round_half_up(12.34565f64, 4), 12.3457);
        assert_eq!(round_half_up(0.5f32, 0), 1.0);
    }
}
