//! Scalar abstraction for the numeric core.
//!
//! Everything numerical in this crate is generic over [`Scalar`], which is
//! implemented for `f32` and `f64`. Concrete `f64` aliases for the main
//! domain types live at the crate root.

use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar usable throughout the crate: `f32` or `f64`.
///
/// Bundles the `num-traits` bounds the numeric routines need plus a
/// standard-normal sampler so simulation code can stay generic without
/// carrying `rand_distr` bounds everywhere.
pub trait Scalar:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + core::fmt::Debug
    + core::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Draw one standard-normal variate from `rng`.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossless-enough conversion from `f64` for constants and tolerances.
    fn from_f64_c(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant converts to Scalar")
    }

    /// Terms folded into one running product before taking a single log in
    /// the likelihood hot loop. Sized so the product cannot overflow when
    /// every factor passes [`Scalar::ln_chunk_guards`].
    const LN_CHUNK: u32;

    /// `(lo, hi)` magnitude guards: factors outside this band take a direct
    /// log instead of entering the running product.
    fn ln_chunk_guards() -> (Self, Self);
}

impl Scalar for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    const LN_CHUNK: u32 = 16;

    fn ln_chunk_guards() -> (Self, Self) {
        (1e-18, 1e18)
    }
}

impl Scalar for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    const LN_CHUNK: u32 = 4;

    fn ln_chunk_guards() -> (Self, Self) {
        (1e-8, 1e8)
    }
}

/// Mean of squares, used for the constant-variance MLE.
pub(crate) fn mean_sq<S: Scalar>(xs: &[S]) -> S {
    if xs.is_empty() {
        return S::zero();
    }
    let mut acc = S::zero();
    for &x in xs {
        acc += x * x;
    }
    acc / S::from_usize(xs.len()).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_sq_hand_value() {
        let xs = [1.0f64, 2.0, 3.0];
        assert!((mean_sq(&xs) - 14.0 / 3.0).abs() < 1e-15);
        assert_eq!(mean_sq::<f64>(&[]), 0.0);
    }

    #[test]
    fn normal_sampler_is_generic() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let a: f64 = Scalar::standard_normal(&mut rng);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let b: f64 = Scalar::standard_normal(&mut rng);
        assert_eq!(a, b);
        let _: f32 = Scalar::standard_normal(&mut rng);
    }
}
