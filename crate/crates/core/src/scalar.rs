//! Scalar abstraction for overlap metrics.

use num_traits::{FromPrimitive, Num};
use std::fmt::Debug;

/// Numeric type an overlap score can be evaluated in.
///
/// Implemented for `f32`, `f64` and `Ratio<u64>`; the rational instance gives
/// exact comparisons between candidate spans.
pub trait Scalar: Num + Copy + PartialOrd + FromPrimitive + Debug {}

impl<T> Scalar for T where T: Num + Copy + PartialOrd + FromPrimitive + Debug {}

/// Multiset overlap between a predicted and a gold token bag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Overlap {
    /// Size of the multiset intersection.
    pub common: usize,
    /// Number of predicted tokens.
    pub predicted: usize,
    /// Number of gold tokens.
    pub gold: usize,
}

impl Overlap {
    pub fn new(common: usize, predicted: usize, gold: usize) -> Self {
        debug_assert!(common <= predicted && common <= gold);
        Overlap {
            common,
            predicted,
            gold,
        }
    }

    /// Harmonic mean of precision and recall.
    ///
    /// Two empty bags agree (1), one empty bag scores 0. The non-empty case is
    /// evaluated as `2PR / (P + R)` in that operation order so `f64` results
    /// are bit-identical to the reference Python scorers.
    pub fn f1<T: Scalar>(&self) -> T {
        if self.predicted == 0 || self.gold == 0 {
            return if self.predicted == self.gold {
                T::one()
            } else {
                T::zero()
            };
        }
        if self.common == 0 {
            return T::zero();
        }
        let precision = self.precision::<T>();
        let recall = self.recall::<T>();
        let two = T::one() + T::one();
        (two * precision * recall) / (precision + recall)
    }

    pub fn precision<T: Scalar>(&self) -> T {
        ratio(self.common, self.predicted)
    }

    pub fn recall<T: Scalar>(&self) -> T {
        ratio(self.common, self.gold)
    }
}

fn ratio<T: Scalar>(num: usize, den: usize) -> T {
    if den == 0 {
        return T::zero();
    }
    let n = T::from_usize(num).expect("count representable in scalar");
    let d = T::from_usize(den).expect("count representable in scalar");
    n / d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ExactScore;

    #[test]
    fn empty_bags() {
        assert_eq!(Overlap::new(0, 0, 0).f1::<f64>(), 1.0);
        assert_eq!(Overlap::new(0, 0, 2).f1::<f64>(), 0.0);
        assert_eq!(Overlap::new(0, 3, 0).f1::<f64>(), 0.0);
    }

    #[test]
    fn exact_and_float_agree() {
        let o = Overlap::new(1, 1, 2);
        assert_eq!(o.f1::<ExactScore>(), ExactScore::new(2, 3));
        assert!((o.f1::<f64>() - 2.0 / 3.0).abs() < 1e-15);
        assert!((o.f1::<f32>() - 2.0f32 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn rational_matches_closed_form() {
        // 2PR/(P+R) == 2c/(p+g)
        for c in 1..6usize {
            for p in c..8 {
                for g in c..8 {
                    let f = Overlap::new(c, p, g).f1::<ExactScore>();
                    assert_eq!(f, ExactScore::new(2 * c as u64, (p + g) as u64));
                }
            }
        }
    }
}
