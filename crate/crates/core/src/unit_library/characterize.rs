// SPDX-License-Identifier: Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{derive_seed, exact_result, ErrorMetrics, OpKind, UnitCandidate};

/// Input spaces up to this many combinations are enumerated exhaustively.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 24;
/// Uniform samples drawn for larger input spaces.
pub const SAMPLE_COUNT: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingPolicy {
    Exhaustive,
    Sampled { seed: u64, samples: u64 },
}

impl SamplingPolicy {
    /// Exhaustive when the input space fits the limit, seeded sampling otherwise.
    pub fn for_candidate(c: &UnitCandidate, library_seed: u64) -> Self {
        if input_combinations(c) <= EXHAUSTIVE_LIMIT {
            SamplingPolicy::Exhaustive
        } else {
            SamplingPolicy::Sampled {
                seed: derive_seed(library_seed, &c.id),
                samples: SAMPLE_COUNT,
            }
        }
    }
}

pub fn input_combinations(c: &UnitCandidate) -> u64 {
    1u64 << c.group().input_space_bits()
}

#[derive(Default)]
struct Accumulator {
    n: u64,
    abs_sum: u128,
    sq_sum: u128,
    rel_sum: f64,
    rel_max: f64,
    abs_max: u64,
}

impl Accumulator {
    #[inline]
    fn push(&mut self, approx: u64, exact: u64) {
        let err = approx.abs_diff(exact);
        let rel = err as f64 / exact.max(1) as f64;
        self.n += 1;
        self.abs_sum += err as u128;
        self.sq_sum += (err as u128) * (err as u128);
        self.rel_sum += rel;
        if rel > self.rel_max {
            self.rel_max = rel;
        }
        self.abs_max = self.abs_max.max(err);
    }

    fn finish(self) -> ErrorMetrics {
        let n = self.n.max(1) as f64;
        ErrorMetrics {
            mae: self.abs_sum as f64 / n,
            mre: self.rel_sum / n,
            mse: self.sq_sum as f64 / n,
            wce: self.rel_max,
            wae: self.abs_max as f64,
        }
    }
}

/// Error metrics of `c` against exact arithmetic.
///
/// The exhaustive walk visits `a` in the outer loop and `b` in the inner loop,
/// which fixes the floating-point summation order of the relative errors.
pub fn characterize_errors(c: &UnitCandidate, policy: &SamplingPolicy) -> ErrorMetrics {
    let unit = c.compile();
    let mut acc = Accumulator::default();
    let b_count = if c.kind == OpKind::Sqrt { 1 } else { 1u64 << c.width_b };
    match *policy {
        SamplingPolicy::Exhaustive => {
            for a in 0..(1u64 << c.width_a) {
                for b in 0..b_count {
                    acc.push(unit.apply(a, b), exact_result(c.kind, a, b));
                }
            }
        }
        SamplingPolicy::Sampled { seed, samples } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let a = rng.gen_range(0..(1u64 << c.width_a));
                let b = rng.gen_range(0..b_count);
                acc.push(unit.apply(a, b), exact_result(c.kind, a, b));
            }
        }
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unit_library::{GroupKey, Scheme};

    #[test]
    fn exact_unit_has_zero_error() {
        let c = UnitCandidate::exact(GroupKey::add(8));
        let e = characterize_errors(&c, &SamplingPolicy::Exhaustive);
        assert_eq!(e, ErrorMetrics::default());
        assert!(e.is_zero());
    }

    #[test]
    fn truncated2_add8_mae_and_worst_case() {
        // Brute-force reference: error is (a mod 4) + (b mod 4).
        let mut sum = 0u64;
        let mut worst = 0u64;
        for a in 0..256u64 {
            for b in 0..256u64 {
                let err = a % 4 + b % 4;
                sum += err;
                worst = worst.max(err);
            }
        }
        let expected_mae = sum as f64 / 65536.0;
        assert_eq!(expected_mae, 3.0);
        assert_eq!(worst, 6);

        let c = UnitCandidate::new(GroupKey::add(8), Scheme::Truncated, 2);
        let e = characterize_errors(&c, &SamplingPolicy::Exhaustive);
        assert_eq!(e.mae, expected_mae);
        assert_eq!(e.wae, 6.0);
        assert!(e.wce >= e.mre);
    }

    #[test]
    fn sampled_policy_is_reproducible() {
        let c = UnitCandidate::new(GroupKey::add(16), Scheme::LowerOr, 6);
        let p = SamplingPolicy::for_candidate(&c, 42);
        assert!(matches!(p, SamplingPolicy::Sampled { .. }));
        let once = characterize_errors(&c, &p);
        let twice = characterize_errors(&c, &p);
        assert_eq!(once, twice);
        assert!(once.mae > 0.0);
    }

    #[test]
    fn policy_cutoff() {
        let add12 = UnitCandidate::exact(GroupKey::add(12));
        assert_eq!(SamplingPolicy::for_candidate(&add12, 0), SamplingPolicy::Exhaustive);
        let sqrt = UnitCandidate::exact(GroupKey::sqrt(18));
        assert_eq!(input_combinations(&sqrt), 1 << 18);
    }
}
