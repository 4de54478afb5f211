use rand::Rng;

use crate::error::{PupError, Result};

/// Uniform negative item for `user` by rejection sampling.
/// `positives` must be sorted ascending and deduplicated.
pub fn sample_negative<R: Rng + ?Sized>(
    user: usize,
    positives: &[usize],
    item_count: usize,
    rng: &mut R,
) -> Result<usize> {
    if positives.len() >= item_count {
        return Err(PupError::NoNegative(user));
    }
    loop {
        let j = rng.random_range(0..item_count);
        if positives.binary_search(&j).is_err() {
            return Ok(j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn forced_outcome() {
        let mut r = rng::seeded(1);
        for _ in 0..100 {
            assert_eq!(sample_negative(0, &[0], 2, &mut r).unwrap(), 1);
        }
    }

    #[test]
    fn saturated_user_errors() {
        let mut r = rng::seeded(1);
        assert!(matches!(
            sample_negative(3, &[0, 1, 2], 3, &mut r),
            Err(PupError::NoNegative(3))
        ));
    }

    #[test]
    fn uniform_over_eligible() {
        let mut r = rng::seeded(2);
        let positives: Vec<usize> = (10..20).collect();
        let mut counts = [0usize; 20];
        for _ in 0..10_000 {
            counts[sample_negative(0, &positives, 20, &mut r).unwrap()] += 1;
        }
        assert!(counts[10..].iter().all(|&c| c == 0));
        for &c in &counts[..10] {
            let f = c as f64 / 10_000.0;
            assert!((f - 0.1).abs() <= 0.02, "frequency {f}");
        }
        // chi-square with 9 dof; 27.88 is the 0.999 quantile
        let chi2: f64 = counts[..10]
            .iter()
            .map(|&c| (c as f64 - 1000.0).powi(2) / 1000.0)
            .sum();
        assert!(chi2 < 27.88, "chi2 {chi2}");
    }
}
