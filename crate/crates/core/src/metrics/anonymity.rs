use crate::error::{Error, Result};
use crate::mix::UserId;
use crate::posterior::SenderPosterior;

/// Floor applied to each suspect probability before taking the ratio.
pub const EPSILON_FLOOR: f64 = 1e-6;

/// Shannon entropy in bits; `0 log 0 = 0`.
pub fn entropy(post: &SenderPosterior) -> Result<f64> {
    post.check()?;
    Ok(entropy_bits(&post.probs))
}

/// Entropy of raw probabilities without the normalization check.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Size of a uniform anonymity set with the same entropy.
pub fn effective_anonymity_set(bits: f64) -> f64 {
    bits.exp2()
}

/// Likelihood difference `|ln(p0 / p1)|` for the two suspects.
pub fn likelihood_diff(post: &SenderPosterior, suspects: (UserId, UserId)) -> Result<f64> {
    if suspects.0 == suspects.1 {
        return Err(Error::config("suspects must be distinct"));
    }
    epsilon(post.get(suspects.0), post.get(suspects.1))
}

/// `|ln(max(p0, floor) / max(p1, floor))|`. Messages neither suspect could
/// have sent carry no information and are reported as [`Error::NoSuspectMass`]
/// so callers can exclude and count them.
pub fn epsilon(p0: f64, p1: f64) -> Result<f64> {
    if p0 <= 0.0 && p1 <= 0.0 {
        return Err(Error::NoSuspectMass);
    }
    Ok((p0.max(EPSILON_FLOOR).ln() - p1.max(EPSILON_FLOOR).ln()).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mix::MessageId;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn post(p: Vec<f64>) -> SenderPosterior {
        SenderPosterior::from_probs(MessageId(0), p).unwrap()
    }

    #[test]
    fn known_answers() {
        assert_eq!(entropy(&post(vec![1.0 / 1024.0; 1024])).unwrap(), 10.0);
        assert_eq!(entropy(&post(vec![0.0, 1.0, 0.0])).unwrap(), 0.0);
        assert_abs_diff_eq!(effective_anonymity_set(5.824), 56.64, epsilon = 0.01);
        assert_abs_diff_eq!(effective_anonymity_set(5.859), 58.04, epsilon = 0.01);
    }

    #[test]
    fn unnormalized_is_rejected() {
        let p = SenderPosterior::new(MessageId(0), vec![0.5, 0.4].into());
        assert!(matches!(entropy(&p), Err(Error::Unnormalized(_))));
    }

    #[test]
    fn epsilon_known_answers() {
        let p = post(vec![0.75, 0.25]);
        assert_eq!(likelihood_diff(&post(vec![0.5, 0.5]), (UserId(0), UserId(1))).unwrap(), 0.0);
        assert_abs_diff_eq!(likelihood_diff(&p, (UserId(0), UserId(1))).unwrap(), 3f64.ln(), epsilon = 1e-12);
        assert!(likelihood_diff(&p, (UserId(0), UserId(0))).is_err());
        assert!(matches!(epsilon(0.0, 0.0), Err(Error::NoSuspectMass)));
        assert_abs_diff_eq!(epsilon(0.01, 0.0).unwrap(), (0.01f64 / 1e-6).ln(), epsilon = 1e-9);
    }

    fn simplex() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, 1..40).prop_filter_map("non-zero", |v| {
            let s: f64 = v.iter().sum();
            (s > 1e-6).then(|| v.iter().map(|x| x / s).collect())
        })
    }

    proptest! {
        #[test]
        fn entropy_bounds(p in simplex()) {
            let h = entropy_bits(&p);
            let support = p.iter().filter(|&&x| x > 0.0).count() as f64;
            prop_assert!(h >= -1e-12);
            prop_assert!(h <= support.log2() + 1e-9);
        }

        #[test]
        fn epsilon_is_symmetric(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assume!(a > 0.0 || b > 0.0);
            prop_assert_eq!(epsilon(a, b).unwrap(), epsilon(b, a).unwrap());
        }
    }

    #[test]
    fn entropy_is_maximal_only_when_uniform() {
        let k = 8;
        let uniform = entropy_bits(&vec![1.0 / k as f64; k]);
        assert_abs_diff_eq!(uniform, 3.0, epsilon = 1e-12);
        let mut skew = vec![1.0 / k as f64; k];
        skew[0] += 0.01;
        skew[1] -= 0.01;
        assert!(entropy_bits(&skew) < uniform);
    }
}
