use super::features::InteractionFeatures;
use super::spacing::SpacingModel;

pub const SURVIVAL_CLAMP: f64 = 1e-12;

/// A risk score plus whether the survival probability had to be clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskScore {
    pub value: f64,
    pub clamped: bool,
}

/// `log10(ln 0.5 / ln p)`: zero at the median spacing, positive when the observed spacing
/// is tighter than usual for its context.
pub fn risk_from_survival(p: f64) -> RiskScore {
    let clamped_p = p.clamp(SURVIVAL_CLAMP, 1.0 - SURVIVAL_CLAMP);
    RiskScore { value: (0.5f64.ln() / clamped_p.ln()).log10(), clamped: clamped_p != p || p.is_nan() }
}

/// Risk of observing spacing `s_star` under the conditional spacing model.
pub fn risk_score(s_star: f64, x: &InteractionFeatures, model: &SpacingModel) -> RiskScore {
    risk_from_survival(model.survival(s_star, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_scores_zero() {
        assert_eq!(risk_from_survival(0.5).value, 0.0);
    }

    #[test]
    fn analytic_inverse_scores_one() {
        // ln(0.5) / ln(0.5^0.1) = 10
        let r = risk_from_survival(0.5f64.powf(0.1));
        assert!((r.value - 1.0).abs() < 1e-9);
        assert!((0.5f64.powf(0.1) - 0.93303).abs() < 1e-5);
    }

    #[test]
    fn quarter_survival() {
        let r = risk_from_survival(0.25);
        assert!((r.value - 0.5f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn extremes_are_clamped_and_flagged() {
        let hi = risk_from_survival(1.0);
        assert!(hi.clamped && hi.value.is_finite());
        let lo = risk_from_survival(0.0);
        assert!(lo.clamped && lo.value.is_finite());
        assert!(!risk_from_survival(0.3).clamped);
    }

    #[test]
    fn strictly_increasing_in_survival() {
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=99 {
            let m = risk_from_survival(k as f64 / 100.0).value;
            assert!(m > prev);
            prev = m;
        }
    }
}
