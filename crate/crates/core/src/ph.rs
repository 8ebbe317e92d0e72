//! Log-rank test and the single-covariate Cox model for a constant log hazard ratio.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rmst::TestResult;
use crate::survival::{Arm, TrialDataset};

/// Pooled risk sets at one distinct event time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoSampleEventTime {
    pub time: f64,
    pub at_risk: usize,
    pub at_risk_experimental: usize,
    pub events: usize,
    pub events_experimental: usize,
}

impl TwoSampleEventTime {
    fn at_risk_control(&self) -> usize {
        self.at_risk - self.at_risk_experimental
    }
}

/// Distinct pooled event times with per-arm risk sets; events at a time are
/// counted before that time's censorings leave the risk set.
pub fn two_sample_table(dataset: &TrialDataset) -> Vec<TwoSampleEventTime> {
    let mut sorted: Vec<_> = dataset.subjects().to_vec();
    sorted.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut remaining = sorted.len();
    let mut remaining_exp = dataset.arm_size(Arm::Experimental);

    let mut table = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let time = sorted[i].time;
        let (mut d, mut d1, mut leaving_exp) = (0, 0, 0);
        let mut j = i;
        while j < sorted.len() && sorted[j].time == time {
            let exp = sorted[j].arm == Arm::Experimental;
            if sorted[j].event {
                d += 1;
                d1 += usize::from(exp);
            }
            leaving_exp += usize::from(exp);
            j += 1;
        }
        if d > 0 {
            table.push(TwoSampleEventTime {
                time,
                at_risk: remaining,
                at_risk_experimental: remaining_exp,
                events: d,
                events_experimental: d1,
            });
        }
        remaining -= j - i;
        remaining_exp -= leaving_exp;
        i = j;
    }
    table
}

/// Observed and expected arm-1 events with the hypergeometric variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogRankParts {
    pub observed: f64,
    pub expected: f64,
    pub variance: f64,
}

pub fn logrank_parts(table: &[TwoSampleEventTime]) -> LogRankParts {
    let mut parts = LogRankParts {
        observed: 0.0,
        expected: 0.0,
        variance: 0.0,
    };
    for row in table {
        let n = row.at_risk as f64;
        let d = row.events as f64;
        let frac = row.at_risk_experimental as f64 / n;
        parts.observed += row.events_experimental as f64;
        parts.expected += d * frac;
        if row.at_risk > 1 {
            parts.variance += d * frac * (1.0 - frac) * (n - d) / (n - 1.0);
        }
    }
    parts
}

/// Two-group log-rank test, `z = (O1 - E1) / sqrt(V)`; negative z favours arm 1.
pub fn logrank_test(dataset: &TrialDataset) -> Result<TestResult> {
    dataset.require_two_arms()?;
    let table = two_sample_table(dataset);
    if table.is_empty() {
        return Err(Error::NoEvents);
    }
    let parts = logrank_parts(&table);
    if parts.variance <= 0.0 {
        return Err(Error::Degenerate);
    }
    Ok(TestResult::from_estimate(
        parts.observed - parts.expected,
        parts.variance.sqrt(),
    ))
}

/// Breslow partial log-likelihood of the treatment-only Cox model.
#[derive(Clone, Debug)]
pub struct PartialLikelihood {
    table: Vec<TwoSampleEventTime>,
}

/// `(log-likelihood, score, information)` at one value of theta.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LikelihoodPoint {
    pub loglik: f64,
    pub score: f64,
    pub information: f64,
}

impl PartialLikelihood {
    pub fn new(dataset: &TrialDataset) -> Self {
        Self {
            table: two_sample_table(dataset),
        }
    }

    pub fn table(&self) -> &[TwoSampleEventTime] {
        &self.table
    }

    pub fn evaluate(&self, theta: f64) -> LikelihoodPoint {
        let mut point = LikelihoodPoint {
            loglik: 0.0,
            score: 0.0,
            information: 0.0,
        };
        for row in &self.table {
            let n0 = row.at_risk_control() as f64;
            let n1 = row.at_risk_experimental as f64;
            let d = row.events as f64;
            let d1 = row.events_experimental as f64;
            // log(n0 + n1 e^theta) and p = n1 e^theta / (n0 + n1 e^theta) without overflow
            let (log_denom, p) = if n1 == 0.0 {
                (n0.ln(), 0.0)
            } else if n0 == 0.0 {
                (n1.ln() + theta, 1.0)
            } else if theta > 0.0 {
                let r = n0 * (-theta).exp();
                (theta + (r + n1).ln(), n1 / (r + n1))
            } else {
                let r = n1 * theta.exp();
                ((n0 + r).ln(), r / (n0 + r))
            };
            point.loglik += theta * d1 - d * log_denom;
            point.score += d1 - d * p;
            point.information += d * p * (1.0 - p);
        }
        point
    }

    /// Score statistic `U(0) / sqrt(I(0))`.
    pub fn score_z(&self) -> Result<f64> {
        let at_zero = self.evaluate(0.0);
        if at_zero.information <= 0.0 {
            return Err(Error::Degenerate);
        }
        Ok(at_zero.score / at_zero.information.sqrt())
    }

    /// True when the likelihood keeps increasing towards `+inf` or `-inf`.
    fn is_monotone(&self) -> bool {
        let observed: usize = self.table.iter().map(|r| r.events_experimental).sum();
        let max_possible: usize = self
            .table
            .iter()
            .filter(|r| r.at_risk_experimental > 0)
            .map(|r| r.events)
            .sum();
        let min_possible: usize = self
            .table
            .iter()
            .filter(|r| r.at_risk_control() == 0)
            .map(|r| r.events)
            .sum();
        observed == max_possible || observed == min_possible
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoxFit {
    pub theta_hat: f64,
    pub std_err: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Score-test statistic at theta = 0.
    pub score_z: f64,
}

impl CoxFit {
    pub fn hazard_ratio(&self) -> f64 {
        self.theta_hat.exp()
    }

    pub fn wald_z(&self) -> f64 {
        self.theta_hat / self.std_err
    }
}

pub const COX_TOLERANCE: f64 = 1e-10;
pub const COX_MAX_ITERATIONS: usize = 50;

/// Newton-Raphson maximisation of the Breslow partial likelihood from theta = 0.
pub fn cox_fit(dataset: &TrialDataset) -> Result<CoxFit> {
    dataset.require_two_arms()?;
    let pl = PartialLikelihood::new(dataset);
    if pl.table().is_empty() {
        return Err(Error::NoEvents);
    }
    if pl.is_monotone() {
        return Err(Error::DivergentEstimate);
    }
    let score_z = pl.score_z()?;

    let mut theta = 0.0;
    let mut current = pl.evaluate(theta);
    for iteration in 1..=COX_MAX_ITERATIONS {
        if current.score.abs() < COX_TOLERANCE {
            return finish(theta, current, iteration - 1, score_z);
        }
        let step = current.score / current.information;
        let full_step = step.abs() < COX_TOLERANCE;
        // halve only on a real decrease, not on rounding noise in the log-likelihood
        let slack = 1e-12 * (1.0 + current.loglik.abs());
        let mut candidate_theta = theta + step;
        let mut candidate = pl.evaluate(candidate_theta);
        let mut halvings = 0;
        while candidate.loglik < current.loglik - slack && halvings < 40 {
            halvings += 1;
            candidate_theta = theta + step / 2f64.powi(halvings);
            candidate = pl.evaluate(candidate_theta);
        }
        theta = candidate_theta;
        current = candidate;
        if full_step || current.score.abs() < COX_TOLERANCE {
            return finish(theta, current, iteration, score_z);
        }
    }
    Err(Error::NotConverged {
        iterations: COX_MAX_ITERATIONS,
        last_theta: theta,
    })
}

fn finish(theta: f64, at: LikelihoodPoint, iterations: usize, score_z: f64) -> Result<CoxFit> {
    if at.information <= 0.0 {
        return Err(Error::Degenerate);
    }
    Ok(CoxFit {
        theta_hat: theta,
        std_err: at.information.sqrt().recip(),
        iterations,
        converged: true,
        score_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::SubjectRecord;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp};

    fn dataset(control: &[(f64, bool)], experimental: &[(f64, bool)]) -> TrialDataset {
        let mut subjects = Vec::new();
        for &(t, e) in control {
            subjects.push(SubjectRecord::new(Arm::Control, t, e).unwrap());
        }
        for &(t, e) in experimental {
            subjects.push(SubjectRecord::new(Arm::Experimental, t, e).unwrap());
        }
        TrialDataset::from_records(subjects).unwrap()
    }

    fn random_dataset(rng: &mut ChaCha8Rng, max_n: usize) -> TrialDataset {
        let n0 = rng.random_range(2..max_n);
        let n1 = rng.random_range(2..max_n);
        let draw = |rng: &mut ChaCha8Rng, scale: f64| (rng.random::<f64>() * scale, rng.random_bool(0.7));
        let c: Vec<_> = (0..n0).map(|_| draw(rng, 3.0)).collect();
        let e: Vec<_> = (0..n1).map(|_| draw(rng, 4.0)).collect();
        dataset(&c, &e)
    }

    #[test]
    fn mirrored_arms() {
        let arm = [(0.3, true), (0.9, false), (1.4, true), (2.2, true), (2.5, false)];
        let ds = dataset(&arm, &arm);
        let lr = logrank_test(&ds).unwrap();
        assert_abs_diff_eq!(lr.estimate, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lr.z, 0.0, epsilon = 1e-12);
        let fit = cox_fit(&ds).unwrap();
        assert_abs_diff_eq!(fit.theta_hat, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn logrank_hand_table() {
        let ds = dataset(&[(1.0, true), (2.0, true)], &[(3.0, true), (4.0, true)]);
        let parts = logrank_parts(&two_sample_table(&ds));
        assert_eq!(parts.observed, 2.0);
        assert_abs_diff_eq!(parts.expected, 19.0 / 6.0, epsilon = 1e-12);
        // V = 1/4 + 2/9 + 0 + 0 (last two tables have no arm-0 subjects at risk)
        assert_abs_diff_eq!(parts.variance, 1.0 / 4.0 + 2.0 / 9.0, epsilon = 1e-12);
        let lr = logrank_test(&ds).unwrap();
        assert_abs_diff_eq!(lr.estimate, -7.0 / 6.0, epsilon = 1e-12);
        assert!(lr.z < 0.0);
    }

    #[test]
    fn logrank_errors() {
        let ds = dataset(&[(1.0, false)], &[(2.0, false)]);
        assert!(matches!(logrank_test(&ds), Err(Error::NoEvents)));
        let ds = dataset(&[(1.0, true)], &[(1.0, true)]);
        // a single tied table with n = d: hypergeometric variance vanishes
        assert!(matches!(logrank_test(&ds), Err(Error::Degenerate)));
    }

    #[test]
    fn logrank_ignores_monotone_time_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let ds = random_dataset(&mut rng, 30);
            let cubed: Vec<_> = ds
                .subjects()
                .iter()
                .map(|s| SubjectRecord { time: s.time.powi(3), ..*s })
                .collect();
            let cubed = TrialDataset::from_records(cubed).unwrap();
            match (logrank_test(&ds), logrank_test(&cubed)) {
                (Ok(a), Ok(b)) => assert_abs_diff_eq!(a.z, b.z, epsilon = 1e-12),
                (Err(_), Err(_)) => {}
                other => panic!("mismatch {other:?}"),
            }
        }
    }

    #[test]
    fn score_statistic_equals_logrank() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut checked = 0;
        while checked < 100 {
            let ds = random_dataset(&mut rng, 25);
            let Ok(lr) = logrank_test(&ds) else { continue };
            let score = PartialLikelihood::new(&ds).score_z().unwrap();
            assert_abs_diff_eq!(lr.z, score, epsilon = 1e-10);
            checked += 1;
        }
    }

    #[test]
    fn monotone_likelihood_detected() {
        // every arm-1 event precedes every arm-0 event
        let ds = dataset(&[(3.0, true), (4.0, true)], &[(1.0, true), (2.0, true)]);
        assert!(matches!(cox_fit(&ds), Err(Error::DivergentEstimate)));
        // no arm-1 events at all
        let ds = dataset(&[(1.0, true), (2.0, true)], &[(1.5, false), (3.0, false)]);
        assert!(matches!(cox_fit(&ds), Err(Error::DivergentEstimate)));
    }

    #[test]
    fn newton_converges_with_positive_information() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let ds = random_dataset(&mut rng, 40);
            let Ok(fit) = cox_fit(&ds) else { continue };
            let pl = PartialLikelihood::new(&ds);
            let at = pl.evaluate(fit.theta_hat);
            assert!(fit.converged);
            assert!(at.score.abs() < 1e-8, "score {}", at.score);
            assert!(at.information > 0.0);
            for k in -20..=20 {
                assert!(pl.evaluate(k as f64 * 0.25).information > 0.0);
            }
            let swapped = cox_fit(&ds.swap_arms()).unwrap();
            assert_abs_diff_eq!(swapped.theta_hat, -fit.theta_hat, epsilon = 1e-9);
        }
    }

    #[test]
    fn large_sample_recovers_hazard_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 10_000;
        let lambda0: f64 = 0.5;
        let hr: f64 = 0.67;
        let c: Vec<_> = Exp::new(lambda0).unwrap().sample_iter(&mut rng).take(n).map(|t| (t, true)).collect();
        let e: Vec<_> = Exp::new(lambda0 * hr).unwrap().sample_iter(&mut rng).take(n).map(|t| (t, true)).collect();
        let fit = cox_fit(&dataset(&c, &e)).unwrap();
        assert!((fit.theta_hat - hr.ln()).abs() < 0.05, "theta {}", fit.theta_hat);
    }

    proptest! {
        #[test]
        fn relabeling_flips_signs(
            c in prop::collection::vec(((1u32..30).prop_map(|k| k as f64 * 0.1), any::<bool>()), 2..25),
            e in prop::collection::vec(((1u32..30).prop_map(|k| k as f64 * 0.1), any::<bool>()), 2..25),
        ) {
            let ds = dataset(&c, &e);
            if let Ok(lr) = logrank_test(&ds) {
                let swapped = logrank_test(&ds.swap_arms()).unwrap();
                prop_assert!((swapped.z + lr.z).abs() < 1e-12);
            }
        }
    }
}
