use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::survival::{Arm, SubjectRecord, TrialDataset};

use super::scenario::Scenario;

/// Seed plus a per-replicate ChaCha stream; the same pair always yields the
/// same draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomSource {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomSource {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Recruitment time and latent event time of one simulated patient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatentSubject {
    pub arm: Arm,
    pub entry: f64,
    pub event_time: f64,
}

impl LatentSubject {
    /// Follow-up observed when the trial is cut at calendar time `cutoff`.
    pub fn observe(&self, cutoff: f64) -> SubjectRecord {
        let potential = cutoff - self.entry;
        SubjectRecord {
            arm: self.arm,
            time: self.event_time.min(potential),
            event: self.event_time <= potential,
        }
    }
}

/// All latent data of one replicate, before any data cut.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentCohort {
    pub subjects: Vec<LatentSubject>,
}

impl LatentCohort {
    /// Control arm first, then experimental; entry drawn before event time for
    /// each patient.
    pub fn generate(scenario: &Scenario, rng: &mut impl Rng) -> Self {
        let (lambda0, lambda1) = scenario.hazard_rates();
        let mut subjects = Vec::with_capacity(2 * scenario.n_per_arm);
        for (arm, rate) in [(Arm::Control, lambda0), (Arm::Experimental, lambda1)] {
            let exp = Exp::new(rate).expect("hazard rates are positive");
            for _ in 0..scenario.n_per_arm {
                let entry = if scenario.t_r > 0.0 {
                    scenario.t_r * rng.random::<f64>()
                } else {
                    0.0
                };
                let event_time = exp.sample(rng);
                subjects.push(LatentSubject {
                    arm,
                    entry,
                    event_time,
                });
            }
        }
        Self { subjects }
    }

    /// Dataset administratively censored at calendar time `cutoff`.
    pub fn censor_at(&self, cutoff: f64) -> TrialDataset {
        let records = self.subjects.iter().map(|s| s.observe(cutoff)).collect();
        TrialDataset::from_parts_unchecked(records, cutoff)
    }
}

pub fn simulate_trial(scenario: &Scenario, source: RandomSource, cutoff: f64) -> TrialDataset {
    LatentCohort::generate(scenario, &mut source.rng()).censor_at(cutoff)
}

/// `tau_target` when both arms still have someone at risk there, otherwise the
/// smaller of the two arms' largest follow-up times.
pub fn effective_tau(dataset: &TrialDataset, tau_target: f64) -> f64 {
    let max0 = dataset.max_time(Arm::Control).unwrap_or(0.0);
    let max1 = dataset.max_time(Arm::Experimental).unwrap_or(0.0);
    if max0 >= tau_target && max1 >= tau_target {
        tau_target
    } else {
        max0.min(max1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::table1;

    #[test]
    fn same_source_same_data() {
        let s = &table1()[3];
        let a = simulate_trial(s, RandomSource::new(9, 4), 3.0);
        let b = simulate_trial(s, RandomSource::new(9, 4), 3.0);
        let c = simulate_trial(s, RandomSource::new(9, 5), 3.0);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 2 * s.n_per_arm);
    }

    #[test]
    fn instant_recruitment_censors_at_cutoff() {
        let s = &table1()[0];
        let ds = simulate_trial(s, RandomSource::new(1, 0), 3.0);
        assert!(ds.subjects().iter().filter(|r| !r.event).all(|r| r.time == 3.0));
        assert!(ds.subjects().iter().any(|r| !r.event));
    }

    #[test]
    fn recensoring_matches_direct_cut() {
        let s = &table1()[7];
        let cohort = LatentCohort::generate(s, &mut RandomSource::new(3, 1).rng());
        let plus = cohort.censor_at(3.5);
        let base = cohort.censor_at(3.0);
        for (p, b) in plus.subjects().iter().zip(base.subjects()) {
            assert!(b.time <= p.time);
            if p.event && p.time <= b.time {
                assert!(b.event);
            }
        }
    }

    #[test]
    fn effective_tau_rule() {
        let rec = |arm, time| SubjectRecord::new(arm, time, false).unwrap();
        let ds = TrialDataset::new(vec![rec(Arm::Control, 3.0), rec(Arm::Experimental, 3.0)], 3.0).unwrap();
        assert_eq!(effective_tau(&ds, 3.0), 3.0);
        let ds = TrialDataset::new(
            vec![rec(Arm::Control, 2.7), rec(Arm::Control, 1.0), rec(Arm::Experimental, 2.9)],
            3.0,
        )
        .unwrap();
        assert_eq!(effective_tau(&ds, 3.0), 2.7);
        let ds = TrialDataset::new(vec![rec(Arm::Control, 3.4), rec(Arm::Experimental, 3.2)], 3.5).unwrap();
        assert_eq!(effective_tau(&ds, 3.0), 3.0);
    }
}
