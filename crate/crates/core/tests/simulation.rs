use rmst_power::asymptotics::censoring_survival;
use rmst_power::simulation::{run_replicate, run_scenario, table1, LatentCohort, RandomSource, Scenario};
use rmst_power::Arm;

fn scenario(id: u32) -> Scenario {
    table1().into_iter().find(|s| s.id == id).unwrap()
}

#[test]
fn censoring_times_follow_the_recruitment_model() {
    let s = scenario(4); // t_R = 2.5
    let model = s.censoring().unwrap();
    let mut cens: Vec<f64> = (0..5)
        .flat_map(|i| LatentCohort::generate(&s, &mut RandomSource::new(99, i).rng()).subjects)
        .map(|p| s.t_h - p.entry)
        .collect();
    assert_eq!(cens.len(), 10_000);
    cens.sort_by(f64::total_cmp);

    // Kolmogorov-Smirnov distance against F(t) = 1 - S_C(t)
    let n = cens.len() as f64;
    let d = cens
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let f = 1.0 - censoring_survival(&model, c);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < 0.02, "KS distance {d}");
}

#[test]
fn experimental_survival_at_three_matches_configuration() {
    let s = scenario(1);
    let mut alive = 0usize;
    let mut total = 0usize;
    for i in 0..10 {
        let cohort = LatentCohort::generate(&s, &mut RandomSource::new(7, i).rng());
        for p in cohort.subjects.iter().filter(|p| p.arm == Arm::Experimental) {
            total += 1;
            alive += usize::from(p.event_time > 3.0);
        }
    }
    let p = alive as f64 / total as f64;
    let se = (0.9f64 * 0.1 / total as f64).sqrt();
    assert!((p - 0.9).abs() < 3.0 * se, "S1(3) = {p}, se {se}");
}

#[test]
fn scenario_results_are_reproducible() {
    let s = scenario(10);
    let a = run_scenario(&s, 300, 17).unwrap();
    let b = run_scenario(&s, 300, 17).unwrap();
    assert_eq!(a, b);
    let c = run_scenario(&s, 300, 18).unwrap();
    assert_ne!(a, c);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let s = scenario(12);
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let parallel = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = serial.install(|| run_scenario(&s, 200, 3).unwrap());
    let b = parallel.install(|| run_scenario(&s, 200, 3).unwrap());
    assert_eq!(a, b);
}

#[test]
fn replicate_is_a_function_of_its_stream() {
    let s = scenario(7);
    let a = run_replicate(&s, RandomSource::new(5, 42)).unwrap();
    let b = run_replicate(&s, RandomSource::new(5, 42)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn longer_follow_up_never_loses_events() {
    let s = scenario(3);
    let cohort = LatentCohort::generate(&s, &mut RandomSource::new(1, 0).rng());
    let base = cohort.censor_at(s.t_h);
    let plus = cohort.censor_at(s.t_h_plus);
    assert!(plus.event_count() >= base.event_count());
    for (b, p) in base.subjects().iter().zip(plus.subjects()) {
        assert!(p.time >= b.time);
        if b.event {
            assert!(p.event && p.time == b.time);
        }
    }
}

#[test]
fn null_rejection_rate_is_near_nominal() {
    let mut s = scenario(9);
    s.hr = 1.0;
    let r = run_scenario(&s, 2_000, 11).unwrap();
    // 4 MC standard errors at 2,000 replicates
    for size in [r.power_rmst, r.power_ph] {
        assert!((size - 0.05).abs() < 0.02, "size {size}");
    }
}
