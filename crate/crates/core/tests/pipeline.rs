use fps_hybrid::cancel::CombinerMode;
use fps_hybrid::pipeline::{design, evaluate, run_method, Design, Method, PipelineSettings, Prepared};
use fps_hybrid::system::{generate_channel, ChannelParams, SystemConfig};
use proptest::prelude::*;

fn prepared(cfg: &SystemConfig, seed: u64) -> Prepared<f64> {
    Prepared::new(generate_channel(cfg, &ChannelParams::for_config(cfg, seed)).unwrap(), cfg).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hybrid_designs_cancel_interference_and_meet_power(
        seed in 0u64..10_000,
        users in 1usize..=3,
        n_ps in 2usize..=12,
        grouped in any::<bool>(),
        digital in any::<bool>(),
        random in any::<bool>(),
    ) {
        let cfg = SystemConfig::new(16, 2, 4, 1, users, 1, 4).with_snr_db(5.0);
        let mut settings = PipelineSettings::new(n_ps, if grouped { 2 } else { 1 });
        if digital {
            settings.combiner_mode = CombinerMode::Digital;
        }
        let method = if random { Method::RandomSwitch } else { Method::FpsAltmin };
        let prep = prepared(&cfg, seed);
        let d = design(method, &prep, &cfg, &settings, seed).unwrap();
        let Design::Hybrid { solution, .. } = &d else { panic!("hybrid expected") };
        prop_assert!(solution.max_leakage() <= 1e-8);
        prop_assert!((solution.total_power() - cfg.streams_total() as f64).abs() <= 1e-9);
        prop_assert!(solution.kappa > 0.0);
        let rep = evaluate(&d, &prep, &cfg, &settings, seed).unwrap();
        prop_assert!(rep.se_bits_per_hz.is_finite() && rep.se_bits_per_hz >= 0.0);
        prop_assert_eq!(rep.per_user_se.len(), users);
        let sum: f64 = rep.per_user_se.iter().sum();
        prop_assert!((sum - rep.se_bits_per_hz).abs() <= 1e-9 * sum.max(1.0));
    }

    #[test]
    fn rate_grows_with_snr(seed in 0u64..10_000) {
        let base = SystemConfig::new(16, 2, 4, 1, 2, 1, 4);
        let settings = PipelineSettings::new(6, 1);
        let prep = prepared(&base, seed);
        let d = design(Method::FpsAltmin, &prep, &base, &settings, seed).unwrap();
        let low = evaluate(&d, &prep, &base.clone().with_snr_db(-5.0), &settings, seed).unwrap();
        let high = evaluate(&d, &prep, &base.clone().with_snr_db(15.0), &settings, seed).unwrap();
        prop_assert!(high.se_bits_per_hz >= low.se_bits_per_hz);
    }
}

#[test]
fn fully_digital_upper_bounds_hybrid_with_digital_combiners() {
    let cfg = SystemConfig::new(16, 4, 2, 1, 2, 1, 4).with_snr_db(0.0);
    let mut settings = PipelineSettings::new(8, 1);
    settings.combiner_mode = CombinerMode::Digital;
    let mut wins = 0;
    for seed in 0..40 {
        let prep = prepared(&cfg, seed);
        let fd = run_method(Method::FullyDigital, &prep, &cfg, &settings, seed).unwrap();
        let hy = run_method(Method::FpsAltmin, &prep, &cfg, &settings, seed).unwrap();
        wins += usize::from(fd.se_bits_per_hz >= hy.se_bits_per_hz);
    }
    assert_eq!(wins, 40);
}

#[test]
fn random_switch_is_seeded() {
    let cfg = SystemConfig::new(16, 2, 2, 1, 2, 1, 2);
    let settings = PipelineSettings::new(4, 1);
    let prep = prepared(&cfg, 3);
    let a = run_method(Method::RandomSwitch, &prep, &cfg, &settings, 3).unwrap();
    let b = run_method(Method::RandomSwitch, &prep, &cfg, &settings, 3).unwrap();
    assert_eq!(a.se_bits_per_hz.to_bits(), b.se_bits_per_hz.to_bits());
}

#[test]
fn bad_group_count_is_rejected() {
    let cfg = SystemConfig::new(16, 2, 2, 1, 2, 1, 2);
    let prep = prepared(&cfg, 0);
    let err = design(Method::FpsAltmin, &prep, &cfg, &PipelineSettings::new(4, 3), 0).unwrap_err();
    assert!(err.to_string().contains("n_groups"), "{err}");
}
