//! Acceptance criteria. Each test prints one `[PASS]` / `[FAIL]` line
//! (run with `--nocapture` to see them) and fails when its criterion does.

use std::time::{Duration, Instant};

use fps_hybrid::altmin::{
    altmin, assemble_analog, build_phase_bank, group_solve, solve_switch_and_alpha, update_fdd, AnalogArchitecture,
    Regime, StoppingRule,
};
use fps_hybrid::cancel::CombinerMode;
use fps_hybrid::eval::hardware::{describe_hardware, power_total, table_ii, Power, PsAccounting, Structure};
use fps_hybrid::linalg::re_trace_product;
use fps_hybrid::oracles::{brute_force_alpha_switch, certify_tiny_altmin};
use fps_hybrid::pipeline::{design, evaluate, Design, Method, PipelineSettings, Prepared};
use fps_hybrid::system::{generate_channel, ChannelParams, SystemConfig};
use fps_hybrid::{CMat64, RMat64};
use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn report(name: &str, ok: bool, detail: String) {
    println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn random_cmat(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat64 {
    CMat64::from_fn(rows, cols, |_, _| Complex::new(gaussian(rng), gaussian(rng)))
}

fn prepared(cfg: &SystemConfig, seed: u64) -> Prepared<f64> {
    let channel = generate_channel(cfg, &ChannelParams::for_config(cfg, seed)).unwrap();
    Prepared::new(channel, cfg).unwrap()
}

/// Leakage and post-normalization power of a hybrid design.
fn invariants(d: &Design<f64>, cfg: &SystemConfig) -> (f64, f64) {
    match d {
        Design::FullyDigital => (0.0, 0.0),
        Design::Hybrid { solution, .. } => {
            (solution.max_leakage(), (solution.total_power() - cfg.streams_total() as f64).abs())
        }
    }
}

#[test]
fn power_table() {
    let start = Instant::now();
    let rows = describe_hardware(144, 8, 10, 1, PsAccounting::Footnote);
    let total = |s: Structure| power_total(rows.iter().find(|r| r.structure == s).unwrap());
    let nc2 = describe_hardware(144, 8, 2, 1, PsAccounting::Footnote);
    let fps2 = power_total(nc2.iter().find(|r| r.structure == Structure::FpsFully).unwrap());
    let got = [
        total(Structure::DpsFully),
        total(Structure::FpsFully),
        total(Structure::SpsFully),
        fps2,
        total(Structure::ButlerFully),
    ];
    let want = ["115.2 W", "59.2 W", "57.6 W", "11.84 W", "109.44 W"];
    let printed: Vec<Power> = table_ii().iter().map(|(_, p)| power_total(p)).collect();
    let elapsed = start.elapsed();
    let ok = got.iter().zip(want).all(|(p, w)| p.to_string() == w)
        && printed.iter().zip(want).all(|(p, w)| p.to_string() == w)
        && elapsed < Duration::from_secs(1);
    let shown: Vec<String> = got.iter().map(|p| p.to_string()).collect();
    report("power table", ok, format!("{} in {elapsed:?}", shown.join(", ")));
}

#[test]
fn block_update_optimality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 1..=12 {
        for _ in 0..1000 {
            let x = RMat64::from_fn(n, 1, |_, _| gaussian(&mut rng));
            let fast = solve_switch_and_alpha(&x).unwrap();
            let oracle = brute_force_alpha_switch(x.as_slice()).unwrap();
            worst = worst.max((fast.objective - oracle.best_objective).abs());
            count += 1;
        }
    }
    let elapsed = start.elapsed();
    let ok = worst <= 1e-9 && elapsed < Duration::from_secs(60);
    report("block-update optimality", ok, format!("{count} vectors, worst gap {worst:.3e}, {elapsed:?}"));
}

/// Sum of singular values from the real `2r x 2c` embedding, whose spectrum
/// is that of `m` with every value doubled.
fn nuclear_norm_real_embedding(m: &CMat64) -> f64 {
    let (r, c) = m.shape();
    let big = DMatrix::<f64>::from_fn(2 * r, 2 * c, |i, j| {
        let z = m[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    big.singular_values().sum() / 2.0
}

#[test]
fn procrustes_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let (a, b) = (rng.random_range(1..=16), rng.random_range(1..=8));
        let (rows, cols) = if i % 2 == 0 { (a, b) } else { (b, a) };
        let m = random_cmat(rows, cols, &mut rng);
        let f_dd = update_fdd(&m, Regime::for_dims(cols, rows));
        let value = re_trace_product(&f_dd, &m);
        let nuclear = nuclear_norm_real_embedding(&m);
        worst = worst.max((value - nuclear).abs() / nuclear.max(1.0));
    }
    report("procrustes optimality", worst <= 1e-9, format!("1000 matrices, worst relative gap {worst:.3e}"));
}

#[test]
fn convergence_contract() {
    let cfg = SystemConfig::new(36, 4, 2, 1, 2, 1, 8);
    let arch = AnalogArchitecture::uniform(15, 1);
    let stop = StoppingRule::default();
    let (mut worst_rise, mut worst_slack, mut max_iter): (f64, f64, usize) = (0.0, f64::INFINITY, 0);
    for r in 0..100 {
        let prep = prepared(&cfg, 500 + r);
        let st = altmin(&prep.target.f_opt, &arch, cfg.n_rf_tx, &stop).unwrap();
        for w in st.objective_trace.windows(2) {
            worst_rise = worst_rise.max(w[1] - w[0]);
        }
        for &s in &st.bound_slack {
            worst_slack = worst_slack.min(s);
        }
        max_iter = max_iter.max(st.iterations);
    }
    let ok = worst_rise <= 1e-9 && worst_slack >= -1e-9 && max_iter <= 100;
    report(
        "convergence contract",
        ok,
        format!("100 instances, worst rise {worst_rise:.3e}, min bound slack {worst_slack:.3e}, max iterations {max_iter}"),
    );
}

#[test]
fn tiny_instance_quality() {
    let cert = certify_tiny_altmin(100, 13).unwrap();
    let ok = cert.mean_ratio <= 1.25 && cert.mean_ratio >= 1.0 - 1e-12 && cert.bound_violations == 0;
    report(
        "tiny-instance quality guard",
        ok,
        format!(
            "mean ratio {:.4} (max {:.4}), bound violations {}, refit-gain mean ratio {:.4}",
            cert.mean_ratio, cert.max_ratio, cert.bound_violations, cert.refit_mean_ratio
        ),
    );
}

#[test]
fn cancellation_and_power() {
    let cfg = SystemConfig::new(36, 4, 2, 1, 2, 1, 8);
    let (mut leak, mut power, mut runs): (f64, f64, usize) = (0.0, 0.0, 0);
    for mode in [CombinerMode::Digital, CombinerMode::Hybrid] {
        for method in [Method::FpsAltmin, Method::RandomSwitch] {
            for (nc, eta) in [(5, 1), (15, 2)] {
                let mut settings = PipelineSettings::new(nc, eta);
                settings.combiner_mode = mode;
                for r in 0..10 {
                    let prep = prepared(&cfg, 700 + r);
                    let d = design(method, &prep, &cfg, &settings, 700 + r).unwrap();
                    let (l, p) = invariants(&d, &cfg);
                    leak = leak.max(l);
                    power = power.max(p);
                    runs += 1;
                }
            }
        }
    }
    let ok = leak <= 1e-8 && power <= 1e-9;
    report("cancellation and power", ok, format!("{runs} runs, max leakage {leak:.3e}, max power error {power:.3e}"));
}

#[test]
fn group_mapping() {
    let cfg = SystemConfig::new(36, 4, 4, 1, 2, 1, 8);
    let stop = StoppingRule::default();
    let mut identical = true;
    let mut shaped = true;
    for r in 0..5 {
        let prep = prepared(&cfg, 900 + r);
        let f = &prep.target.f_opt;
        let one = group_solve(f, &AnalogArchitecture::uniform(6, 1), 4, &stop).unwrap();
        let flat = altmin(f, &AnalogArchitecture::uniform(6, 1), 4, &stop).unwrap();
        identical &= one.groups.len() == 1 && one.groups[0] == flat && one.s == flat.s;
        identical &= one.f_bb.iter().zip(flat.f_bb().iter()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());

        let arch = AnalogArchitecture::uniform(6, 4);
        let part = group_solve(f, &arch, 4, &stop).unwrap();
        // Rows 9i..9i+9 may only switch into RF chain i (columns 6i..6i+6);
        // F_BB row i is the only nonzero row of its group.
        for row in 0..36 {
            for col in 0..24 {
                if row / 9 != col / 6 && part.s.get(row, col) {
                    shaped = false;
                }
            }
        }
        let bank = build_phase_bank::<f64>(&arch, 4);
        let f_rf = assemble_analog(&part.s, &bank);
        for row in 0..36 {
            for chain in 0..4 {
                if row / 9 != chain && f_rf[(row, chain)].norm() != 0.0 {
                    shaped = false;
                }
            }
        }
    }
    report(
        "group mapping",
        identical && shaped,
        format!("eta = 1 bitwise identical: {identical}, eta = N_RF block-diagonal: {shaped}"),
    );
}

fn mean_stderr(d: &[f64]) -> (f64, f64) {
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn paired(a: &[f64], b: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    mean_stderr(&d)
}

#[test]
fn desk_trends() {
    let start = Instant::now();
    let cfg = SystemConfig::new(36, 4, 2, 1, 2, 1, 16).with_snr_db(0.0);
    let n_real = 200;
    let ncs = [2, 5, 10, 15, 20, 30];
    // Columns: fully digital, FPS for each Nc, random switch (Nc = 5), FPS eta = 2 (Nc = 20).
    let rows: Vec<Vec<f64>> = (0..n_real as u64)
        .map(|r| {
            let seed = 1000 + r;
            let prep = prepared(&cfg, seed);
            let se = |method: Method, nc: usize, eta: usize| {
                let settings = PipelineSettings::new(nc, eta);
                let d = design(method, &prep, &cfg, &settings, seed).unwrap();
                let (leak, power) = invariants(&d, &cfg);
                assert!(leak <= 1e-8 && power <= 1e-9, "invariants: {leak:e} {power:e}");
                evaluate(&d, &prep, &cfg, &settings, seed).unwrap().se_bits_per_hz
            };
            let mut row = vec![se(Method::FullyDigital, 5, 1)];
            row.extend(ncs.iter().map(|&nc| se(Method::FpsAltmin, nc, 1)));
            row.push(se(Method::RandomSwitch, 5, 1));
            row.push(se(Method::FpsAltmin, 20, 2));
            row
        })
        .collect();
    let col = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<f64>>();
    let fd = col(0);
    let fps = |nc: usize| col(1 + ncs.iter().position(|&x| x == nc).unwrap());
    let random = col(1 + ncs.len());
    let eta2 = col(2 + ncs.len());

    let mut lines = Vec::new();
    let mut ok = true;
    for (name, a, b) in [("FD - FPS20", &fd, &fps(20)), ("FPS20 - FPS5", &fps(20), &fps(5)), ("FPS5 - random", &fps(5), &random)] {
        let (m, se) = paired(a, b);
        ok &= m > se;
        lines.push(format!("{name} {m:.3}±{se:.3}"));
    }
    for w in ncs.windows(2) {
        let (m, se) = paired(&fps(w[1]), &fps(w[0]));
        ok &= m >= -se;
        lines.push(format!("Nc {}->{} {m:+.3}±{se:.3}", w[0], w[1]));
    }
    let (m, se) = paired(&eta2, &fps(20));
    ok &= m <= se;
    lines.push(format!("eta 1->2 {m:+.3}±{se:.3}"));
    let elapsed = start.elapsed();
    ok &= elapsed <= Duration::from_secs(15 * 60);
    let means: Vec<String> = ncs.iter().map(|&nc| format!("{:.3}", mean_stderr(&fps(nc)).0)).collect();
    report(
        "desk-scale trends",
        ok,
        format!(
            "mean SE FD {:.3}, FPS(Nc) [{}], random {:.3}, eta=2 {:.3}; {}; {elapsed:?}",
            mean_stderr(&fd).0,
            means.join(", "),
            mean_stderr(&random).0,
            mean_stderr(&eta2).0,
            lines.join("; ")
        ),
    );
}

#[test]
fn full_scale_smoke() {
    let start = Instant::now();
    let cfg = SystemConfig::new(144, 16, 8, 2, 4, 2, 128).with_snr_db(0.0);
    let settings = PipelineSettings::new(30, 1);
    let prep = prepared(&cfg, 2024);
    let mut detail = Vec::new();
    let mut ok = true;
    for method in Method::ALL {
        let d = design(method, &prep, &cfg, &settings, 2024).unwrap();
        let (leak, power) = invariants(&d, &cfg);
        let rep = evaluate(&d, &prep, &cfg, &settings, 2024).unwrap();
        ok &= leak <= 1e-8 && power <= 1e-9 && rep.se_bits_per_hz.is_finite() && rep.power_error <= 1e-9;
        detail.push(format!("{} {:.2} bit/s/Hz", method, rep.se_bits_per_hz));
    }
    let elapsed = start.elapsed();
    ok &= elapsed <= Duration::from_secs(300);
    report("full-scale smoke run", ok, format!("{}; {elapsed:?}", detail.join(", ")));
}
