use std::f64::consts::PI;

use mli_dm::beamformer::sigma_sq_for_snr;
use mli_dm::link_sim::{assemble_transmit, ber_vs_angle, BerSweepConfig, ErrorModel, SymbolStream};
use mli_dm::metrics::{rate_at, ssr_vs_snr, SsrSweepConfig};
use mli_dm::scenario::TrialDesigner;
use mli_dm::{ArrayGeometry, BeamformerDesign, Execution, Method, Regime, Scenario};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

fn q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn single_user(theta: f64) -> Scenario {
    Scenario {
        geom: ArrayGeometry::half_wavelength(4).unwrap(),
        desired: vec![theta],
        eaves: vec![],
        ps: 1.0,
        beta1_sq: 1.0,
        errors: ErrorModel::exact(),
    }
}

#[test]
fn single_user_awgn_matches_closed_form() {
    let theta = 70f64.to_radians();
    for snr_db in [0.0, 4.0, 7.0] {
        let cfg = BerSweepConfig {
            scenario: single_user(theta),
            regime: Regime::UnknownEavesdroppers,
            snr_db,
            angle_grid: vec![theta],
            trials: 50,
            symbols_per_trial: 4000,
            seed: 5,
            methods: vec![Method::Op],
        };
        let p = &ber_vs_angle(&cfg, Execution::Parallel).unwrap()[0];
        let expected = q(10f64.powf(snr_db / 20.0));
        let sd = (expected * (1.0 - expected) / p.bits as f64).sqrt();
        assert!(
            (p.ber() - expected).abs() < 5.0 * sd,
            "{snr_db} dB: {} vs {expected}",
            p.ber()
        );
    }
}

fn table_designs(regime: Regime, snr: f64) -> Vec<BeamformerDesign> {
    let sc = Scenario::table_ii();
    let power = sc.power().unwrap();
    let noise = sc.noise_for_snr(snr).unwrap();
    let d = TrialDesigner::new(&sc.geom, regime, sc.desired.clone(), sc.eaves.clone(), &Method::ALL).unwrap();
    Method::ALL.iter().map(|&m| d.design(m, &power, &noise).unwrap()).collect()
}

#[test]
fn mean_transmit_power_is_ps() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for regime in [Regime::KnownEavesdroppers, Regime::UnknownEavesdroppers] {
        for design in table_designs(regime, 14.0) {
            let draws = 100_000;
            let total: f64 = (0..draws)
                .map(|_| {
                    let s = SymbolStream::random(2, &mut rng);
                    assemble_transmit(&design, &s.symbols, &mut rng).unwrap().norm_squared()
                })
                .sum();
            let mean = total / draws as f64;
            assert!((mean - 1.0).abs() < 0.01, "{regime:?}: {mean}");
        }
    }
}

/// Rate computed from the received covariance `hᴴ(Σ g v vᴴ + a T Tᴴ/(N−K))h`.
fn rate_dual(geom: &ArrayGeometry, theta: f64, user: usize, d: &BeamformerDesign, sigma_sq: f64) -> f64 {
    let h = geom.steering_vector(theta).unwrap().into_vector();
    let p = d.power();
    let cols = d.t_an().ncols() as f64;
    let g = Complex64::new(p.message_gain(), 0.0);
    let mut interference = d.t_an() * d.t_an().adjoint() * Complex64::new(p.an_gain() / cols, 0.0);
    for (i, v) in d.v().iter().enumerate() {
        if i != user {
            interference += v * v.adjoint() * g;
        }
    }
    let own = d.v()[user].clone() * d.v()[user].adjoint() * g;
    let s = (h.adjoint() * own * &h)[(0, 0)].re;
    let i = (h.adjoint() * interference * &h)[(0, 0)].re;
    (1.0 + s / (sigma_sq + i)).log2()
}

#[test]
fn rate_matches_covariance_form() {
    let sc = Scenario::table_ii();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for regime in [Regime::KnownEavesdroppers, Regime::UnknownEavesdroppers] {
        for d in table_designs(regime, 20.0) {
            for _ in 0..50 {
                let theta = rng.random_range(0.0..=PI);
                let user = rng.random_range(0..2);
                let sigma = sigma_sq_for_snr(rng.random_range(0.0..35.0), d.power());
                let a = rate_at(&sc.geom, theta, user, &d, sigma).unwrap();
                let b = rate_dual(&sc.geom, theta, user, &d, sigma);
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
            }
        }
    }
}

#[test]
fn sweeps_identical_across_thread_counts() {
    let sc = Scenario::table_ii();
    let ber = BerSweepConfig {
        scenario: sc.clone(),
        regime: Regime::KnownEavesdroppers,
        snr_db: 14.0,
        angle_grid: (0..=36).map(|i| (5.0 * i as f64).to_radians().min(PI)).collect(),
        trials: 12,
        symbols_per_trial: 100,
        seed: 99,
        methods: Method::ALL.to_vec(),
    };
    let ssr = SsrSweepConfig {
        scenario: sc,
        regime: Regime::UnknownEavesdroppers,
        snr_db: vec![0.0, 20.0, 35.0],
        trials: 12,
        seed: 99,
        methods: Method::ALL.to_vec(),
    };
    let reference = (
        ber_vs_angle(&ber, Execution::Sequential).unwrap(),
        ssr_vs_snr(&ssr, Execution::Sequential).unwrap(),
    );
    for threads in [1, 2, 3, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let got = pool.install(|| {
            (
                ber_vs_angle(&ber, Execution::Parallel).unwrap(),
                ssr_vs_snr(&ssr, Execution::Parallel).unwrap(),
            )
        });
        assert_eq!(got.0, reference.0, "{threads} threads");
        for (a, b) in got.1.iter().zip(&reference.1) {
            assert_eq!(a.ssr.to_bits(), b.ssr.to_bits(), "{threads} threads");
        }
    }
}

#[test]
fn changing_methods_keeps_shared_randomness() {
    let mut cfg = BerSweepConfig {
        scenario: Scenario::table_ii(),
        regime: Regime::KnownEavesdroppers,
        snr_db: 10.0,
        angle_grid: vec![PI / 3.0, 2.0 * PI / 3.0],
        trials: 5,
        symbols_per_trial: 200,
        seed: 3,
        methods: Method::ALL.to_vec(),
    };
    let all = ber_vs_angle(&cfg, Execution::Sequential).unwrap();
    cfg.methods = vec![Method::Op];
    let op = ber_vs_angle(&cfg, Execution::Sequential).unwrap();
    let from_all: Vec<_> = all.into_iter().filter(|p| p.method == Method::Op).collect();
    assert_eq!(from_all, op);
}
