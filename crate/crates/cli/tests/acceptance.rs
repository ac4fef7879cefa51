//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). Every criterion is evaluated
//! and reported; the process exits non-zero on a failure only when
//! `ACCEPTANCE_STRICT=1` is set.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::Instant;

use mli_dm::link_sim::{assemble_transmit, ber_vs_angle, BerPoint, BerSweepConfig, SymbolStream};
use mli_dm::metrics::{ssr_vs_snr, SsrPoint, SsrSweepConfig};
use mli_dm::mli_integrals::{r_matrix_closed, r_matrix_quadrature, DEFAULT_QUAD_TOL};
use mli_dm::scenario::TrialDesigner;
use mli_dm::{
    lobes_union, main_lobe, ArrayGeometry, Execution, IntervalUnion, Method, MliProblem, NoiseConfig, PowerConfig,
    Regime, Scenario,
};
use mli_dm_cli::config::{ExperimentConfig, DEFAULT_SEED};
use mli_dm_cli::run::{run, Command, RunOptions};
use mli_dm_cli::validate::{random_union, random_unit_columns, random_unit_vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: u32,
    passed: bool,
    detail: String,
}

fn report(id: u32, passed: bool, detail: String) -> Outcome {
    let tag = if passed { "PASS" } else { "FAIL" };
    println!("criterion {id}: {tag}: {detail}");
    Outcome { id, passed, detail }
}

fn ssr_at(points: &[SsrPoint], snr: f64, method: Method) -> f64 {
    points
        .iter()
        .find(|p| p.snr_db == snr && p.method == method)
        .map(|p| p.ssr)
        .expect("point present")
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn ssr_sweep(regime: Regime, snr_db: Vec<f64>) -> Vec<SsrPoint> {
    let cfg = SsrSweepConfig {
        scenario: Scenario::table_ii(),
        regime,
        snr_db,
        trials: 200,
        seed: DEFAULT_SEED,
        methods: Method::ALL.to_vec(),
    };
    ssr_vs_snr(&cfg, Execution::Parallel).expect("ssr sweep")
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let pts = ssr_sweep(Regime::KnownEavesdroppers, vec![35.0]);
    let secs = start.elapsed().as_secs_f64();
    let (p, o, c) = (
        ssr_at(&pts, 35.0, Method::Proposed),
        ssr_at(&pts, 35.0, Method::Op),
        ssr_at(&pts, 35.0, Method::Conventional),
    );
    let ok = within(p, 16.4, 1.0) && within(o, 12.2, 1.5) && within(c, 11.1, 1.5) && p > o && o > c && secs < 120.0;
    report(
        1,
        ok,
        format!(
            "known, 35 dB, 200 trials: proposed {p:.2} (16.4 +/- 1.0), op {o:.2} (12.2 +/- 1.5), \
             conventional {c:.2} (11.1 +/- 1.5), order proposed > op > conventional: {}, {secs:.1} s",
            p > o && o > c
        ),
    )
}

fn criterion_2() -> Outcome {
    let pts = ssr_sweep(Regime::UnknownEavesdroppers, vec![35.0]);
    let (p, o, c) = (
        ssr_at(&pts, 35.0, Method::Proposed),
        ssr_at(&pts, 35.0, Method::Op),
        ssr_at(&pts, 35.0, Method::Conventional),
    );
    let ok = within(p, 14.0, 1.0) && p > c && c > o;
    report(
        2,
        ok,
        format!(
            "unknown, 35 dB: proposed {p:.2} (14.0 +/- 1.0), conventional {c:.2}, op {o:.2}, \
             order proposed > conventional > op: {}",
            p > c && c > o
        ),
    )
}

fn criterion_3() -> Outcome {
    let grid: Vec<f64> = (0..=7).map(|i| 5.0 * i as f64).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for regime in [Regime::KnownEavesdroppers, Regime::UnknownEavesdroppers] {
        let pts = ssr_sweep(regime, grid.clone());
        let at0: Vec<f64> = Method::ALL.iter().map(|&m| ssr_at(&pts, 0.0, m)).collect();
        let spread = at0.iter().cloned().fold(f64::MIN, f64::max) - at0.iter().cloned().fold(f64::MAX, f64::min);
        let curve: Vec<f64> = grid.iter().map(|&s| ssr_at(&pts, s, Method::Proposed)).collect();
        let monotone = curve.windows(2).all(|w| w[1] >= w[0]);
        ok &= spread < 0.5 && monotone;
        parts.push(format!(
            "{}: spread at 0 dB {spread:.3} (< 0.5), proposed nondecreasing {monotone}",
            regime.as_str()
        ));
    }
    report(3, ok, parts.join("; "))
}

fn ber_sweep(regime: Regime) -> (Vec<f64>, Vec<BerPoint>, f64) {
    let grid: Vec<f64> = (0..=180).map(|d| (d as f64).to_radians().min(PI)).collect();
    let cfg = BerSweepConfig {
        scenario: Scenario::table_ii(),
        regime,
        snr_db: 14.0,
        angle_grid: grid.clone(),
        trials: 1000,
        symbols_per_trial: 1000,
        seed: DEFAULT_SEED,
        methods: Method::ALL.to_vec(),
    };
    let start = Instant::now();
    let pts = ber_vs_angle(&cfg, Execution::Parallel).expect("ber sweep");
    (grid, pts, start.elapsed().as_secs_f64())
}

fn ber_at(pts: &[BerPoint], angle: f64, user: usize, method: Method) -> f64 {
    pts.iter()
        .find(|p| (p.angle - angle).abs() < 1e-12 && p.user == user && p.method == method)
        .map(|p| p.ber())
        .expect("point present")
}

fn desired_ratios(pts: &[BerPoint]) -> [(f64, f64, f64); 2] {
    let sc = Scenario::table_ii();
    [0, 1].map(|k| {
        let p = ber_at(pts, sc.desired[k], k, Method::Proposed);
        let o = ber_at(pts, sc.desired[k], k, Method::Op);
        (p, o, p / o)
    })
}

fn criterion_4(known: &(Vec<f64>, Vec<BerPoint>, f64), unknown: &(Vec<f64>, Vec<BerPoint>, f64)) -> Outcome {
    let r = desired_ratios(&known.1);
    let u = desired_ratios(&unknown.1);
    let ok = r.iter().all(|x| x.2 <= 0.2) && known.2 < 300.0;
    report(
        4,
        ok,
        format!(
            "known, 14 dB, 2e6 bits/point: 60 deg proposed {:.2e} vs op {:.2e} (ratio {:.3}), \
             120 deg proposed {:.2e} vs op {:.2e} (ratio {:.3}), bound 0.2; sweep {:.1} s. \
             Unknown regime, not scored: ratios {:.3}, {:.3}",
            r[0].0, r[0].1, r[0].2, r[1].0, r[1].1, r[1].2, known.2, u[0].2, u[1].2
        ),
    )
}

fn off_lobe_mean(grid: &[f64], pts: &[BerPoint]) -> f64 {
    let sc = Scenario::table_ii();
    let lobes = lobes_union(&sc.desired, sc.geom.bwfn()).unwrap();
    let outside: Vec<f64> = grid.iter().copied().filter(|&t| !lobes.contains(t)).collect();
    let values: Vec<f64> = pts
        .iter()
        .filter(|p| p.method == Method::Proposed && outside.iter().any(|&t| (t - p.angle).abs() < 1e-12))
        .map(BerPoint::ber)
        .collect();
    values.iter().sum::<f64>() / values.len() as f64
}

fn criterion_5(known: &(Vec<f64>, Vec<BerPoint>, f64), unknown: &(Vec<f64>, Vec<BerPoint>, f64)) -> Outcome {
    let u = off_lobe_mean(&unknown.0, &unknown.1);
    let k = off_lobe_mean(&known.0, &known.1);
    report(
        5,
        (0.35..=0.5).contains(&u),
        format!("unknown, 14 dB: mean proposed BER outside the desired main lobes {u:.3} in [0.35, 0.5]; known regime, not scored: {k:.3}"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let (mut entry, mut trace, mut ident): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for n in [4, 8, 16] {
        let geom = ArrayGeometry::half_wavelength(n).unwrap();
        let r = |s: &IntervalUnion| r_matrix_closed(&geom, s, DEFAULT_QUAD_TOL).unwrap();
        let full = r(&IntervalUnion::full()).into_matrix();
        for _ in 0..50 {
            let s = random_union(&mut rng, 3);
            let c = r(&s);
            let q = r_matrix_quadrature(&geom, &s, 1e-11).unwrap();
            entry = entry.max((c.matrix() - q.matrix()).camax());
            trace = trace.max((c.trace() - s.measure()).abs());
            let b = random_union(&mut rng, 3).difference(&s);
            let additive = c.matrix() + r(&b).matrix() - r(&s.union(&b)).matrix();
            let complete = c.matrix() + r(&s.complement()).matrix() - &full;
            ident = ident.max(additive.camax()).max(complete.camax());
        }
    }
    report(
        6,
        entry <= 1e-8 && trace <= 1e-8 && ident <= 1e-10,
        format!(
            "150 unions over N in {{4, 8, 16}}: closed vs quadrature {entry:.2e} (<= 1e-8), \
             trace vs measure {trace:.2e} (<= 1e-8), additivity/completeness {ident:.2e} (<= 1e-10)"
        ),
    )
}

fn criterion_7() -> Outcome {
    let sc = Scenario::table_ii();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let power = sc.power().unwrap();
    let noise = sc.noise_for_snr(14.0).unwrap();
    let mut worst: f64 = 0.0;
    for regime in [Regime::KnownEavesdroppers, Regime::UnknownEavesdroppers] {
        let designer =
            TrialDesigner::new(&sc.geom, regime, sc.desired.clone(), sc.eaves.clone(), &Method::ALL).unwrap();
        for m in Method::ALL {
            let d = designer.design(m, &power, &noise).unwrap();
            let draws = 100_000;
            let total: f64 = (0..draws)
                .map(|_| {
                    let s = SymbolStream::random(d.users(), &mut rng);
                    assemble_transmit(&d, &s.symbols, &mut rng).unwrap().norm_squared()
                })
                .sum();
            worst = worst.max((total / draws as f64 - sc.ps).abs() / sc.ps);
        }
    }
    report(
        7,
        worst <= 0.01,
        format!("3 methods x 2 regimes, 1e5 draws each: max |E||s||^2 - Ps|/Ps = {worst:.2e} (<= 0.01)"),
    )
}

/// Composite Simpson over each piece of `s`.
fn integrate(s: &IntervalUnion, f: impl Fn(f64) -> f64) -> f64 {
    s.intervals()
        .iter()
        .map(|&(lo, hi)| {
            let panels = (((hi - lo) * 4000.0).ceil() as usize).max(2) * 2;
            let h = (hi - lo) / panels as f64;
            let inner: f64 = (1..panels)
                .map(|i| f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
                .sum();
            (f(lo) + f(hi) + inner) * h / 3.0
        })
        .sum()
}

fn appendix_equivalence(rng: &mut ChaCha8Rng) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(4..=16);
        let geom = ArrayGeometry::half_wavelength(n).unwrap();
        let k = rng.random_range(1..=3);
        let desired: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..PI - 0.2)).collect();
        let eaves: Vec<f64> = (0..rng.random_range(1..=3)).map(|_| rng.random_range(0.0..PI)).collect();
        let power = PowerConfig::new(rng.random_range(0.5..2.0), rng.random_range(0.5..1.0), k).unwrap();
        let sigma = rng.random_range(1e-3..1.0);
        let noise = NoiseConfig::uniform(sigma, k, eaves.len()).unwrap();
        let problem = MliProblem::new(&geom, Regime::KnownEavesdroppers, &desired, &eaves).unwrap();
        let user = rng.random_range(0..k);
        let v = random_unit_vector(rng, n);
        let quadratic = problem
            .confidential_objective(user, &power, &noise)
            .unwrap()
            .mli_slnr(&v)
            .unwrap();
        let bw = geom.bwfn();
        let s_dk = main_lobe(desired[user], bw).unwrap();
        let s_d = lobes_union(&desired, bw).unwrap();
        let s_e = lobes_union(&eaves, bw).unwrap();
        let g = power.message_gain();
        let rx = |t: f64| g * geom.steering_vector(t).unwrap().dotc(&v).norm_sqr();
        let integral = integrate(&s_dk, rx)
            / (integrate(&s_dk, |_| sigma) + integrate(&s_d.difference(&s_dk), rx) + integrate(&s_e, rx));
        worst = worst.max((integral - quadratic).abs() / quadratic);
    }
    worst
}

fn criterion_8() -> Outcome {
    let sc = Scenario::table_ii();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let power = sc.power().unwrap();
    let (mut v_beaten, mut v_total, mut t_beaten, mut t_total) = (0, 0, 0, 0);
    let mut t_fail_at = Vec::new();
    for regime in [Regime::KnownEavesdroppers, Regime::UnknownEavesdroppers] {
        let problem = MliProblem::new(&sc.geom, regime, &sc.desired, &sc.eaves).unwrap();
        for snr in [0.0, 14.0, 35.0] {
            let noise = sc.noise_for_snr(snr).unwrap();
            let d = problem.design(&power, &noise).unwrap();
            for (k, v) in d.v().iter().enumerate() {
                let obj = problem.confidential_objective(k, &power, &noise).unwrap();
                let best = obj.mli_slnr(v).unwrap();
                for _ in 0..10_000 {
                    v_total += 1;
                    if obj.mli_slnr(&random_unit_vector(&mut rng, 16)).unwrap() > best * (1.0 + 1e-9) {
                        v_beaten += 1;
                    }
                }
            }
            let obj = problem.an_objective(d.power(), &noise);
            let best = obj.mli_slnr_trace(d.t_an()).unwrap();
            let mut beaten_here = 0;
            for _ in 0..1000 {
                t_total += 1;
                if obj.mli_slnr_trace(&random_unit_columns(&mut rng, 16, 14)).unwrap() > best * (1.0 + 1e-9) {
                    beaten_here += 1;
                }
            }
            if beaten_here > 0 {
                t_fail_at.push(format!("{}@{snr}dB:{beaten_here}", regime.as_str()));
            }
            t_beaten += beaten_here;
        }
    }
    let eq = appendix_equivalence(&mut rng);
    report(
        8,
        v_beaten == 0 && t_beaten == 0 && eq <= 1e-6,
        format!(
            "v_k beaten by {v_beaten} of {v_total} random unit vectors; T_AN beaten by {t_beaten} of {t_total} \
             random unit-column matrices [{}]; integral vs quadratic form max rel. error {eq:.2e} (<= 1e-6)",
            t_fail_at.join(", ")
        ),
    )
}

fn run_cli(command: Command, cfg: &ExperimentConfig, dir: &Path, exec: Execution, threads: usize) -> Vec<u8> {
    let opts = RunOptions {
        out_dir: dir.to_path_buf(),
        quiet: true,
        plot: false,
        exec,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let files = pool
        .install(|| run(command, cfg, &opts, &mut std::io::sink()))
        .expect("subcommand runs");
    fs::read(&files[0]).unwrap()
}

fn criterion_9() -> Outcome {
    let cfg = ExperimentConfig {
        trials: 40,
        symbols_per_trial: 200,
        ..ExperimentConfig::default()
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for command in [Command::BerSweep, Command::SsrSweep, Command::Design] {
        let runs: Vec<Vec<u8>> = [
            (Execution::Parallel, 1),
            (Execution::Parallel, 4),
            (Execution::Parallel, 4),
            (Execution::Sequential, 1),
        ]
        .iter()
        .map(|&(exec, threads)| {
            let dir = tempfile::tempdir().unwrap();
            run_cli(command, &cfg, dir.path(), exec, threads)
        })
        .collect();
        let same = runs.windows(2).all(|w| w[0] == w[1]);
        ok &= same;
        parts.push(format!("{} identical over 4 runs: {same}", command.as_str()));
    }
    report(9, ok, format!("{} (1 and 4 workers, sequential)", parts.join(", ")))
}

fn main() {
    let known = ber_sweep(Regime::KnownEavesdroppers);
    let unknown = ber_sweep(Regime::UnknownEavesdroppers);
    let outcomes = vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(&known, &unknown),
        criterion_5(&known, &unknown),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ];
    let failed: Vec<&Outcome> = outcomes.iter().filter(|o| !o.passed).collect();
    println!(
        "acceptance: {} of {} criteria passed{}",
        outcomes.len() - failed.len(),
        outcomes.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" (failed: {})", failed.iter().map(|o| o.id.to_string()).collect::<Vec<_>>().join(", "))
        }
    );
    for o in &failed {
        eprintln!("criterion {} failed: {}", o.id, o.detail);
    }
    if !failed.is_empty() && std::env::var("ACCEPTANCE_STRICT").as_deref() == Ok("1") {
        std::process::exit(1);
    }
}
