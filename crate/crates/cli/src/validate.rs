//! Property and oracle checks run by `mli-dm validate`.

use std::f64::consts::PI;
use std::fmt;

use mli_dm::link_sim::{assemble_transmit, ber_vs_angle, BerSweepConfig, SymbolStream};
use mli_dm::metrics::{ssr_vs_snr, SsrSweepConfig};
use mli_dm::mli_integrals::{r_matrix_closed, r_matrix_quadrature, DEFAULT_QUAD_TOL};
use mli_dm::scenario::TrialDesigner;
use mli_dm::{ArrayGeometry, Execution, IntervalUnion, MliProblem, Regime};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn failed(name: &'static str, err: impl fmt::Display) -> Check {
    check(name, false, format!("error: {err}"))
}

/// Union of up to `max_pieces` random subintervals of [0, π].
pub fn random_union<R: Rng + ?Sized>(rng: &mut R, max_pieces: usize) -> IntervalUnion {
    let pieces = rng.random_range(1..=max_pieces);
    let intervals: Vec<(f64, f64)> = (0..pieces)
        .map(|_| {
            let a = rng.random_range(0.0..PI);
            let b = rng.random_range(0.0..PI);
            if a < b { (a, b) } else { (b, a) }
        })
        .filter(|(a, b)| b - a > 1e-9)
        .collect();
    IntervalUnion::from_intervals(intervals).expect("intervals lie in [0, pi]")
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<Complex64> {
    let v = DVector::from_fn(n, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

pub fn random_unit_columns<R: Rng + ?Sized>(rng: &mut R, n: usize, cols: usize) -> DMatrix<Complex64> {
    let columns: Vec<_> = (0..cols).map(|_| random_unit_vector(rng, n)).collect();
    DMatrix::from_columns(&columns)
}

pub fn steering_norm(geom: &ArrayGeometry, rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        match geom.steering_vector(rng.random_range(0.0..=PI)) {
            Ok(h) => worst = worst.max((h.norm() - 1.0).abs()),
            Err(e) => return failed("steering_norm", e),
        }
    }
    check("steering_norm", worst <= 1e-12, format!("max |‖h‖-1| = {worst:.2e} over 1000 angles"))
}

pub fn interval_algebra(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let a = random_union(rng, 4);
        let b = random_union(rng, 4);
        let inclusion = a.union(&b).measure() + a.intersection(&b).measure() - a.measure() - b.measure();
        let complement = a.measure() + a.complement().measure() - PI;
        let split = a.difference(&b).measure() + a.intersection(&b).measure() - a.measure();
        worst = worst.max(inclusion.abs()).max(complement.abs()).max(split.abs());
    }
    check("interval_algebra", worst <= 1e-12, format!("max measure identity error {worst:.2e} over 500 pairs"))
}

pub fn integral_oracle(rng: &mut ChaCha8Rng, per_size: usize) -> Check {
    let mut worst_entry: f64 = 0.0;
    let mut worst_trace: f64 = 0.0;
    for n in [4, 8, 16] {
        let geom = ArrayGeometry::half_wavelength(n).expect("valid geometry");
        for _ in 0..per_size {
            let s = random_union(rng, 3);
            let closed = match r_matrix_closed(&geom, &s, DEFAULT_QUAD_TOL) {
                Ok(r) => r,
                Err(e) => return failed("integral_oracle", e),
            };
            let quad = match r_matrix_quadrature(&geom, &s, 1e-11) {
                Ok(r) => r,
                Err(e) => return failed("integral_oracle", e),
            };
            worst_entry = worst_entry.max((closed.matrix() - quad.matrix()).camax());
            worst_trace = worst_trace.max((closed.trace() - s.measure()).abs());
        }
    }
    check(
        "integral_oracle",
        worst_entry <= 1e-8 && worst_trace <= 1e-8,
        format!(
            "max entry gap {worst_entry:.2e}, max trace gap {worst_trace:.2e} over {} unions",
            3 * per_size
        ),
    )
}

pub fn additivity_completeness(rng: &mut ChaCha8Rng) -> Check {
    let geom = ArrayGeometry::half_wavelength(16).expect("valid geometry");
    let r = |s: &IntervalUnion| r_matrix_closed(&geom, s, DEFAULT_QUAD_TOL).map(|m| m.into_matrix());
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = random_union(rng, 3);
        let b = random_union(rng, 3).difference(&a);
        let res = (|| {
            let additive = r(&a)? + r(&b)? - r(&a.union(&b))?;
            let complete = r(&a)? + r(&a.complement())? - r(&IntervalUnion::full())?;
            Ok::<_, mli_dm::Error>(additive.camax().max(complete.camax()))
        })();
        match res {
            Ok(gap) => worst = worst.max(gap),
            Err(e) => return failed("additivity_completeness", e),
        }
    }
    check("additivity_completeness", worst <= 1e-10, format!("max entry gap {worst:.2e} over 20 pairs"))
}

fn scenario_designs(
    cfg: &ExperimentConfig,
    regime: Regime,
) -> Result<Vec<(String, mli_dm::BeamformerDesign)>, String> {
    let sc = cfg.scenario().map_err(|e| e.to_string())?;
    let snr = cfg.ssr_snr_db().last().copied().unwrap_or(14.0);
    let power = sc.power().map_err(|e| e.to_string())?;
    let noise = sc.noise_for_snr(snr).map_err(|e| e.to_string())?;
    let designer = TrialDesigner::new(&sc.geom, regime, sc.desired.clone(), sc.eaves.clone(), &cfg.methods)
        .map_err(|e| e.to_string())?;
    cfg.methods
        .iter()
        .map(|&m| {
            designer
                .design(m, &power, &noise)
                .map(|d| (format!("{m}/{}", regime.as_str()), d))
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn regimes(cfg: &ExperimentConfig) -> Vec<Regime> {
    if cfg.eaves_angles_deg.is_empty() {
        vec![Regime::UnknownEavesdroppers]
    } else {
        vec![Regime::KnownEavesdroppers, Regime::UnknownEavesdroppers]
    }
}

pub fn power_normalization(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng, draws: usize) -> Check {
    let mut worst: f64 = 0.0;
    for regime in regimes(cfg) {
        let designs = match scenario_designs(cfg, regime) {
            Ok(d) => d,
            Err(e) => return failed("power_normalization", e),
        };
        for (_, d) in designs {
            let mut total = 0.0;
            for _ in 0..draws {
                let symbols = SymbolStream::random(d.users(), rng);
                match assemble_transmit(&d, &symbols.symbols, rng) {
                    Ok(s) => total += s.norm_squared(),
                    Err(e) => return failed("power_normalization", e),
                }
            }
            let ps = d.power().ps;
            worst = worst.max((total / draws as f64 - ps).abs() / ps);
        }
    }
    check(
        "power_normalization",
        worst <= 0.01,
        format!("max relative error of mean ‖s‖² {worst:.2e} over {draws} draws per design"),
    )
}

/// Designed beamformers against random unit vectors, and the AN matrix
/// against every other choice of N−K generalized eigenvectors.
pub fn rayleigh_optimality(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Check {
    let sc = match cfg.scenario() {
        Ok(s) => s,
        Err(e) => return failed("rayleigh_optimality", e),
    };
    let snr = cfg.ber_snr_db().unwrap_or(14.0);
    let n = sc.geom.n_elements();
    let k = sc.users();
    let mut beaten = 0usize;
    let mut trials = 0usize;
    let mut swaps_beaten = 0usize;
    let mut swaps = 0usize;
    for regime in regimes(cfg) {
        let res = (|| {
            let power = sc.power()?;
            let noise = sc.noise_for_snr(snr)?;
            let problem = MliProblem::new(&sc.geom, regime, &sc.desired, &sc.eaves)?;
            let design = problem.design(&power, &noise)?;
            for (user, v) in design.v().iter().enumerate() {
                let obj = problem.confidential_objective(user, &power, &noise)?;
                let best = obj.mli_slnr(v)?;
                for _ in 0..10_000 {
                    trials += 1;
                    if obj.mli_slnr(&random_unit_vector(rng, n))? > best * (1.0 + 1e-9) {
                        beaten += 1;
                    }
                }
            }
            let obj = problem.an_objective(design.power(), &noise);
            let best = obj.mli_slnr_trace(design.t_an())?;
            let all = obj.solve(n)?.matrix();
            for keep_out in 0..n - k {
                for swap_in in n - k..n {
                    let mut alt = design.t_an().clone();
                    alt.set_column(keep_out, &all.column(swap_in));
                    swaps += 1;
                    if obj.mli_slnr_trace(&alt)? > best * (1.0 + 1e-9) {
                        swaps_beaten += 1;
                    }
                }
            }
            Ok::<_, mli_dm::Error>(())
        })();
        if let Err(e) = res {
            return failed("rayleigh_optimality", e);
        }
    }
    check(
        "rayleigh_optimality",
        beaten == 0 && swaps_beaten == 0,
        format!(
            "{beaten} of {trials} random vectors beat v_k; {swaps_beaten} of {swaps} eigenvector swaps beat T_AN"
        ),
    )
}

/// AN leakage into the desired main lobes, `tr(TᴴR_{S_d}T)`, against random
/// unit-column matrices; the design must leak less in at least 95 % of draws.
pub fn an_leakage(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Check {
    let sc = match cfg.scenario() {
        Ok(s) => s,
        Err(e) => return failed("an_leakage", e),
    };
    let snr = cfg.ber_snr_db().unwrap_or(14.0);
    let n = sc.geom.n_elements();
    let k = sc.users();
    let mut worst_share: f64 = 1.0;
    for regime in regimes(cfg) {
        let res = (|| {
            let power = sc.power()?;
            let noise = sc.noise_for_snr(snr)?;
            let problem = MliProblem::new(&sc.geom, regime, &sc.desired, &sc.eaves)?;
            let design = problem.design(&power, &noise)?;
            let obj = problem.an_objective(design.power(), &noise);
            let leak = |t: &DMatrix<Complex64>| (t.adjoint() * &obj.leakage * t).trace().re;
            let ours = leak(design.t_an());
            let wins = (0..1000)
                .filter(|_| ours <= leak(&random_unit_columns(rng, n, n - k)))
                .count();
            Ok::<_, mli_dm::Error>(wins as f64 / 1000.0)
        })();
        match res {
            Ok(share) => worst_share = worst_share.min(share),
            Err(e) => return failed("an_leakage", e),
        }
    }
    check(
        "an_leakage",
        worst_share >= 0.95,
        format!("design leaks less than {:.1} % of random matrices", 100.0 * worst_share),
    )
}

pub fn determinism(cfg: &ExperimentConfig) -> Check {
    let sc = match cfg.scenario() {
        Ok(s) => s,
        Err(e) => return failed("determinism", e),
    };
    let regime = cfg.regime();
    let ber = BerSweepConfig {
        scenario: sc.clone(),
        regime,
        snr_db: 14.0,
        angle_grid: (0..=18).map(|i| (10.0 * i as f64).to_radians().min(PI)).collect(),
        trials: 6,
        symbols_per_trial: 50,
        seed: cfg.seed,
        methods: cfg.methods.clone(),
    };
    let same_ber = match (
        ber_vs_angle(&ber, Execution::Sequential),
        ber_vs_angle(&ber, Execution::Parallel),
    ) {
        (Ok(a), Ok(b)) => a == b,
        (Err(e), _) | (_, Err(e)) => return failed("determinism", e),
    };
    let same_ssr = if sc.eaves.is_empty() {
        true
    } else {
        let ssr = SsrSweepConfig {
            scenario: sc,
            regime,
            snr_db: vec![0.0, 35.0],
            trials: 6,
            seed: cfg.seed,
            methods: cfg.methods.clone(),
        };
        match (ssr_vs_snr(&ssr, Execution::Sequential), ssr_vs_snr(&ssr, Execution::Parallel)) {
            (Ok(a), Ok(b)) => a.iter().zip(&b).all(|(x, y)| x.ssr.to_bits() == y.ssr.to_bits()),
            (Err(e), _) | (_, Err(e)) => return failed("determinism", e),
        }
    };
    check(
        "determinism",
        same_ber && same_ssr,
        format!("sequential vs parallel: ber identical = {same_ber}, ssr identical = {same_ssr}"),
    )
}

/// Runs every check with randomness drawn from `cfg.seed`.
pub fn run_all(cfg: &ExperimentConfig) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let geom = match ArrayGeometry::new(cfg.n_antennas, cfg.spacing_wl) {
        Ok(g) => g,
        Err(e) => return vec![failed("steering_norm", e)],
    };
    vec![
        steering_norm(&geom, &mut rng),
        interval_algebra(&mut rng),
        integral_oracle(&mut rng, 4),
        additivity_completeness(&mut rng),
        power_normalization(cfg, &mut rng, 100_000),
        rayleigh_optimality(cfg, &mut rng),
        an_leakage(cfg, &mut rng),
        determinism(cfg),
    ]
}
