//! Monte Carlo link simulation: QPSK streams, transmit assembly, line-of-sight
//! reception and BER-versus-angle sweeps.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::array_model::ArrayGeometry;
use crate::beamformer::{BeamformerDesign, Regime};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::scenario::{Method, Scenario, TrialDesigner};

/// Direction-estimation error, uniform on `[−Δθ_max, Δθ_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorModel {
    delta_theta_max: f64,
}

impl ErrorModel {
    pub fn new(delta_theta_max: f64) -> Result<Self> {
        if !(delta_theta_max.is_finite() && delta_theta_max >= 0.0) {
            return Err(Error::Config(format!(
                "delta_theta_max must be nonnegative, got {delta_theta_max}"
            )));
        }
        Ok(Self { delta_theta_max })
    }

    pub fn exact() -> Self {
        Self { delta_theta_max: 0.0 }
    }

    pub fn delta_theta_max(&self) -> f64 {
        self.delta_theta_max
    }
}

/// Independent random streams a trial draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Direction-estimation errors.
    Angles,
    /// Symbols, artificial noise and receiver noise.
    Link,
    /// Extra draws made by checks and tests.
    Auxiliary(u64),
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Angles => 0x616e_676c_6573,
            Stream::Link => 0x6c69_6e6b,
            Stream::Auxiliary(i) => 0xa000_0000_0000_0000 ^ i,
        }
    }
}

/// `(master_seed, trial_index)` fully determines every random draw of a
/// trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeed {
    pub master_seed: u64,
    pub trial_index: u64,
}

impl TrialSeed {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self {
            master_seed,
            trial_index,
        }
    }

    pub fn rng(&self, stream: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.master_seed ^ stream.tag()));
        rng.set_stream(self.trial_index);
        rng
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Gray-mapped QPSK: the first bit selects the imaginary sign, the second
/// the real sign, `0 ↦ +`.
pub fn qpsk_symbol(b0: bool, b1: bool) -> Complex64 {
    let re = if b1 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    let im = if b0 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    Complex64::new(re, im)
}

/// Quadrant decision, inverse of [`qpsk_symbol`].
pub fn qpsk_demap(symbol: Complex64) -> [bool; 2] {
    [symbol.im < 0.0, symbol.re < 0.0]
}

pub fn qpsk_map(bits: &[bool]) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::Domain(format!("QPSK needs an even bit count, got {}", bits.len())));
    }
    Ok(bits.chunks_exact(2).map(|b| qpsk_symbol(b[0], b[1])).collect())
}

/// Bits with their unit-energy QPSK symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolStream {
    pub bits: Vec<bool>,
    pub symbols: Vec<Complex64>,
}

impl SymbolStream {
    pub fn from_bits(bits: Vec<bool>) -> Result<Self> {
        let symbols = qpsk_map(&bits)?;
        Ok(Self { bits, symbols })
    }

    pub fn random<R: Rng + ?Sized>(n_symbols: usize, rng: &mut R) -> Self {
        let bits: Vec<bool> = (0..2 * n_symbols).map(|_| rng.random()).collect();
        let symbols = bits.chunks_exact(2).map(|b| qpsk_symbol(b[0], b[1])).collect();
        Self { bits, symbols }
    }
}

/// `θ̂ = θ + u` with `u ~ U[−Δθ_max, Δθ_max]`, clipped to `[0, π]`.
pub fn draw_estimated_angles<R: Rng + ?Sized>(true_angles: &[f64], model: &ErrorModel, rng: &mut R) -> Vec<f64> {
    let dmax = model.delta_theta_max();
    true_angles
        .iter()
        .map(|&t| {
            if dmax == 0.0 {
                t
            } else {
                (t + rng.random_range(-dmax..=dmax)).clamp(0.0, PI)
            }
        })
        .collect()
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * scale, im * scale)
}

/// Transmit vector `s = α₁β₁√P_s Σ v_k d_k + α₂β₂√P_s T_AN z` with a fresh
/// AN draw `z ~ CN(0, I/(N−K))`.
pub fn assemble_transmit<R: Rng + ?Sized>(
    design: &BeamformerDesign,
    symbols: &[Complex64],
    rng: &mut R,
) -> Result<DVector<Complex64>> {
    if symbols.len() != design.users() {
        return Err(Error::Domain(format!(
            "expected {} symbols, got {}",
            design.users(),
            symbols.len()
        )));
    }
    let power = design.power();
    let msg_amp = Complex64::new(power.message_gain().sqrt(), 0.0);
    let an_amp = Complex64::new(power.an_gain().sqrt(), 0.0);
    let n = design.n_elements();
    let cols = design.t_an().ncols();
    let mut s = DVector::zeros(n);
    for (v, &d) in design.v().iter().zip(symbols) {
        s += v * (d * msg_amp);
    }
    let z = DVector::from_fn(cols, |_, _| complex_normal(rng, 1.0 / cols as f64));
    s += design.t_an() * z * an_amp;
    Ok(s)
}

/// `y = h^H(θ) s + ω`, `ω ~ CN(0, σ²)`.
pub fn receive<R: Rng + ?Sized>(
    geom: &ArrayGeometry,
    theta: f64,
    s: &DVector<Complex64>,
    sigma_sq: f64,
    rng: &mut R,
) -> Result<Complex64> {
    let h = geom.steering_vector(theta)?;
    if s.len() != h.len() {
        return Err(Error::Domain(format!(
            "transmit vector has length {}, array has {} elements",
            s.len(),
            h.len()
        )));
    }
    Ok(h.dotc(s) + complex_normal(rng, sigma_sq))
}

/// BER-versus-angle sweep settings. Angles are in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct BerSweepConfig {
    pub scenario: Scenario,
    pub regime: Regime,
    pub snr_db: f64,
    pub angle_grid: Vec<f64>,
    pub trials: usize,
    pub symbols_per_trial: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
}

impl BerSweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.angle_grid.is_empty() {
            return Err(Error::Config("angle grid is empty".into()));
        }
        if self.trials == 0 || self.symbols_per_trial == 0 {
            return Err(Error::Config("trials and symbols_per_trial must be positive".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if self.regime == Regime::KnownEavesdroppers && self.scenario.eaves.is_empty() {
            return Err(Error::Config("known-eavesdropper regime needs eavesdropper angles".into()));
        }
        for &t in &self.angle_grid {
            crate::array_model::check_angle(t)?;
        }
        Ok(())
    }
}

/// Bit-error count for one (receiver angle, user stream, method).
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub angle: f64,
    pub user: usize,
    pub method: Method,
    pub bit_errors: u64,
    pub bits: u64,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.bits as f64
    }
}

/// Per-method link coefficients at every grid angle.
struct LinkTable {
    /// `α₁β₁√P_s h^H(θ) v_k`, indexed `[angle * K + k]`.
    gains: Vec<Complex64>,
    /// `α₂β₂√P_s h^H(θ) T_AN`, indexed `[angle * (N−K) + j]`.
    an: Vec<Complex64>,
}

impl LinkTable {
    fn new(geom: &ArrayGeometry, design: &BeamformerDesign, grid: &[f64]) -> Self {
        let power = design.power();
        let msg_amp = power.message_gain().sqrt();
        let an_amp = power.an_gain().sqrt();
        let mut gains = Vec::with_capacity(grid.len() * design.users());
        let mut an = Vec::with_capacity(grid.len() * design.t_an().ncols());
        for &theta in grid {
            let h = geom.steering_unchecked(theta);
            gains.extend(design.v().iter().map(|v| h.dotc(v) * msg_amp));
            an.extend((h.adjoint() * design.t_an()).iter().map(|z| z * an_amp));
        }
        Self { gains, an }
    }
}

/// Error counts of one trial, indexed `[method][angle][user]`.
fn ber_trial(cfg: &BerSweepConfig, trial: usize) -> Result<Vec<u64>> {
    let sc = &cfg.scenario;
    let seed = TrialSeed::new(cfg.seed, trial as u64);
    let mut angle_rng = seed.rng(Stream::Angles);
    let est_desired = draw_estimated_angles(&sc.desired, &sc.errors, &mut angle_rng);
    let est_eaves = draw_estimated_angles(&sc.eaves, &sc.errors, &mut angle_rng);

    let power = sc.power()?;
    let noise = sc.noise_for_snr(cfg.snr_db)?;
    let sigma_sq = crate::beamformer::sigma_sq_for_snr(cfg.snr_db, &power);
    let designer = TrialDesigner::new(&sc.geom, cfg.regime, est_desired, est_eaves, &cfg.methods)?;
    let tables = cfg
        .methods
        .iter()
        .map(|&m| Ok(LinkTable::new(&sc.geom, &designer.design(m, &power, &noise)?, &cfg.angle_grid)))
        .collect::<Result<Vec<_>>>()?;

    let k_users = sc.users();
    let an_dim = sc.geom.n_elements() - k_users;
    let n_angles = cfg.angle_grid.len();
    let mut errors = vec![0u64; cfg.methods.len() * n_angles * k_users];
    let mut rng = seed.rng(Stream::Link);
    let mut bits = vec![false; 2 * k_users];
    let mut symbols = vec![Complex64::new(0.0, 0.0); k_users];
    let mut z = vec![Complex64::new(0.0, 0.0); an_dim];
    let noise_scale = (sigma_sq / 2.0).sqrt();
    let z_scale = (0.5 / an_dim as f64).sqrt();

    for _ in 0..cfg.symbols_per_trial {
        for (k, sym) in symbols.iter_mut().enumerate() {
            bits[2 * k] = rng.random();
            bits[2 * k + 1] = rng.random();
            *sym = qpsk_symbol(bits[2 * k], bits[2 * k + 1]);
        }
        for zj in z.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *zj = Complex64::new(re * z_scale, im * z_scale);
        }
        for a in 0..n_angles {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let w = Complex64::new(re * noise_scale, im * noise_scale);
            for (m, table) in tables.iter().enumerate() {
                let g = &table.gains[a * k_users..(a + 1) * k_users];
                let t = &table.an[a * an_dim..(a + 1) * an_dim];
                let mut y = w;
                for (gk, dk) in g.iter().zip(&symbols) {
                    y += gk * dk;
                }
                for (tj, zj) in t.iter().zip(&z) {
                    y += tj * zj;
                }
                let base = (m * n_angles + a) * k_users;
                for k in 0..k_users {
                    // genie-aided: derotate by the known composite gain
                    let [b0, b1] = qpsk_demap(y * g[k].conj());
                    errors[base + k] +=
                        (b0 != bits[2 * k]) as u64 + (b1 != bits[2 * k + 1]) as u64;
                }
            }
        }
    }
    Ok(errors)
}

/// Monte Carlo BER at every grid angle for every user stream and method.
/// Rows are ordered by angle, then user, then method.
pub fn ber_vs_angle(cfg: &BerSweepConfig, exec: Execution) -> Result<Vec<BerPoint>> {
    cfg.validate()?;
    let per_trial = exec.map(cfg.trials, |t| ber_trial(cfg, t));
    let k_users = cfg.scenario.users();
    let n_angles = cfg.angle_grid.len();
    let mut totals = vec![0u64; cfg.methods.len() * n_angles * k_users];
    for counts in per_trial {
        for (total, c) in totals.iter_mut().zip(counts?) {
            *total += c;
        }
    }
    let bits = 2 * (cfg.trials * cfg.symbols_per_trial) as u64;
    let mut out = Vec::with_capacity(totals.len());
    for (a, &angle) in cfg.angle_grid.iter().enumerate() {
        for user in 0..k_users {
            for (m, &method) in cfg.methods.iter().enumerate() {
                out.push(BerPoint {
                    angle,
                    user,
                    method,
                    bit_errors: totals[(m * n_angles + a) * k_users + user],
                    bits,
                });
            }
        }
    }
    Ok(out)
}
