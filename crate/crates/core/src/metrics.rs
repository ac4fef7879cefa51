//! Achievable rates, secrecy sum-rate and SNR sweeps.

use crate::array_model::ArrayGeometry;
use crate::beamformer::{BeamformerDesign, NoiseConfig, Regime};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::link_sim::{draw_estimated_angles, Stream, TrialSeed};
use crate::scenario::{Method, Scenario, TrialDesigner};

/// Rate (bits/s/Hz) at which stream `user` can be decoded at angle `theta`
/// with receiver noise `sigma_sq`, treating the other streams and the AN as
/// noise. The AN term is the received AN variance, `E{zzᴴ} = I/(N−K)`.
pub fn rate_at(geom: &ArrayGeometry, theta: f64, user: usize, design: &BeamformerDesign, sigma_sq: f64) -> Result<f64> {
    if user >= design.users() {
        return Err(Error::Domain(format!("no stream {user} in a {}-user design", design.users())));
    }
    let h = geom.steering_vector(theta)?;
    let power = design.power();
    let gain = |v| h.dotc(v).norm_sqr() * power.message_gain();
    let signal = gain(&design.v()[user]);
    let interference: f64 = design
        .v()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != user)
        .map(|(_, v)| gain(v))
        .sum();
    let t_an = design.t_an();
    let an = (h.adjoint() * t_an).norm_squared() * power.an_gain() / t_an.ncols() as f64;
    Ok((1.0 + signal / (sigma_sq + interference + an)).log2())
}

/// Per-receiver rates and the resulting secrecy sum-rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRecord {
    pub snr_db: f64,
    pub method: Method,
    /// `C_k(θ_dk)`.
    pub c_desired: Vec<f64>,
    /// `C_k(θ_em)`, indexed `[k][m]`.
    pub c_eaves: Vec<Vec<f64>>,
    pub ssr: f64,
}

/// Rates of every stream at its user and at every eavesdropper, evaluated
/// at the true directions.
pub fn rate_record(
    geom: &ArrayGeometry,
    design: &BeamformerDesign,
    noise: &NoiseConfig,
    true_desired: &[f64],
    true_eaves: &[f64],
    snr_db: f64,
    method: Method,
) -> Result<RateRecord> {
    if true_eaves.is_empty() {
        return Err(Error::Config("secrecy sum-rate needs at least one eavesdropper".into()));
    }
    if true_desired.len() != design.users()
        || noise.sigma_dk_sq.len() < design.users()
        || noise.sigma_em_sq.len() < true_eaves.len()
    {
        return Err(Error::Config("angle and noise lists do not match the design".into()));
    }
    let mut c_desired = Vec::with_capacity(design.users());
    let mut c_eaves = Vec::with_capacity(design.users());
    let mut ssr = 0.0;
    for (k, &theta) in true_desired.iter().enumerate() {
        let own = rate_at(geom, theta, k, design, noise.sigma_dk_sq[k])?;
        let leaked = true_eaves
            .iter()
            .zip(&noise.sigma_em_sq)
            .map(|(&t, &s)| rate_at(geom, t, k, design, s))
            .collect::<Result<Vec<_>>>()?;
        let worst = leaked.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ssr += (own - worst).max(0.0);
        c_desired.push(own);
        c_eaves.push(leaked);
    }
    Ok(RateRecord {
        snr_db,
        method,
        c_desired,
        c_eaves,
        ssr,
    })
}

/// `Σ_k [C_k(θ_dk) − max_m C_k(θ_em)]⁺`.
pub fn secrecy_sum_rate(
    geom: &ArrayGeometry,
    design: &BeamformerDesign,
    noise: &NoiseConfig,
    true_desired: &[f64],
    true_eaves: &[f64],
) -> Result<f64> {
    rate_record(geom, design, noise, true_desired, true_eaves, f64::NAN, Method::Proposed).map(|r| r.ssr)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsrSweepConfig {
    pub scenario: Scenario,
    pub regime: Regime,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
}

impl SsrSweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.snr_db.is_empty() {
            return Err(Error::Config("SNR grid is empty".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if self.scenario.eaves.is_empty() {
            return Err(Error::Config("secrecy sum-rate needs eavesdropper angles".into()));
        }
        Ok(())
    }
}

/// Mean secrecy sum-rate of one method at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct SsrPoint {
    pub snr_db: f64,
    pub method: Method,
    pub ssr: f64,
    pub trials: usize,
}

/// SSR per trial, indexed `[snr][method]`.
fn ssr_trial(cfg: &SsrSweepConfig, trial: usize) -> Result<Vec<f64>> {
    let sc = &cfg.scenario;
    let mut rng = TrialSeed::new(cfg.seed, trial as u64).rng(Stream::Angles);
    let est_desired = draw_estimated_angles(&sc.desired, &sc.errors, &mut rng);
    let est_eaves = draw_estimated_angles(&sc.eaves, &sc.errors, &mut rng);
    let designer = TrialDesigner::new(&sc.geom, cfg.regime, est_desired, est_eaves, &cfg.methods)?;
    let power = sc.power()?;
    let mut out = Vec::with_capacity(cfg.snr_db.len() * cfg.methods.len());
    for &snr in &cfg.snr_db {
        let noise = sc.noise_for_snr(snr)?;
        for &method in &cfg.methods {
            let design = designer.design(method, &power, &noise)?;
            out.push(secrecy_sum_rate(&sc.geom, &design, &noise, &sc.desired, &sc.eaves)?);
        }
    }
    Ok(out)
}

/// Secrecy sum-rate averaged over direction-error draws. Designs use the
/// estimated directions, rates the true ones. Rows are ordered by SNR, then
/// method.
pub fn ssr_vs_snr(cfg: &SsrSweepConfig, exec: Execution) -> Result<Vec<SsrPoint>> {
    cfg.validate()?;
    let per_trial = exec.map(cfg.trials, |t| ssr_trial(cfg, t));
    let mut sums = vec![0.0; cfg.snr_db.len() * cfg.methods.len()];
    for values in per_trial {
        for (s, v) in sums.iter_mut().zip(values?) {
            *s += v;
        }
    }
    let mut out = Vec::with_capacity(sums.len());
    for (i, &snr) in cfg.snr_db.iter().enumerate() {
        for (j, &method) in cfg.methods.iter().enumerate() {
            out.push(SsrPoint {
                snr_db: snr,
                method,
                ssr: sums[i * cfg.methods.len() + j] / cfg.trials as f64,
                trials: cfg.trials,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamformer::PowerConfig;
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    /// Single user matched at `theta` with AN confined to the orthogonal
    /// complement of `h(theta)`.
    fn matched(geom: &ArrayGeometry, theta: f64) -> BeamformerDesign {
        let h = geom.steering_vector(theta).unwrap().into_vector();
        let n = geom.n_elements();
        let proj = DMatrix::<Complex64>::identity(n, n) - &h * h.adjoint();
        let eig = nalgebra::SymmetricEigen::new(proj);
        let cols: Vec<_> = (0..n)
            .filter(|&i| eig.eigenvalues[i] > 0.5)
            .map(|i| eig.eigenvectors.column(i).into_owned())
            .collect();
        let power = PowerConfig::new(1.0, 0.8, 1).unwrap();
        BeamformerDesign::new(vec![h], DMatrix::from_columns(&cols), power, Regime::UnknownEavesdroppers).unwrap()
    }

    #[test]
    fn interference_free_rate() {
        let geom = ArrayGeometry::half_wavelength(8).unwrap();
        let design = matched(&geom, 1.0);
        let r = rate_at(&geom, 1.0, 0, &design, 0.01).unwrap();
        assert!((r - (1.0 + 0.8 / 0.01f64).log2()).abs() < 1e-10);
    }

    #[test]
    fn colocated_eavesdropper_gets_zero_term() {
        let geom = ArrayGeometry::half_wavelength(8).unwrap();
        let design = matched(&geom, 1.0);
        let noise = NoiseConfig::uniform(0.01, 1, 1).unwrap();
        let ssr = secrecy_sum_rate(&geom, &design, &noise, &[1.0], &[1.0]).unwrap();
        assert_eq!(ssr, 0.0);
    }

    #[test]
    fn ssr_needs_an_eavesdropper() {
        let geom = ArrayGeometry::half_wavelength(8).unwrap();
        let design = matched(&geom, 1.0);
        let noise = NoiseConfig::uniform(0.01, 1, 1).unwrap();
        assert!(secrecy_sum_rate(&geom, &design, &noise, &[1.0], &[]).is_err());
    }
}
