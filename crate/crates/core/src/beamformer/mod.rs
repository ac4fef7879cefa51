//! Confidential beamformers and artificial-noise projection matrices chosen
//! by maximizing main-lobe-integrated signal-to-leakage-and-noise ratios.

mod geneig;

pub use geneig::{herm_gen_eig_top, GenEigen};
pub(crate) use geneig::normalize_phase;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::array_model::{lobes_union, main_lobe, ArrayGeometry, IntervalUnion};
use crate::error::{Error, Result};
use crate::mli_integrals::{r_matrix_closed, IntegralMatrix, DEFAULT_QUAD_TOL};

/// What the transmitter knows about the eavesdroppers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Estimated eavesdropper directions are available.
    KnownEavesdroppers,
    /// Everything outside the desired main lobes is treated as hostile.
    UnknownEavesdroppers,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::KnownEavesdroppers => "known",
            Regime::UnknownEavesdroppers => "unknown",
        }
    }
}

/// Transmit power split between confidential streams and artificial noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConfig {
    pub ps: f64,
    pub beta1_sq: f64,
    pub beta2_sq: f64,
    pub alpha1_sq: f64,
    pub alpha2_sq: f64,
}

impl PowerConfig {
    /// Power configuration for `users` streams with unit-norm AN columns
    /// (so `α₂² = 1`).
    pub fn new(ps: f64, beta1_sq: f64, users: usize) -> Result<Self> {
        if !(ps.is_finite() && ps > 0.0) {
            return Err(Error::Config(format!("ps must be positive, got {ps}")));
        }
        if !(beta1_sq > 0.0 && beta1_sq <= 1.0) {
            return Err(Error::Config(format!("beta1_sq must lie in (0, 1], got {beta1_sq}")));
        }
        if users == 0 {
            return Err(Error::Config("at least one desired user is required".into()));
        }
        Ok(Self {
            ps,
            beta1_sq,
            beta2_sq: 1.0 - beta1_sq,
            alpha1_sq: 1.0 / users as f64,
            alpha2_sq: 1.0,
        })
    }

    /// `α₁² β₁² P_s`, the power scale of every confidential stream.
    pub fn message_gain(&self) -> f64 {
        self.alpha1_sq * self.beta1_sq * self.ps
    }

    /// `α₂² β₂² P_s`, the power scale of the AN projection.
    pub fn an_gain(&self) -> f64 {
        self.alpha2_sq * self.beta2_sq * self.ps
    }
}

/// Receiver noise variances.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    pub sigma_dk_sq: Vec<f64>,
    pub sigma_em_sq: Vec<f64>,
    /// Mean eavesdropper noise variance.
    pub sigma_e_sq: f64,
}

impl NoiseConfig {
    pub fn new(sigma_dk_sq: Vec<f64>, sigma_em_sq: Vec<f64>) -> Result<Self> {
        if sigma_em_sq.is_empty() {
            return Err(Error::Config(
                "eavesdropper noise variances are empty; use NoiseConfig::uniform".into(),
            ));
        }
        let sigma_e_sq = sigma_em_sq.iter().sum::<f64>() / sigma_em_sq.len() as f64;
        Self::checked(sigma_dk_sq, sigma_em_sq, sigma_e_sq)
    }

    /// Every receiver shares the variance `sigma_sq`.
    pub fn uniform(sigma_sq: f64, users: usize, eavesdroppers: usize) -> Result<Self> {
        Self::checked(vec![sigma_sq; users], vec![sigma_sq; eavesdroppers], sigma_sq)
    }

    /// Uniform noise chosen so that `10 log10(α₁²β₁²P_s / σ²) = snr_db`.
    pub fn from_snr_db(snr_db: f64, power: &PowerConfig, users: usize, eavesdroppers: usize) -> Result<Self> {
        Self::uniform(sigma_sq_for_snr(snr_db, power), users, eavesdroppers)
    }

    fn checked(sigma_dk_sq: Vec<f64>, sigma_em_sq: Vec<f64>, sigma_e_sq: f64) -> Result<Self> {
        let ok = |s: &f64| s.is_finite() && *s > 0.0;
        if !sigma_dk_sq.iter().chain(&sigma_em_sq).all(ok) || !ok(&sigma_e_sq) {
            return Err(Error::Config("noise variances must be positive and finite".into()));
        }
        Ok(Self {
            sigma_dk_sq,
            sigma_em_sq,
            sigma_e_sq,
        })
    }
}

pub fn sigma_sq_for_snr(snr_db: f64, power: &PowerConfig) -> f64 {
    power.message_gain() / 10f64.powf(snr_db / 10.0)
}

/// Confidential beamformers plus AN projection for one transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerDesign {
    v: Vec<DVector<Complex64>>,
    t_an: DMatrix<Complex64>,
    power: PowerConfig,
    regime: Regime,
}

impl BeamformerDesign {
    /// Checks dimensions and that every `v_k` and AN column has unit norm.
    pub fn new(
        v: Vec<DVector<Complex64>>,
        t_an: DMatrix<Complex64>,
        power: PowerConfig,
        regime: Regime,
    ) -> Result<Self> {
        let n = t_an.nrows();
        if v.is_empty() || v.len() >= n {
            return Err(Error::Config(format!(
                "need 1 <= K < N, got K = {} with N = {n}",
                v.len()
            )));
        }
        if t_an.ncols() != n - v.len() {
            return Err(Error::Config(format!(
                "AN projection must be {n}x{}, got {}x{}",
                n - v.len(),
                n,
                t_an.ncols()
            )));
        }
        for (k, vk) in v.iter().enumerate() {
            if vk.len() != n || (vk.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::Numerical(format!("beamformer {k} is not a unit N-vector")));
            }
        }
        for (j, col) in t_an.column_iter().enumerate() {
            if (col.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::Numerical(format!("AN column {j} is not unit norm")));
            }
        }
        Ok(Self {
            v,
            t_an,
            power,
            regime,
        })
    }

    pub fn v(&self) -> &[DVector<Complex64>] {
        &self.v
    }

    pub fn t_an(&self) -> &DMatrix<Complex64> {
        &self.t_an
    }

    pub fn power(&self) -> &PowerConfig {
        &self.power
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn users(&self) -> usize {
        self.v.len()
    }

    pub fn n_elements(&self) -> usize {
        self.t_an.nrows()
    }
}

/// A leakage ratio `signal / (noise + leakage)` in either quadratic form
/// (single beamformer) or trace form (AN projection). Its maximizers are the
/// top generalized eigenvectors of `(signal, noise·I + leakage)`.
#[derive(Debug, Clone)]
pub struct LeakageObjective {
    pub signal: DMatrix<Complex64>,
    pub leakage: DMatrix<Complex64>,
    pub noise: f64,
}

impl LeakageObjective {
    pub fn denominator_matrix(&self) -> DMatrix<Complex64> {
        let n = self.leakage.nrows();
        &self.leakage + DMatrix::<Complex64>::identity(n, n) * Complex64::new(self.noise, 0.0)
    }

    /// `v^H S v / v^H (noise·I + L) v`.
    pub fn mli_slnr(&self, v: &DVector<Complex64>) -> Result<f64> {
        let num = v.dotc(&(&self.signal * v)).re;
        let den = v.dotc(&(self.denominator_matrix() * v)).re;
        ratio(num, den)
    }

    /// `tr(T^H S T) / (noise + tr(T^H L T))`.
    pub fn mli_slnr_trace(&self, t: &DMatrix<Complex64>) -> Result<f64> {
        let num = (t.adjoint() * &self.signal * t).trace().re;
        let den = self.noise + (t.adjoint() * &self.leakage * t).trace().re;
        ratio(num, den)
    }

    pub fn solve(&self, count: usize) -> Result<GenEigen> {
        herm_gen_eig_top(&self.signal, &self.denominator_matrix(), count)
    }
}

fn ratio(num: f64, den: f64) -> Result<f64> {
    if den <= 0.0 || !den.is_finite() {
        return Err(Error::Numerical(format!("SLNR denominator is {den:e}")));
    }
    Ok(num / den)
}

fn confidential_objective(
    signal: &IntegralMatrix,
    leakage: DMatrix<Complex64>,
    power: &PowerConfig,
    sigma_dk_sq: f64,
) -> LeakageObjective {
    // ∫_{S_dk} σ² dθ = σ²·measure(S_dk), i.e. σ²θ_BW for an unclipped lobe
    let noise = sigma_dk_sq * signal.source().measure() / power.message_gain();
    LeakageObjective {
        signal: signal.matrix().clone(),
        leakage,
        noise,
    }
}

fn an_objective(
    signal: &IntegralMatrix,
    leakage: &IntegralMatrix,
    users: usize,
    power: &PowerConfig,
    sigma_e_sq: f64,
) -> LeakageObjective {
    let n = signal.matrix().nrows();
    let an_gain = power.an_gain();
    // with no AN power the noise term dominates and B tends to a multiple of I
    let (noise, leakage) = if an_gain > 0.0 {
        let noise = (n - users) as f64 * signal.source().measure() * sigma_e_sq / an_gain;
        (noise, leakage.matrix().clone())
    } else {
        (1.0, DMatrix::zeros(n, n))
    };
    LeakageObjective {
        signal: signal.matrix().clone(),
        leakage,
        noise,
    }
}

fn check_users(geom: &ArrayGeometry, users: usize) -> Result<()> {
    if users == 0 || users >= geom.n_elements() {
        return Err(Error::Config(format!(
            "need 1 <= K < N, got K = {users} with N = {}",
            geom.n_elements()
        )));
    }
    Ok(())
}

fn sigma_for_user(noise: &NoiseConfig, user: usize) -> Result<f64> {
    noise
        .sigma_dk_sq
        .get(user)
        .copied()
        .ok_or_else(|| Error::Config(format!("no noise variance for desired user {user}")))
}

fn top_vector(objective: &LeakageObjective) -> Result<DVector<Complex64>> {
    Ok(objective.solve(1)?.vectors.swap_remove(0))
}

/// Beamformer for `user` when eavesdropper directions are estimated: leakage
/// covers the other desired main lobes and every eavesdropper main lobe.
pub fn design_confidential_known(
    geom: &ArrayGeometry,
    power: &PowerConfig,
    noise: &NoiseConfig,
    user: usize,
    s_dk: &IntervalUnion,
    s_d_minus_k: &IntervalUnion,
    s_e: &IntervalUnion,
) -> Result<DVector<Complex64>> {
    let signal = r_matrix_closed(geom, s_dk, DEFAULT_QUAD_TOL)?;
    let leakage = r_matrix_closed(geom, s_d_minus_k, DEFAULT_QUAD_TOL)?.into_matrix()
        + r_matrix_closed(geom, s_e, DEFAULT_QUAD_TOL)?.into_matrix();
    top_vector(&confidential_objective(&signal, leakage, power, sigma_for_user(noise, user)?))
}

/// Beamformer for `user` when eavesdropper directions are unknown: leakage
/// covers everything outside the user's own main lobe.
pub fn design_confidential_unknown(
    geom: &ArrayGeometry,
    power: &PowerConfig,
    noise: &NoiseConfig,
    user: usize,
    s_dk: &IntervalUnion,
    s_dk_complement: &IntervalUnion,
) -> Result<DVector<Complex64>> {
    let signal = r_matrix_closed(geom, s_dk, DEFAULT_QUAD_TOL)?;
    let leakage = r_matrix_closed(geom, s_dk_complement, DEFAULT_QUAD_TOL)?.into_matrix();
    top_vector(&confidential_objective(&signal, leakage, power, sigma_for_user(noise, user)?))
}

/// AN projection steering noise into the eavesdropper main lobes `s_e` and
/// away from the desired main lobes `s_d`.
pub fn design_an_known(
    geom: &ArrayGeometry,
    power: &PowerConfig,
    noise: &NoiseConfig,
    s_d: &IntervalUnion,
    s_e: &IntervalUnion,
    users: usize,
) -> Result<DMatrix<Complex64>> {
    check_users(geom, users)?;
    let signal = r_matrix_closed(geom, s_e, DEFAULT_QUAD_TOL)?;
    let leakage = r_matrix_closed(geom, s_d, DEFAULT_QUAD_TOL)?;
    let objective = an_objective(&signal, &leakage, users, power, noise.sigma_e_sq);
    Ok(objective.solve(geom.n_elements() - users)?.matrix())
}

/// AN projection steering noise into `[0, π] \ s_d`.
pub fn design_an_unknown(
    geom: &ArrayGeometry,
    power: &PowerConfig,
    noise: &NoiseConfig,
    s_d: &IntervalUnion,
    users: usize,
) -> Result<DMatrix<Complex64>> {
    check_users(geom, users)?;
    let signal = r_matrix_closed(geom, &s_d.complement(), DEFAULT_QUAD_TOL)?;
    let leakage = r_matrix_closed(geom, s_d, DEFAULT_QUAD_TOL)?;
    let objective = an_objective(&signal, &leakage, users, power, noise.sigma_e_sq);
    Ok(objective.solve(geom.n_elements() - users)?.matrix())
}

/// Recomputes `α₁² = 1/K` and `α₂² = (N − K) / tr(T T^H)` for `t_an`.
pub fn normalize_powers(t_an: &DMatrix<Complex64>, base: &PowerConfig, users: usize) -> Result<PowerConfig> {
    if users == 0 || users >= t_an.nrows() {
        return Err(Error::Config(format!(
            "need 1 <= K < N, got K = {users} with N = {}",
            t_an.nrows()
        )));
    }
    let trace = t_an.norm_squared();
    if !(trace > 0.0 && trace.is_finite()) {
        return Err(Error::Numerical(format!("AN projection has trace {trace:e}")));
    }
    Ok(PowerConfig {
        alpha1_sq: 1.0 / users as f64,
        alpha2_sq: (t_an.nrows() - users) as f64 / trace,
        ..*base
    })
}

#[derive(Debug, Clone)]
struct UserMatrices {
    signal: IntegralMatrix,
    leakage: DMatrix<Complex64>,
}

/// All integral matrices of one set of estimated directions. They do not
/// depend on noise or power, so one instance serves a whole SNR sweep.
#[derive(Debug, Clone)]
pub struct MliProblem {
    geom: ArrayGeometry,
    regime: Regime,
    users: Vec<UserMatrices>,
    an_signal: IntegralMatrix,
    an_leakage: IntegralMatrix,
}

impl MliProblem {
    pub fn new(
        geom: &ArrayGeometry,
        regime: Regime,
        est_desired: &[f64],
        est_eaves: &[f64],
    ) -> Result<Self> {
        check_users(geom, est_desired.len())?;
        let bw = geom.bwfn();
        let r = |s: &IntervalUnion| r_matrix_closed(geom, s, DEFAULT_QUAD_TOL);
        let lobes = est_desired
            .iter()
            .map(|&t| main_lobe(t, bw))
            .collect::<Result<Vec<_>>>()?;
        let s_d = lobes_union(est_desired, bw)?;

        let (users, an_signal) = match regime {
            Regime::KnownEavesdroppers => {
                if est_eaves.is_empty() {
                    return Err(Error::Config(
                        "known-eavesdropper design needs estimated eavesdropper angles".into(),
                    ));
                }
                let s_e = lobes_union(est_eaves, bw)?;
                let r_e = r(&s_e)?;
                let users = lobes
                    .iter()
                    .map(|lobe| {
                        Ok(UserMatrices {
                            signal: r(lobe)?,
                            leakage: r(&s_d.difference(lobe))?.into_matrix() + r_e.matrix(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                (users, r_e)
            }
            Regime::UnknownEavesdroppers => {
                let users = lobes
                    .iter()
                    .map(|lobe| {
                        Ok(UserMatrices {
                            signal: r(lobe)?,
                            leakage: r(&lobe.complement())?.into_matrix(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                (users, r(&s_d.complement())?)
            }
        };
        Ok(Self {
            geom: *geom,
            regime,
            users,
            an_signal,
            an_leakage: r(&s_d)?,
        })
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn confidential_objective(&self, user: usize, power: &PowerConfig, noise: &NoiseConfig) -> Result<LeakageObjective> {
        let m = self
            .users
            .get(user)
            .ok_or_else(|| Error::Config(format!("no desired user {user}")))?;
        Ok(confidential_objective(&m.signal, m.leakage.clone(), power, sigma_for_user(noise, user)?))
    }

    pub fn an_objective(&self, power: &PowerConfig, noise: &NoiseConfig) -> LeakageObjective {
        an_objective(&self.an_signal, &self.an_leakage, self.users.len(), power, noise.sigma_e_sq)
    }

    pub fn design(&self, power: &PowerConfig, noise: &NoiseConfig) -> Result<BeamformerDesign> {
        let v = (0..self.users.len())
            .map(|k| top_vector(&self.confidential_objective(k, power, noise)?))
            .collect::<Result<Vec<_>>>()?;
        let k = self.users.len();
        let t_an = self.an_objective(power, noise).solve(self.geom.n_elements() - k)?.matrix();
        let power = normalize_powers(&t_an, power, k)?;
        BeamformerDesign::new(v, t_an, power, self.regime)
    }
}
