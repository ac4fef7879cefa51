//! Scenario description and per-method design dispatch shared by the
//! Monte Carlo sweeps.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::array_model::{check_angle, ArrayGeometry};
use crate::baselines::{conventional_leakage_design, op_design};
use crate::beamformer::{BeamformerDesign, MliProblem, NoiseConfig, PowerConfig, Regime};
use crate::error::{Error, Result};
use crate::link_sim::ErrorModel;

/// Beamformer design strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Main-lobe-integration leakage design.
    Proposed,
    /// Orthogonal projection baseline.
    Op,
    /// Conventional point-SLNR leakage baseline.
    Conventional,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Proposed, Method::Op, Method::Conventional];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Op => "op",
            Method::Conventional => "conventional",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proposed" | "mli" => Ok(Method::Proposed),
            "op" => Ok(Method::Op),
            "conventional" | "slnr" => Ok(Method::Conventional),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

/// True geometry of one deployment: array, user and eavesdropper
/// directions (radians), power split and angle-error model.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub geom: ArrayGeometry,
    pub desired: Vec<f64>,
    pub eaves: Vec<f64>,
    pub ps: f64,
    pub beta1_sq: f64,
    pub errors: ErrorModel,
}

impl Scenario {
    /// 16-element half-wavelength array, users at 60° and 120°,
    /// eavesdroppers at 30°, 90° and 150°, 90 % message power, ±5° errors.
    pub fn table_ii() -> Self {
        Self {
            geom: ArrayGeometry::half_wavelength(16).expect("valid geometry"),
            desired: vec![PI / 3.0, 2.0 * PI / 3.0],
            eaves: vec![PI / 6.0, PI / 2.0, 5.0 * PI / 6.0],
            ps: 1.0,
            beta1_sq: 0.9,
            errors: ErrorModel::new(5f64.to_radians()).expect("valid error model"),
        }
    }

    pub fn users(&self) -> usize {
        self.desired.len()
    }

    pub fn eavesdroppers(&self) -> usize {
        self.eaves.len()
    }

    pub fn power(&self) -> Result<PowerConfig> {
        PowerConfig::new(self.ps, self.beta1_sq, self.users())
    }

    pub fn noise_for_snr(&self, snr_db: f64) -> Result<NoiseConfig> {
        NoiseConfig::from_snr_db(snr_db, &self.power()?, self.users(), self.eavesdroppers())
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.users();
        if k == 0 || k >= self.geom.n_elements() {
            return Err(Error::Config(format!(
                "need 1 <= K < N, got K = {k} with N = {}",
                self.geom.n_elements()
            )));
        }
        for &t in self.desired.iter().chain(&self.eaves) {
            check_angle(t)?;
        }
        self.power().map(|_| ())
    }
}

/// Designs every requested method for one draw of estimated directions.
/// The integral matrices of the proposed method are built once and reused
/// across noise levels.
#[derive(Debug, Clone)]
pub struct TrialDesigner {
    geom: ArrayGeometry,
    regime: Regime,
    est_desired: Vec<f64>,
    est_eaves: Vec<f64>,
    mli: Option<MliProblem>,
}

impl TrialDesigner {
    pub fn new(
        geom: &ArrayGeometry,
        regime: Regime,
        est_desired: Vec<f64>,
        est_eaves: Vec<f64>,
        methods: &[Method],
    ) -> Result<Self> {
        let mli = if methods.contains(&Method::Proposed) {
            Some(MliProblem::new(geom, regime, &est_desired, &est_eaves)?)
        } else {
            None
        };
        Ok(Self {
            geom: *geom,
            regime,
            est_desired,
            est_eaves,
            mli,
        })
    }

    pub fn design(&self, method: Method, power: &PowerConfig, noise: &NoiseConfig) -> Result<BeamformerDesign> {
        match method {
            Method::Proposed => match &self.mli {
                Some(problem) => problem.design(power, noise),
                None => MliProblem::new(&self.geom, self.regime, &self.est_desired, &self.est_eaves)?
                    .design(power, noise),
            },
            Method::Op => op_design(&self.geom, &self.est_desired, power, self.regime),
            Method::Conventional => {
                let eaves = match self.regime {
                    Regime::KnownEavesdroppers => Some(self.est_eaves.as_slice()),
                    Regime::UnknownEavesdroppers => None,
                };
                conventional_leakage_design(&self.geom, power, noise, &self.est_desired, eaves)
            }
        }
    }
}

/// Designs `method` directly from estimated directions.
pub fn design(
    method: Method,
    geom: &ArrayGeometry,
    regime: Regime,
    power: &PowerConfig,
    noise: &NoiseConfig,
    est_desired: &[f64],
    est_eaves: &[f64],
) -> Result<BeamformerDesign> {
    TrialDesigner::new(geom, regime, est_desired.to_vec(), est_eaves.to_vec(), &[method])?
        .design(method, power, noise)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("zf".parse::<Method>().is_err());
    }

    #[test]
    fn table_ii_is_valid() {
        let s = Scenario::table_ii();
        s.validate().unwrap();
        assert_eq!(s.power().unwrap().beta2_sq, 1.0 - 0.9);
    }
}
