//! Reference designers: orthogonal projection (matched beam plus AN in the
//! null space of the desired steering vectors) and conventional point-SLNR
//! leakage beamforming.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::array_model::ArrayGeometry;
use crate::beamformer::{
    herm_gen_eig_top, normalize_phase, normalize_powers, BeamformerDesign, NoiseConfig, PowerConfig, Regime,
};
use crate::error::{Error, Result};

fn steering_matrix(geom: &ArrayGeometry, angles: &[f64]) -> Result<Vec<DVector<Complex64>>> {
    angles
        .iter()
        .map(|&t| Ok(geom.steering_vector(t)?.into_vector()))
        .collect()
}

fn outer_sum<'a, I>(n: usize, vectors: I) -> DMatrix<Complex64>
where
    I: IntoIterator<Item = &'a DVector<Complex64>>,
{
    vectors
        .into_iter()
        .fold(DMatrix::zeros(n, n), |acc, h| acc + h * h.adjoint())
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

/// Orthonormal basis of the orthogonal complement of span{h(θ̂_k)}.
fn null_space_basis(geom: &ArrayGeometry, steering: &[DVector<Complex64>]) -> Result<DMatrix<Complex64>> {
    let n = geom.n_elements();
    let h = DMatrix::from_columns(steering);
    let gram = h.adjoint() * &h;
    let gram_min = SymmetricEigen::new(gram.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if gram_min < 1e-10 {
        return Err(Error::Rank(format!(
            "desired steering vectors are linearly dependent (Gram eigenvalue {gram_min:e})"
        )));
    }
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Rank("singular steering Gram matrix".into()))?;
    let projector = DMatrix::<Complex64>::identity(n, n) - &h * gram_inv * h.adjoint();
    let projector = (&projector + projector.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(projector);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let columns: Vec<_> = order
        .iter()
        .take(n - steering.len())
        .map(|&i| normalize_phase(eig.eigenvectors.column(i).into_owned()))
        .collect();
    Ok(DMatrix::from_columns(&columns))
}

/// Orthogonal-projection design: `v_k = h(θ̂_k)` and AN confined to the
/// null space of the estimated desired steering vectors.
pub fn op_design(
    geom: &ArrayGeometry,
    est_desired: &[f64],
    power: &PowerConfig,
    regime: Regime,
) -> Result<BeamformerDesign> {
    check_users(geom, est_desired.len())?;
    let steering = steering_matrix(geom, est_desired)?;
    let t_an = null_space_basis(geom, &steering)?;
    let power = normalize_powers(&t_an, power, est_desired.len())?;
    BeamformerDesign::new(steering, t_an, power, regime)
}

/// Point-sampled SLNR design. Without eavesdropper estimates the leakage
/// only counts the other desired users and the AN falls back to the
/// orthogonal-projection null space.
pub fn conventional_leakage_design(
    geom: &ArrayGeometry,
    power: &PowerConfig,
    noise: &NoiseConfig,
    est_desired: &[f64],
    est_eaves: Option<&[f64]>,
) -> Result<BeamformerDesign> {
    let users = est_desired.len();
    check_users(geom, users)?;
    let n = geom.n_elements();
    let desired = steering_matrix(geom, est_desired)?;
    let eaves = match est_eaves {
        Some(angles) if !angles.is_empty() => Some(steering_matrix(geom, angles)?),
        _ => None,
    };
    let eaves_sum = eaves
        .as_ref()
        .map(|e| outer_sum(n, e))
        .unwrap_or_else(|| DMatrix::zeros(n, n));
    let identity = DMatrix::<Complex64>::identity(n, n);

    let mut v = Vec::with_capacity(users);
    for (k, hk) in desired.iter().enumerate() {
        let sigma = *noise
            .sigma_dk_sq
            .get(k)
            .ok_or_else(|| Error::Config(format!("no noise variance for desired user {k}")))?;
        let others = outer_sum(n, desired.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, h)| h));
        let b = &identity * Complex64::new(sigma / power.message_gain(), 0.0) + others + &eaves_sum;
        let a = hk * hk.adjoint();
        v.push(herm_gen_eig_top(&a, &b, 1)?.vectors.swap_remove(0));
    }

    let (t_an, regime) = match &eaves {
        Some(e) => {
            let coeff = if power.an_gain() > 0.0 {
                (n - users) as f64 * e.len() as f64 * noise.sigma_e_sq / power.an_gain()
            } else {
                1.0
            };
            let b = &identity * Complex64::new(coeff, 0.0) + outer_sum(n, &desired);
            let t = herm_gen_eig_top(&eaves_sum, &b, n - users)?.matrix();
            (t, Regime::KnownEavesdroppers)
        }
        None => (null_space_basis(geom, &desired)?, Regime::UnknownEavesdroppers),
    };
    let power = normalize_powers(&t_an, power, users)?;
    BeamformerDesign::new(v, t_an, power, regime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn table_ii() -> (ArrayGeometry, PowerConfig, Vec<f64>, Vec<f64>) {
        (
            ArrayGeometry::half_wavelength(16).unwrap(),
            PowerConfig::new(1.0, 0.9, 2).unwrap(),
            vec![PI / 3.0, 2.0 * PI / 3.0],
            vec![PI / 6.0, PI / 2.0, 5.0 * PI / 6.0],
        )
    }

    #[test]
    fn op_null_space_and_orthonormality() {
        let (geom, power, d, _) = table_ii();
        let design = op_design(&geom, &d, &power, Regime::KnownEavesdroppers).unwrap();
        let t = design.t_an();
        assert_eq!(t.shape(), (16, 14));
        for (k, &theta) in d.iter().enumerate() {
            let h = geom.steering_vector(theta).unwrap();
            assert!((h.adjoint() * t).norm() <= 1e-10);
            assert!((h.dotc(&design.v()[k]) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let gram = t.adjoint() * t;
        assert!((gram - DMatrix::<Complex64>::identity(14, 14)).camax() < 1e-10);
    }

    #[test]
    fn op_rejects_coincident_angles() {
        let (geom, power, _, _) = table_ii();
        let r = op_design(&geom, &[1.0, 1.0], &power, Regime::UnknownEavesdroppers);
        assert!(matches!(r, Err(Error::Rank(_))));
    }

    #[test]
    fn single_user_conventional_is_matched() {
        let geom = ArrayGeometry::half_wavelength(8).unwrap();
        let power = PowerConfig::new(1.0, 1.0, 1).unwrap();
        let noise = NoiseConfig::uniform(0.01, 1, 0).unwrap();
        let design = conventional_leakage_design(&geom, &power, &noise, &[1.1], None).unwrap();
        let h = geom.steering_vector(1.1).unwrap();
        assert!((h.dotc(&design.v()[0]).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conventional_outputs_unit_norm() {
        let (geom, power, d, e) = table_ii();
        let noise = NoiseConfig::from_snr_db(14.0, &power, 2, 3).unwrap();
        for eaves in [Some(e.as_slice()), None] {
            let design = conventional_leakage_design(&geom, &power, &noise, &d, eaves).unwrap();
            for v in design.v() {
                assert!((v.norm() - 1.0).abs() < 1e-10);
            }
            assert!((design.t_an().norm_squared() - 14.0).abs() < 1e-9);
        }
    }
}
