//! Uniform linear array geometry, steering vectors and interval algebra on
//! the angle domain `[0, π]`.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A uniform linear array of `n_elements` isotropic elements spaced
/// `spacing_wl` carrier wavelengths apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    n_elements: usize,
    spacing_wl: f64,
}

impl ArrayGeometry {
    pub fn new(n_elements: usize, spacing_wl: f64) -> Result<Self> {
        if n_elements < 2 {
            return Err(Error::Domain(format!(
                "array needs at least 2 elements, got {n_elements}"
            )));
        }
        if !(spacing_wl.is_finite() && spacing_wl > 0.0) {
            return Err(Error::Domain(format!(
                "element spacing must be positive, got {spacing_wl}"
            )));
        }
        Ok(Self {
            n_elements,
            spacing_wl,
        })
    }

    /// Half-wavelength spaced array.
    pub fn half_wavelength(n_elements: usize) -> Result<Self> {
        Self::new(n_elements, 0.5)
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn spacing_wl(&self) -> f64 {
        self.spacing_wl
    }

    /// Beam width between first nulls, `2λ / (N d)`, in radians.
    pub fn bwfn(&self) -> f64 {
        2.0 / (self.n_elements as f64 * self.spacing_wl)
    }

    /// Phase (in cycles) of element `n` (zero-based) relative to the array
    /// phase centre for a plane wave leaving at angle `theta`.
    pub fn element_phase(&self, n: usize, theta: f64) -> f64 {
        let offset = n as f64 - (self.n_elements as f64 - 1.0) / 2.0;
        offset * self.spacing_wl * theta.cos()
    }

    /// Normalized steering vector `h(θ)`.
    pub fn steering_vector(&self, theta: f64) -> Result<SteeringVector> {
        check_angle(theta)?;
        Ok(SteeringVector(self.steering_unchecked(theta)))
    }

    pub(crate) fn steering_unchecked(&self, theta: f64) -> DVector<Complex64> {
        let scale = 1.0 / (self.n_elements as f64).sqrt();
        DVector::from_iterator(
            self.n_elements,
            (0..self.n_elements).map(|n| {
                Complex64::from_polar(scale, 2.0 * PI * self.element_phase(n, theta))
            }),
        )
    }
}

pub(crate) fn check_angle(theta: f64) -> Result<()> {
    if (0.0..=PI).contains(&theta) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "angle {theta} rad is outside [0, π]"
        )))
    }
}

/// Converts degrees to radians, snapping the endpoints 0° and 180° onto the
/// exact domain boundaries.
pub fn deg_to_rad(deg: f64) -> f64 {
    if deg == 180.0 {
        PI
    } else {
        deg * PI / 180.0
    }
}

/// Unit-norm array response `h(θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector(DVector<Complex64>);

impl SteeringVector {
    pub fn as_vector(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<Complex64> {
        self.0
    }
}

impl std::ops::Deref for SteeringVector {
    type Target = DVector<Complex64>;

    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

/// A finite union of disjoint closed subintervals of `[0, π]`, kept sorted
/// and merged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The whole angle domain `[0, π]`.
    pub fn full() -> Self {
        Self {
            intervals: vec![(0.0, PI)],
        }
    }

    /// Builds a union from arbitrary (possibly overlapping, unsorted)
    /// intervals. Each must satisfy `0 ≤ lo < hi ≤ π`.
    pub fn from_intervals<I>(intervals: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let intervals: Vec<_> = intervals.into_iter().collect();
        for &(lo, hi) in &intervals {
            if !(0.0 <= lo && lo < hi && hi <= PI) {
                return Err(Error::Domain(format!(
                    "interval [{lo}, {hi}] is not a proper subinterval of [0, π]"
                )));
            }
        }
        Ok(Self::normalized(intervals))
    }

    fn normalized(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|&(lo, hi)| hi > lo);
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Self { intervals: merged }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.intervals
            .iter()
            .any(|&(lo, hi)| lo <= theta && theta <= hi)
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        Self::normalized(all)
    }

    /// `[0, π] \ self`.
    pub fn complement(&self) -> Self {
        let mut gaps = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = 0.0;
        for &(lo, hi) in &self.intervals {
            if lo > cursor {
                gaps.push((cursor, lo));
            }
            cursor = hi;
        }
        if cursor < PI {
            gaps.push((cursor, PI));
        }
        Self { intervals: gaps }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if hi > lo {
                out.push((lo, hi));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::normalized(out)
    }

    /// `self \ other`.
    pub fn difference(&self, other: &Self) -> Self {
        self.intersection(&other.complement())
    }
}

/// Main-lobe interval `[θ̂ − bw/2, θ̂ + bw/2]`, clipped to `[0, π]`.
pub fn main_lobe(theta_hat: f64, bw: f64) -> Result<IntervalUnion> {
    check_angle(theta_hat)?;
    if !(bw.is_finite() && bw > 0.0) {
        return Err(Error::Domain(format!("beam width must be positive, got {bw}")));
    }
    let lo = (theta_hat - bw / 2.0).max(0.0);
    let hi = (theta_hat + bw / 2.0).min(PI);
    Ok(IntervalUnion::normalized(vec![(lo, hi)]))
}

/// Union of the main lobes of every angle in `angles`.
pub fn lobes_union(angles: &[f64], bw: f64) -> Result<IntervalUnion> {
    angles.iter().try_fold(IntervalUnion::empty(), |acc, &theta| {
        Ok(acc.union(&main_lobe(theta, bw)?))
    })
}
