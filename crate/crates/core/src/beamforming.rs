//! Uniform planar array codebooks and steered array gains.
//!
//! Arrays lie in the horizontal plane with `rows x cols` elements on a square
//! grid of pitch `spacing` wavelengths. A plane wave arriving from azimuth
//! `az` and elevation `el` (measured from the horizon) induces at element
//! `(m, n)` the phase
//!
//! ```text
//! 2*pi*spacing * (m*cos(el)*cos(az) + n*cos(el)*sin(az))
//! ```
//!
//! Direction `d` of a codebook applies the conjugate of that phase profile
//! evaluated at its steering angle, normalised by `1/sqrt(N)`. The complex
//! response therefore has magnitude `sqrt(N)` at the steering angle and the
//! power gain peaks at `N` (i.e. `10*log10(rows*cols)` dB).
//!
//! Steering azimuths sit at sector centres `(d + 1/2) * 2*pi / n_directions`
//! with elevation 0, which splits `[0, 2*pi)` into equal sectors.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// How many codebook directions a node can observe in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BfArchitecture {
    /// One direction per slot.
    Analog,
    /// All codebook directions in a single slot.
    Digital,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Steering<T> {
    pub azimuth: T,
    pub elevation: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook<T> {
    rows: usize,
    cols: usize,
    spacing: T,
    steering: Vec<Steering<T>>,
}

impl<T: Real> Codebook<T> {
    /// Codebook with half-wavelength element spacing.
    pub fn new(rows: usize, cols: usize, n_directions: usize) -> Result<Self> {
        Self::with_spacing(rows, cols, n_directions, T::lit(0.5))
    }

    pub fn with_spacing(rows: usize, cols: usize, n_directions: usize, spacing: T) -> Result<Self> {
        if rows == 0 {
            return Err(Error::invalid("rows", "must be >= 1"));
        }
        if cols == 0 {
            return Err(Error::invalid("cols", "must be >= 1"));
        }
        if n_directions == 0 {
            return Err(Error::invalid("n_directions", "must be >= 1"));
        }
        if !(spacing > T::zero() && spacing.is_finite()) {
            return Err(Error::invalid("element_spacing", "must be positive"));
        }
        let sector = T::TAU() / T::from_count(n_directions);
        let steering = (0..n_directions)
            .map(|d| Steering {
                azimuth: (T::from_count(d) + T::lit(0.5)) * sector,
                elevation: T::zero(),
            })
            .collect();
        Ok(Self {
            rows,
            cols,
            spacing,
            steering,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n_elements(&self) -> usize {
        self.rows * self.cols
    }

    pub fn n_directions(&self) -> usize {
        self.steering.len()
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn steering(&self, dir: usize) -> Result<Steering<T>> {
        self.steering
            .get(dir)
            .copied()
            .ok_or(Error::DirectionOutOfRange {
                index: dir,
                len: self.n_directions(),
            })
    }

    pub fn steerings(&self) -> &[Steering<T>] {
        &self.steering
    }

    /// Peak power gain `rows*cols` in dB.
    pub fn max_gain_db(&self) -> T {
        T::from_count(self.n_elements()).to_db()
    }

    /// Complex beam response of direction `dir` to a plane wave from
    /// `(azimuth, elevation)`. `|response|^2` is the linear power gain.
    pub fn response(&self, dir: usize, azimuth: T, elevation: T) -> Result<Complex<T>> {
        let steer = self.steering(dir)?;
        Ok(self.response_unchecked(steer, azimuth, elevation))
    }

    pub(crate) fn response_unchecked(
        &self,
        steer: Steering<T>,
        azimuth: T,
        elevation: T,
    ) -> Complex<T> {
        let k = T::TAU() * self.spacing;
        let (ux, uy) = direction_cosines(azimuth, elevation);
        let (sx, sy) = direction_cosines(steer.azimuth, steer.elevation);
        let phase_x = k * (ux - sx);
        let phase_y = k * (uy - sy);
        // Separable sums over the two grid axes.
        let sum_x = geometric_phasor_sum(phase_x, self.rows);
        let sum_y = geometric_phasor_sum(phase_y, self.cols);
        sum_x * sum_y / T::from_count(self.n_elements()).sqrt()
    }

    /// Linear power gain.
    pub fn gain_linear(&self, dir: usize, azimuth: T, elevation: T) -> Result<T> {
        self.response(dir, azimuth, elevation).map(|r| r.norm_sqr())
    }

    /// Power gain of direction `dir` towards `(azimuth, elevation)`, dB.
    pub fn array_gain_db(&self, dir: usize, azimuth: T, elevation: T) -> Result<T> {
        self.gain_linear(dir, azimuth, elevation).map(|g| g.to_db())
    }
}

fn direction_cosines<T: Real>(azimuth: T, elevation: T) -> (T, T) {
    let c = elevation.cos();
    (c * azimuth.cos(), c * azimuth.sin())
}

fn geometric_phasor_sum<T: Real>(phase: T, n: usize) -> Complex<T> {
    (0..n)
        .map(|m| Complex::from_polar(T::one(), phase * T::from_count(m)))
        .fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + z)
}

/// Free-function form of [`Codebook::array_gain_db`].
pub fn array_gain_db<T: Real>(cb: &Codebook<T>, dir: usize, azimuth: T, elevation: T) -> Result<T> {
    cb.array_gain_db(dir, azimuth, elevation)
}

/// Free-function form of [`Codebook::new`].
pub fn make_codebook<T: Real>(
    rows: usize,
    cols: usize,
    n_directions: usize,
) -> Result<Codebook<T>> {
    Codebook::new(rows, cols, n_directions)
}
