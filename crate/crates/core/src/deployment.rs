//! Random network topologies: one UE and a Poisson field of mmWave SCells.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point in the simulation plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    /// Bearing of `other` as seen from `self`, radians in (-pi, pi].
    pub fn bearing_to(&self, other: &Point<T>) -> T {
        (other.y - self.y).atan2(other.x - self.x)
    }
}

/// Euclidean distance in meters.
pub fn distance_m<T: Real>(p: &Point<T>, q: &Point<T>) -> T {
    (p.x - q.x).hypot(p.y - q.y)
}

/// Rectangular simulation area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimArea<T> {
    pub width_km: T,
    pub height_km: T,
}

impl<T: Real> SimArea<T> {
    pub fn new(width_km: T, height_km: T) -> Result<Self> {
        let area = Self {
            width_km,
            height_km,
        };
        area.validate()?;
        Ok(area)
    }

    /// Square area of the given surface.
    pub fn square(area_km2: T) -> Result<Self> {
        let side = area_km2.sqrt();
        Self::new(side, side)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width_km > T::zero() && self.width_km.is_finite()) {
            return Err(Error::invalid("width_km", "must be positive and finite"));
        }
        if !(self.height_km > T::zero() && self.height_km.is_finite()) {
            return Err(Error::invalid("height_km", "must be positive and finite"));
        }
        Ok(())
    }

    pub fn area_km2(&self) -> T {
        self.width_km * self.height_km
    }

    pub fn width_m(&self) -> T {
        self.width_km * T::lit(1000.0)
    }

    pub fn height_m(&self) -> T {
        self.height_km * T::lit(1000.0)
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        p.x >= T::zero() && p.y >= T::zero() && p.x <= self.width_m() && p.y <= self.height_m()
    }

    fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point<T> {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        Point::new(
            T::lit(u * self.width_m().to_f64_lossless()),
            T::lit(v * self.height_m().to_f64_lossless()),
        )
    }
}

impl<T: Real> Default for SimArea<T> {
    /// Square of 0.5 km^2.
    fn default() -> Self {
        Self::square(T::lit(0.5)).expect("0.5 km2 is a valid area")
    }
}

/// One mmWave SCell site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scell<T> {
    pub id: u32,
    pub position: Point<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment<T> {
    pub ue_position: Point<T>,
    /// SCells carry ids `1..=M` in generation order.
    pub scells: Vec<Scell<T>>,
}

impl<T: Real> Deployment<T> {
    pub fn len(&self) -> usize {
        self.scells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scells.is_empty()
    }

    pub fn scell(&self, id: u32) -> Option<&Scell<T>> {
        self.scells.iter().find(|c| c.id == id)
    }

    pub fn distance_to(&self, id: u32) -> Option<T> {
        self.scell(id)
            .map(|c| distance_m(&self.ue_position, &c.position))
    }
}

/// Draws a deployment: UE uniform in the area, SCell count
/// `Poisson(lambda_bs * A)`, SCell positions i.i.d. uniform.
pub fn sample_deployment<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    lambda_bs: T,
    area: &SimArea<T>,
) -> Result<Deployment<T>> {
    if !(lambda_bs >= T::zero() && lambda_bs.is_finite()) {
        return Err(Error::invalid("lambda_bs", "must be finite and >= 0"));
    }
    area.validate()?;

    let ue_position = area.sample_point(rng);
    let mean = (lambda_bs * area.area_km2()).to_f64_lossless();
    let count = if mean > 0.0 {
        let poisson = Poisson::new(mean).map_err(|e| Error::invalid("lambda_bs", e.to_string()))?;
        poisson.sample(rng) as usize
    } else {
        0
    };

    let scells = (0..count)
        .map(|k| Scell {
            id: k as u32 + 1,
            position: area.sample_point(rng),
        })
        .collect();

    Ok(Deployment {
        ue_position,
        scells,
    })
}
