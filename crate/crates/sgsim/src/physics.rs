//! Physical constants, 3-vector algebra, and the electron state record.
//!
//! Coordinate convention (right-handed, fixed throughout the crate): the beam
//! travels along +x, the field wires run parallel to x at y = +a and y = -a,
//! and z is the gradient / deflection axis. Everything is SI internally; the
//! single H-to-B conversion (B = mu0 * H) lives in the field module.

use crate::error::{Error, Result};

/// Physical constants in SI units.
///
/// Two sets are provided: [`Constants::rounded`] carries three-figure values
/// (and is what [`constants`] returns), so results check out digit for digit
/// against reference tables quoted at that precision;
/// [`Constants::codata`] carries full-precision values for convergence
/// studies. Pick one set per computation and stay with it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// Elementary charge magnitude e [C]. The electron carries q = -e.
    pub electron_charge_magnitude: f64,
    /// Electron rest mass m [kg].
    pub electron_mass: f64,
    /// Bohr magneton mu [A m^2] (1 A m^2 = 1 J/T).
    pub bohr_magneton: f64,
    /// Speed of light c [m/s].
    pub speed_of_light: f64,
    /// Planck constant h [J s].
    pub planck_constant: f64,
    /// Vacuum permeability mu0 [T m/A].
    pub vacuum_permeability: f64,
}

impl Constants {
    /// Rounded constants as commonly printed: e = 1.602e-19 C,
    /// m = 9.11e-31 kg, mu = 0.927e-23 A m^2 (the usual 9.274e-24 J/T at
    /// three figures), h = 6.626e-34 J s. c is exact SI; mu0 is 4 pi e-7.
    pub const fn rounded() -> Self {
        Constants {
            electron_charge_magnitude: 1.602e-19,
            electron_mass: 9.11e-31,
            bohr_magneton: 0.927e-23,
            speed_of_light: 299_792_458.0,
            planck_constant: 6.626e-34,
            vacuum_permeability: 4.0e-7 * std::f64::consts::PI,
        }
    }

    /// Full-precision SI values (2018 CODATA / exact SI definitions).
    pub const fn codata() -> Self {
        Constants {
            electron_charge_magnitude: 1.602_176_634e-19,
            electron_mass: 9.109_383_701_5e-31,
            bohr_magneton: 9.274_010_078_3e-24,
            speed_of_light: 299_792_458.0,
            planck_constant: 6.626_070_15e-34,
            vacuum_permeability: 1.256_637_062_12e-6,
        }
    }

    /// Magnetic moment to mass ratio mu/m [A m^2 / kg], the quantity that
    /// sets the spin deflection scale.
    pub fn moment_mass_ratio(&self) -> f64 {
        self.bohr_magneton / self.electron_mass
    }
}

/// Default constant set (the rounded table-reproducing values).
pub fn constants() -> Constants {
    Constants::rounded()
}

/// Plain 3-vector of f64 components. Units depend on context (meters,
/// meters/second, teslas, ...).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// True when every component is a normal/zero float (no NaN, no Inf).
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl std::ops::Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Spin projection along the measurement (z) axis. Exactly two states; the
/// classical model maps them to a magnetic moment of +mu or -mu along z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// +1.0 for Up, -1.0 for Down.
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// One electron in flight: position [m], velocity [m/s], spin projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectronState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub spin: Spin,
}

impl ElectronState {
    pub fn new(position: Vec3, velocity: Vec3, spin: Spin) -> Self {
        ElectronState { position, velocity, spin }
    }

    /// Checks the state invariants: finite components and sub-luminal speed.
    pub fn validate(&self, consts: &Constants) -> Result<()> {
        if !self.position.is_finite() || !self.velocity.is_finite() {
            return Err(Error::Domain("electron state has non-finite components".into()));
        }
        if self.velocity.norm() >= consts.speed_of_light {
            return Err(Error::Domain(format!(
                "electron speed {:.3e} m/s is not below c",
                self.velocity.norm()
            )));
        }
        Ok(())
    }
}
