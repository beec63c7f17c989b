//! Conversions between the dimensionless Paul-trap parameters (β₀, β₁)
//! and laboratory voltages, plus the field of a uniformly charged rotating
//! cylinder. Every public quantity is SI; Gaussian units appear only
//! inside [`solenoid_field_gauss`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Proton mass, kg.
pub const PROTON_MASS: f64 = 1.672_621_923_69e-27;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const STATCOULOMB_PER_COULOMB: f64 = 10.0 * SPEED_OF_LIGHT;
const CM_PER_M: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnitsError {
    #[error("energy scale omega^2 r0^2 m must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    #[serde(rename = "charge_C")]
    pub charge: f64,
    #[serde(rename = "mass_kg")]
    pub mass: f64,
    #[serde(rename = "r0_m")]
    pub r0: f64,
    #[serde(rename = "omega_rad_per_s")]
    pub omega: f64,
    #[serde(rename = "phi0_V", default)]
    pub phi0: f64,
    #[serde(rename = "phi1_V", default)]
    pub phi1: f64,
}

impl TrapParams {
    pub fn validate(&self) -> Result<(), UnitsError> {
        for (name, v) in
            [("charge_C", self.charge), ("mass_kg", self.mass), ("r0_m", self.r0), ("omega_rad_per_s", self.omega)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(UnitsError::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.phi0.is_finite() || !self.phi1.is_finite() {
            return Err(UnitsError::InvalidInput("voltages must be finite".into()));
        }
        Ok(())
    }

    /// `ω²r₀²m` in joules.
    pub fn energy_scale(&self) -> f64 {
        energy_scale(self.mass, self.r0, self.omega)
    }

    /// Physical duration of one drive period, `2π/ω`, in seconds.
    pub fn drive_period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

/// `ω²r₀²m` in joules.
pub fn energy_scale(mass: f64, r0: f64, omega: f64) -> f64 {
    omega * omega * r0 * r0 * mass
}

pub fn joules_to_ev(j: f64) -> f64 {
    j / ELEMENTARY_CHARGE
}

/// Angular frequency of an electromagnetic wave of the given wavelength.
pub fn omega_from_wavelength(wavelength_m: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / wavelength_m
}

/// `β₀ = eΦ₀/(ω²r₀²m)`, `β₁ = eΦ₁/(2ω²r₀²m)`.
pub fn dimensionless_from_physical(p: &TrapParams) -> Result<(f64, f64), UnitsError> {
    let scale = p.energy_scale();
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(UnitsError::NonPositiveScale(scale));
    }
    p.validate()?;
    Ok((p.charge * p.phi0 / scale, p.charge * p.phi1 / (2.0 * scale)))
}

/// `Φ₀ = β₀ω²r₀²m/e`, `Φ₁ = 2β₁ω²r₀²m/e`, in volts.
pub fn physical_from_dimensionless(
    beta0: f64,
    beta1: f64,
    charge: f64,
    mass: f64,
    r0: f64,
    omega: f64,
) -> Result<(f64, f64), UnitsError> {
    let p = TrapParams { charge, mass, r0, omega, phi0: 0.0, phi1: 0.0 };
    p.validate()?;
    let volts_per_beta = p.energy_scale() / charge;
    Ok((beta0 * volts_per_beta, 2.0 * beta1 * volts_per_beta))
}

/// Voltages for a singly charged particle when `ω²r₀²m` is given directly
/// in electronvolts: one eV of scale is one volt per unit β.
pub fn voltages_at_energy_scale(beta0: f64, beta1: f64, scale_ev: f64) -> (f64, f64) {
    (beta0 * scale_ev, 2.0 * beta1 * scale_ev)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderParams {
    #[serde(rename = "omega_rad_per_s")]
    pub omega: f64,
    #[serde(rename = "radius_m")]
    pub radius: f64,
    /// Surface charge density.
    #[serde(rename = "sigma_C_per_m2")]
    pub sigma: f64,
}

/// `B = (4π/c) ωRσ` evaluated in Gaussian units; result in gauss.
pub fn solenoid_field_gauss(c: &CylinderParams) -> Result<f64, UnitsError> {
    if !(c.radius > 0.0) {
        return Err(UnitsError::InvalidInput(format!("radius_m must be positive, got {}", c.radius)));
    }
    let r_cm = c.radius * CM_PER_M;
    let sigma_cgs = c.sigma * STATCOULOMB_PER_COULOMB / (CM_PER_M * CM_PER_M);
    let c_cgs = SPEED_OF_LIGHT * CM_PER_M;
    Ok(4.0 * PI / c_cgs * c.omega * r_cm * sigma_cgs)
}

/// How a charge `Q` carried by a belt of height `h` maps to σ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeltReading {
    /// Charge spread over the belt area: `σ = Q/(2πRh)`.
    SurfaceDensity,
    /// Belt charge taken as `Rσh` without the circumference factor:
    /// `σ = Q/(Rh)`.
    ChargePerRadius,
}

pub fn sigma_from_belt(charge: f64, radius: f64, belt_height: f64, reading: BeltReading) -> Result<f64, UnitsError> {
    if !(radius > 0.0 && belt_height > 0.0) {
        return Err(UnitsError::InvalidInput("radius and belt height must be positive".into()));
    }
    Ok(match reading {
        BeltReading::SurfaceDensity => charge / (2.0 * PI * radius * belt_height),
        BeltReading::ChargePerRadius => charge / (radius * belt_height),
    })
}
