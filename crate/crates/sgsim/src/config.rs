//! Flat `key = value` run configuration: parsing with SI unit suffixes,
//! typed defaults for every parameter, and a canonical rendering used for
//! the reproducibility manifest.
//!
//! The format is one assignment per line, `#` starts a comment (full line
//! or trailing), keys are fixed and typed, unknown keys are errors. Values
//! may carry a unit suffix appropriate to the key's dimension (`10 kV`,
//! `1 um`, `0.01 T`, `2.7e6 T_per_m`); bare numbers are base SI. Lists are
//! comma separated. `parse` then `render` is a fixpoint: the rendered form
//! re-parses to the same resolved parameters, byte for byte.

use crate::dynamics::Scheme;
use crate::error::{Error, Result};
use std::collections::BTreeSet;
use std::fmt::Write as _;

/// Which field model a scenario runs against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldKind {
    Zero,
    Uniform,
    IdealGradient,
    #[default]
    TwoWire,
    SharpTip,
}

impl FieldKind {
    fn name(self) -> &'static str {
        match self {
            FieldKind::Zero => "zero",
            FieldKind::Uniform => "uniform",
            FieldKind::IdealGradient => "ideal-gradient",
            FieldKind::TwoWire => "two-wire",
            FieldKind::SharpTip => "sharp-tip",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "zero" => FieldKind::Zero,
            "uniform" => FieldKind::Uniform,
            "ideal-gradient" => FieldKind::IdealGradient,
            "two-wire" => FieldKind::TwoWire,
            "sharp-tip" => FieldKind::SharpTip,
            _ => return None,
        })
    }
}

/// Every tunable of every command, with desk-scale defaults. Fields left
/// unset fall back either to a fixed default or to a value derived from
/// the magnet geometry; the derived ones live behind accessor methods.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    // beam
    pub voltage: f64,
    pub sigma: f64,
    pub count: usize,
    pub seed: u64,
    pub spin_mix: f64,
    // stations along the beam axis
    pub gun_exit: f64,
    pub magnet_entry: f64,
    pub magnet_exit: f64,
    pub screen: f64,
    // field selection and its parameters
    pub field: FieldKind,
    pub b_x: f64,
    pub b_y: f64,
    pub b_z: f64,
    pub b0: f64,
    pub gradient: f64,
    pub current: f64,
    pub half_separation: f64,
    z_offset: Option<f64>,
    pub b_surface: f64,
    pub tip_radius: f64,
    // forces
    pub include_spin: bool,
    pub include_lorentz: bool,
    pub e_x: f64,
    pub e_y: f64,
    pub e_z: f64,
    // integration and binning
    pub steps: u64,
    pub scheme: Scheme,
    pub bins: usize,
    /// Dump every n-th integration step of the first electron; 0 disables.
    pub trace_stride: u64,
    // field map grid
    y_min: Option<f64>,
    y_max: Option<f64>,
    z_min: Option<f64>,
    z_max: Option<f64>,
    pub ny: usize,
    pub nz: usize,
    // sweeps
    pub gradients: Vec<f64>,
    pub voltages: Vec<f64>,
    // required-gradient
    pub target_split: f64,
    length: Option<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            voltage: 1e4,
            sigma: 1e-6,
            count: 10_000,
            seed: 1,
            spin_mix: 0.5,
            gun_exit: 0.0,
            magnet_entry: 0.05,
            magnet_exit: 0.10,
            screen: 0.25,
            field: FieldKind::TwoWire,
            b_x: 0.0,
            b_y: 0.0,
            b_z: 0.0,
            b0: 0.0,
            gradient: 0.0,
            current: 1000.0,
            half_separation: 1e-3,
            z_offset: None,
            b_surface: 1.0,
            tip_radius: 1e-4,
            include_spin: true,
            include_lorentz: true,
            e_x: 0.0,
            e_y: 0.0,
            e_z: 0.0,
            steps: 1000,
            scheme: Scheme::Rk4,
            bins: 128,
            trace_stride: 0,
            y_min: None,
            y_max: None,
            z_min: None,
            z_max: None,
            ny: 101,
            nz: 101,
            gradients: vec![0.0, 1e6, 2e6],
            voltages: vec![5e3, 1e4, 1.5e4, 2e4, 2.5e4],
            target_split: 2e-5,
            length: None,
        }
    }
}

/// Physical dimension a key expects; constrains which unit suffixes apply.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Dimension {
    Voltage,
    Length,
    MagneticField,
    Gradient,
    Current,
    ElectricField,
    Bare,
}

/// Returns the decimal exponent to base SI units if `unit` belongs to `dim`.
fn unit_exponent(dim: Dimension, unit: &str) -> Option<i32> {
    let table: &[(&str, i32)] = match dim {
        Dimension::Voltage => &[("V", 0), ("kV", 3)],
        Dimension::Length => &[("m", 0), ("mm", -3), ("um", -6), ("nm", -9)],
        Dimension::MagneticField => &[("T", 0), ("mT", -3), ("uT", -6)],
        Dimension::Gradient => &[("T_per_m", 0)],
        Dimension::Current => &[("A", 0)],
        Dimension::ElectricField => &[("V_per_m", 0)],
        Dimension::Bare => &[],
    };
    table.iter().find(|(name, _)| *name == unit).map(|(_, e)| *e)
}

/// Scales by 10^exponent with a single rounding: positive powers of ten up
/// to 10^22 are exact doubles, so one multiply or divide stays correctly
/// rounded where multiplying by an inexact 1e-6 would not ("20 um" must
/// give the same double as "2e-5").
fn scale_decimal(value: f64, exponent: i32) -> f64 {
    if exponent >= 0 {
        value * 10f64.powi(exponent)
    } else {
        value / 10f64.powi(-exponent)
    }
}

/// Splits "10 kV" or "10kV" into the numeric text and the unit suffix.
fn split_unit(raw: &str) -> (&str, &str) {
    let trimmed = raw.trim();
    let boundary = trimmed
        .rfind(|c: char| !(c.is_ascii_alphabetic() || c == '_'))
        .map(|i| i + 1)
        .unwrap_or(0);
    // a trailing exponent like "1e6" must not be mistaken for a unit: a
    // unit suffix never follows a digit-less mantissa, so require the
    // numeric part to end in a digit or dot
    let (number, unit) = trimmed.split_at(boundary);
    if number.trim_end().ends_with(|c: char| c.is_ascii_digit() || c == '.') {
        (number.trim(), unit)
    } else {
        (trimmed, "")
    }
}

fn parse_quantity(raw: &str, dim: Dimension) -> std::result::Result<f64, String> {
    let (number, unit) = split_unit(raw);
    if number.is_empty() {
        return Err(format!("missing numeric value in '{raw}'"));
    }
    let value: f64 = number
        .parse()
        .map_err(|_| format!("'{number}' is not a number"))?;
    if !value.is_finite() {
        return Err(format!("'{number}' is not finite"));
    }
    if unit.is_empty() {
        return Ok(value);
    }
    match unit_exponent(dim, unit) {
        Some(e) => Ok(scale_decimal(value, e)),
        None => Err(format!("unit '{unit}' does not apply here")),
    }
}

fn parse_count<T: TryFrom<u64>>(raw: &str, minimum: u64) -> std::result::Result<T, String> {
    let value: u64 = raw
        .trim()
        .parse()
        .map_err(|_| format!("'{}' is not a non-negative integer", raw.trim()))?;
    if value < minimum {
        return Err(format!("must be at least {minimum}, got {value}"));
    }
    T::try_from(value).map_err(|_| format!("{value} is out of range"))
}

fn parse_bool(raw: &str) -> std::result::Result<bool, String> {
    match raw.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("'{other}' is not true or false")),
    }
}

fn parse_list(raw: &str, dim: Dimension) -> std::result::Result<Vec<f64>, String> {
    let body = raw.trim();
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split(',').map(|item| parse_quantity(item, dim)).collect()
}

fn join_list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

impl Params {
    /// Offset from the wire plane to the working plane [m]; defaults to
    /// the constant-inhomogeneity choice sqrt(5/3) * half_separation.
    pub fn z_offset(&self) -> f64 {
        self.z_offset
            .unwrap_or_else(|| (5.0f64 / 3.0).sqrt() * self.half_separation)
    }

    /// Field map y range [m]; defaults to the radiation window
    /// [-2a/3, 2a/3].
    pub fn map_y_range(&self) -> (f64, f64) {
        let a = self.half_separation;
        (
            self.y_min.unwrap_or(-2.0 * a / 3.0),
            self.y_max.unwrap_or(2.0 * a / 3.0),
        )
    }

    /// Field map z range [m]; defaults to [-a/2, a/2] about the working
    /// plane.
    pub fn map_z_range(&self) -> (f64, f64) {
        let a = self.half_separation;
        (self.z_min.unwrap_or(-a / 2.0), self.z_max.unwrap_or(a / 2.0))
    }

    /// Interaction length for required-gradient [m]; defaults to the
    /// magnet window length.
    pub fn length(&self) -> f64 {
        self.length.unwrap_or(self.magnet_exit - self.magnet_entry)
    }

    /// Parses config text over the defaults. Each key may appear once;
    /// later programmatic overrides go through [`Params::set`].
    pub fn parse(text: &str) -> Result<Params> {
        let mut params = Params::default();
        let mut seen = BTreeSet::new();
        for (index, raw_line) in text.lines().enumerate() {
            let line = index + 1;
            let body = raw_line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected 'key = value', got '{body}'"),
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Parse {
                    line,
                    message: format!("key '{key}' was already set"),
                });
            }
            params
                .assign(key, value.trim())
                .map_err(|message| Error::Parse { line, message })?;
        }
        Ok(params)
    }

    /// Applies one `key = value` override (the CLI's `--set`).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.assign(key.trim(), value.trim())
            .map_err(|message| Error::Domain(format!("override '{key}': {message}")))
    }

    fn assign(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        use Dimension::*;
        match key {
            "voltage" => {
                let v = parse_quantity(value, Voltage)?;
                if !(v > 0.0) {
                    return Err(format!(
                        "accelerating voltage must be positive, got {v} V"
                    ));
                }
                self.voltage = v;
            }
            "sigma" => {
                let v = parse_quantity(value, Length)?;
                if !(v >= 0.0) {
                    return Err(format!("beam sigma must be non-negative, got {v} m"));
                }
                self.sigma = v;
            }
            "count" => self.count = parse_count(value, 1)?,
            "seed" => self.seed = parse_count(value, 0)?,
            "spin_mix" => {
                let v = parse_quantity(value, Bare)?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(format!("spin_mix must lie in [0, 1], got {v}"));
                }
                self.spin_mix = v;
            }
            "gun_exit" => self.gun_exit = parse_quantity(value, Length)?,
            "magnet_entry" => self.magnet_entry = parse_quantity(value, Length)?,
            "magnet_exit" => self.magnet_exit = parse_quantity(value, Length)?,
            "screen" => self.screen = parse_quantity(value, Length)?,
            "field" => {
                self.field = FieldKind::from_name(value).ok_or_else(|| {
                    format!(
                        "unknown field '{value}'; expected zero, uniform, \
                         ideal-gradient, two-wire, or sharp-tip"
                    )
                })?;
            }
            "b_x" => self.b_x = parse_quantity(value, MagneticField)?,
            "b_y" => self.b_y = parse_quantity(value, MagneticField)?,
            "b_z" => self.b_z = parse_quantity(value, MagneticField)?,
            "b0" => self.b0 = parse_quantity(value, MagneticField)?,
            "gradient" => self.gradient = parse_quantity(value, Gradient)?,
            "current" => {
                let v = parse_quantity(value, Current)?;
                if v == 0.0 {
                    return Err("wire current must be nonzero".into());
                }
                self.current = v;
            }
            "half_separation" => {
                let v = parse_quantity(value, Length)?;
                if !(v > 0.0) {
                    return Err(format!("half_separation must be positive, got {v} m"));
                }
                self.half_separation = v;
            }
            "z_offset" => {
                let v = parse_quantity(value, Length)?;
                if !(v > 0.0) {
                    return Err(format!("z_offset must be positive, got {v} m"));
                }
                self.z_offset = Some(v);
            }
            "b_surface" => {
                let v = parse_quantity(value, MagneticField)?;
                if !(v >= 0.0) {
                    return Err(format!("b_surface must be non-negative, got {v} T"));
                }
                self.b_surface = v;
            }
            "tip_radius" => {
                let v = parse_quantity(value, Length)?;
                if !(v > 0.0) {
                    return Err(format!("tip_radius must be positive, got {v} m"));
                }
                self.tip_radius = v;
            }
            "include_spin" => self.include_spin = parse_bool(value)?,
            "include_lorentz" => self.include_lorentz = parse_bool(value)?,
            "e_x" => self.e_x = parse_quantity(value, ElectricField)?,
            "e_y" => self.e_y = parse_quantity(value, ElectricField)?,
            "e_z" => self.e_z = parse_quantity(value, ElectricField)?,
            "steps" => self.steps = parse_count(value, 1)?,
            "scheme" => {
                self.scheme = match value {
                    "rk4" => Scheme::Rk4,
                    "semi-implicit" => Scheme::SemiImplicit,
                    other => {
                        return Err(format!(
                            "unknown scheme '{other}'; expected rk4 or semi-implicit"
                        ))
                    }
                };
            }
            "bins" => self.bins = parse_count(value, 1)?,
            "trace_stride" => self.trace_stride = parse_count(value, 0)?,
            "y_min" => self.y_min = Some(parse_quantity(value, Length)?),
            "y_max" => self.y_max = Some(parse_quantity(value, Length)?),
            "z_min" => self.z_min = Some(parse_quantity(value, Length)?),
            "z_max" => self.z_max = Some(parse_quantity(value, Length)?),
            "ny" => self.ny = parse_count(value, 1)?,
            "nz" => self.nz = parse_count(value, 1)?,
            "gradients" => self.gradients = parse_list(value, Gradient)?,
            "voltages" => {
                let vs = parse_list(value, Voltage)?;
                if let Some(bad) = vs.iter().find(|v| **v <= 0.0) {
                    return Err(format!("sweep voltages must be positive, got {bad} V"));
                }
                self.voltages = vs;
            }
            "target_split" => {
                let v = parse_quantity(value, Length)?;
                if !(v >= 0.0) {
                    return Err(format!("target_split must be non-negative, got {v} m"));
                }
                self.target_split = v;
            }
            "length" => {
                let v = parse_quantity(value, Length)?;
                if !(v > 0.0) {
                    return Err(format!("interaction length must be positive, got {v} m"));
                }
                self.length = Some(v);
            }
            unknown => return Err(format!("unknown key '{unknown}'")),
        }
        Ok(())
    }

    /// Canonical form: every parameter, derived values resolved, bare SI
    /// numbers in shortest round-trip decimal. Re-parsing the result gives
    /// back the same resolved configuration.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut kv = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        kv("voltage", self.voltage.to_string());
        kv("sigma", self.sigma.to_string());
        kv("count", self.count.to_string());
        kv("seed", self.seed.to_string());
        kv("spin_mix", self.spin_mix.to_string());
        kv("gun_exit", self.gun_exit.to_string());
        kv("magnet_entry", self.magnet_entry.to_string());
        kv("magnet_exit", self.magnet_exit.to_string());
        kv("screen", self.screen.to_string());
        kv("field", self.field.name().to_string());
        kv("b_x", self.b_x.to_string());
        kv("b_y", self.b_y.to_string());
        kv("b_z", self.b_z.to_string());
        kv("b0", self.b0.to_string());
        kv("gradient", self.gradient.to_string());
        kv("current", self.current.to_string());
        kv("half_separation", self.half_separation.to_string());
        kv("z_offset", self.z_offset().to_string());
        kv("b_surface", self.b_surface.to_string());
        kv("tip_radius", self.tip_radius.to_string());
        kv("include_spin", self.include_spin.to_string());
        kv("include_lorentz", self.include_lorentz.to_string());
        kv("e_x", self.e_x.to_string());
        kv("e_y", self.e_y.to_string());
        kv("e_z", self.e_z.to_string());
        kv("steps", self.steps.to_string());
        kv(
            "scheme",
            match self.scheme {
                Scheme::Rk4 => "rk4".to_string(),
                Scheme::SemiImplicit => "semi-implicit".to_string(),
            },
        );
        kv("bins", self.bins.to_string());
        kv("trace_stride", self.trace_stride.to_string());
        let (y_lo, y_hi) = self.map_y_range();
        let (z_lo, z_hi) = self.map_z_range();
        kv("y_min", y_lo.to_string());
        kv("y_max", y_hi.to_string());
        kv("z_min", z_lo.to_string());
        kv("z_max", z_hi.to_string());
        kv("ny", self.ny.to_string());
        kv("nz", self.nz.to_string());
        kv("gradients", join_list(&self.gradients));
        kv("voltages", join_list(&self.voltages));
        kv("target_split", self.target_split.to_string());
        kv("length", self.length().to_string());
        out
    }
}
