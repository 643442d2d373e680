//! Magnetostatic field models: the two-wire equipotential field with its
//! constant-inhomogeneity working plane, a sharp-tip gradient patch, and
//! zero / uniform / ideal-gradient control fields.
//!
//! The two-wire model is two anti-parallel line currents running along x at
//! y = +a (current +I) and y = -a (current -I), both at z = -z_offset, so
//! that the working plane z = 0 sits z_offset above the wire plane. The
//! two-wire API reports H in A/m; [`sample`] is the single place where
//! B = mu0 * H happens.

use crate::error::{Error, Result};
use crate::physics::{Constants, Vec3};

/// Points closer than this to a wire line are treated as singular [m].
pub const SINGULARITY_GUARD: f64 = 1e-9;

/// Two anti-parallel line currents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoWireConfig {
    /// Excitation current I [A]; wire at y = +a carries +I along +x.
    pub current: f64,
    /// Half separation a [m]; wires at y = +a and y = -a.
    pub half_separation: f64,
    /// Distance z0 [m] from the wire plane down to the z = 0 working plane.
    pub z_offset: f64,
}

impl TwoWireConfig {
    /// Standard geometry: working plane at the constant-inhomogeneity
    /// offset z0 = sqrt(5/3) * a.
    pub fn new(current: f64, half_separation: f64) -> Result<Self> {
        let cfg = TwoWireConfig {
            current,
            half_separation,
            z_offset: (5.0f64 / 3.0).sqrt() * half_separation,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_z_offset(mut self, z_offset: f64) -> Result<Self> {
        self.z_offset = z_offset;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.current == 0.0 || !self.current.is_finite() {
            return Err(Error::Domain("two-wire current must be nonzero and finite".into()));
        }
        if !(self.half_separation > 0.0) || !(self.z_offset > 0.0) {
            return Err(Error::Domain(
                "two-wire half_separation and z_offset must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Squared distances to wire 1 (y = +a) and wire 2 (y = -a) from a point
    /// in the working-plane coordinates.
    fn r_squared(&self, y: f64, z: f64) -> (f64, f64) {
        let a = self.half_separation;
        let w = z + self.z_offset;
        ((a - y) * (a - y) + w * w, (a + y) * (a + y) + w * w)
    }

    fn check_singularity(&self, y: f64, z: f64) -> Result<()> {
        let (r1s, r2s) = self.r_squared(y, z);
        let guard = SINGULARITY_GUARD * SINGULARITY_GUARD;
        if r1s <= guard || r2s <= guard {
            return Err(Error::Singularity { position: Vec3::new(0.0, y, z) });
        }
        Ok(())
    }
}

/// Field configurations the dynamics can run against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldConfig {
    /// No field anywhere.
    Zero,
    /// Constant B [T] everywhere (the flat-magnet control).
    Uniform(Vec3),
    /// Linear gradient along z with the divergence-free completion:
    /// Bz = b0 + gradient * z, By = -gradient * y.
    IdealGradient {
        /// Field at the working point [T].
        b0: f64,
        /// dBz/dz [T/m].
        gradient: f64,
    },
    /// Two anti-parallel line currents (B = mu0 * H).
    TwoWire(TwoWireConfig),
    /// Pointed pole piece: a locally linear gradient patch of extent
    /// tip_radius, cosine-tapered to zero by 10x tip_radius off axis.
    SharpTip {
        /// Field at the tip surface [T].
        b_surface: f64,
        /// Effective tip radius [m]; the gradient is b_surface / tip_radius.
        tip_radius: f64,
    },
}

/// Field and gradients at one point. `grad_bz` is dBz/dz, `grad_by` is
/// dBy/dy (divergence partner), `grad_bz_y` is dBz/dy (feeds the transverse
/// spin-force component where the model has one).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldSample {
    pub b: Vec3,
    pub grad_bz: f64,
    pub grad_by: f64,
    pub grad_bz_y: f64,
}

/// H-field [A/m] of both wires at a point, by superposing the line-current
/// field H_i = I_i x r_i / (2 pi r_i^2). The result lies in the y-z plane.
pub fn two_wire_field(cfg: &TwoWireConfig, point: Vec3) -> Result<Vec3> {
    cfg.validate()?;
    cfg.check_singularity(point.y, point.z)?;
    let a = cfg.half_separation;
    let w = point.z + cfg.z_offset;
    let (r1s, r2s) = cfg.r_squared(point.y, point.z);
    // wire 1 at (y, z) = (+a, -z_offset), current +I along +x:
    //   I x r / (2 pi r^2) with r = (0, y - a, w) gives (0, -w, y - a) * I / (2 pi r^2)
    let k1 = cfg.current / (2.0 * std::f64::consts::PI * r1s);
    // wire 2 at (-a, -z_offset), current -I
    let k2 = -cfg.current / (2.0 * std::f64::consts::PI * r2s);
    Ok(Vec3::new(
        0.0,
        -w * k1 - w * k2,
        (point.y - a) * k1 + (point.y + a) * k2,
    ))
}

/// |H| [A/m] via the closed form H = (I/pi) a / (r1 r2).
pub fn two_wire_magnitude(cfg: &TwoWireConfig, y: f64, z: f64) -> Result<f64> {
    cfg.validate()?;
    cfg.check_singularity(y, z)?;
    let (r1s, r2s) = cfg.r_squared(y, z);
    Ok((cfg.current.abs() / std::f64::consts::PI) * cfg.half_separation / (r1s * r2s).sqrt())
}

/// Signed dH/dz [A/m^2] of the magnitude, differentiated analytically:
/// dH/dz = -(I a / pi) (z + z0) (r1^2 + r2^2) / (r1^3 r2^3).
/// Negative above the wires (the field weakens away from them).
pub fn two_wire_gradient(cfg: &TwoWireConfig, y: f64, z: f64) -> Result<f64> {
    cfg.validate()?;
    cfg.check_singularity(y, z)?;
    let (r1s, r2s) = cfg.r_squared(y, z);
    let w = z + cfg.z_offset;
    Ok(-(cfg.current.abs() * cfg.half_separation / std::f64::consts::PI) * w * (r1s + r2s)
        / (r1s.powf(1.5) * r2s.powf(1.5)))
}

/// The constant-inhomogeneity working geometry for half separation a:
/// returns (z0, z1, epsilon) with z0 = sqrt(5/3) a (wire plane to working
/// plane), z1 = (sqrt(2) - sqrt(5/3)) a (working plane to the field
/// equipotential through the window edge), and the inhomogeneity ratio
/// epsilon = 2 sqrt(5/3) / (1 + 5/3) = 0.968 at the working point.
pub fn constant_inhomogeneity_plane(a: f64) -> Result<(f64, f64, f64)> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("half separation must be positive, got {a}")));
    }
    let root53 = (5.0f64 / 3.0).sqrt();
    let z0 = root53 * a;
    let z1 = (std::f64::consts::SQRT_2 - root53) * a;
    let epsilon = 2.0 * root53 / (1.0 + 5.0 / 3.0);
    Ok((z0, z1, epsilon))
}

/// Dimensionless inhomogeneity epsilon = |dH/dz| a / H at a point.
pub fn epsilon_profile(cfg: &TwoWireConfig, y: f64, z: f64) -> Result<f64> {
    let h = two_wire_magnitude(cfg, y, z)?;
    if h == 0.0 {
        return Err(Error::Domain("field magnitude is zero; epsilon undefined".into()));
    }
    Ok(two_wire_gradient(cfg, y, z)?.abs() * cfg.half_separation / h)
}

/// One grid node of an inhomogeneity map.
#[derive(Debug, Clone, Copy)]
pub struct FieldMapPoint {
    pub y: f64,
    pub z: f64,
    /// B-field sample (teslas) at the node.
    pub sample: FieldSample,
    /// |H| [A/m].
    pub h: f64,
    /// Signed dH/dz [A/m^2].
    pub dhdz: f64,
    /// |dH/dz| a / H.
    pub epsilon: f64,
}

/// Rectangular grid of field samples, row-major in z (index = iz * ny + iy).
#[derive(Debug, Clone)]
pub struct FieldMap {
    pub ys: Vec<f64>,
    pub zs: Vec<f64>,
    pub points: Vec<FieldMapPoint>,
}

impl FieldMap {
    pub fn at(&self, iy: usize, iz: usize) -> &FieldMapPoint {
        &self.points[iz * self.ys.len() + iy]
    }
}

/// Inclusive linspace; a single-point axis degenerates to the range start.
fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    let span = hi - lo;
    (0..n).map(|i| lo + span * (i as f64) / ((n - 1) as f64)).collect()
}

/// Samples the two-wire field over a rectangular (y, z) grid.
pub fn inhomogeneity_map(
    cfg: &TwoWireConfig,
    y_range: (f64, f64),
    z_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<FieldMap> {
    cfg.validate()?;
    let (ny, nz) = resolution;
    if ny == 0 || nz == 0 {
        return Err(Error::Domain("map resolution must be at least 1x1".into()));
    }
    let ys = linspace(y_range.0, y_range.1, ny);
    let zs = linspace(z_range.0, z_range.1, nz);
    let mut points = Vec::with_capacity(ny * nz);
    for &z in &zs {
        for &y in &ys {
            let sample = sample(&FieldConfig::TwoWire(*cfg), Vec3::new(0.0, y, z))?;
            points.push(FieldMapPoint {
                y,
                z,
                sample,
                h: two_wire_magnitude(cfg, y, z)?,
                dhdz: two_wire_gradient(cfg, y, z)?,
                epsilon: epsilon_profile(cfg, y, z)?,
            });
        }
    }
    Ok(FieldMap { ys, zs, points })
}

/// Gradient of a pointed pole piece: dB/dz = B_surface / tip_radius.
pub fn sharp_tip_gradient(b_surface: f64, tip_radius: f64) -> Result<f64> {
    if !(tip_radius > 0.0) || !tip_radius.is_finite() {
        return Err(Error::Domain(format!("tip radius must be positive, got {tip_radius}")));
    }
    if !(b_surface >= 0.0) {
        return Err(Error::Domain(format!("surface field must be non-negative, got {b_surface}")));
    }
    Ok(b_surface / tip_radius)
}

/// Cosine taper: 1 inside the patch (u <= 1), 0 beyond the cutoff (u >= 10),
/// half-cosine ramp in between.
fn tip_taper(u: f64) -> f64 {
    if u <= 1.0 {
        1.0
    } else if u >= 10.0 {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI * (u - 1.0) / 9.0).cos())
    }
}

/// Evaluates a field model at a point, returning B [T] and its gradients.
///
/// The two-wire branch is the one H-to-B boundary (B = mu0 * H); its
/// component gradients come from central differences of the analytic field
/// with step half_separation * 1e-6. The sharp-tip branch reports the
/// model's tapered local gradient (the patch is a modeling construct, not a
/// solution of a boundary problem; its reported gradient is what the spin
/// force is defined to see).
pub fn sample(cfg: &FieldConfig, point: Vec3) -> Result<FieldSample> {
    match *cfg {
        FieldConfig::Zero => Ok(FieldSample::default()),
        FieldConfig::Uniform(b) => {
            if !b.is_finite() {
                return Err(Error::Domain("uniform field must be finite".into()));
            }
            Ok(FieldSample { b, ..FieldSample::default() })
        }
        FieldConfig::IdealGradient { b0, gradient } => {
            if !b0.is_finite() || !gradient.is_finite() {
                return Err(Error::Domain("ideal gradient parameters must be finite".into()));
            }
            Ok(FieldSample {
                b: Vec3::new(0.0, -gradient * point.y, b0 + gradient * point.z),
                grad_bz: gradient,
                grad_by: -gradient,
                grad_bz_y: 0.0,
            })
        }
        FieldConfig::TwoWire(ref tw) => {
            let mu0 = Constants::rounded().vacuum_permeability;
            let h = two_wire_field(tw, point)?;
            let step = tw.half_separation * 1e-6;
            let at = |y: f64, z: f64| two_wire_field(tw, Vec3::new(point.x, y, z));
            let zp = at(point.y, point.z + step)?;
            let zm = at(point.y, point.z - step)?;
            let yp = at(point.y + step, point.z)?;
            let ym = at(point.y - step, point.z)?;
            Ok(FieldSample {
                b: h * mu0,
                grad_bz: mu0 * (zp.z - zm.z) / (2.0 * step),
                grad_by: mu0 * (yp.y - ym.y) / (2.0 * step),
                grad_bz_y: mu0 * (yp.z - ym.z) / (2.0 * step),
            })
        }
        FieldConfig::SharpTip { b_surface, tip_radius } => {
            let g = sharp_tip_gradient(b_surface, tip_radius)?;
            let r = (point.y * point.y + point.z * point.z).sqrt();
            let w = tip_taper(r / tip_radius);
            Ok(FieldSample {
                b: Vec3::new(0.0, -g * point.y * w, (b_surface + g * point.z) * w),
                grad_bz: g * w,
                grad_by: -g * w,
                grad_bz_y: 0.0,
            })
        }
    }
}
