//! End-to-end scenarios: generate a Gaussian electron beam, fly both spin
//! populations from the gun through a field window to the screen, bin the
//! hits, and measure the spin splitting against the Lorentz deflection.
//!
//! The field is confined to the magnet window [magnet_entry_x,
//! magnet_exit_x] as a hard cutoff; the drifts before and after are exact
//! ballistics. Electrons are independent, so the runner fans them out
//! across threads and merges results in index order to keep every run
//! bit-reproducible at any thread count.

use crate::dynamics::{propagate, ForceModel, IntegratorConfig};
use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::kinematics::accelerate_classical;
use crate::physics::{Constants, ElectronState, Spin, Vec3};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Beam population emitted by the gun.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    /// Accelerating voltage [V].
    pub voltage: f64,
    /// Gaussian width of y and z at the gun exit [m].
    pub sigma_transverse: f64,
    /// Number of electrons.
    pub count: usize,
    /// RNG seed; same seed, same ensemble, bit for bit.
    pub seed: u64,
    /// Fraction of spin-up electrons.
    pub spin_mix: f64,
}

impl BeamSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.voltage > 0.0) || !self.voltage.is_finite() {
            return Err(Error::Domain(format!("beam voltage must be positive, got {}", self.voltage)));
        }
        if self.count == 0 {
            return Err(Error::Domain("beam needs at least one electron".into()));
        }
        if !(self.sigma_transverse >= 0.0) || !self.sigma_transverse.is_finite() {
            return Err(Error::Domain("sigma_transverse must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.spin_mix) {
            return Err(Error::Domain(format!("spin_mix must lie in [0, 1], got {}", self.spin_mix)));
        }
        Ok(())
    }
}

impl Default for BeamSpec {
    fn default() -> Self {
        BeamSpec { voltage: 1e4, sigma_transverse: 1e-6, count: 10_000, seed: 1, spin_mix: 0.5 }
    }
}

/// Apparatus stations along the beam axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub gun_exit_x: f64,
    pub magnet_entry_x: f64,
    pub magnet_exit_x: f64,
    pub screen_x: f64,
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        let g = self;
        let ordered = g.gun_exit_x < g.magnet_entry_x
            && g.magnet_entry_x < g.magnet_exit_x
            && g.magnet_exit_x < g.screen_x;
        let finite = g.gun_exit_x.is_finite() && g.screen_x.is_finite();
        if !ordered || !finite {
            return Err(Error::Domain(format!(
                "stations must satisfy gun < entry < exit < screen, got {} < {} < {} < {}",
                g.gun_exit_x, g.magnet_entry_x, g.magnet_exit_x, g.screen_x
            )));
        }
        Ok(())
    }

    /// Interaction length L [m].
    pub fn interaction_length(&self) -> f64 {
        self.magnet_exit_x - self.magnet_entry_x
    }

    pub fn drift_to_screen(&self) -> f64 {
        self.screen_x - self.magnet_exit_x
    }
}

impl Default for Geometry {
    /// Desk-scale defaults: 5 cm magnet, 15 cm drift to the screen.
    fn default() -> Self {
        Geometry { gun_exit_x: 0.0, magnet_entry_x: 0.05, magnet_exit_x: 0.10, screen_x: 0.25 }
    }
}

/// One electron arriving at the screen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub y: f64,
    pub z: f64,
    pub spin: Spin,
}

/// Binned screen picture plus the raw hit list it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreenImage {
    /// Row-major counts, index = iz * ny + iy.
    pub counts: Vec<u32>,
    pub ny: usize,
    pub nz: usize,
    /// Lower edge of the first y bin [m].
    pub y_min: f64,
    /// Lower edge of the first z bin [m].
    pub z_min: f64,
    /// Square bin edge length [m].
    pub bin_size: f64,
    pub hits: Vec<Hit>,
    /// Electrons that never reached the screen.
    pub lost: usize,
}

impl ScreenImage {
    /// Bins hits on a centered square grid sized to the hit cloud. A
    /// degenerate (pointlike) cloud gets a 1 nm floor so bins keep a
    /// nonzero area.
    pub fn from_hits(hits: Vec<Hit>, bins: usize, lost: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Domain("screen needs at least one bin per axis".into()));
        }
        let mut y_lo = f64::INFINITY;
        let mut y_hi = f64::NEG_INFINITY;
        let mut z_lo = f64::INFINITY;
        let mut z_hi = f64::NEG_INFINITY;
        for h in &hits {
            y_lo = y_lo.min(h.y);
            y_hi = y_hi.max(h.y);
            z_lo = z_lo.min(h.z);
            z_hi = z_hi.max(h.z);
        }
        if hits.is_empty() {
            (y_lo, y_hi, z_lo, z_hi) = (0.0, 0.0, 0.0, 0.0);
        }
        let half = ((y_hi - y_lo).max(z_hi - z_lo) / 2.0).max(0.5e-9);
        let (y_mid, z_mid) = ((y_lo + y_hi) / 2.0, (z_lo + z_hi) / 2.0);
        let bin_size = 2.0 * half / bins as f64;
        let y_min = y_mid - half;
        let z_min = z_mid - half;
        let mut counts = vec![0u32; bins * bins];
        for h in &hits {
            let iy = (((h.y - y_min) / bin_size) as usize).min(bins - 1);
            let iz = (((h.z - z_min) / bin_size) as usize).min(bins - 1);
            counts[iz * bins + iy] += 1;
        }
        Ok(ScreenImage { counts, ny: bins, nz: bins, y_min, z_min, bin_size, hits, lost })
    }

    pub fn count_at(&self, iy: usize, iz: usize) -> u32 {
        self.counts[iz * self.ny + iy]
    }

    pub fn total_hits(&self) -> usize {
        self.hits.len()
    }
}

/// Splitting measurement for one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitReport {
    /// Mean screen z of the spin-up population [m]; 0.0 when empty.
    pub centroid_up_z: f64,
    /// Mean screen z of the spin-down population [m]; 0.0 when empty.
    pub centroid_down_z: f64,
    /// |centroid_up_z - centroid_down_z| [m].
    pub splitting: f64,
    /// Magnitude of the mean (y, z) displacement of the whole beam against
    /// the field-free straight-through baseline [m].
    pub lorentz_deflection: f64,
    /// True when the splitting exceeds twice the pooled standard error of
    /// the centroid difference (a statistical convention, nothing more).
    pub resolved: bool,
}

/// Converts the top 53 bits of a draw to a uniform in (0, 1]; never zero,
/// safe under a logarithm.
fn unit_open(word: u64) -> f64 {
    ((word >> 11) as f64 + 1.0) * (1.0 / 9007199254740992.0)
}

/// Uniform in [0, 1).
fn unit_half_open(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// One standard Gaussian pair by the Box-Muller transform. Written out
/// explicitly (rather than taken from a sampling crate) so the ensemble a
/// seed produces is pinned by this file alone and survives dependency
/// upgrades bit for bit.
fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = unit_open(rng.next_u64());
    let u2 = unit_half_open(rng.next_u64());
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Evenly interleaves spin-up assignments at the requested fraction: the
/// number of ups among the first n electrons is always floor(n * mix).
fn spin_at(index: usize, spin_mix: f64) -> Spin {
    let n = index as f64;
    if ((n + 1.0) * spin_mix).floor() - (n * spin_mix).floor() >= 1.0 {
        Spin::Up
    } else {
        Spin::Down
    }
}

/// Draws the beam at the gun exit plane. Electrons come in pairs sharing
/// one transverse draw: with spin_mix = 0.5 each pair is one spin-down and
/// one spin-up electron at the same (y, z), so any spin-independent motion
/// cancels exactly in the centroid difference and a null result is a
/// numerical zero instead of a statistical one. The RNG is a counter-based
/// stream cipher keyed by the seed, one stream per pair, so the ensemble
/// is reproducible across platforms and thread counts.
pub fn generate_beam(
    spec: &BeamSpec,
    gun_exit_x: f64,
    consts: &Constants,
) -> Result<Vec<ElectronState>> {
    spec.validate()?;
    let speed = accelerate_classical(spec.voltage, consts)?.velocity;
    let velocity = Vec3::new(speed, 0.0, 0.0);
    let mut beam = Vec::with_capacity(spec.count);
    for pair in 0..spec.count.div_ceil(2) {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(pair as u64);
        let (gy, gz) = gaussian_pair(&mut rng);
        let position = Vec3::new(
            gun_exit_x,
            spec.sigma_transverse * gy,
            spec.sigma_transverse * gz,
        );
        for member in 0..2 {
            let index = 2 * pair + member;
            if index >= spec.count {
                break;
            }
            beam.push(ElectronState { position, velocity, spin: spin_at(index, spec.spin_mix) });
        }
    }
    Ok(beam)
}

/// What happened to one electron.
enum Outcome {
    Hit {
        hit: Hit,
        /// Screen displacement (y, z) against the ballistic baseline [m].
        displacement: (f64, f64),
        exit_speed: f64,
    },
    Lost,
}

fn fly_one(
    electron: &ElectronState,
    geometry: &Geometry,
    model: &ForceModel,
    integrator: &IntegratorConfig,
    consts: &Constants,
    force_free: bool,
) -> Outcome {
    let drift = |state: &ElectronState, to_x: f64| -> ElectronState {
        let t = (to_x - state.position.x) / state.velocity.x;
        ElectronState {
            position: state.position + state.velocity * t,
            velocity: state.velocity,
            spin: state.spin,
        }
    };
    let at_screen = if force_free {
        drift(electron, geometry.screen_x)
    } else {
        let at_entry = drift(electron, geometry.magnet_entry_x);
        let at_exit = match propagate(&at_entry, model, integrator, consts, geometry.magnet_exit_x) {
            Ok(state) => state,
            Err(_) => return Outcome::Lost,
        };
        if !(at_exit.velocity.x > 0.0) {
            return Outcome::Lost;
        }
        drift(&at_exit, geometry.screen_x)
    };
    // collimated beams leave the gun with zero transverse velocity, so the
    // field-free baseline at every plane is the gun-exit (y, z)
    Outcome::Hit {
        hit: Hit { y: at_screen.position.y, z: at_screen.position.z, spin: electron.spin },
        displacement: (
            at_screen.position.y - electron.position.y,
            at_screen.position.z - electron.position.z,
        ),
        exit_speed: at_screen.velocity.norm(),
    }
}

fn centroid_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, ss / (n - 1) as f64)
}

/// Screen speeds per population, used by the velocity-dispersion check.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub image: ScreenImage,
    pub report: SplitReport,
    /// Exit speeds of surviving spin-up electrons [m/s].
    pub speeds_up: Vec<f64>,
    /// Exit speeds of surviving spin-down electrons [m/s].
    pub speeds_down: Vec<f64>,
}

/// Flies the whole beam gun -> magnet -> screen and measures the split.
/// Fails if more than 1% of the ensemble is lost to integration errors or
/// turned back by the field.
pub fn run_scenario(
    spec: &BeamSpec,
    geometry: &Geometry,
    model: &ForceModel,
    integrator: &IntegratorConfig,
    consts: &Constants,
    bins: usize,
) -> Result<(ScreenImage, SplitReport)> {
    run_scenario_full(spec, geometry, model, integrator, consts, bins)
        .map(|run| (run.image, run.report))
}

/// [`run_scenario`] keeping the per-population exit speeds.
pub fn run_scenario_full(
    spec: &BeamSpec,
    geometry: &Geometry,
    model: &ForceModel,
    integrator: &IntegratorConfig,
    consts: &Constants,
    bins: usize,
) -> Result<ScenarioRun> {
    geometry.validate()?;
    model.validate()?;
    integrator.validate()?;
    let beam = generate_beam(spec, geometry.gun_exit_x, consts)?;
    // a zero-field, zero-E model exerts no force regardless of toggles;
    // flying it ballistically keeps the control comparison exact
    let force_free = model.field == FieldConfig::Zero && model.electric_field == Vec3::ZERO;
    let outcomes: Vec<Outcome> = beam
        .par_iter()
        .map(|e| fly_one(e, geometry, model, integrator, consts, force_free))
        .collect();

    let mut hits = Vec::with_capacity(beam.len());
    let mut lost = 0usize;
    let mut sum_dy = 0.0;
    let mut sum_dz = 0.0;
    let mut zs_up = Vec::new();
    let mut zs_down = Vec::new();
    let mut speeds_up = Vec::new();
    let mut speeds_down = Vec::new();
    for outcome in outcomes {
        match outcome {
            Outcome::Hit { hit, displacement, exit_speed } => {
                sum_dy += displacement.0;
                sum_dz += displacement.1;
                match hit.spin {
                    Spin::Up => {
                        zs_up.push(hit.z);
                        speeds_up.push(exit_speed);
                    }
                    Spin::Down => {
                        zs_down.push(hit.z);
                        speeds_down.push(exit_speed);
                    }
                }
                hits.push(hit);
            }
            Outcome::Lost => lost += 1,
        }
    }
    if lost * 100 > spec.count {
        return Err(Error::ScenarioLoss { lost, total: spec.count });
    }

    let survivors = hits.len().max(1) as f64;
    let (centroid_up_z, var_up) = centroid_and_variance(&zs_up);
    let (centroid_down_z, var_down) = centroid_and_variance(&zs_down);
    let splitting = (centroid_up_z - centroid_down_z).abs();
    let (n_up, n_down) = (zs_up.len(), zs_down.len());
    let resolved = n_up >= 2
        && n_down >= 2
        && splitting > 2.0 * (var_up / n_up as f64 + var_down / n_down as f64).sqrt();
    let report = SplitReport {
        centroid_up_z,
        centroid_down_z,
        splitting,
        lorentz_deflection: ((sum_dy / survivors).powi(2) + (sum_dz / survivors).powi(2)).sqrt(),
        resolved,
    };
    let image = ScreenImage::from_hits(hits, bins, lost)?;
    Ok(ScenarioRun { image, report, speeds_up, speeds_down })
}

/// Runs one spin-force-only scenario per gradient (ideal linear field,
/// charge force off so the moment force is isolated) and reports the
/// splittings. The screen image is discarded; only the measurement matters
/// here.
pub fn gradient_sweep(
    spec: &BeamSpec,
    geometry: &Geometry,
    gradients: &[f64],
    integrator: &IntegratorConfig,
    consts: &Constants,
) -> Result<Vec<SplitReport>> {
    let mut reports = Vec::with_capacity(gradients.len());
    for &gradient in gradients {
        let model = ForceModel {
            electric_field: Vec3::ZERO,
            field: FieldConfig::IdealGradient { b0: 0.0, gradient },
            include_spin_force: true,
            include_lorentz_force: false,
        };
        let (_, report) = run_scenario(spec, geometry, &model, integrator, consts, 32)
            .map_err(|e| Error::Domain(format!("gradient {gradient} T/m: {e}")))?;
        reports.push(report);
    }
    Ok(reports)
}

/// Runs the same apparatus at each accelerating voltage and reports the
/// splittings; the faster the beam, the shorter the interaction time and
/// the smaller the split.
pub fn voltage_sweep(
    spec: &BeamSpec,
    geometry: &Geometry,
    model: &ForceModel,
    voltages: &[f64],
    integrator: &IntegratorConfig,
    consts: &Constants,
) -> Result<Vec<SplitReport>> {
    let mut reports = Vec::with_capacity(voltages.len());
    for &voltage in voltages {
        let run_spec = BeamSpec { voltage, ..*spec };
        let (_, report) = run_scenario(&run_spec, geometry, model, integrator, consts, 32)
            .map_err(|e| Error::Domain(format!("voltage {voltage} V: {e}")))?;
        reports.push(report);
    }
    Ok(reports)
}
