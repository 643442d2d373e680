//! Forces and trajectory integration: the charge force q(E + v x B) with
//! q = -e, the spin-gradient force on the magnetic moment, the closed-form
//! ballistic deflection with its inversion, and RK4 / semi-implicit Euler
//! steppers for single electrons.

use crate::error::{Error, Result};
use crate::field::{sample, FieldConfig};
use crate::physics::{Constants, ElectronState, Vec3};

/// Everything that exerts force on an electron during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceModel {
    /// Static electric field [V/m].
    pub electric_field: Vec3,
    pub field: FieldConfig,
    /// Apply the moment force along the field gradient.
    pub include_spin_force: bool,
    /// Apply the charge force q(E + v x B). Gradient fields defocus a
    /// charged beam violently (the classic objection to free-electron
    /// spin splitting), so scenarios that isolate the moment force turn
    /// this off.
    pub include_lorentz_force: bool,
}

impl Default for ForceModel {
    fn default() -> Self {
        ForceModel {
            electric_field: Vec3::ZERO,
            field: FieldConfig::Zero,
            include_spin_force: true,
            include_lorentz_force: true,
        }
    }
}

impl ForceModel {
    pub fn validate(&self) -> Result<()> {
        if !self.electric_field.is_finite() {
            return Err(Error::Domain("electric field must be finite".into()));
        }
        Ok(())
    }
}

/// Integration scheme for [`step`] and [`propagate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Rk4,
    /// Symplectic (semi-implicit) Euler: velocity first, then position.
    SemiImplicit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Step size [s].
    pub time_step: f64,
    /// Abort bound on steps for one plane crossing.
    pub max_steps: u64,
    pub scheme: Scheme,
}

impl IntegratorConfig {
    /// Sizes the step so a crossing of `length` at `speed` takes `steps`
    /// steps, with generous headroom in `max_steps` for curved paths.
    pub fn for_crossing(length: f64, speed: f64, steps: u64) -> Result<Self> {
        if !(length > 0.0) || !(speed > 0.0) || steps == 0 {
            return Err(Error::Domain(format!(
                "crossing needs positive length, speed, steps; got {length}, {speed}, {steps}"
            )));
        }
        let cfg = IntegratorConfig {
            time_step: length / speed / steps as f64,
            max_steps: 4 * steps + 16,
            scheme: Scheme::Rk4,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time_step > 0.0) || !self.time_step.is_finite() {
            return Err(Error::Domain(format!("time step must be positive, got {}", self.time_step)));
        }
        if self.max_steps == 0 {
            return Err(Error::Domain("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Inputs of the ballistic deflection formula dz = (mu/m) g t^2 / 2,
/// t = L / v.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeflectionInput {
    /// Field gradient dB/dz [T/m].
    pub gradient: f64,
    /// Interaction length L [m].
    pub interaction_length: f64,
    /// Beam speed v [m/s].
    pub speed: f64,
    /// Add the literal v*t term as written in the source formula. It is
    /// the longitudinal advance (= L), not a transverse displacement, and
    /// is off by default; the flag reproduces the formula verbatim rather
    /// than reinterpreting it.
    pub include_vt_term: bool,
}

impl DeflectionInput {
    pub fn new(gradient: f64, interaction_length: f64, speed: f64) -> Self {
        DeflectionInput { gradient, interaction_length, speed, include_vt_term: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.speed > 0.0) || !(self.interaction_length > 0.0) || !self.gradient.is_finite() {
            return Err(Error::Domain(
                "deflection needs speed > 0, length > 0, finite gradient".into(),
            ));
        }
        Ok(())
    }
}

/// Charge force (-e)(E + v x B) [N], with B sampled at the electron's
/// position. Ignores the `include_lorentz_force` toggle; callers that want
/// the toggled total use [`total_force`].
pub fn lorentz_force(state: &ElectronState, model: &ForceModel, consts: &Constants) -> Result<Vec3> {
    model.validate()?;
    let b = sample(&model.field, state.position)?.b;
    let q = -consts.electron_charge_magnitude;
    Ok((state.velocity.cross(b) + model.electric_field) * q)
}

/// Moment force [N]: spin_sign * mu * (dBz/dy, dBz/dz) in the y-z plane,
/// zero when the model's field has no gradient or the toggle is off.
pub fn spin_force(state: &ElectronState, model: &ForceModel, consts: &Constants) -> Result<Vec3> {
    if !model.include_spin_force {
        return Ok(Vec3::ZERO);
    }
    let s = sample(&model.field, state.position)?;
    let mu = state.spin.sign() * consts.bohr_magneton;
    Ok(Vec3::new(0.0, mu * s.grad_bz_y, mu * s.grad_bz))
}

/// Sum of the enabled forces [N].
pub fn total_force(state: &ElectronState, model: &ForceModel, consts: &Constants) -> Result<Vec3> {
    let mut f = spin_force(state, model, consts)?;
    if model.include_lorentz_force {
        f = f + lorentz_force(state, model, consts)?;
    }
    Ok(f)
}

/// Transverse deflection [m] of one spin population after crossing an
/// interaction length L at speed v under gradient g:
/// dz = (mu/m) g (L/v)^2 / 2, plus the literal v*t when requested.
pub fn analytic_deflection(input: &DeflectionInput, consts: &Constants) -> Result<f64> {
    input.validate()?;
    let t = input.interaction_length / input.speed;
    let mut dz = 0.5 * consts.moment_mass_ratio() * input.gradient * t * t;
    if input.include_vt_term {
        dz += input.speed * t;
    }
    Ok(dz)
}

/// Gradient [T/m] for which the full separation between the two spin
/// populations (2x the one-sided deflection) equals `target_split`:
/// g = target * v^2 / ((mu/m) L^2).
pub fn required_gradient(
    target_split: f64,
    interaction_length: f64,
    speed: f64,
    consts: &Constants,
) -> Result<f64> {
    if !(target_split >= 0.0) || !(interaction_length > 0.0) || !(speed > 0.0) {
        return Err(Error::Domain(
            "required_gradient needs target >= 0, length > 0, speed > 0".into(),
        ));
    }
    Ok(target_split * speed * speed
        / (consts.moment_mass_ratio() * interaction_length * interaction_length))
}

fn acceleration(
    position: Vec3,
    velocity: Vec3,
    spin: crate::physics::Spin,
    model: &ForceModel,
    consts: &Constants,
) -> Result<Vec3> {
    let probe = ElectronState { position, velocity, spin };
    Ok(total_force(&probe, model, consts)? * (1.0 / consts.electron_mass))
}

/// Advances one electron by `dt` under the model's total force.
pub fn step(
    state: &ElectronState,
    model: &ForceModel,
    consts: &Constants,
    dt: f64,
    scheme: Scheme,
) -> Result<ElectronState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    let (p, v, s) = (state.position, state.velocity, state.spin);
    match scheme {
        Scheme::Rk4 => {
            let a1 = acceleration(p, v, s, model, consts)?;
            let k1p = v;
            let p2 = p + k1p * (dt / 2.0);
            let v2 = v + a1 * (dt / 2.0);
            let a2 = acceleration(p2, v2, s, model, consts)?;
            let p3 = p + v2 * (dt / 2.0);
            let v3 = v + a2 * (dt / 2.0);
            let a3 = acceleration(p3, v3, s, model, consts)?;
            let p4 = p + v3 * dt;
            let v4 = v + a3 * dt;
            let a4 = acceleration(p4, v4, s, model, consts)?;
            Ok(ElectronState {
                position: p + (k1p + (v2 + v3) * 2.0 + v4) * (dt / 6.0),
                velocity: v + (a1 + (a2 + a3) * 2.0 + a4) * (dt / 6.0),
                spin: s,
            })
        }
        Scheme::SemiImplicit => {
            let a = acceleration(p, v, s, model, consts)?;
            let v_next = v + a * dt;
            Ok(ElectronState { position: p + v_next * dt, velocity: v_next, spin: s })
        }
    }
}

/// One sampled point of a trajectory dump.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    /// Elapsed time since the start of the crossing [s].
    pub time: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub spin_sign: f64,
}

fn interpolate_to_plane(before: &ElectronState, after: &ElectronState, plane_x: f64) -> ElectronState {
    let span = after.position.x - before.position.x;
    let f = if span > 0.0 { (plane_x - before.position.x) / span } else { 1.0 };
    ElectronState {
        position: before.position + (after.position - before.position) * f,
        velocity: before.velocity + (after.velocity - before.velocity) * f,
        spin: before.spin,
    }
}

/// Steps `state` forward until it crosses the plane x = `exit_plane_x`,
/// linearly interpolating the final partial step onto the plane.
pub fn propagate(
    state: &ElectronState,
    model: &ForceModel,
    cfg: &IntegratorConfig,
    consts: &Constants,
    exit_plane_x: f64,
) -> Result<ElectronState> {
    propagate_inner(state, model, cfg, consts, exit_plane_x, None).map(|(s, _)| s)
}

/// [`propagate`] that also samples every `stride`-th step (plus the exit
/// state) into a trace.
pub fn propagate_traced(
    state: &ElectronState,
    model: &ForceModel,
    cfg: &IntegratorConfig,
    consts: &Constants,
    exit_plane_x: f64,
    stride: u64,
) -> Result<(ElectronState, Vec<TraceRow>)> {
    let stride = stride.max(1);
    let (exit, trace) = propagate_inner(state, model, cfg, consts, exit_plane_x, Some(stride))?;
    Ok((exit, trace.unwrap_or_default()))
}

fn propagate_inner(
    state: &ElectronState,
    model: &ForceModel,
    cfg: &IntegratorConfig,
    consts: &Constants,
    exit_plane_x: f64,
    trace_stride: Option<u64>,
) -> Result<(ElectronState, Option<Vec<TraceRow>>)> {
    cfg.validate()?;
    model.validate()?;
    state.validate(consts)?;
    if state.position.x >= exit_plane_x {
        return Err(Error::Domain(format!(
            "start plane x = {} is not before the exit plane x = {exit_plane_x}",
            state.position.x
        )));
    }
    if !(state.velocity.x > 0.0) {
        return Err(Error::Domain("propagation needs a forward (+x) velocity".into()));
    }
    let mut trace = trace_stride.map(|_| Vec::new());
    let mut current = *state;
    for n in 0..cfg.max_steps {
        if let (Some(rows), Some(stride)) = (trace.as_mut(), trace_stride) {
            if n % stride == 0 {
                rows.push(TraceRow {
                    time: n as f64 * cfg.time_step,
                    position: current.position,
                    velocity: current.velocity,
                    spin_sign: current.spin.sign(),
                });
            }
        }
        let next = step(&current, model, consts, cfg.time_step, cfg.scheme)?;
        if next.position.x >= exit_plane_x {
            let exit = interpolate_to_plane(&current, &next, exit_plane_x);
            if let Some(rows) = trace.as_mut() {
                let f = if next.position.x > current.position.x {
                    (exit_plane_x - current.position.x) / (next.position.x - current.position.x)
                } else {
                    1.0
                };
                rows.push(TraceRow {
                    time: (n as f64 + f) * cfg.time_step,
                    position: exit.position,
                    velocity: exit.velocity,
                    spin_sign: exit.spin.sign(),
                });
            }
            return Ok((exit, trace));
        }
        current = next;
    }
    Err(Error::MaxSteps { max_steps: cfg.max_steps, last: current })
}
