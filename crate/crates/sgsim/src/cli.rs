//! Command dispatch: load a config, apply overrides, run the requested
//! command, and write every output plus a `manifest.txt` that pins the
//! fully resolved parameter set for bit-identical reruns.

use crate::config::{FieldKind, Params};
use crate::dynamics::{propagate_traced, required_gradient, ForceModel, IntegratorConfig};
use crate::error::{Error, Result};
use crate::experiment::{generate_beam, run_scenario, BeamSpec, Geometry};
use crate::export::{
    csv_fieldmap, csv_hits, csv_reports, csv_trace, pgm_fieldmap, pgm_screen, ReportRow,
};
use crate::field::{inhomogeneity_map, sharp_tip_gradient, two_wire_gradient, FieldConfig, TwoWireConfig};
use crate::kinematics::{accelerate_classical, table_1, table_csv};
use crate::physics::{constants, Vec3};
use crate::{experiment, physics};
use std::fmt;
use std::path::PathBuf;

/// What a single invocation does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    /// Kinematics table over the full accelerating-voltage range.
    Table1,
    /// Two-wire field and inhomogeneity grid (CSV + PGM).
    Fieldmap,
    /// One beam, one field, one screen.
    Scenario,
    /// Splitting versus field gradient.
    GradientSweep,
    /// Splitting versus accelerating voltage.
    VoltageSweep,
    /// Gradient needed for a target splitting.
    RequiredGradient,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Table1 => "table1",
            CommandKind::Fieldmap => "fieldmap",
            CommandKind::Scenario => "scenario",
            CommandKind::GradientSweep => "gradient-sweep",
            CommandKind::VoltageSweep => "voltage-sweep",
            CommandKind::RequiredGradient => "required-gradient",
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One resolved invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    /// Config file; None runs on defaults plus overrides.
    pub input_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// `--set key=value` pairs, applied in order after the file.
    pub overrides: Vec<(String, String)>,
    /// `--seed`, applied last.
    pub seed: Option<u64>,
    /// Worker thread cap; None uses every core.
    pub threads: Option<usize>,
}

/// Loads, overrides, and validates the parameter set for a run.
pub fn resolve_params(cfg: &RunConfig) -> Result<Params> {
    let text = match &cfg.input_path {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    let mut params = Params::parse(&text)?;
    for (key, value) in &cfg.overrides {
        params.set(key, value)?;
    }
    if let Some(seed) = cfg.seed {
        params.set("seed", &seed.to_string())?;
    }
    Ok(params)
}

fn beam_spec(params: &Params) -> BeamSpec {
    BeamSpec {
        voltage: params.voltage,
        sigma_transverse: params.sigma,
        count: params.count,
        seed: params.seed,
        spin_mix: params.spin_mix,
    }
}

fn geometry(params: &Params) -> Geometry {
    Geometry {
        gun_exit_x: params.gun_exit,
        magnet_entry_x: params.magnet_entry,
        magnet_exit_x: params.magnet_exit,
        screen_x: params.screen,
    }
}

fn two_wire(params: &Params) -> Result<TwoWireConfig> {
    TwoWireConfig::new(params.current, params.half_separation)?.with_z_offset(params.z_offset())
}

fn force_model(params: &Params) -> Result<ForceModel> {
    let field = match params.field {
        FieldKind::Zero => FieldConfig::Zero,
        FieldKind::Uniform => FieldConfig::Uniform(Vec3::new(params.b_x, params.b_y, params.b_z)),
        FieldKind::IdealGradient => {
            FieldConfig::IdealGradient { b0: params.b0, gradient: params.gradient }
        }
        FieldKind::TwoWire => FieldConfig::TwoWire(two_wire(params)?),
        FieldKind::SharpTip => {
            FieldConfig::SharpTip { b_surface: params.b_surface, tip_radius: params.tip_radius }
        }
    };
    Ok(ForceModel {
        electric_field: Vec3::new(params.e_x, params.e_y, params.e_z),
        field,
        include_spin_force: params.include_spin,
        include_lorentz_force: params.include_lorentz,
    })
}

/// The model's dBz/dz at the working point, for report rows.
fn nominal_gradient(params: &Params) -> Result<f64> {
    let mu0 = constants().vacuum_permeability;
    Ok(match params.field {
        FieldKind::Zero | FieldKind::Uniform => 0.0,
        FieldKind::IdealGradient => params.gradient,
        FieldKind::TwoWire => mu0 * two_wire_gradient(&two_wire(params)?, 0.0, 0.0)?,
        FieldKind::SharpTip => sharp_tip_gradient(params.b_surface, params.tip_radius)?,
    })
}

fn integrator(params: &Params, speed: f64, length: f64) -> Result<IntegratorConfig> {
    Ok(IntegratorConfig {
        scheme: params.scheme,
        ..IntegratorConfig::for_crossing(length, speed, params.steps)?
    })
}

/// Executes one command, writing all outputs under `cfg.output_dir`.
pub fn run(cfg: &RunConfig) -> Result<()> {
    let params = resolve_params(cfg)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?
            .install(|| dispatch(cfg, &params)),
        None => dispatch(cfg, &params),
    }
}

fn write(cfg: &RunConfig, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(cfg.output_dir.join(name), bytes.as_ref())?;
    Ok(())
}

fn dispatch(cfg: &RunConfig, params: &Params) -> Result<()> {
    let consts = constants();
    match cfg.command {
        CommandKind::Table1 => {
            write(cfg, "table1.csv", table_csv(&table_1(&consts)))?;
        }
        CommandKind::Fieldmap => {
            let map = inhomogeneity_map(
                &two_wire(params)?,
                params.map_y_range(),
                params.map_z_range(),
                (params.ny, params.nz),
            )?;
            write(cfg, "fieldmap.csv", csv_fieldmap(&map))?;
            write(cfg, "fieldmap.pgm", pgm_fieldmap(&map))?;
        }
        CommandKind::Scenario => {
            let spec = beam_spec(params);
            let geo = geometry(params);
            geo.validate()?;
            let model = force_model(params)?;
            let speed = accelerate_classical(params.voltage, &consts)?.velocity;
            let stepper = integrator(params, speed, geo.interaction_length())?;
            let (image, report) =
                run_scenario(&spec, &geo, &model, &stepper, &consts, params.bins)?;
            write(cfg, "screen.pgm", pgm_screen(&image))?;
            write(cfg, "hits.csv", csv_hits(&image))?;
            let row = ReportRow {
                id: "scenario".into(),
                gradient: nominal_gradient(params)?,
                voltage: params.voltage,
                report,
            };
            write(cfg, "report.csv", csv_reports(&[row]))?;
            if params.trace_stride > 0 {
                // trace the lead electron through the magnet window
                let first = generate_beam(&spec, geo.gun_exit_x, &consts)?[0];
                let t = (geo.magnet_entry_x - first.position.x) / first.velocity.x;
                let at_entry = physics::ElectronState {
                    position: first.position + first.velocity * t,
                    velocity: first.velocity,
                    spin: first.spin,
                };
                let (_, trace) = propagate_traced(
                    &at_entry,
                    &model,
                    &stepper,
                    &consts,
                    geo.magnet_exit_x,
                    params.trace_stride,
                )?;
                write(cfg, "trajectory.csv", csv_trace(&trace))?;
            }
        }
        CommandKind::GradientSweep => {
            let spec = beam_spec(params);
            let geo = geometry(params);
            geo.validate()?;
            let speed = accelerate_classical(params.voltage, &consts)?.velocity;
            let stepper = integrator(params, speed, geo.interaction_length())?;
            let reports = experiment::gradient_sweep(
                &spec,
                &geo,
                &params.gradients,
                &stepper,
                &consts,
            )?;
            let rows: Vec<ReportRow> = params
                .gradients
                .iter()
                .zip(reports)
                .enumerate()
                .map(|(i, (&gradient, report))| ReportRow {
                    id: format!("gradient-sweep[{i}]"),
                    gradient,
                    voltage: params.voltage,
                    report,
                })
                .collect();
            write(cfg, "sweep.csv", csv_reports(&rows))?;
        }
        CommandKind::VoltageSweep => {
            let spec = beam_spec(params);
            let geo = geometry(params);
            geo.validate()?;
            let model = force_model(params)?;
            // size the step for the slowest beam in the sweep so every
            // run fits the same step budget
            let v_slowest = params
                .voltages
                .iter()
                .copied()
                .fold(params.voltage, f64::min);
            let speed = accelerate_classical(v_slowest, &consts)?.velocity;
            let stepper = integrator(params, speed, geo.interaction_length())?;
            let reports = experiment::voltage_sweep(
                &spec,
                &geo,
                &model,
                &params.voltages,
                &stepper,
                &consts,
            )?;
            let gradient = nominal_gradient(params)?;
            let rows: Vec<ReportRow> = params
                .voltages
                .iter()
                .zip(reports)
                .enumerate()
                .map(|(i, (&voltage, report))| ReportRow {
                    id: format!("voltage-sweep[{i}]"),
                    gradient,
                    voltage,
                    report,
                })
                .collect();
            write(cfg, "sweep.csv", csv_reports(&rows))?;
        }
        CommandKind::RequiredGradient => {
            let speed = accelerate_classical(params.voltage, &consts)?.velocity;
            let length = params.length();
            let gradient = required_gradient(params.target_split, length, speed, &consts)?;
            let text = format!(
                "target_split = {}\ninteraction_length = {}\nspeed = {}\nvoltage = {}\ngradient = {}\n",
                params.target_split, length, speed, params.voltage, gradient
            );
            print!("{text}");
            write(cfg, "required_gradient.txt", text)?;
        }
    }
    // the manifest pins command and resolved parameters; output paths and
    // thread counts are excluded on purpose so equal manifests promise
    // equal output bytes
    let manifest = format!("command = {}\n{}", cfg.command.name(), params.render());
    write(cfg, "manifest.txt", manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn run_config(command: CommandKind, dir: &std::path::Path, sets: &[(&str, &str)]) -> RunConfig {
        RunConfig {
            command,
            input_path: None,
            output_dir: dir.to_path_buf(),
            overrides: sets
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            seed: None,
            threads: None,
        }
    }

    fn read(dir: &std::path::Path, name: &str) -> String {
        std::fs::read_to_string(dir.join(name)).unwrap()
    }

    #[test]
    fn table1_command_writes_the_full_table_and_manifest() {
        let dir = tempdir().unwrap();
        run(&run_config(CommandKind::Table1, dir.path(), &[])).unwrap();
        let csv = read(dir.path(), "table1.csv");
        assert_eq!(csv.lines().count(), 26);
        assert!(csv.lines().nth(1).unwrap().starts_with("5,4.19E7"));
        let manifest = read(dir.path(), "manifest.txt");
        assert!(manifest.starts_with("command = table1\n"));
        // the manifest's parameter block re-parses cleanly
        let body: String = manifest.lines().skip(1).map(|l| format!("{l}\n")).collect();
        let p = Params::parse(&body).unwrap();
        assert_eq!(p.voltage, 1e4);
    }

    #[test]
    fn required_gradient_command_prints_the_inputs_and_result() {
        let dir = tempdir().unwrap();
        run(&run_config(
            CommandKind::RequiredGradient,
            dir.path(),
            &[("target_split", "20 um")],
        ))
        .unwrap();
        let text = read(dir.path(), "required_gradient.txt");
        assert!(text.contains("target_split = 0.00002\n"), "{text}");
        assert!(text.contains("interaction_length = 0.05\n"));
        assert!(text.contains("speed = 59304420.324567124\n"));
        // frozen oracle: 2.7650485436893204e6 T/m, shown shortest round-trip
        assert!(text.contains("gradient = 2765048.5436893203\n"), "{text}");
    }

    #[test]
    fn fieldmap_command_writes_grid_and_image() {
        let dir = tempdir().unwrap();
        run(&run_config(
            CommandKind::Fieldmap,
            dir.path(),
            &[("ny", "5"), ("nz", "4")],
        ))
        .unwrap();
        let csv = read(dir.path(), "fieldmap.csv");
        assert_eq!(csv.lines().count(), 1 + 20);
        let pgm = std::fs::read(dir.path().join("fieldmap.pgm")).unwrap();
        assert!(pgm.starts_with(b"P5\n5 4\n255\n"));
        assert_eq!(pgm.len(), b"P5\n5 4\n255\n".len() + 20);
    }

    fn small_scenario_sets() -> Vec<(&'static str, &'static str)> {
        vec![
            ("field", "ideal-gradient"),
            ("gradient", "2.7e6 T_per_m"),
            ("include_lorentz", "false"),
            ("count", "200"),
            ("steps", "50"),
            ("bins", "16"),
        ]
    }

    #[test]
    fn scenario_command_writes_image_hits_report() {
        let dir = tempdir().unwrap();
        let mut sets = small_scenario_sets();
        sets.push(("trace_stride", "10"));
        run(&run_config(CommandKind::Scenario, dir.path(), &sets)).unwrap();
        let hits = read(dir.path(), "hits.csv");
        assert_eq!(hits.lines().count(), 201);
        let report = read(dir.path(), "report.csv");
        assert_eq!(report.lines().count(), 2);
        assert!(report.lines().nth(1).unwrap().starts_with("scenario,2700000,10000,"));
        let pgm = std::fs::read(dir.path().join("screen.pgm")).unwrap();
        assert!(pgm.starts_with(b"P5\n16 16\n255\n"));
        let trace = read(dir.path(), "trajectory.csv");
        assert!(trace.lines().count() > 2);
    }

    #[test]
    fn runs_are_reproducible_across_directories_and_thread_counts() {
        let dir_a = tempdir().unwrap();
        let dir_b = tempdir().unwrap();
        let mut a = run_config(CommandKind::Scenario, dir_a.path(), &small_scenario_sets());
        a.threads = Some(1);
        let mut b = run_config(CommandKind::Scenario, dir_b.path(), &small_scenario_sets());
        b.threads = Some(4);
        run(&a).unwrap();
        run(&b).unwrap();
        for name in ["hits.csv", "report.csv", "screen.pgm", "manifest.txt"] {
            let bytes_a = std::fs::read(dir_a.path().join(name)).unwrap();
            let bytes_b = std::fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(bytes_a, bytes_b, "{name} differs");
        }
    }

    #[test]
    fn sweep_commands_write_one_row_per_point() {
        let dir = tempdir().unwrap();
        run(&run_config(
            CommandKind::GradientSweep,
            dir.path(),
            &[
                ("gradients", "0, 1e6"),
                ("count", "100"),
                ("steps", "40"),
                ("screen", "0.100001"),
            ],
        ))
        .unwrap();
        let sweep = read(dir.path(), "sweep.csv");
        assert_eq!(sweep.lines().count(), 3);
        assert!(sweep.lines().nth(1).unwrap().starts_with("gradient-sweep[0],0,"));

        let dir = tempdir().unwrap();
        run(&run_config(
            CommandKind::VoltageSweep,
            dir.path(),
            &[
                ("voltages", "5 kV, 10 kV"),
                ("field", "ideal-gradient"),
                ("gradient", "1e6"),
                ("include_lorentz", "false"),
                ("count", "100"),
                ("steps", "40"),
            ],
        ))
        .unwrap();
        let sweep = read(dir.path(), "sweep.csv");
        assert_eq!(sweep.lines().count(), 3);
        let first = sweep.lines().nth(1).unwrap();
        let second = sweep.lines().nth(2).unwrap();
        assert!(first.starts_with("voltage-sweep[0],1000000,5000,"));
        // splitting falls with voltage
        let split = |line: &str| line.split(',').nth(3).unwrap().parse::<f64>().unwrap();
        assert!(split(first) > split(second));
    }

    #[test]
    fn config_file_and_overrides_compose() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "voltage = 5 kV\ncount = 50\n").unwrap();
        let mut cfg = run_config(CommandKind::RequiredGradient, dir.path(), &[("voltage", "20 kV")]);
        cfg.input_path = Some(path);
        cfg.seed = Some(7);
        run(&cfg).unwrap();
        let manifest = read(dir.path(), "manifest.txt");
        assert!(manifest.contains("voltage = 20000\n"));
        assert!(manifest.contains("count = 50\n"));
        assert!(manifest.contains("seed = 7\n"));
    }

    #[test]
    fn bad_inputs_surface_as_errors_not_panics() {
        let dir = tempdir().unwrap();
        // broken geometry
        let cfg = run_config(CommandKind::Scenario, dir.path(), &[("magnet_entry", "0.3")]);
        assert!(run(&cfg).is_err());
        // unknown override key
        let cfg = run_config(CommandKind::Table1, dir.path(), &[("frequency", "50")]);
        assert!(run(&cfg).is_err());
        // missing config file
        let mut cfg = run_config(CommandKind::Table1, dir.path(), &[]);
        cfg.input_path = Some(dir.path().join("absent.cfg"));
        assert!(run(&cfg).is_err());
    }
}
