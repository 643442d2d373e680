//! Electron-gun kinematics: accelerating voltage to velocity, energy,
//! momentum, and de Broglie wavelength, with classical and relativistic
//! modes and the standard 5-30 kV reference table.

use crate::error::{Error, Result};
use crate::physics::Constants;

/// Reference-table voltages in kV. 11 kV is deliberately absent; the table
/// this reproduces skips it.
pub const TABLE_VOLTAGES_KV: [u32; 25] = [
    5, 6, 7, 8, 9, 10, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28, 29, 30,
];

/// One gun operating point, all SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicsRow {
    /// Accelerating voltage [V].
    pub voltage: f64,
    /// Exit speed [m/s].
    pub velocity: f64,
    /// Electron rest mass [kg] (constant column, kept for table fidelity).
    pub mass: f64,
    /// Kinetic energy e*V [J].
    pub energy: f64,
    /// Momentum [kg m/s].
    pub momentum: f64,
    /// de Broglie wavelength h/p [m].
    pub wavelength: f64,
}

fn check_voltage(voltage: f64) -> Result<()> {
    if !(voltage > 0.0) || !voltage.is_finite() {
        return Err(Error::Domain(format!(
            "accelerating voltage must be positive and finite, got {voltage} V"
        )));
    }
    Ok(())
}

/// Classical gun model: v = sqrt(2 e V / m), p = m v, lambda = h / p.
pub fn accelerate_classical(voltage: f64, consts: &Constants) -> Result<KinematicsRow> {
    check_voltage(voltage)?;
    let e = consts.electron_charge_magnitude;
    let m = consts.electron_mass;
    let velocity = (2.0 * e * voltage / m).sqrt();
    if velocity >= consts.speed_of_light {
        return Err(Error::Domain(format!(
            "classical model gives {velocity:.3e} m/s >= c at {voltage} V; use the relativistic mode"
        )));
    }
    let momentum = m * velocity;
    Ok(KinematicsRow {
        voltage,
        velocity,
        mass: m,
        energy: e * voltage,
        momentum,
        wavelength: consts.planck_constant / momentum,
    })
}

/// Relativistic gun model: gamma = 1 + eV/(m c^2), v = c sqrt(1 - 1/gamma^2),
/// p = gamma m v.
pub fn accelerate_relativistic(voltage: f64, consts: &Constants) -> Result<KinematicsRow> {
    check_voltage(voltage)?;
    let e = consts.electron_charge_magnitude;
    let m = consts.electron_mass;
    let c = consts.speed_of_light;
    let gamma = 1.0 + e * voltage / (m * c * c);
    let velocity = c * (1.0 - 1.0 / (gamma * gamma)).sqrt();
    let momentum = gamma * m * velocity;
    Ok(KinematicsRow {
        voltage,
        velocity,
        mass: m,
        energy: e * voltage,
        momentum,
        wavelength: consts.planck_constant / momentum,
    })
}

/// Lorentz factor 1/sqrt(1 - (v/c)^2) for 0 <= v < c.
pub fn gamma_factor(velocity: f64, consts: &Constants) -> Result<f64> {
    let c = consts.speed_of_light;
    if !velocity.is_finite() || velocity < 0.0 || velocity >= c {
        return Err(Error::Domain(format!(
            "gamma_factor needs 0 <= v < c, got {velocity} m/s"
        )));
    }
    let beta = velocity / c;
    Ok(1.0 / (1.0 - beta * beta).sqrt())
}

/// The full classical reference table (25 rows, 5-30 kV with 11 kV absent).
pub fn table_1(consts: &Constants) -> Vec<KinematicsRow> {
    TABLE_VOLTAGES_KV
        .iter()
        .map(|&kv| {
            accelerate_classical(f64::from(kv) * 1e3, consts)
                .expect("table voltages are positive and sub-luminal")
        })
        .collect()
}

/// Renders rows as CSV with 3-significant-digit scientific notation, the
/// precision the reference table is printed at. Voltage is in kV.
pub fn table_csv(rows: &[KinematicsRow]) -> String {
    let mut out = String::from("voltage_kV,velocity_m_per_s,mass_kg,energy_J,momentum_N_s,wavelength_m\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.2E},{:.2E},{:.2E},{:.2E},{:.2E}\n",
            r.voltage / 1e3,
            r.velocity,
            r.mass,
            r.energy,
            r.momentum,
            r.wavelength
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::constants;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    /// Printed reference rows: (kV, velocity, energy, momentum, wavelength).
    /// Mass column is 9.11E-31 throughout.
    const PRINTED_ROWS: [(u32, f64, f64, f64, f64); 25] = [
        (5, 4.19e7, 8.01e-16, 3.82e-23, 1.73e-11),
        (6, 4.59e7, 9.61e-16, 4.18e-23, 1.58e-11),
        (7, 4.96e7, 1.12e-15, 4.52e-23, 1.47e-11),
        (8, 5.30e7, 1.28e-15, 4.83e-23, 1.37e-11),
        (9, 5.63e7, 1.44e-15, 5.13e-23, 1.29e-11),
        (10, 5.93e7, 1.60e-15, 5.40e-23, 1.23e-11),
        (12, 6.50e7, 1.92e-15, 5.92e-23, 1.12e-11),
        (13, 6.76e7, 2.08e-15, 6.16e-23, 1.08e-11),
        (14, 7.02e7, 2.24e-15, 6.39e-23, 1.04e-11),
        (15, 7.26e7, 2.40e-15, 6.62e-23, 1.00e-11),
        (16, 7.50e7, 2.56e-15, 6.83e-23, 9.70e-12),
        (17, 7.73e7, 2.72e-15, 7.04e-23, 9.41e-12),
        (18, 7.96e7, 2.88e-15, 7.25e-23, 9.14e-12),
        (19, 8.17e7, 3.04e-15, 7.45e-23, 8.90e-12),
        (20, 8.39e7, 3.20e-15, 7.64e-23, 8.67e-12),
        (21, 8.59e7, 3.36e-15, 7.83e-23, 8.46e-12),
        (22, 8.80e7, 3.52e-15, 8.01e-23, 8.27e-12),
        (23, 8.99e7, 3.68e-15, 8.19e-23, 8.09e-12),
        (24, 9.19e7, 3.84e-15, 8.37e-23, 7.92e-12),
        (25, 9.38e7, 4.01e-15, 8.54e-23, 7.76e-12),
        (26, 9.56e7, 4.17e-15, 8.71e-23, 7.61e-12),
        (27, 9.75e7, 4.33e-15, 8.88e-23, 7.46e-12),
        (28, 9.92e7, 4.49e-15, 9.04e-23, 7.33e-12),
        (29, 1.01e8, 4.65e-15, 9.20e-23, 7.20e-12),
        (30, 1.03e8, 4.81e-15, 9.36e-23, 7.08e-12),
    ];

    #[test]
    fn reproduces_every_printed_row_within_1_percent() {
        let c = constants();
        for &(kv, v, e, p, lam) in &PRINTED_ROWS {
            let row = accelerate_classical(f64::from(kv) * 1e3, &c).unwrap();
            assert!(rel_err(row.velocity, v) < 0.01, "{kv} kV velocity");
            assert!(rel_err(row.energy, e) < 0.01, "{kv} kV energy");
            assert!(rel_err(row.momentum, p) < 0.01, "{kv} kV momentum");
            assert!(rel_err(row.wavelength, lam) < 0.01, "{kv} kV wavelength");
            assert_eq!(row.mass, 9.11e-31, "{kv} kV mass column");
        }
    }

    #[test]
    fn ten_kv_operating_point() {
        // frozen oracle values (50-digit arithmetic, rounded constants)
        let row = accelerate_classical(1e4, &constants()).unwrap();
        assert!(rel_err(row.velocity, 5.930_442_032_456_713e7) < 1e-12);
        assert!(rel_err(row.energy, 1.602e-15) < 1e-12);
        assert!(rel_err(row.momentum, 5.402_632_691_568_066e-23) < 1e-12);
        assert!(rel_err(row.wavelength, 1.226_439_104_464_987e-11) < 1e-12);
    }

    #[test]
    fn relativistic_ten_kv_is_slower() {
        // frozen oracle: gamma = 1 + eV/mc^2 = 1.0195660306, v = 5.8450e7
        let row = accelerate_relativistic(1e4, &constants()).unwrap();
        assert!(rel_err(row.velocity, 5.845_016_460_546_466e7) < 1e-12);
    }

    #[test]
    fn thirty_kv_classical_and_relativistic_differ_above_1_percent() {
        let c = constants();
        let cl = accelerate_classical(3e4, &c).unwrap().velocity;
        let re = accelerate_relativistic(3e4, &c).unwrap().velocity;
        // frozen oracle: 4.3496% disagreement at 30 kV
        assert!(rel_err(cl / re - 1.0, 0.043_496_020_507_763) < 1e-9);
        assert!(cl / re - 1.0 > 0.01);
    }

    #[test]
    fn low_voltage_limit_recovers_classical() {
        let c = constants();
        // at 1 mV the physical correction is ~1.5e-9; the tolerance leaves
        // room for the rounding noise of gamma - 1 ~ 2e-9 in f64
        let cl = accelerate_classical(1e-3, &c).unwrap().velocity;
        let re = accelerate_relativistic(1e-3, &c).unwrap().velocity;
        assert!((re / cl - 1.0).abs() < 1e-6);
    }

    #[test]
    fn gamma_factor_reference_points() {
        let c = constants();
        assert_eq!(gamma_factor(0.0, &c).unwrap(), 1.0);
        // gun regime v ~ 1e7: gamma stays within 0.1% of unity
        let g = gamma_factor(1e7, &c).unwrap();
        assert!(rel_err(g, 1.000_556_789_705_205) < 1e-12);
        assert!((g - 1.0).abs() < 1e-3);
        // frozen oracle at the 10 kV classical speed
        assert!(rel_err(gamma_factor(5.93e7, &c).unwrap(), 1.020_156_569_100_881) < 1e-12);
    }

    #[test]
    fn gamma_factor_rejects_out_of_range() {
        let c = constants();
        assert!(gamma_factor(-1.0, &c).is_err());
        assert!(gamma_factor(c.speed_of_light, &c).is_err());
        assert!(gamma_factor(f64::NAN, &c).is_err());
    }

    #[test]
    fn non_positive_voltage_is_a_domain_error() {
        let c = constants();
        for mode in [accelerate_classical, accelerate_relativistic] {
            assert!(mode(0.0, &c).is_err());
            assert!(mode(-5e3, &c).is_err());
        }
    }

    #[test]
    fn table_has_25_rows_with_the_11_kv_gap() {
        let rows = table_1(&constants());
        assert_eq!(rows.len(), 25);
        assert!(rows.iter().all(|r| r.mass == 9.11e-31));
        assert!(!rows.iter().any(|r| (r.voltage - 11e3).abs() < 1.0));
        for pair in rows.windows(2) {
            assert!(pair[1].velocity > pair[0].velocity);
            assert!(pair[1].wavelength < pair[0].wavelength);
        }
    }

    #[test]
    fn row_internal_consistency() {
        let c = constants();
        for kv in [0.5, 5.0, 17.3, 30.0] {
            let v = kv * 1e3;
            let row = accelerate_classical(v, &c).unwrap();
            assert!(rel_err(row.energy, v * c.electron_charge_magnitude) < 1e-9);
            assert!(rel_err(row.momentum, row.mass * row.velocity) < 1e-9);
            assert!(rel_err(row.wavelength, c.planck_constant / row.momentum) < 1e-9);
            let rel = accelerate_relativistic(v, &c).unwrap();
            assert!(rel.velocity < row.velocity);
            assert!(rel_err(rel.wavelength, c.planck_constant / rel.momentum) < 1e-9);
        }
    }

    #[test]
    fn gamma_stays_near_unity_over_the_operating_span() {
        // the gun's experimental span runs to 25 kV; the classical speeds
        // there keep gamma under 1.06. The table's 30 kV extension satisfies
        // the same bound on the physically consistent (relativistic) speed.
        let c = constants();
        for &kv in TABLE_VOLTAGES_KV.iter() {
            let volt = f64::from(kv) * 1e3;
            if kv <= 25 {
                let v = accelerate_classical(volt, &c).unwrap().velocity;
                assert!(gamma_factor(v, &c).unwrap() < 1.06, "{kv} kV classical");
            }
            let vr = accelerate_relativistic(volt, &c).unwrap().velocity;
            assert!(gamma_factor(vr, &c).unwrap() < 1.06, "{kv} kV relativistic");
        }
    }

    #[test]
    fn csv_matches_printed_formatting() {
        let rows = table_1(&constants());
        let csv = table_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "voltage_kV,velocity_m_per_s,mass_kg,energy_J,momentum_N_s,wavelength_m"
        );
        let five = lines.next().unwrap();
        assert_eq!(five, "5,4.19E7,9.11E-31,8.01E-16,3.82E-23,1.73E-11");
        assert_eq!(csv.lines().count(), 26);
    }
}
