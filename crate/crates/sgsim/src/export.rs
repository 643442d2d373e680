//! Output encoders: CSV text in shortest round-trip decimals and binary
//! P5 PGM images. Pure buffer builders; the CLI layer owns the files.

use crate::dynamics::TraceRow;
use crate::experiment::{ScreenImage, SplitReport};
use crate::field::FieldMap;
use crate::physics::{constants, Spin};
use std::fmt::Write as _;

/// One line of a scenario or sweep report.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub id: String,
    /// Nominal dBz/dz of the field model [T/m].
    pub gradient: f64,
    /// Accelerating voltage [V].
    pub voltage: f64,
    pub report: SplitReport,
}

pub fn csv_reports(rows: &[ReportRow]) -> String {
    let mut out =
        String::from("scenario,gradient_T_per_m,voltage_V,splitting_m,lorentz_deflection_m,resolved\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.id,
            row.gradient,
            row.voltage,
            row.report.splitting,
            row.report.lorentz_deflection,
            row.report.resolved
        );
    }
    out
}

pub fn csv_hits(image: &ScreenImage) -> String {
    let mut out = String::from("y_m,z_m,spin\n");
    for hit in &image.hits {
        let spin = match hit.spin {
            Spin::Up => 1,
            Spin::Down => -1,
        };
        let _ = writeln!(out, "{},{},{}", hit.y, hit.z, spin);
    }
    out
}

/// Field map rows: position, H, B = mu0 H, signed dB/dz, and the
/// dimensionless inhomogeneity.
pub fn csv_fieldmap(map: &FieldMap) -> String {
    let mu0 = constants().vacuum_permeability;
    let mut out = String::from("y_m,z_m,H_A_per_m,B_T,dBdz_T_per_m,epsilon\n");
    for p in &map.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.y,
            p.z,
            p.h,
            mu0 * p.h,
            mu0 * p.dhdz,
            p.epsilon
        );
    }
    out
}

pub fn csv_trace(rows: &[TraceRow]) -> String {
    let mut out = String::from("t_s,x_m,y_m,z_m,vx_m_per_s,vy_m_per_s,vz_m_per_s,spin_sign\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.time,
            r.position.x,
            r.position.y,
            r.position.z,
            r.velocity.x,
            r.velocity.y,
            r.velocity.z,
            r.spin_sign
        );
    }
    out
}

/// Binary P5 encoder. `pixels` is row-major, row 0 at the top.
pub fn pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height, "pixel buffer does not match dimensions");
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Renders hit counts with brightness proportional to count; the top image
/// row is the largest z (screen pictures read like an oscilloscope face).
pub fn pgm_screen(image: &ScreenImage) -> Vec<u8> {
    let max = image.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let mut pixels = Vec::with_capacity(image.ny * image.nz);
    for iz in (0..image.nz).rev() {
        for iy in 0..image.ny {
            pixels.push((255.0 * image.count_at(iy, iz) as f64 / max).round() as u8);
        }
    }
    pgm(image.ny, image.nz, pixels.as_slice())
}

/// Renders |dH/dz| linearly from 0 (black) to the grid maximum (white);
/// top image row is the largest z.
pub fn pgm_fieldmap(map: &FieldMap) -> Vec<u8> {
    let (ny, nz) = (map.ys.len(), map.zs.len());
    let max = map
        .points
        .iter()
        .map(|p| p.dhdz.abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut pixels = Vec::with_capacity(ny * nz);
    for iz in (0..nz).rev() {
        for iy in 0..ny {
            pixels.push((255.0 * map.at(iy, iz).dhdz.abs() / max).round() as u8);
        }
    }
    pgm(ny, nz, pixels.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::Hit;
    use crate::field::{inhomogeneity_map, TwoWireConfig};
    use crate::physics::Vec3;

    #[test]
    fn report_csv_has_header_and_round_trip_numbers() {
        let rows = vec![ReportRow {
            id: "scenario".into(),
            gradient: 2765048.5436893204,
            voltage: 1e4,
            report: SplitReport {
                centroid_up_z: 1e-5,
                centroid_down_z: -1e-5,
                splitting: 2.0000000000000002e-5,
                lorentz_deflection: 0.0,
                resolved: true,
            },
        }];
        let csv = csv_reports(&rows);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "scenario,gradient_T_per_m,voltage_V,splitting_m,lorentz_deflection_m,resolved"
        );
        let data = lines.next().unwrap();
        let fields: Vec<&str> = data.split(',').collect();
        assert_eq!(fields[0], "scenario");
        // shortest round-trip: re-parsing recovers the exact f64
        assert_eq!(fields[1].parse::<f64>().unwrap(), 2765048.5436893204);
        assert_eq!(fields[3].parse::<f64>().unwrap(), 2.0000000000000002e-5);
        assert_eq!(fields[5], "true");
    }

    #[test]
    fn hit_csv_encodes_spins_as_signs() {
        let image = ScreenImage::from_hits(
            vec![
                Hit { y: 1e-6, z: 2e-6, spin: Spin::Up },
                Hit { y: -1e-6, z: -2e-6, spin: Spin::Down },
            ],
            4,
            0,
        )
        .unwrap();
        let csv = csv_hits(&image);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "y_m,z_m,spin");
        assert!(lines[1].ends_with(",1"));
        assert!(lines[2].ends_with(",-1"));
    }

    #[test]
    fn fieldmap_csv_matches_the_grid() {
        let cfg = TwoWireConfig::new(1000.0, 1e-3).unwrap();
        let map = inhomogeneity_map(&cfg, (-1e-4, 1e-4), (-1e-4, 1e-4), (3, 2)).unwrap();
        let csv = csv_fieldmap(&map);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 6);
        assert_eq!(lines[0], "y_m,z_m,H_A_per_m,B_T,dBdz_T_per_m,epsilon");
        // B = mu0 H on every row
        let mu0 = constants().vacuum_permeability;
        for line in &lines[1..] {
            let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            assert!((f[3] - mu0 * f[2]).abs() <= 1e-18 * f[2].abs().max(1.0));
            assert!(f[5] > 0.0);
        }
    }

    #[test]
    fn trace_csv_lists_all_samples() {
        let rows = vec![
            TraceRow {
                time: 0.0,
                position: Vec3::ZERO,
                velocity: Vec3::new(1e7, 0.0, 0.0),
                spin_sign: -1.0,
            },
            TraceRow {
                time: 1e-11,
                position: Vec3::new(1e-4, 0.0, 0.0),
                velocity: Vec3::new(1e7, 0.0, 0.0),
                spin_sign: -1.0,
            },
        ];
        let csv = csv_trace(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,0,0,0,"));
        assert!(lines[1].ends_with(",-1"));
    }

    #[test]
    fn pgm_encodes_the_p5_header_and_payload() {
        let bytes = pgm(3, 2, &[0, 10, 20, 30, 40, 255]);
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(bytes.len(), b"P5\n3 2\n255\n".len() + 6);
        assert_eq!(*bytes.last().unwrap(), 255);
    }

    #[test]
    fn screen_pgm_puts_large_z_on_top_at_full_brightness() {
        // two hits high (z = +1 mm), one hit low: the top row must carry
        // the 255 pixel, the bottom the 128 one
        let image = ScreenImage::from_hits(
            vec![
                Hit { y: 0.0, z: 1e-3, spin: Spin::Up },
                Hit { y: 0.0, z: 1e-3, spin: Spin::Up },
                Hit { y: 0.0, z: -1e-3, spin: Spin::Down },
            ],
            2,
            0,
        )
        .unwrap();
        let bytes = pgm_screen(&image);
        let header = b"P5\n2 2\n255\n".len();
        let pixels = &bytes[header..];
        assert_eq!(pixels.len(), 4);
        let top_max = pixels[..2].iter().copied().max().unwrap();
        let bottom_max = pixels[2..].iter().copied().max().unwrap();
        assert_eq!(top_max, 255);
        assert_eq!(bottom_max, 128);
    }

    #[test]
    fn fieldmap_pgm_is_linear_in_gradient_magnitude() {
        let cfg = TwoWireConfig::new(1000.0, 1e-3).unwrap();
        // z column: gradient magnitude decays away from the wires, so the
        // top row (larger z) must be darker
        let map = inhomogeneity_map(&cfg, (0.0, 0.0), (0.0, 5e-4), (1, 2)).unwrap();
        let bytes = pgm_fieldmap(&map);
        let header = b"P5\n1 2\n255\n".len();
        let pixels = &bytes[header..];
        assert_eq!(pixels.len(), 2);
        assert!(pixels[0] < pixels[1], "top {} bottom {}", pixels[0], pixels[1]);
        assert_eq!(pixels[1], 255);
        let expected =
            (255.0 * map.at(0, 1).dhdz.abs() / map.at(0, 0).dhdz.abs()).round() as u8;
        assert_eq!(pixels[0], expected);
    }
}
