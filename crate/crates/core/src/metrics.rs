//! Errors between trajectories and energy traces.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::allen_cahn::{ac_energy, AllenCahnSpec};
use crate::problems::snapshot::FieldSnapshot;

/// Snapshots count as simultaneous when their times differ by at most this.
pub const TIME_MATCH_TOLERANCE: f64 = 1e-9;
/// Relative rise between consecutive snapshots that flags an energy increase.
pub const ENERGY_INCREASE_TOLERANCE: f64 = 1e-3;

fn check_comparable(a: &FieldSnapshot, b: &FieldSnapshot) -> Result<()> {
    if a.shape != b.shape || a.components != b.components {
        return Err(Error::Comparison(format!(
            "grid {:?}x{} vs {:?}x{}",
            a.shape, a.components, b.shape, b.components
        )));
    }
    if (a.t - b.t).abs() > TIME_MATCH_TOLERANCE {
        return Err(Error::Comparison(format!("snapshot times {} and {} differ", a.t, b.t)));
    }
    Ok(())
}

/// `√(|Ω|⁻¹ ∫ |a − b|²)`, summing over components.
pub fn l2_snapshot_error(a: &FieldSnapshot, b: &FieldSnapshot) -> Result<f64> {
    check_comparable(a, b)?;
    let s: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((s / a.n_points() as f64).sqrt())
}

/// `√(|Ω|⁻¹ ∫ |u|²)`.
pub fn l2_norm(a: &FieldSnapshot) -> f64 {
    (a.values.iter().map(|v| v * v).sum::<f64>() / a.n_points() as f64).sqrt()
}

/// `‖a − reference‖ / ‖reference‖`. A zero reference gives the absolute error.
pub fn relative_l2_error(a: &FieldSnapshot, reference: &FieldSnapshot) -> Result<f64> {
    let e = l2_snapshot_error(a, reference)?;
    let n = l2_norm(reference);
    Ok(if n > 0.0 { e / n } else { e })
}

fn check_trajectories(a: &[FieldSnapshot], b: &[FieldSnapshot]) -> Result<()> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::Comparison(format!(
            "trajectories hold {} and {} snapshots",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// `(1/T) ∫₀ᵀ e(t) dt` by the trapezoidal rule over the snapshot times.
pub fn time_averaged_error(a: &[FieldSnapshot], b: &[FieldSnapshot], t_final: f64) -> Result<f64> {
    check_trajectories(a, b)?;
    if !(t_final > 0.0) {
        return Err(Error::validation("T", format!("must be > 0, got {t_final}")));
    }
    let errs = a
        .iter()
        .zip(b)
        .map(|(x, y)| Ok((x.t, l2_snapshot_error(x, y)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(trapezoid(&errs) / t_final)
}

fn trapezoid(series: &[(f64, f64)]) -> f64 {
    series
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub t: f64,
    pub abs_error: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub problem: String,
    /// Name of the swept parameter, `epsilon` or `nu`.
    pub parameter: String,
    pub value: f64,
    pub method: String,
    pub rows: Vec<ErrorRow>,
    pub time_averaged: f64,
    pub max_error: f64,
}

impl ErrorReport {
    /// Compare `candidate` against `reference` snapshot by snapshot.
    pub fn new(
        problem: &str,
        parameter: &str,
        value: f64,
        method: &str,
        candidate: &[FieldSnapshot],
        reference: &[FieldSnapshot],
    ) -> Result<Self> {
        check_trajectories(candidate, reference)?;
        let rows = candidate
            .iter()
            .zip(reference)
            .map(|(c, r)| {
                Ok(ErrorRow {
                    t: c.t,
                    abs_error: l2_snapshot_error(c, r)?,
                    rel_error: relative_l2_error(c, r)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let t_final = rows.last().map(|r| r.t).unwrap_or(0.0);
        let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.abs_error)).collect();
        let time_averaged = if t_final > 0.0 {
            trapezoid(&series) / t_final
        } else {
            rows[0].abs_error
        };
        let max_error = rows.iter().fold(0.0f64, |m, r| m.max(r.abs_error));
        Ok(ErrorReport {
            problem: problem.into(),
            parameter: parameter.into(),
            value,
            method: method.into(),
            rows,
            time_averaged,
            max_error,
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(out, &self.rows)
    }
}

/// Serialize `rows` as CSV with a header line.
pub fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<csv>", io),
        other => Error::Contract(format!("csv serialization: {other:?}")),
    }
}

/// Time-averaged errors laid out as methods × parameter values.
pub fn format_table(reports: &[ErrorReport]) -> String {
    let mut values: Vec<f64> = Vec::new();
    let mut methods: Vec<&str> = Vec::new();
    for r in reports {
        if !values.contains(&r.value) {
            values.push(r.value);
        }
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let param = reports.first().map(|r| r.parameter.as_str()).unwrap_or("value");
    let mut s = String::new();
    let _ = write!(s, "{:<10}", "method");
    for v in &values {
        let _ = write!(s, " | {:>12}", format!("{param}={v}"));
    }
    s.push('\n');
    let _ = write!(s, "{:-<10}", "");
    for _ in &values {
        s.push_str("-+-------------");
    }
    s.push('\n');
    for m in &methods {
        let _ = write!(s, "{m:<10}");
        for v in &values {
            let cell = reports
                .iter()
                .find(|r| r.method == *m && r.value == *v)
                .map(|r| format!("{:.4e}", r.time_averaged))
                .unwrap_or_else(|| "-".into());
            let _ = write!(s, " | {cell:>12}");
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRow {
    pub t: f64,
    pub e_total: f64,
    pub e1: f64,
    /// Set when `e_total` rose by more than the relative tolerance since the previous row.
    pub increased: bool,
}

/// Allen-Cahn energies for every snapshot of a trajectory.
pub fn energy_trace(traj: &[FieldSnapshot], spec: &AllenCahnSpec) -> Result<Vec<EnergyRow>> {
    let mut rows: Vec<EnergyRow> = Vec::with_capacity(traj.len());
    for snap in traj {
        let (e_total, e1) = ac_energy(spec, snap)?;
        let increased = rows
            .last()
            .is_some_and(|p| e_total > p.e_total + ENERGY_INCREASE_TOLERANCE * p.e_total.abs());
        rows.push(EnergyRow {
            t: snap.t,
            e_total,
            e1,
            increased,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(t: f64, n: usize) -> FieldSnapshot {
        let pi = std::f64::consts::PI;
        FieldSnapshot::from_fn(vec![n], 1, t, |x| vec![(pi * x[0]).sin()]).unwrap()
    }

    fn constant(t: f64, c: f64) -> FieldSnapshot {
        FieldSnapshot::from_fn(vec![32], 1, t, |_| vec![c]).unwrap()
    }

    #[test]
    fn sine_against_zero() {
        let a = sine(0.0, 64);
        let z = FieldSnapshot::from_fn(vec![64], 1, 0.0, |_| vec![0.0]).unwrap();
        assert!((l2_snapshot_error(&a, &z).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn offset_and_identity() {
        let a = sine(0.2, 32);
        let mut b = a.clone();
        b.values.iter_mut().for_each(|v| *v += 0.3);
        assert!((l2_snapshot_error(&a, &b).unwrap() - 0.3).abs() < 1e-14);
        assert_eq!(l2_snapshot_error(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn mismatches_rejected() {
        assert!(matches!(
            l2_snapshot_error(&sine(0.0, 32), &sine(0.0, 64)),
            Err(Error::Comparison(_))
        ));
        assert!(l2_snapshot_error(&sine(0.0, 32), &sine(1e-8, 32)).is_err());
        assert!(l2_snapshot_error(&sine(0.0, 32), &sine(5e-10, 32)).is_ok());
        assert!(time_averaged_error(&[sine(0.0, 32)], &[], 1.0).is_err());
    }

    #[test]
    fn constant_error_averages_to_itself() {
        let a: Vec<_> = (0..=10).map(|i| constant(i as f64 * 0.1, 1.0)).collect();
        let b: Vec<_> = (0..=10).map(|i| constant(i as f64 * 0.1, 1.25)).collect();
        let e = time_averaged_error(&a, &b, 1.0).unwrap();
        assert!((e - 0.25).abs() < 1e-14);
        assert_eq!(time_averaged_error(&a, &a, 1.0).unwrap(), 0.0);
        let r = ErrorReport::new("ac1d", "epsilon", 0.02, "evokan", &a, &b).unwrap();
        assert!((r.time_averaged - 0.25).abs() < 1e-14);
        assert_eq!(r.rows.len(), 11);
        assert!((r.rows[0].rel_error - 0.2).abs() < 1e-14);
    }

    #[test]
    fn constant_trace_is_flat_and_reversal_is_flagged() {
        let spec = AllenCahnSpec::one_d(0.1);
        let flat: Vec<_> = (0..4).map(|i| constant(i as f64, 1.0)).collect();
        let rows = energy_trace(&flat, &spec).unwrap();
        assert!(rows.iter().all(|r| r.e_total == 0.0 && !r.increased));
        let rising = vec![constant(0.0, 1.0), constant(1.0, 0.5)];
        let rows = energy_trace(&rising, &spec).unwrap();
        assert!(rows[1].increased);
    }

    #[test]
    fn table_layout() {
        let a = vec![constant(0.0, 1.0), constant(1.0, 1.0)];
        let b = vec![constant(0.0, 1.5), constant(1.0, 1.5)];
        let reports = vec![
            ErrorReport::new("ac1d", "epsilon", 0.02, "evokan", &a, &b).unwrap(),
            ErrorReport::new("ac1d", "epsilon", 0.01, "evokan", &a, &a).unwrap(),
            ErrorReport::new("ac1d", "epsilon", 0.02, "ednn", &a, &b).unwrap(),
        ];
        let t = format_table(&reports);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].contains("epsilon=0.02") && lines[0].contains("epsilon=0.01"));
        assert!(lines[2].starts_with("evokan") && lines[2].contains("5.0000e-1"));
        assert!(lines[3].starts_with("ednn") && lines[3].ends_with('-'));
    }

    #[test]
    fn csv_has_header() {
        let a = vec![constant(0.0, 1.0)];
        let r = ErrorReport::new("ac1d", "epsilon", 0.02, "evokan", &a, &a).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,abs_error,rel_error\n0.0,0.0,0.0\n");
    }
}
