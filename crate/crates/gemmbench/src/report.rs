//! Tables rendered from stored points, plus CSV and markdown export.
//!
//! Every renderer is a pure function of its input points. Rows are ordered by
//! kernel name, order, work-group shape and replay counter, so the same
//! entry always renders to the same bytes.

use std::collections::{BTreeMap, BTreeSet};

use gemmbench_core::{ExperimentPoint, TileShape};

pub const SKIPPED_MARKER: &str = "skipped (divisibility)";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("experiment has no points")]
    EmptyExperiment,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn replay_cell(p: &ExperimentPoint) -> String {
    p.replay.map(|k| k.to_string()).unwrap_or_default()
}

fn sorted(points: &[ExperimentPoint]) -> Result<Vec<&ExperimentPoint>, ReportError> {
    if points.is_empty() {
        return Err(ReportError::EmptyExperiment);
    }
    let mut v: Vec<&ExperimentPoint> = points.iter().collect();
    v.sort_by(|a, b| {
        let key = |p: &ExperimentPoint| (p.config.kernel.name.clone(), p.config.n, p.config.tile, p.replay);
        key(a).cmp(&key(b))
    });
    Ok(v)
}

/// `5.016124e-02`: six mantissa decimals, signed two-digit exponent.
/// Non-finite values render as `inf`.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return "inf".into();
    }
    let s = format!("{x:.6e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Throughput per point: `kernel, order, rep0..repR-1, mean, std, lws, replay`.
/// Raw values carry 3 decimals, the mean 5 and the standard deviation 6.
pub fn render_order_table(points: &[ExperimentPoint]) -> Result<Table, ReportError> {
    let points = sorted(points)?;
    let reps = points.iter().map(|p| p.gflops_per_rep.len()).max().unwrap_or(0);
    let mut headers = vec!["kernel".to_string(), "order".to_string()];
    headers.extend((0..reps).map(|r| r.to_string()));
    headers.extend(["mean", "std", "lws", "replay"].map(String::from));

    let rows = points
        .iter()
        .map(|p| {
            let mut row = vec![p.config.kernel.name.clone(), p.config.n.to_string()];
            row.extend((0..reps).map(|r| p.gflops_per_rep.get(r).map(|g| format!("{g:.3}")).unwrap_or_default()));
            if p.skipped.is_some() {
                row.push(SKIPPED_MARKER.into());
                row.push(String::new());
            } else {
                row.push(p.mean.map(|m| format!("{m:.5}")).unwrap_or_default());
                row.push(p.std.map(|s| format!("{s:.6}")).unwrap_or_default());
            }
            row.push(p.config.tile.to_string());
            row.push(replay_cell(p));
            row
        })
        .collect();
    Ok(Table { headers, rows })
}

/// Energy per `(order, lws, replay)` row with one `<kernel> <channel> J`
/// column per kernel and channel. Each cell is the mean over repetitions,
/// 6 decimals; blank when nothing was measured.
pub fn render_energy_table(points: &[ExperimentPoint]) -> Result<Table, ReportError> {
    let points = sorted(points)?;
    let mut columns: BTreeSet<(String, String)> = BTreeSet::new();
    type RowKey = (usize, TileShape, Option<u32>);
    let mut rows: BTreeMap<RowKey, BTreeMap<(String, String), f64>> = BTreeMap::new();

    for p in &points {
        let row = rows.entry((p.config.n, p.config.tile, p.replay)).or_default();
        let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
        for e in p.energy.iter().flatten() {
            let s = sums.entry(e.channel.as_str()).or_insert((0.0, 0));
            s.0 += e.joules;
            s.1 += 1;
        }
        for (channel, (sum, count)) in sums {
            let key = (p.config.kernel.name.clone(), channel.to_string());
            columns.insert(key.clone());
            row.insert(key, sum / count as f64);
        }
    }

    let mut headers = vec!["order".to_string(), "lws".to_string(), "replay".to_string()];
    headers.extend(columns.iter().map(|(k, c)| format!("{k} {c} J")));
    let rows = rows
        .into_iter()
        .map(|((n, tile, replay), cells)| {
            let mut row = vec![n.to_string(), tile.to_string(), replay.map(|k| k.to_string()).unwrap_or_default()];
            row.extend(columns.iter().map(|c| cells.get(c).map(|j| format!("{j:.6}")).unwrap_or_default()));
            row
        })
        .collect();
    Ok(Table { headers, rows })
}

/// Per repetition, the maximum absolute difference and whether it matched:
/// `kernel, order, diff0, match0, .., lws, replay`.
pub fn render_validation_table(points: &[ExperimentPoint]) -> Result<Table, ReportError> {
    let points = sorted(points)?;
    let reps = points.iter().map(|p| p.validations.len()).max().unwrap_or(0);
    let mut headers = vec!["kernel".to_string(), "order".to_string()];
    for r in 0..reps {
        headers.push(format!("max abs diff {r}"));
        headers.push(format!("match {r}"));
    }
    headers.extend(["lws", "replay"].map(String::from));

    let rows = points
        .iter()
        .map(|p| {
            let mut row = vec![p.config.kernel.name.clone(), p.config.n.to_string()];
            for r in 0..reps {
                match p.validations.get(r) {
                    Some(v) => {
                        row.push(format_sci(v.max_abs_diff));
                        row.push(if v.matched { "1" } else { "0" }.into());
                    }
                    None if r == 0 && p.skipped.is_some() => {
                        row.push(SKIPPED_MARKER.into());
                        row.push(String::new());
                    }
                    None => row.extend([String::new(), String::new()]),
                }
            }
            row.push(p.config.tile.to_string());
            row.push(replay_cell(p));
            row
        })
        .collect();
    Ok(Table { headers, rows })
}

/// Chart-ready data: `label, mean, std` with `label = kernel/order/lws[/rK]`.
pub fn render_chart_data(points: &[ExperimentPoint]) -> Result<Table, ReportError> {
    let points = sorted(points)?;
    let headers = ["label", "mean", "std"].map(String::from).to_vec();
    let rows = points
        .iter()
        .map(|p| {
            let mut label = format!("{}/{}/{}", p.config.kernel.name, p.config.n, p.config.tile);
            if let Some(k) = p.replay {
                label.push_str(&format!("/r{k}"));
            }
            vec![
                label,
                p.mean.map(|m| format!("{m:.5}")).unwrap_or_default(),
                p.std.map(|s| format!("{s:.6}")).unwrap_or_default(),
            ]
        })
        .collect();
    Ok(Table { headers, rows })
}

/// Comma-separated, header row first, LF line endings.
pub fn export_csv(table: &Table) -> Result<String, ReportError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&table.headers)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("cells are UTF-8"))
}

pub fn export_markdown(table: &Table) -> String {
    let line = |cells: &[String]| {
        let cells: Vec<String> = cells.iter().map(|c| c.replace('|', "\\|")).collect();
        format!("| {} |\n", cells.join(" | "))
    };
    let mut out = line(&table.headers);
    out.push_str(&format!("|{}\n", "---|".repeat(table.headers.len())));
    for row in &table.rows {
        out.push_str(&line(row));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_point, RunOptions};
    use crate::registry::Registry;
    use gemmbench_core::{LaunchConfig, MockSensor};

    fn run(name: &str, n: usize, sensor: Option<&mut MockSensor>) -> ExperimentPoint {
        let registry = Registry::bundled();
        let cfg = LaunchConfig::new(registry.get(name).unwrap().clone(), n);
        run_point(&cfg, &registry, sensor.map(|s| s as _), &RunOptions::default()).unwrap()
    }

    #[test]
    fn scientific_format() {
        assert_eq!(format_sci(5.016124e-2), "5.016124e-02");
        assert_eq!(format_sci(8.029115e31), "8.029115e+31");
        assert_eq!(format_sci(0.0), "0.000000e+00");
        assert_eq!(format_sci(f64::NAN), "inf");
        assert_eq!(format_sci(1.5e-300), "1.500000e-300");
    }

    #[test]
    fn empty_entries_are_errors() {
        assert!(matches!(render_order_table(&[]), Err(ReportError::EmptyExperiment)));
        assert!(matches!(render_energy_table(&[]), Err(ReportError::EmptyExperiment)));
        assert!(matches!(render_validation_table(&[]), Err(ReportError::EmptyExperiment)));
    }

    #[test]
    fn single_point_and_skipped_rows() {
        let p = run("SGEMM_NT_1x1", 16, None);
        let t = render_order_table(std::slice::from_ref(&p)).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.headers, ["kernel", "order", "0", "1", "2", "3", "mean", "std", "lws", "replay"]);
        let skipped = ExperimentPoint::skipped(LaunchConfig { n: 100, ..p.config.clone() }, "x".into());
        let t = render_order_table(&[skipped, p]).unwrap();
        assert_eq!(t.rows[0][1], "16");
        assert_eq!(t.rows[1][6], SKIPPED_MARKER);
        let v = render_validation_table(&t_points()).unwrap();
        assert!(v.rows.iter().all(|r| r[3] == "1"));
    }

    fn t_points() -> Vec<ExperimentPoint> {
        vec![run("SGEMM_NT_4x1", 32, None)]
    }

    #[test]
    fn constant_power_energy_cells() {
        let mut sensor = MockSensor::constant("gpu", 2.0);
        let p = run("SGEMM_NT_1x1", 32, Some(&mut sensor));
        let t = render_energy_table(std::slice::from_ref(&p)).unwrap();
        assert_eq!(t.headers, ["order", "lws", "replay", "SGEMM_NT_1x1 gpu J"]);
        let mean_t: f64 = p.elapsed_seconds.iter().sum::<f64>() / 4.0;
        assert_eq!(t.rows[0][3], format!("{:.6}", 2.0 * mean_t));
        let bare = render_energy_table(&[run("SGEMM_NT_1x1", 32, None)]).unwrap();
        assert_eq!(bare.headers.len(), 3);
        assert!(bare.rows.iter().all(|r| r[3..].iter().all(String::is_empty)));
    }

    #[test]
    fn csv_round_trip_and_markdown() {
        let t = Table {
            headers: vec!["a".into(), "b,c".into()],
            rows: vec![vec!["1".into(), "x|y".into()], vec!["2".into(), "\"q\"".into()]],
        };
        let text = export_csv(&t).unwrap();
        assert!(!text.contains('\r'));
        let mut r = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["a", "b,c"]);
        let rows: Vec<Vec<String>> = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
        assert_eq!(rows, t.rows);
        let md = export_markdown(&t);
        assert_eq!(md.lines().count(), 4);
        assert!(md.contains("x\\|y"));
        let empty = Table { headers: t.headers.clone(), rows: vec![] };
        assert_eq!(export_csv(&empty).unwrap(), "a,\"b,c\"\n");
    }

    #[test]
    fn rendering_is_deterministic() {
        let pts = vec![run("SGEMM_NT_4x1", 32, None), run("SGEMM_NT_1x1", 32, None)];
        let mut rev = pts.clone();
        rev.reverse();
        let a = export_csv(&render_order_table(&pts).unwrap()).unwrap();
        let b = export_csv(&render_order_table(&rev).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
