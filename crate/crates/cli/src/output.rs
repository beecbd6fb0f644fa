//! File outputs: trajectory CSVs with full-precision decimal rendering,
//! JSON sidecars and reports, all written atomically (temp file + rename).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use stokl_core::TrajectoryRecord;

use crate::CliError;

/// 17 significant digits: the shortest fixed width that round-trips every
/// binary64 value.
pub fn render_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write bytes atomically: a temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path
        .parent()
        .ok_or_else(|| CliError::io(format!("no parent directory for {}", path.display())))?;
    fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)
            .map_err(|e| CliError::io(format!("cannot create {}: {e}", tmp.display())))?;
        f.write_all(bytes)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", tmp.display())))?;
        f.sync_all()
            .map_err(|e| CliError::io(format!("cannot sync {}: {e}", tmp.display())))?;
    }
    fs::rename(&tmp, path)
        .map_err(|e| CliError::io(format!("cannot rename onto {}: {e}", path.display())))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::io(format!("cannot serialize {}: {e}", path.display())))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Render one trajectory as CSV with the fixed column layout
/// `k, x_0..x_{N-1}, F, grad_norm, step_norm, dist_crit, w_k, p_k, L_k`.
pub fn trajectory_csv(rec: &TrajectoryRecord) -> String {
    let dim = rec.states.first().map_or(0, |s| s.len());
    let mut out = String::new();
    out.push('k');
    for i in 0..dim {
        out.push_str(&format!(",x_{i}"));
    }
    out.push_str(",F,grad_norm,step_norm,dist_crit,w_k,p_k,L_k\n");
    for k in 0..rec.len() {
        out.push_str(&k.to_string());
        for v in &rec.states[k] {
            out.push(',');
            out.push_str(&render_f64(*v));
        }
        for v in [
            rec.f_values[k],
            rec.grad_norms[k],
            rec.step_norms[k],
            rec.dist_critical[k],
            rec.noise_bound[k],
            rec.growth_product[k],
            rec.lyapunov[k],
        ] {
            out.push(',');
            out.push_str(&render_f64(v));
        }
        out.push('\n');
    }
    out
}

/// Parse a CSV produced by [`trajectory_csv`] back into the record fields
/// needed by the report command.
pub fn parse_trajectory_csv(
    text: &str,
    seed: u64,
    scheme_id: &str,
    problem_id: &str,
    horizon: usize,
    diverged: bool,
    box_exit: Option<usize>,
) -> Result<TrajectoryRecord, CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::io("empty trajectory CSV".to_string()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let dim = cols
        .iter()
        .filter(|c| c.starts_with("x_"))
        .count();
    if dim == 0 {
        return Err(CliError::io("trajectory CSV has no state columns".to_string()));
    }
    let mut rec = TrajectoryRecord {
        seed,
        scheme_id: scheme_id.to_string(),
        problem_id: problem_id.to_string(),
        horizon,
        states: vec![],
        f_values: vec![],
        grad_norms: vec![],
        step_norms: vec![],
        dist_critical: vec![],
        noise_bound: vec![],
        growth_product: vec![],
        lyapunov: vec![],
        diverged,
        box_exit,
    };
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 8 {
            return Err(CliError::io(format!(
                "row {lineno}: expected {} fields, got {}",
                dim + 8,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64, CliError> {
            s.parse::<f64>()
                .map_err(|e| CliError::io(format!("row {lineno}: bad float `{s}`: {e}")))
        };
        let state: Result<Vec<f64>, _> = fields[1..=dim].iter().map(|s| parse(s)).collect();
        rec.states.push(state?);
        rec.f_values.push(parse(fields[dim + 1])?);
        rec.grad_norms.push(parse(fields[dim + 2])?);
        rec.step_norms.push(parse(fields[dim + 3])?);
        rec.dist_critical.push(parse(fields[dim + 4])?);
        rec.noise_bound.push(parse(fields[dim + 5])?);
        rec.growth_product.push(parse(fields[dim + 6])?);
        rec.lyapunov.push(parse(fields[dim + 7])?);
    }
    if rec.states.is_empty() {
        return Err(CliError::io("trajectory CSV has no rows".to_string()));
    }
    Ok(rec)
}

pub fn run_csv_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("run_{seed}.csv"))
}

pub fn run_meta_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("run_{seed}.meta.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_rendering_round_trips() {
        for v in [
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            1e-300,
            -2.5e17,
            f64::MIN_POSITIVE,
        ] {
            let s = render_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "render {s}");
        }
    }

    #[test]
    fn csv_round_trips_through_parser() {
        let rec = TrajectoryRecord {
            seed: 7,
            scheme_id: "sgd".into(),
            problem_id: "quadratic".into(),
            horizon: 2,
            states: vec![vec![1.0, 2.0], vec![0.5, 1.0], vec![0.25, 0.5]],
            f_values: vec![2.5, 0.625, 0.15625],
            grad_norms: vec![2.23, 1.11, 0.55],
            step_norms: vec![1.11, 0.55, 0.0],
            dist_critical: vec![2.23, 1.11, 0.55],
            noise_bound: vec![0.0, 0.0, 0.0],
            growth_product: vec![1.0, 1.0, 1.0],
            lyapunov: vec![2.5, 0.625, 0.15625],
            diverged: false,
            box_exit: None,
        };
        let csv = trajectory_csv(&rec);
        let parsed = parse_trajectory_csv(&csv, 7, "sgd", "quadratic", 2, false, None).unwrap();
        assert_eq!(parsed.states, rec.states);
        assert_eq!(parsed.f_values, rec.f_values);
        assert_eq!(parsed.lyapunov, rec.lyapunov);
    }
}
