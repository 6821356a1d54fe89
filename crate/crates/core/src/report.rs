//! CSV tables, a human-readable summary and a key-value metadata file.
//!
//! Floats are written with 17 significant digits so that every value
//! round-trips.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pipeline::ReportBundle;

pub const TRACE_FILE: &str = "trace.csv";
pub const CONJUGATE_FILE: &str = "conjugate_points.csv";
pub const BIFURCATION_FILE: &str = "bifurcation.csv";
pub const REPORT_FILE: &str = "report.txt";
pub const META_FILE: &str = "run_meta.txt";

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn joined(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(fmt_f64).collect::<Vec<_>>().join(";")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row).map_err(wrap)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn trace_table(bundle: &ReportBundle) -> (Vec<String>, Vec<Vec<String>>) {
    let k = bundle.spec.sweep.k;
    let mut header = vec!["r".to_string()];
    header.extend((1..=k).map(|i| format!("mu_{i}")));
    header.push("morse_index".into());
    let mut rows = Vec::new();
    if let Some(t) = &bundle.trace {
        for i in 0..t.len() {
            let mut row = vec![fmt_f64(t.r_values[i])];
            for j in 0..k {
                row.push(t.mu_matrix[i].get(j).map_or(String::new(), |m| fmt_f64(*m)));
            }
            row.push(t.index_trace[i].to_string());
            rows.push(row);
        }
    }
    (header, rows)
}

fn conjugate_table(bundle: &ReportBundle) -> (Vec<String>, Vec<Vec<String>>) {
    let header = [
        "r_star",
        "multiplicity",
        "signature",
        "residuals",
        "gamma_eigenvalues",
        "boundary_rel_err",
        "fd_check_error",
    ]
    .map(String::from)
    .to_vec();
    let rows = bundle
        .crossings
        .iter()
        .map(|c| {
            let (sig, ev, rel, fd) = match &c.gamma {
                Some(g) => (
                    format!("{};{};{}", g.signature.positive, g.signature.negative, g.signature.zero),
                    joined(g.eigenvalues.iter().copied()),
                    fmt_f64(g.relative_discrepancy),
                    fmt_f64(g.fd_check_error),
                ),
                None => Default::default(),
            };
            vec![
                fmt_f64(c.r_star),
                c.multiplicity.to_string(),
                sig,
                fmt_f64(c.kernel_residual),
                ev,
                rel,
                fd,
            ]
        })
        .collect();
    (header, rows)
}

fn bifurcation_table(bundle: &ReportBundle) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["r_star_detected", "matched_conjugate_r", "distance", "side", "norms"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    if let Some(scan) = &bundle.bifurcation {
        for p in &scan.points {
            let w = &p.witness;
            let norms = w
                .deltas
                .iter()
                .zip(&w.norms_h1)
                .map(|(d, n)| format!("{}:{}", fmt_f64(*d), fmt_f64(*n)))
                .collect::<Vec<_>>()
                .join(";");
            rows.push(vec![
                fmt_f64(p.r_star_detected),
                fmt_f64(p.matched_conjugate_r),
                fmt_f64(p.distance),
                w.side.symbol().to_string(),
                norms,
            ]);
        }
    }
    (header, rows)
}

/// Human summary with one verdict line per statement.
pub fn render_report(bundle: &ReportBundle) -> String {
    let m = &bundle.metadata;
    let mut s = String::new();
    let _ = writeln!(s, "Conjugate points and bifurcation under domain shrinking");
    let _ = writeln!(s, "domain:    {}", m.domain);
    let _ = writeln!(s, "potential: f = {}", m.potential);
    let _ = writeln!(
        s,
        "grid:      n = {}, h = {}, nu_max = {}, dof = {}",
        m.n,
        fmt_f64(m.spacing),
        m.nu_max,
        m.dof
    );
    let _ = writeln!(
        s,
        "sweep:     r in [{}, {}], {} points, tol_zero = {}",
        m.r_min,
        m.r_max,
        m.r_points,
        fmt_f64(m.tol_zero)
    );
    if let Some(f) = &bundle.failure {
        let _ = writeln!(s, "\nRUN STOPPED in stage {} (exit code {}):", f.stage.name(), f.exit_code);
        let _ = writeln!(s, "  {}", f.message);
    }
    if let Some(sm) = &bundle.smale {
        let _ = writeln!(s, "\nMorse index on the full domain: M = {}", sm.morse_index);
        let _ = writeln!(s, "conjugate points: {}", bundle.crossings.len());
        for (i, c) in bundle.crossings.iter().enumerate() {
            let sig = c.signature().map_or("-".to_string(), |g| g.to_string());
            let gamma = c
                .gamma
                .as_ref()
                .map_or(String::new(), |g| format!(", Gamma eigenvalues {:?}", g.eigenvalues));
            let _ = writeln!(
                s,
                "  {:>2}. r* = {:.9}  m = {}  signature {}{}",
                i + 1,
                c.r_star,
                c.multiplicity,
                sig,
                gamma
            );
        }
    }
    if let Some(scan) = &bundle.bifurcation {
        let _ = writeln!(s, "\nbifurcation points: {}", scan.points.len());
        for p in &scan.points {
            let _ = writeln!(
                s,
                "  r* detected {:.6} (branch side {}), conjugate point {:.6}, distance {:.2e}",
                p.r_star_detected,
                p.witness.side.symbol(),
                p.matched_conjugate_r,
                p.distance
            );
        }
        for (i, why) in &scan.missed {
            let _ = writeln!(s, "  conjugate point {} without branch: {}", i + 1, why);
        }
    }
    let _ = writeln!(s, "\nverdicts:");
    for v in bundle.verdicts.all() {
        let _ = writeln!(s, "  [{}] {}: {}", v.status.label(), v.name, v.statement);
        let _ = writeln!(s, "         {}", v.detail);
    }
    s
}

/// Key-value metadata, one `key = value` per line.
pub fn render_metadata(bundle: &ReportBundle) -> String {
    let m = &bundle.metadata;
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("version", env!("CARGO_PKG_VERSION").to_string());
    kv("domain", m.domain.clone());
    kv("potential", m.potential.clone());
    kv("dimension", m.dimension.to_string());
    kv("n", m.n.to_string());
    kv("nu_max", m.nu_max.to_string());
    kv("spacing", fmt_f64(m.spacing));
    kv("dof", m.dof.to_string());
    kv("r_min", fmt_f64(m.r_min));
    kv("r_max", fmt_f64(m.r_max));
    kv("r_points", m.r_points.to_string());
    kv("k", m.k.to_string());
    kv("tol_zero", fmt_f64(m.tol_zero));
    kv("tol_kernel", fmt_f64(m.tol_kernel));
    kv("refine_tol", fmt_f64(m.refine_tol));
    kv("fd_delta", fmt_f64(m.fd_delta));
    kv("boundary_points", m.boundary_points.to_string());
    kv("bifurcation_enabled", m.bifurcation_enabled.to_string());
    kv("tol_newton", fmt_f64(m.tol_newton));
    kv("match_tol", fmt_f64(m.match_tol));
    kv("epsilon", fmt_f64(m.epsilon));
    kv("threads", m.threads.to_string());
    kv("partial", bundle.is_partial().to_string());
    kv("exit_code", bundle.exit_code().to_string());
    if let Some(f) = &bundle.failure {
        kv("failed_stage", f.stage.name().to_string());
    }
    for (stage, secs) in &m.timings {
        kv(&format!("time_{}", stage.name()), format!("{secs:.6}"));
    }
    for v in bundle.verdicts.all() {
        kv(
            &format!("verdict_{}", v.name.to_lowercase().replace(' ', "_")),
            v.status.label().to_string(),
        );
    }
    s
}

/// Write the five output files into `dir`, creating it if needed.
pub fn emit_reports(bundle: &ReportBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for (name, (header, rows)) in [
        (TRACE_FILE, trace_table(bundle)),
        (CONJUGATE_FILE, conjugate_table(bundle)),
        (BIFURCATION_FILE, bifurcation_table(bundle)),
    ] {
        let path = dir.join(name);
        write_rows(&path, &header, &rows)?;
        written.push(path);
    }
    for (name, text) in [
        (REPORT_FILE, render_report(bundle)),
        (META_FILE, render_metadata(bundle)),
    ] {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-31.41592653589793), "-3.1415926535897931e1");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI * 1e-7, -2.5e300] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
