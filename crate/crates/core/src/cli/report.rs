//! CSV/JSON emission and atomic file writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::ocrs::AcceptanceProfile;

/// Six significant digits; scientific notation outside `[1e-5, 1e6)`.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.5e}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(sig6).unwrap_or_else(|| "n/a".into())
}

/// Minimal CSV writer with a fixed header.
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = line.iter().map(|c| quote(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// `product_id,x,ratio,ci_lo,ci_hi`
pub fn selectability_csv(profile: &AcceptanceProfile) -> String {
    let mut csv = Csv::new(&["product_id", "x", "ratio", "ci_lo", "ci_hi"]);
    for e in &profile.entries {
        csv.row(vec![
            e.id.clone(),
            sig6(e.x),
            opt(e.ratio),
            opt(e.ratio_ci.map(|c| c.0)),
            opt(e.ratio_ci.map(|c| c.1)),
        ]);
    }
    csv.render()
}

/// Like [`selectability_csv`] with feasibility and capping columns.
pub fn profile_csv(profile: &AcceptanceProfile) -> String {
    let mut csv = Csv::new(&[
        "product_id",
        "x",
        "feas_prob",
        "ratio",
        "ci_lo",
        "ci_hi",
        "capped",
    ]);
    for e in &profile.entries {
        csv.row(vec![
            e.id.clone(),
            sig6(e.x),
            sig6(e.feas_prob),
            opt(e.ratio),
            opt(e.ratio_ci.map(|c| c.0).or(e.ratio)),
            opt(e.ratio_ci.map(|c| c.1).or(e.ratio)),
            e.capped.to_string(),
        ]);
    }
    csv.render()
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(1.0 / 3.0), "0.333333");
        assert_eq!(sig6(2.8), "2.80000");
        assert_eq!(sig6(0.48148148), "0.481481");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(1.5e-7), "1.50000e-7");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn empty_csv_is_header_only() {
        let p = AcceptanceProfile {
            alpha: None,
            entries: vec![],
        };
        assert_eq!(selectability_csv(&p), "product_id,x,ratio,ci_lo,ci_hi\n");
    }
}
