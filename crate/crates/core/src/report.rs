//! The audit record shared by every check in the crate.

use serde::{Deserialize, Serialize};

/// Named inequality audit: `lhs ≤ rhs` (or whatever relation the check
/// describes in `notes`), the signed margin and the tolerance it was judged
/// against.
///
/// Non-finite numbers serialize as JSON `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    #[serde(with = "finite_or_null")]
    pub lhs: f64,
    #[serde(with = "finite_or_null")]
    pub rhs: f64,
    #[serde(with = "finite_or_null")]
    pub margin: f64,
    #[serde(with = "finite_or_null")]
    pub tolerance: f64,
    pub pass: bool,
    pub grid: Option<String>,
    pub dt: Option<f64>,
    pub eps: Option<f64>,
    pub notes: String,
}

impl CheckReport {
    /// A report for `lhs ≤ rhs + tolerance`; the margin is `rhs − lhs`.
    pub fn upper_bound(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = rhs - lhs;
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin,
            tolerance,
            pass: margin.is_finite() && margin >= -tolerance,
            grid: None,
            dt: None,
            eps: None,
            notes: String::new(),
        }
    }

    /// A report whose pass flag is decided by the caller.
    pub fn verdict(name: impl Into<String>, lhs: f64, rhs: f64, margin: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin,
            tolerance: 0.0,
            pass,
            grid: None,
            dt: None,
            eps: None,
            notes: String::new(),
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_grid(mut self, grid: impl Into<String>) -> Self {
        self.grid = Some(grid.into());
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    pub fn push_note(&mut self, note: impl AsRef<str>) {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(note.as_ref());
    }

    /// One-line human summary, used by the CLI and the acceptance suite.
    pub fn summary_line(&self) -> String {
        // NaN marks a report with no right-hand side, e.g. an empirical constant
        let or_dash = |x: f64, s: String| if x.is_nan() { "-".to_string() } else { s };
        format!(
            "[{}] {}: lhs={:.6e} rhs={} margin={} tol={:.1e}{}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.lhs,
            or_dash(self.rhs, format!("{:.6e}", self.rhs)),
            or_dash(self.margin, format!("{:.3e}", self.margin)),
            self.tolerance,
            if self.notes.is_empty() {
                String::new()
            } else {
                format!(" ({})", self.notes)
            }
        )
    }
}

/// Serialize a slice of reports as a JSON array, sorted by name so that
/// concurrent runs produce byte-identical output.
pub fn reports_to_json(reports: &[CheckReport]) -> serde_json::Result<String> {
    let mut sorted: Vec<&CheckReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    serde_json::to_string_pretty(&sorted)
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
        if value.is_finite() {
            s.serialize_f64(*value)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_schema_fields() {
        let r = CheckReport::upper_bound("demo", 1.0, 2.0, 1e-6)
            .with_grid("radial(n=16)")
            .with_dt(1e-3)
            .with_eps(0.1);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in [
            "name", "lhs", "rhs", "margin", "tolerance", "pass", "grid", "dt", "eps", "notes",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["margin"], 1.0);
        assert_eq!(v["pass"], true);
    }

    #[test]
    fn non_finite_values_become_null() {
        let r = CheckReport::upper_bound("inf", 1.0, f64::INFINITY, 0.0);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"rhs\":null"));
        let back: CheckReport = serde_json::from_str(&s).unwrap();
        assert!(back.rhs.is_nan());
    }

    #[test]
    fn array_is_sorted_by_name() {
        let a = CheckReport::upper_bound("b", 0.0, 1.0, 0.0);
        let b = CheckReport::upper_bound("a", 0.0, 1.0, 0.0);
        let json = reports_to_json(&[a, b]).unwrap();
        assert!(json.find("\"a\"").unwrap() < json.find("\"b\"").unwrap());
    }
}
