use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// JSON has no NaN, so a failed measurement is written as null.
fn null_as_nan<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Whether the value is a deviation (upper bound) or a margin (lower bound).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    #[default]
    AtMost,
    AtLeast,
}

/// One named check: measured value against a tolerance, tagged with the
/// identity or condition it tests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub check: String,
    pub identity_tag: String,
    pub status: Status,
    #[serde(deserialize_with = "null_as_nan")]
    pub value: f64,
    pub tolerance: f64,
    #[serde(default)]
    pub bound: Bound,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(check: impl Into<String>, tag: impl Into<String>, value: f64, tolerance: f64) -> Self {
        let ok = value <= tolerance;
        Check {
            check: check.into(),
            identity_tag: tag.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            value,
            tolerance,
            bound: Bound::AtMost,
            detail: None,
        }
    }

    /// Passes when `value ≥ tolerance` (margins and gaps).
    pub fn at_least(check: impl Into<String>, tag: impl Into<String>, value: f64, tolerance: f64) -> Self {
        let mut c = Check::at_most(check, tag, 0.0, 0.0);
        c.value = value.min(f64::MAX);
        c.tolerance = tolerance;
        c.bound = Bound::AtLeast;
        c.status = if value >= tolerance { Status::Pass } else { Status::Fail };
        c
    }

    pub fn flag(check: impl Into<String>, tag: impl Into<String>, ok: bool) -> Self {
        let mut c = Check::at_most(check, tag, if ok { 0.0 } else { 1.0 }, 0.0);
        c.status = if ok { Status::Pass } else { Status::Fail };
        c
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.check == name)
    }

    /// Checks ordered by name, for stable output.
    pub fn sorted(mut self) -> Self {
        self.checks.sort_by(|a, b| a.check.cmp(&b.check));
        self
    }
}

/// Tracks the worst deviation seen and where it happened.
#[derive(Clone, Debug, Default)]
pub struct Worst {
    pub value: f64,
    pub at: Option<String>,
}

impl Worst {
    pub fn update(&mut self, value: f64, at: impl FnOnce() -> String) {
        if value > self.value || (self.at.is_none() && value.is_nan()) {
            self.value = value;
            self.at = Some(at());
        }
    }

    pub fn check(&self, name: &str, tag: &str, tol: f64) -> Check {
        let mut c = Check::at_most(name, tag, self.value, tol);
        if let Some(at) = &self.at {
            c.detail = Some(format!("worst at {at}"));
        }
        c
    }
}
