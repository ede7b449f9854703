use serde::Serialize;

/// One pass/fail comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// Outcome of the same comparison applied to the published values,
    /// for checks that have such a counterpart.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_passed: Option<bool>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into(), reference_passed: None }
    }

    pub fn with_reference(mut self, passed: bool) -> Self {
        self.reference_passed = Some(passed);
        self
    }

    /// Failed, but the published values fail the same comparison.
    pub fn excused(&self) -> bool {
        !self.passed && self.reference_passed == Some(false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// Every failing check also fails on the published values.
    FailSharedWithReference,
    Fail,
}

/// A numbered group of checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub title: String,
    pub status: Status,
    pub checks: Vec<Check>,
}

impl Criterion {
    pub fn new(id: u8, title: impl Into<String>, checks: Vec<Check>) -> Self {
        let status = if checks.iter().all(|c| c.passed) {
            Status::Pass
        } else if checks.iter().all(|c| c.passed || c.excused()) {
            Status::FailSharedWithReference
        } else {
            Status::Fail
        };
        Self { id, title: title.into(), status, checks }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One summary line.
    pub fn line(&self) -> String {
        let total = self.checks.len();
        match self.status {
            Status::Pass => format!("criterion {} PASS  {} ({total} checks)", self.id, self.title),
            Status::FailSharedWithReference | Status::Fail => {
                let failed: Vec<String> = self.failures().map(|c| format!("{} [{}]", c.name, c.detail)).collect();
                let note = if self.status == Status::Fail {
                    ""
                } else {
                    "; every failing check also fails on the published values"
                };
                format!(
                    "criterion {} FAIL  {} ({} of {total} checks failed{note}): {}",
                    self.id,
                    self.title,
                    failed.len(),
                    failed.join("; ")
                )
            }
        }
    }
}

/// `1/f <= value/reference <= f`.
pub fn within_factor(value: f64, reference: f64, factor: f64) -> bool {
    let r = value / reference;
    r.is_finite() && r <= factor && r >= 1.0 / factor
}
