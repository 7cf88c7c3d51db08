use alloc::string::String;
use alloc::vec::Vec;

/// Named residuals produced by a verification suite, in evaluation order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, f64)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, residual: f64) {
        self.entries.push((name.into(), residual));
    }

    pub fn extend(&mut self, other: Report) {
        self.entries.extend(other.entries);
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| *r)
    }

    /// Largest residual; NaN entries count as infinite.
    pub fn max_residual(&self) -> f64 {
        self.entries
            .iter()
            .map(|(_, r)| if r.is_nan() { f64::INFINITY } else { *r })
            .fold(0.0, f64::max)
    }

    /// Entries at or above `tol`, including NaN.
    pub fn failures(&self, tol: f64) -> impl Iterator<Item = &(String, f64)> {
        self.entries
            .iter()
            .filter(move |(_, r)| r.partial_cmp(&tol) != Some(core::cmp::Ordering::Less))
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.failures(tol).next().is_none()
    }
}
