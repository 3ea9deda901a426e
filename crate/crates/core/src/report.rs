use serde::{Deserialize, Serialize};

/// One checked identity or inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityEntry {
    pub name: String,
    /// Index the entry refers to (the `k` of a per-`k` identity), if any.
    pub k: Option<usize>,
    /// Max absolute residual; for inequalities, the size of the violation.
    pub residual: f64,
    /// Residual bound actually applied: tolerance times the entry's scale.
    pub allowed: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub tolerance: f64,
    pub entries: Vec<IdentityEntry>,
}

impl IdentityReport {
    pub fn new(tolerance: f64) -> Self {
        Self {
            tolerance,
            entries: Vec::new(),
        }
    }

    /// Records `residual` against `tolerance * max(1, scale)`.
    pub fn check(&mut self, name: &str, k: Option<usize>, residual: f64, scale: f64) {
        let allowed = self.tolerance * scale.abs().max(1.0);
        let residual = residual.abs();
        self.entries.push(IdentityEntry {
            name: name.to_string(),
            k,
            residual,
            allowed,
            pass: residual <= allowed,
        });
    }

    /// Records an absolute bound, without scaling.
    pub fn check_abs(&mut self, name: &str, k: Option<usize>, residual: f64, allowed: f64) {
        let residual = residual.abs();
        self.entries.push(IdentityEntry {
            name: name.to_string(),
            k,
            residual,
            allowed,
            pass: residual <= allowed,
        });
    }

    /// `lhs <= rhs` up to tolerance; the residual is the violation.
    pub fn check_le(&mut self, name: &str, k: Option<usize>, lhs: f64, rhs: f64, scale: f64) {
        self.check(name, k, (lhs - rhs).max(0.0), scale);
    }

    pub fn merge(&mut self, other: IdentityReport) {
        self.entries.extend(other.entries);
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn max_residual(&self, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .filter(|e| e.name == name)
            .map(|e| e.residual)
            .reduce(f64::max)
    }

    /// Largest residual over every entry.
    pub fn worst_residual(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.residual.abs())
            .fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str, k: Option<usize>) -> Option<&IdentityEntry> {
        self.entries.iter().find(|e| e.name == name && e.k == k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_within_allowed() {
        let mut r = IdentityReport::new(1e-9);
        r.check("a", None, 5e-10, 0.1);
        r.check("b", Some(2), 5e-9, 10.0);
        r.check("c", None, 2e-9, 1.0);
        r.check_le("d", None, 1.0, 2.0, 1.0);
        assert!(r.entries[0].pass && r.entries[1].pass && r.entries[3].pass);
        assert!(!r.entries[2].pass);
        assert!(!r.all_pass());
        assert_eq!(r.failures().count(), 1);
        assert_eq!(r.max_residual("d"), Some(0.0));
    }
}
