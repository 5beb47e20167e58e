use alloc::string::String;
use alloc::vec::Vec;

use crate::structure::Id;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Violation {
    /// Stable axiom tag such as `F-surjective` or `limit-unique`.
    pub tag: &'static str,
    pub witnesses: Vec<Id>,
    pub message: String,
}

/// Outcome of validating a structure. `ok` iff there are no violations.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Verdict {
    violations: Vec<Violation>,
}

impl Verdict {
    pub fn from_violations(mut violations: Vec<Violation>) -> Self {
        violations.sort();
        violations.dedup();
        Verdict { violations }
    }

    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    /// Distinct tags, sorted.
    pub fn tags(&self) -> Vec<&'static str> {
        let mut tags: Vec<_> = self.violations.iter().map(|v| v.tag).collect();
        tags.sort_unstable();
        tags.dedup();
        tags
    }

    pub fn has(&self, tag: &str) -> bool {
        self.violations.iter().any(|v| v.tag == tag)
    }
}
