//! Resource limits for long expansions.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Budget {
    pub max_terms: Option<usize>,
    pub deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    /// Limits counted from now.
    pub fn new(max_terms: Option<usize>, max_seconds: Option<f64>) -> Self {
        let deadline = max_seconds.map(|s| Instant::now() + Duration::from_secs_f64(s.max(0.0)));
        Budget { max_terms, deadline }
    }

    /// Fails with [`Error::BudgetExceeded`] if `terms` or the clock is over the limit.
    pub fn check(&self, terms: usize, context: &str) -> Result<()> {
        if let Some(max) = self.max_terms {
            if terms > max {
                return Err(Error::BudgetExceeded(format!("{context}: {terms} terms exceeds limit {max}")));
            }
        }
        if let Some(deadline) = self.deadline {
            if Instant::now() > deadline {
                return Err(Error::BudgetExceeded(format!("{context}: time limit reached")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits() {
        assert!(Budget::unlimited().check(usize::MAX, "x").is_ok());
        let b = Budget::new(Some(10), None);
        assert!(b.check(10, "x").is_ok());
        assert!(matches!(b.check(11, "x"), Err(Error::BudgetExceeded(_))));
        let expired = Budget::new(None, Some(0.0));
        std::thread::sleep(Duration::from_millis(2));
        assert!(expired.check(0, "x").is_err());
    }
}
