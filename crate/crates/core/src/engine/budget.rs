use std::sync::atomic::{AtomicU64, Ordering};

use super::EngineError;

/// Default cap on solver calls per top-level query.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Counts solver calls (full solves and enumerated counterfactual worlds)
/// and fails once the limit is crossed.
#[derive(Debug)]
pub struct Budget {
    used: AtomicU64,
    limit: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Self {
            used: AtomicU64::new(0),
            limit,
        }
    }

    #[inline]
    pub fn charge(&self, n: u64) -> Result<(), EngineError> {
        let before = self.used.fetch_add(n, Ordering::Relaxed);
        if before + n > self.limit {
            Err(EngineError::BudgetExceeded { limit: self.limit })
        } else {
            Ok(())
        }
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed).min(self.limit.saturating_add(1))
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exceeding_the_limit_fails() {
        let b = Budget::new(3);
        assert!(b.charge(2).is_ok());
        assert!(b.charge(1).is_ok());
        assert!(matches!(b.charge(1), Err(EngineError::BudgetExceeded { limit: 3 })));
    }
}
