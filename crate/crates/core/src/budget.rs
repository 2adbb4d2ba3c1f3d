use std::time::{Duration, Instant};

/// Default wall-clock allowance for exhaustive searches.
pub const DEFAULT_BUDGET_SECS: f64 = 300.0;

/// Wall-clock limit for an exhaustive search. Searches that exceed it fail
/// rather than returning partial results.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    deadline: Option<Instant>,
    seconds: Option<f64>,
}

impl Budget {
    pub fn seconds(secs: f64) -> Self {
        let secs = secs.max(0.0);
        Budget {
            deadline: Some(Instant::now() + Duration::from_secs_f64(secs)),
            seconds: Some(secs),
        }
    }

    pub fn unlimited() -> Self {
        Budget { deadline: None, seconds: None }
    }

    pub fn allowance(&self) -> Option<f64> {
        self.seconds
    }

    pub fn expired(&self) -> bool {
        match (self.deadline, self.seconds) {
            (_, Some(s)) if s <= 0.0 => true,
            (Some(d), _) => Instant::now() >= d,
            _ => false,
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::seconds(DEFAULT_BUDGET_SECS)
    }
}
