use serde::{Deserialize, Serialize};

/// Which cycle sets are separated over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// The plain relaxation: no tightening, edge cuts, envelopes or cycle cuts.
    SocpOnly,
    /// Discretized McCormick sets.
    SepM,
    /// Cycle SDP sets.
    SepS,
    /// Both.
    SepMs,
}

impl Method {
    pub fn uses_mccormick(self) -> bool {
        matches!(self, Method::SepM | Method::SepMs)
    }

    pub fn uses_sdp(self) -> bool {
        matches!(self, Method::SepS | Method::SepMs)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::SocpOnly => "socp-only",
            Method::SepM => "sep-m",
            Method::SepS => "sep-s",
            Method::SepMs => "sep-ms",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmParams {
    /// Tightening and separation rounds at the root.
    pub rounds: usize,
    /// Rounds in which the cycle set is enlarged.
    pub cycle_rounds: usize,
    /// Neighborhood radius of the first tightening round.
    pub r1: usize,
    /// Neighborhood radius of later rounds and of node tightening.
    pub r2: usize,
    /// Relative optimality tolerance.
    pub eps: f64,
    /// Largest bus count for which cycles are enlarged.
    pub bmax: usize,
    /// Total wall-clock budget in seconds.
    pub time_limit: f64,
    pub method: Method,
    /// Upper bound supplied from outside; the incumbent may improve on it.
    pub ub: Option<f64>,
    /// Worker threads for tightening and separation; `None` uses all cores.
    pub threads: Option<usize>,
    /// Stop after the root loop.
    pub root_only: bool,
    /// Largest number of nodes processed after the root.
    pub max_nodes: Option<usize>,
}

impl Default for AlgorithmParams {
    fn default() -> Self {
        Self {
            rounds: 5,
            cycle_rounds: 1,
            r1: 2,
            r2: 4,
            eps: 1e-3,
            bmax: 118,
            time_limit: 1800.0,
            method: Method::SepMs,
            ub: None,
            threads: None,
            root_only: false,
            max_nodes: None,
        }
    }
}

impl AlgorithmParams {
    pub fn with_method(method: Method) -> Self {
        Self { method, ..Self::default() }
    }

    /// The first invalid field, if any.
    pub fn validate(&self) -> Result<(), String> {
        if self.rounds == 0 {
            return Err("rounds must be positive".into());
        }
        if self.r1 == 0 || self.r2 == 0 {
            return Err("radii must be positive".into());
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err("eps must lie in (0, 1)".into());
        }
        if !(self.time_limit > 0.0) {
            return Err("time limit must be positive".into());
        }
        if self.threads == Some(0) {
            return Err("thread count must be positive".into());
        }
        if self.ub.is_some_and(|u| !u.is_finite()) {
            return Err("upper bound must be finite".into());
        }
        Ok(())
    }
}
