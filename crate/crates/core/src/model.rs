//! Model parameters, the (phase, count) state space and the transition-rate
//! function every engine is built on.
//!
//! Two rule sets exist. The single-server rules follow the one-server
//! diagrams directly; the multi-server rules treat the phase as the number
//! of operating servers. For `servers == 1` both produce identical rates,
//! which the oracle tests check entry by entry.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// One vacation per emptying; the server idles if it returns to an empty system.
    Single,
    /// Vacations repeat while the system stays empty.
    Multiple,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Analytic,
    Oracle,
    Simulation,
}

/// Reading of the multi-server vacation-return rates.
///
/// `Corrected` returns servers individually at `(c - j) * gamma` from phase `j`.
/// `Literal` uses the labels exactly as drawn in the multi-server diagram:
/// `(c-1)γ` out of `(0,0)`, `cγ` out of `(0,n≥1)` and `(c-1)γ` out of every
/// phase `j ≥ 1`. With one server the two coincide.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BalanceVariant {
    #[default]
    Corrected,
    Literal,
}

/// Which family of structural rules `rate_with` applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleSet {
    SingleServer,
    MultiServer,
}

macro_rules! lowercase_enum_text {
    ($ty:ty, $kind:literal, $($variant:ident => $text:literal),+) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($text => Ok(Self::$variant),)+
                    _ => Err(Error::UnknownName {
                        kind: $kind,
                        name: s.to_string(),
                        known: [$($text),+].join(", "),
                    }),
                }
            }
        }
    };
}

lowercase_enum_text!(Policy, "policy", Single => "single", Multiple => "multiple");
lowercase_enum_text!(EngineKind, "engine", Analytic => "analytic", Oracle => "oracle", Simulation => "simulation");
lowercase_enum_text!(BalanceVariant, "balance variant", Corrected => "corrected", Literal => "literal");

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
    pub mu: f64,
    pub gamma: f64,
    pub xi: f64,
    pub servers: usize,
    pub policy: Policy,
    #[serde(default)]
    pub variant: BalanceVariant,
}

impl ModelParams {
    pub fn single(lambda: f64, mu: f64, gamma: f64, xi: f64) -> Self {
        Self {
            lambda,
            mu,
            gamma,
            xi,
            servers: 1,
            policy: Policy::Single,
            variant: BalanceVariant::Corrected,
        }
    }

    pub fn multiple(lambda: f64, mu: f64, gamma: f64, xi: f64) -> Self {
        Self {
            policy: Policy::Multiple,
            ..Self::single(lambda, mu, gamma, xi)
        }
    }

    pub fn multi_server(lambda: f64, mu: f64, gamma: f64, xi: f64, servers: usize) -> Self {
        Self {
            servers,
            ..Self::single(lambda, mu, gamma, xi)
        }
    }

    pub fn with_policy(self, policy: Policy) -> Self {
        Self { policy, ..self }
    }

    pub fn with_variant(self, variant: BalanceVariant) -> Self {
        Self { variant, ..self }
    }

    /// Offered load `lambda / (c mu)`.
    pub fn rho(&self) -> f64 {
        self.lambda / (self.servers as f64 * self.mu)
    }

    /// The rule set whose rates define this model.
    pub fn rules(&self) -> RuleSet {
        if self.servers == 1 {
            RuleSet::SingleServer
        } else {
            RuleSet::MultiServer
        }
    }

    pub fn is_valid_state(&self, s: QueueState) -> bool {
        s.phase <= self.servers && !(self.policy == Policy::Multiple && s.phase >= 1 && s.count == 0)
    }

    fn check_state(&self, s: QueueState) -> Result<()> {
        if s.phase > self.servers {
            return Err(Error::InvalidState {
                phase: s.phase,
                count: s.count,
                reason: format!("phase exceeds server count {}", self.servers),
            });
        }
        if !self.is_valid_state(s) {
            return Err(Error::InvalidState {
                phase: s.phase,
                count: s.count,
                reason: "an operating server never idles under multiple vacations".into(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QueueState {
    pub phase: usize,
    pub count: usize,
}

impl QueueState {
    pub const fn new(phase: usize, count: usize) -> Self {
        Self { phase, count }
    }
}

impl fmt::Display for QueueState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.phase, self.count)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from: QueueState,
    pub to: QueueState,
    pub rate: f64,
}

/// Checks the conditions `engine` needs and lists every one that fails.
pub fn validate(p: &ModelParams, engine: EngineKind) -> Result<()> {
    let mut v = Vec::new();
    let mut push = |condition: &str, observed: String| {
        v.push(Violation {
            condition: condition.to_string(),
            observed,
        })
    };

    for (name, x) in [("lambda", p.lambda), ("mu", p.mu), ("gamma", p.gamma), ("xi", p.xi)] {
        if !x.is_finite() {
            push(&format!("{name} finite"), format!("{name} = {x}"));
        }
    }
    if !(p.lambda > 0.0) {
        push("lambda > 0", format!("lambda = {}", p.lambda));
    }
    if !(p.mu > 0.0) {
        push("mu > 0", format!("mu = {}", p.mu));
    }
    if !(p.gamma > 0.0) {
        push("gamma > 0", format!("gamma = {}", p.gamma));
    }
    if p.servers == 0 {
        push("servers >= 1", "servers = 0".into());
    }
    if p.policy == Policy::Multiple && p.servers > 1 {
        push(
            "multiple vacations require servers = 1",
            format!("servers = {}", p.servers),
        );
    }

    match engine {
        EngineKind::Analytic => {
            if !(p.xi > 0.0) {
                push("xi > 0", format!("xi = {}", p.xi));
            }
            if p.servers != 1 {
                push(
                    "analytic engine requires servers = 1",
                    format!("servers = {}", p.servers),
                );
            }
            if !(p.xi < p.mu) {
                push("xi < mu", format!("xi = {}, mu = {}", p.xi, p.mu));
            }
            if !(p.rho() < 1.0) {
                push(
                    "rho = lambda/(c*mu) < 1",
                    format!("rho = {}", p.rho()),
                );
            }
        }
        EngineKind::Oracle | EngineKind::Simulation => {
            // Impatience alone stabilises the chain; without it the usual
            // load condition is needed.
            if !(p.xi >= 0.0) {
                push("xi >= 0", format!("xi = {}", p.xi));
            } else if p.xi == 0.0 && !(p.rho() < 1.0) {
                push(
                    "xi = 0 requires rho = lambda/(c*mu) < 1",
                    format!("rho = {}", p.rho()),
                );
            }
            if engine == EngineKind::Simulation
                && p.variant == BalanceVariant::Literal
                && p.servers > 1
            {
                push(
                    "simulation requires the corrected balance variant",
                    "variant = literal".into(),
                );
            }
        }
    }

    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(v))
    }
}

/// Rate of the transition `from -> to` under the model's own rule set.
pub fn rate_of(p: &ModelParams, from: QueueState, to: QueueState) -> Result<f64> {
    rate_with(p, p.rules(), from, to)
}

/// Rate of `from -> to` under an explicit rule set. Non-adjacent pairs give 0.
pub fn rate_with(p: &ModelParams, rules: RuleSet, from: QueueState, to: QueueState) -> Result<f64> {
    p.check_state(from)?;
    p.check_state(to)?;
    Ok(outgoing(p, rules, from)
        .into_iter()
        .find(|(s, _)| *s == to)
        .map_or(0.0, |(_, r)| r))
}

/// All transitions with positive rate leaving `from`.
pub fn transitions_from(p: &ModelParams, from: QueueState) -> Result<Vec<Transition>> {
    transitions_with(p, p.rules(), from)
}

pub fn transitions_with(p: &ModelParams, rules: RuleSet, from: QueueState) -> Result<Vec<Transition>> {
    p.check_state(from)?;
    Ok(outgoing(p, rules, from)
        .into_iter()
        .map(|(to, rate)| Transition { from, to, rate })
        .collect())
}

fn outgoing(p: &ModelParams, rules: RuleSet, s: QueueState) -> Vec<(QueueState, f64)> {
    let mut out = Vec::with_capacity(3);
    let mut add = |to: QueueState, rate: f64| {
        if rate > 0.0 && p.is_valid_state(to) {
            out.push((to, rate));
        }
    };
    let (j, n) = (s.phase, s.count);
    add(QueueState::new(j, n + 1), p.lambda);

    match rules {
        RuleSet::SingleServer => match j {
            0 => {
                if n >= 1 {
                    add(QueueState::new(0, n - 1), n as f64 * p.xi);
                }
                if n >= 1 || p.policy == Policy::Single {
                    add(QueueState::new(1, n), p.gamma);
                }
            }
            _ => {
                if n == 1 {
                    add(QueueState::new(0, 0), p.mu);
                } else if n >= 2 {
                    add(QueueState::new(1, n - 1), p.mu + (n - 1) as f64 * p.xi);
                }
            }
        },
        RuleSet::MultiServer => {
            let c = p.servers;
            if j < c && !(p.policy == Policy::Multiple && n == 0) {
                add(QueueState::new(j + 1, n), vacation_return_rate(p, j, n));
            }
            if n >= 1 {
                if n <= j {
                    add(QueueState::new(j - 1, n - 1), n as f64 * p.mu);
                } else {
                    add(
                        QueueState::new(j, n - 1),
                        j as f64 * p.mu + (n - j) as f64 * p.xi,
                    );
                }
            }
        }
    }
    out
}

fn vacation_return_rate(p: &ModelParams, j: usize, n: usize) -> f64 {
    let c = p.servers as f64;
    match p.variant {
        BalanceVariant::Literal if p.servers > 1 => match (j, n) {
            (0, 0) => (c - 1.0) * p.gamma,
            (0, _) => c * p.gamma,
            _ => (c - 1.0) * p.gamma,
        },
        _ => (c - j as f64) * p.gamma,
    }
}
