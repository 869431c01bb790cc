//! Invariant batteries behind a common trait, registered by name.
//!
//! Each [`Invariant`] measures a largest deviation that must stay within its
//! tolerance. The registry runs a selection of them and produces a
//! [`Report`] whose JSON form is a pure function of the seed, the resolution
//! and the tolerance overrides.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{make_circle, DiscreteManifold};
use crate::random::{SeededRng, DEFAULT_SEED};
use crate::scene::Scene;

mod checks;

pub use checks::{register_defaults, SceneRoundTrip};

pub const DEFAULT_RESOLUTION: usize = 128;

/// What an invariant is measured against.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: u64,
    pub resolution: usize,
}

impl Default for Context {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, resolution: DEFAULT_RESOLUTION }
    }
}

impl Context {
    /// A generator for one named invariant. Streams are keyed by the name, so
    /// the data an invariant sees does not depend on which others run.
    pub fn rng(&self, name: &str) -> SeededRng {
        let mut rng = SeededRng::seed_from_u64(self.seed);
        rng.set_stream(fnv1a(name));
        rng
    }

    pub fn circle(&self) -> Result<Arc<DiscreteManifold>> {
        Ok(Arc::new(make_circle(self.resolution)?))
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

pub trait Invariant: Send + Sync {
    fn name(&self) -> &str;
    fn description(&self) -> &str;
    fn tolerance(&self) -> f64;
    /// Largest deviation observed over the invariant's seeded battery.
    fn measure(&self, ctx: &Context) -> Result<f64>;
}

#[derive(Default)]
pub struct InvariantRegistry {
    invariants: BTreeMap<String, Box<dyn Invariant>>,
}

impl InvariantRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Every built-in invariant.
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        register_defaults(&mut r);
        r
    }

    /// The built-ins plus the invariants that exercise a user scene.
    pub fn for_scene(scene: &Scene) -> Self {
        let mut r = Self::with_defaults();
        r.register(Box::new(SceneRoundTrip::new(scene.clone())));
        r
    }

    pub fn register(&mut self, invariant: Box<dyn Invariant>) {
        self.invariants.insert(invariant.name().to_string(), invariant);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Invariant> {
        self.invariants
            .get(name)
            .map(|i| i.as_ref())
            .ok_or_else(|| Error::UnknownStrategy { kind: "invariant", name: name.to_string() })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.invariants.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.invariants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.invariants.is_empty()
    }

    /// Runs the selected invariants (all when `only` is empty). Unknown names
    /// in `only` or in the overrides are errors.
    pub fn run(&self, ctx: &Context, overrides: &BTreeMap<String, f64>, only: &[String]) -> Result<Report> {
        for name in overrides.keys().chain(only) {
            self.get(name)?;
        }
        for (name, tol) in overrides {
            if tol.is_nan() || *tol <= 0.0 {
                return Err(Error::Scene(format!("tolerance for {name} must be positive, got {tol}")));
            }
        }
        let selected: Vec<&dyn Invariant> = self
            .invariants
            .values()
            .map(|i| i.as_ref())
            .filter(|i| only.is_empty() || only.iter().any(|n| n == i.name()))
            .collect();
        let outcomes: Vec<Outcome> = selected
            .par_iter()
            .map(|inv| {
                let tolerance = overrides.get(inv.name()).copied().unwrap_or_else(|| inv.tolerance());
                match inv.measure(ctx) {
                    Ok(dev) => Outcome {
                        name: inv.name().to_string(),
                        description: inv.description().to_string(),
                        max_deviation: Some(dev),
                        tolerance,
                        passed: dev <= tolerance,
                        error: None,
                    },
                    Err(e) => Outcome {
                        name: inv.name().to_string(),
                        description: inv.description().to_string(),
                        max_deviation: None,
                        tolerance,
                        passed: false,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect();
        let passed = outcomes.iter().all(|o| o.passed);
        Ok(Report { seed: ctx.seed, resolution: ctx.resolution, passed, invariants: outcomes })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub name: String,
    pub description: String,
    /// `None` when the measurement itself failed; see `error`.
    pub max_deviation: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub resolution: usize,
    pub passed: bool,
    pub invariants: Vec<Outcome>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports contain only finite numbers and strings");
        s.push('\n');
        s
    }

    pub fn failures(&self) -> impl Iterator<Item = &Outcome> {
        self.invariants.iter().filter(|o| !o.passed)
    }

    pub fn outcome(&self, name: &str) -> Option<&Outcome> {
        self.invariants.iter().find(|o| o.name == name)
    }
}
