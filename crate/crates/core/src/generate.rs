//! Seeded random instances.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{FunctionClass, Instance, SuccessFunction, MAX_AGENTS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostRegime {
    /// All costs are zero.
    Zero,
    /// Uniform in `[0, 0.1 · mean singleton value]`.
    Low,
    /// Uniform in `[0, max singleton value]`.
    Random,
}

impl CostRegime {
    pub const ALL: [CostRegime; 3] = [CostRegime::Zero, CostRegime::Low, CostRegime::Random];

    pub fn name(self) -> &'static str {
        match self {
            CostRegime::Zero => "zero",
            CostRegime::Low => "low",
            CostRegime::Random => "random",
        }
    }
}

impl std::str::FromStr for CostRegime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(CostRegime::Zero),
            "low" => Ok(CostRegime::Low),
            "random" => Ok(CostRegime::Random),
            other => Err(format!("unknown cost regime '{other}'")),
        }
    }
}

/// Everything needed to reproduce a random instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    pub class: FunctionClass,
    pub costs: CostRegime,
    pub seed: u64,
}

impl GenSpec {
    pub fn generate(&self) -> Result<Instance> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::Params("n and m must be positive".into()));
        }
        if self.n > MAX_AGENTS {
            return Err(Error::Params(format!("n must be at most {MAX_AGENTS}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let functions: Vec<_> = (0..self.m)
            .map(|_| random_function(&mut rng, self.class, self.n))
            .collect();
        let costs = random_costs(&mut rng, self.costs, &functions, self.n);
        Instance::new(costs, functions)
    }
}

/// Non-negative weights summing to `total`, with occasional zeros and a
/// heavy-tailed spread so that singleton values vary by orders of magnitude.
fn random_weights<R: Rng>(rng: &mut R, len: usize, total: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len)
        .map(|_| {
            if rng.gen_bool(0.1) {
                0.0
            } else {
                let u: f64 = rng.gen_range(0.0..1.0);
                u * u * u + 1e-3
            }
        })
        .collect();
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        for x in &mut w {
            *x *= total / s;
        }
    }
    w
}

pub fn random_function<R: Rng>(rng: &mut R, class: FunctionClass, n: usize) -> SuccessFunction {
    match class {
        FunctionClass::Additive => {
            let total = rng.gen_range(0.2..1.0);
            SuccessFunction::Additive {
                values: random_weights(rng, n, total),
            }
        }
        FunctionClass::BudgetAdditive => {
            let total = rng.gen_range(0.3..1.5);
            let values = random_weights(rng, n, total);
            let budget = rng.gen_range(0.2..1.0f64).min(total);
            SuccessFunction::BudgetAdditive { values, budget }
        }
        FunctionClass::Coverage => {
            let universe = rng.gen_range(n..=2 * n + 2);
            let total = rng.gen_range(0.2..1.0);
            let weights = random_weights(rng, universe, total);
            let covers = (0..n)
                .map(|_| {
                    let k = rng.gen_range(1..=3.min(universe));
                    let mut elems = sample(rng, universe, k).into_vec();
                    elems.sort_unstable();
                    elems
                })
                .collect();
            SuccessFunction::Coverage { weights, covers }
        }
        FunctionClass::Xos => {
            let k = rng.gen_range(1..=4);
            let clauses = (0..k)
                .map(|_| {
                    let total = rng.gen_range(0.2..1.0);
                    random_weights(rng, n, total)
                })
                .collect();
            SuccessFunction::Xos { clauses }
        }
    }
}

fn random_costs<R: Rng>(rng: &mut R, regime: CostRegime, functions: &[SuccessFunction], n: usize) -> Vec<Vec<f64>> {
    let singles: Vec<f64> = functions
        .iter()
        .flat_map(|f| (0..n).map(move |i| f.singleton(i)))
        .collect();
    let mean = singles.iter().sum::<f64>() / singles.len() as f64;
    let max = singles.iter().copied().fold(0.0, f64::max);
    let hi = match regime {
        CostRegime::Zero => 0.0,
        CostRegime::Low => 0.1 * mean,
        CostRegime::Random => max,
    };
    (0..n)
        .map(|_| {
            (0..functions.len())
                .map(|_| if hi > 0.0 { rng.gen_range(0.0..hi) } else { 0.0 })
                .collect()
        })
        .collect()
}
