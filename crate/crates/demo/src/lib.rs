//! Browser demo: three operations exported to JavaScript.
//!
//! Every export takes plain numbers and strings and returns JSON text, so
//! the page needs nothing beyond the generated glue. The same functions are
//! available natively under [`native`] for testing.

use wasm_bindgen::prelude::*;

pub mod native {
    use contract_core::bruteforce::exact_capped_demand;
    use contract_core::capped_demand::{capped_demand, capped_utility, CappedQuery};
    use contract_core::generate::{CostRegime, GenSpec};
    use contract_core::oracles::PriceVector;
    use contract_core::pipeline::solve_exact;
    use contract_core::{solve, FunctionClass, Instance, Method, Params};
    use serde::Serialize;

    /// Largest instance for which the exact optimum is also computed.
    const EXACT_LIMIT: usize = 9;

    #[derive(Debug, Serialize)]
    pub struct SolveView {
        pub n: usize,
        pub m: usize,
        pub singletons: Vec<Vec<f64>>,
        pub costs: Vec<Vec<f64>>,
        pub allocation: Vec<Option<usize>>,
        pub per_project_revenue: Vec<f64>,
        pub total_revenue: f64,
        pub method: String,
        pub exact_revenue: Option<f64>,
    }

    fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, String> {
        s.parse()
    }

    fn generate(n: usize, m: usize, class: &str, costs: &str, seed: u64) -> Result<Instance, String> {
        GenSpec {
            n,
            m,
            class: parse::<FunctionClass>(class)?,
            costs: parse::<CostRegime>(costs)?,
            seed,
        }
        .generate()
        .map_err(|e| e.to_string())
    }

    pub fn solve_random(n: usize, m: usize, class: &str, costs: &str, seed: u64) -> Result<SolveView, String> {
        let inst = generate(n, m, class, costs, seed)?;
        let params = Params::default();
        let report = solve(&inst, &params).map_err(|e| e.to_string())?;
        let exact_revenue = if n <= EXACT_LIMIT {
            Some(solve_exact(&inst, &params).map_err(|e| e.to_string())?.total_revenue)
        } else {
            None
        };
        Ok(SolveView {
            n,
            m,
            singletons: (0..m).map(|j| (0..n).map(|i| inst.singleton(j, i)).collect()).collect(),
            costs: inst.costs().to_vec(),
            allocation: report.allocation.assignment().to_vec(),
            per_project_revenue: report.per_project_revenue,
            total_revenue: report.total_revenue,
            method: match report.method {
                Method::DominantMatching => "dominant_matching",
                Method::LpPipeline => "lp_pipeline",
                Method::BruteForce => "brute_force",
            }
            .to_string(),
            exact_revenue,
        })
    }

    #[derive(Debug, Serialize)]
    pub struct SweepPoint {
        pub factor: f64,
        pub approx: f64,
        pub exact: f64,
    }

    /// Revenue as every cost is multiplied by a factor from 0 to `max_factor`.
    pub fn cost_sweep(n: usize, m: usize, class: &str, seed: u64, steps: usize, max_factor: f64) -> Result<Vec<SweepPoint>, String> {
        if n > EXACT_LIMIT {
            return Err(format!("the sweep compares against the exact optimum; use n <= {EXACT_LIMIT}"));
        }
        let base = generate(n, m, class, "random", seed)?;
        let params = Params::default();
        let steps = steps.max(2);
        (0..steps)
            .map(|k| {
                let factor = max_factor * k as f64 / (steps - 1) as f64;
                let costs = base
                    .costs()
                    .iter()
                    .map(|row| row.iter().map(|c| c * factor).collect())
                    .collect();
                let inst = Instance::new(costs, base.functions().to_vec()).map_err(|e| e.to_string())?;
                let approx = solve(&inst, &params).map_err(|e| e.to_string())?.total_revenue;
                let exact = solve_exact(&inst, &params).map_err(|e| e.to_string())?.total_revenue;
                Ok(SweepPoint { factor, approx, exact })
            })
            .collect()
    }

    #[derive(Debug, Serialize)]
    pub struct CurvePoint {
        pub cap: f64,
        pub approx: f64,
        pub exact: f64,
        pub bound: f64,
    }

    /// Capped utility of the approximate oracle against the exact optimum
    /// and the guaranteed bound, over a range of caps.
    pub fn capped_demand_curve(n: usize, seed: u64, delta: f64, price_scale: f64, steps: usize) -> Result<Vec<CurvePoint>, String> {
        if !(1..=16).contains(&n) {
            return Err("n must lie in 1..=16".into());
        }
        let inst = generate(n, 1, "additive", "zero", seed)?;
        let f = inst.function(0);
        let total = f.max_value();
        if total <= 0.0 {
            return Err("the sampled function is identically zero".into());
        }
        let steps = steps.max(2);
        let kappa = 1.0 + 1.0 / (1.0 - delta);
        (1..=steps)
            .map(|k| {
                let cap = total * k as f64 / steps as f64;
                let prices: Vec<f64> = (0..n)
                    .map(|i| {
                        let v = f.singleton(i);
                        if v > delta * cap {
                            f64::INFINITY
                        } else {
                            price_scale * v
                        }
                    })
                    .collect();
                let prices = PriceVector::new(prices).map_err(|e| e.to_string())?;
                let set = capped_demand(&CappedQuery {
                    f,
                    cap,
                    delta,
                    prices: &prices,
                })
                .map_err(|e| e.to_string())?;
                let (_, exact) = exact_capped_demand(f, cap, &prices).map_err(|e| e.to_string())?;
                Ok(CurvePoint {
                    cap,
                    approx: capped_utility(f, cap, &prices, set),
                    exact,
                    bound: (exact / kappa - delta * cap).max(0.0),
                })
            })
            .collect()
    }
}

fn to_js<T: serde::Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

/// Generates an instance and solves it; JSON with the allocation, revenues
/// and, for small instances, the exact optimum.
#[wasm_bindgen(js_name = solveRandom)]
pub fn solve_random(n: usize, m: usize, class: &str, costs: &str, seed: u32) -> Result<String, JsError> {
    to_js(native::solve_random(n, m, class, costs, u64::from(seed)))
}

#[wasm_bindgen(js_name = costSweep)]
pub fn cost_sweep(n: usize, m: usize, class: &str, seed: u32, steps: usize, max_factor: f64) -> Result<String, JsError> {
    to_js(native::cost_sweep(n, m, class, u64::from(seed), steps, max_factor))
}

#[wasm_bindgen(js_name = cappedDemandCurve)]
pub fn capped_demand_curve(n: usize, seed: u32, delta: f64, price_scale: f64, steps: usize) -> Result<String, JsError> {
    to_js(native::capped_demand_curve(n, u64::from(seed), delta, price_scale, steps))
}
