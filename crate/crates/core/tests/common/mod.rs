#![allow(dead_code)]

use contract_core::generate::random_function;
use contract_core::instance::{AgentSet, FunctionClass, Instance, Params, SuccessFunction};
use contract_core::lp_engine::{estimate_grid, penalized_value, OraclePath};
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::Rng;

/// Optimum of the full column LP (every grid value, every eligible set),
/// solved with an independent LP solver. Feasible only for small `n`.
pub fn exhaustive_lp_optimum(inst: &Instance, params: &Params, path: OraclePath) -> f64 {
    let n = inst.n_agents();
    let m = inst.n_projects();
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let mut project_terms: Vec<Vec<(minilp::Variable, f64)>> = vec![Vec::new(); m];
    let mut agent_terms: Vec<Vec<(minilp::Variable, f64)>> = vec![Vec::new(); n];
    let mut any = false;
    for j in 0..m {
        for x in estimate_grid(inst, j) {
            let eligible: AgentSet = (0..n).filter(|&i| inst.singleton(j, i) <= params.delta * x).collect();
            for s in eligible.subsets() {
                if s.is_empty() {
                    continue;
                }
                let value = penalized_value(inst, params, path, j, x, s);
                let v = problem.add_var(value, (0.0, f64::INFINITY));
                any = true;
                project_terms[j].push((v, 1.0));
                for i in s.iter() {
                    agent_terms[i].push((v, 1.0));
                }
            }
        }
    }
    if !any {
        return 0.0;
    }
    for terms in project_terms.iter().chain(agent_terms.iter()) {
        if !terms.is_empty() {
            problem.add_constraint(terms.as_slice(), ComparisonOp::Le, 1.0);
        }
    }
    problem.solve().expect("column LP is feasible and bounded").objective()
}

/// One heavy agent per project plus light agents small enough to be
/// eligible for the top grid values, so that the column LP has real content.
pub fn structured_instance<R: Rng>(rng: &mut R, n: usize, m: usize, class: FunctionClass, cost_scale: f64) -> Instance {
    let delta = Params::default().delta;
    let top = (n.next_power_of_two()) as f64;
    let functions: Vec<SuccessFunction> = (0..m)
        .map(|j| {
            let heavy = j % n;
            let big: f64 = rng.gen_range(0.3..0.6);
            let unit = big * top * delta / 2.0;
            let small = |rng: &mut R| rng.gen_range(0.2..1.0) * unit;
            match class {
                FunctionClass::Additive => SuccessFunction::Additive {
                    values: (0..n).map(|i| if i == heavy { big } else { small(rng) }).collect(),
                },
                FunctionClass::BudgetAdditive => {
                    let values: Vec<f64> = (0..n).map(|i| if i == heavy { big } else { small(rng) }).collect();
                    let total: f64 = values.iter().sum();
                    let budget = total * rng.gen_range(0.8..1.0);
                    SuccessFunction::BudgetAdditive { values, budget }
                }
                FunctionClass::Coverage => {
                    // Element k belongs to agent k; agents also share a few light elements.
                    let mut weights: Vec<f64> = (0..n).map(|i| if i == heavy { big } else { 0.5 * small(rng) }).collect();
                    let shared = 2;
                    for _ in 0..shared {
                        weights.push(0.5 * small(rng));
                    }
                    let covers = (0..n)
                        .map(|i| {
                            let mut c = vec![i];
                            if i != heavy {
                                c.push(n + rng.gen_range(0..shared));
                            }
                            c
                        })
                        .collect();
                    SuccessFunction::Coverage { weights, covers }
                }
                FunctionClass::Xos => {
                    let k = rng.gen_range(1..=3);
                    let clauses = (0..k)
                        .map(|_| {
                            (0..n)
                                .map(|i| {
                                    if i == heavy {
                                        big * rng.gen_range(0.7..1.0)
                                    } else if rng.gen_bool(0.8) {
                                        small(rng)
                                    } else {
                                        0.0
                                    }
                                })
                                .collect()
                        })
                        .collect();
                    SuccessFunction::Xos { clauses }
                }
            }
        })
        .collect();
    let costs = (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let v = functions[j].singleton(i);
                    if cost_scale > 0.0 && v > 0.0 {
                        rng.gen_range(0.0..cost_scale * v)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    Instance::new(costs, functions).expect("structured instance is valid")
}

pub fn random_xos<R: Rng>(rng: &mut R, n: usize) -> SuccessFunction {
    random_function(rng, FunctionClass::Xos, n)
}

pub fn random_subset<R: Rng>(rng: &mut R, of: AgentSet, p: f64) -> AgentSet {
    of.iter().filter(|_| rng.gen_bool(p)).collect()
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let k = values.len() / 2;
    if values.len() % 2 == 1 {
        values[k]
    } else {
        0.5 * (values[k - 1] + values[k])
    }
}
