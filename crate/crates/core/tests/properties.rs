use contract_core::bruteforce::{exact_capped_demand, exact_opt};
use contract_core::capped_demand::{capped_demand, capped_utility, CappedQuery};
use contract_core::generate::{random_function, CostRegime, GenSpec};
use contract_core::instance::{AgentSet, Allocation, FunctionClass, Instance, Params, SuccessFunction};
use contract_core::oracles::{demand_with_utility, PriceVector};
use contract_core::pipeline::{revenue, solve};
use contract_core::rounding::{round_with_witnesses, val, SupportDistribution, SupportEntry, Witness};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn class_strategy() -> impl Strategy<Value = FunctionClass> {
    prop::sample::select(FunctionClass::ALL.to_vec())
}

fn seeded_function(seed: u64, class: FunctionClass, n: usize) -> SuccessFunction {
    random_function(&mut ChaCha8Rng::seed_from_u64(seed), class, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn demand_maximizes_utility(seed in any::<u64>(), n in 1usize..=10, xos in any::<bool>(), scale in 0.0f64..1.5) {
        let class = if xos { FunctionClass::Xos } else { FunctionClass::Additive };
        let f = seeded_function(seed, class, n);
        let prices = PriceVector::new((0..n).map(|i| f.singleton(i) * scale).collect()).unwrap();
        let (set, utility) = demand_with_utility(&f, &prices).unwrap();
        prop_assert!((utility - (f.eval(set) - prices.total(set))).abs() < 1e-12);
        let best = AgentSet::full(n)
            .subsets()
            .map(|s| f.eval(s) - prices.total(s))
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((utility - best).abs() < 1e-9);
    }

    #[test]
    fn capped_demand_meets_its_bound(seed in any::<u64>(), n in 1usize..=10, cap_frac in 0.05f64..1.0, d in 0usize..3) {
        let delta = [0.25, 0.125, 1.0 / 129.0][d];
        let f = seeded_function(seed, FunctionClass::Xos, n);
        let cap = f.max_value() * cap_frac + 1e-6;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let prices: Vec<f64> = (0..n)
            .map(|i| if f.singleton(i) > delta * cap { f64::INFINITY } else { f.singleton(i) * rng.gen_range(0.0..1.0) })
            .collect();
        let prices = PriceVector::new(prices).unwrap();
        let out = capped_demand(&CappedQuery { f: &f, cap, delta, prices: &prices }).unwrap();
        prop_assert!(out.is_subset(prices.finite_agents()));
        let (_, opt) = exact_capped_demand(&f, cap, &prices).unwrap();
        let bound = opt / (1.0 + 1.0 / (1.0 - delta)) - delta * cap;
        prop_assert!(capped_utility(&f, cap, &prices, out) >= bound - 1e-9);
    }

    #[test]
    fn submodular_classes_have_diminishing_returns(seed in any::<u64>(), n in 2usize..=9, coverage in any::<bool>(), a in any::<u64>(), b in any::<u64>()) {
        let class = if coverage { FunctionClass::Coverage } else { FunctionClass::BudgetAdditive };
        let f = seeded_function(seed, class, n);
        let small = AgentSet::from_bits(a).intersection(AgentSet::full(n));
        let large = small.union(AgentSet::from_bits(b).intersection(AgentSet::full(n)));
        prop_assert!(f.eval(small) <= f.eval(large) + 1e-12);
        for i in AgentSet::full(n).difference(large).iter() {
            let gain_small = f.eval(small.with(i)) - f.eval(small);
            let gain_large = f.eval(large.with(i)) - f.eval(large);
            prop_assert!(gain_large <= gain_small + 1e-12);
        }
    }

    #[test]
    fn every_class_is_monotone_and_normalized(seed in any::<u64>(), n in 1usize..=10, class in class_strategy(), a in any::<u64>()) {
        let f = seeded_function(seed, class, n);
        prop_assert_eq!(f.eval(AgentSet::EMPTY), 0.0);
        let s = AgentSet::from_bits(a).intersection(AgentSet::full(n));
        for i in AgentSet::full(n).difference(s).iter() {
            prop_assert!(f.eval(s.with(i)) >= f.eval(s) - 1e-12);
        }
        prop_assert!(f.eval(AgentSet::full(n)) <= 1.0 + 1e-12);
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), n in 1usize..=8, m in 1usize..=4, class in class_strategy(), c in 0usize..3) {
        let inst = GenSpec { n, m, class, costs: CostRegime::ALL[c], seed }.generate().unwrap();
        let back = Instance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(&back, &inst);
    }

    #[test]
    fn dropping_an_overpaid_agent_helps(values in prop::collection::vec(0.01f64..0.2, 2..6), costs in prop::collection::vec(0.0f64..0.05, 6)) {
        // Additive: removing i raises revenue exactly when t_i f(S) > v_i (1 − Σ_{k≠i} t_k).
        let n = values.len();
        let inst = Instance::new(
            costs[..n].iter().map(|&c| vec![c]).collect(),
            vec![SuccessFunction::Additive { values: values.clone() }],
        ).unwrap();
        let all = Allocation::from_assignment(vec![Some(0); n]);
        let base = revenue(&inst, &all).unwrap().total_revenue;
        let shares: Vec<f64> = (0..n).map(|i| costs[i] / values[i]).collect();
        let total_value: f64 = values.iter().sum();
        let total_share: f64 = shares.iter().sum();
        for i in 0..n {
            let mut assignment = vec![Some(0); n];
            assignment[i] = None;
            let dropped = revenue(&inst, &Allocation::from_assignment(assignment)).unwrap().total_revenue;
            let lhs = shares[i] * total_value;
            let rhs = values[i] * (1.0 - (total_share - shares[i]));
            if lhs > rhs + 1e-12 {
                prop_assert!(dropped >= base - 1e-12);
            } else if lhs < rhs - 1e-12 {
                prop_assert!(dropped <= base + 1e-12);
            }
        }
    }

    #[test]
    fn rounding_keeps_half(seed in any::<u64>(), n in 1usize..=8, m in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let functions: Vec<SuccessFunction> = (0..m).map(|_| random_function(&mut rng, FunctionClass::Xos, n)).collect();
        let inst = Instance::new(vec![vec![0.0; m]; n], functions).unwrap();
        // Random columns, then scaled down until every row is feasible.
        let mut supports: Vec<Vec<SupportEntry>> = vec![Vec::new(); m];
        for support in supports.iter_mut() {
            for _ in 0..rng.gen_range(0..4) {
                let set: AgentSet = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
                if set.is_empty() || support.iter().any(|e| e.set == set) {
                    continue;
                }
                support.push(SupportEntry { set, probability: rng.gen_range(0.0..1.0), witness: Witness { set, estimate: 1.0 } });
            }
        }
        let mut dist = SupportDistribution { supports };
        let load = (0..m).map(|j| dist.project_mass(j)).chain((0..n).map(|i| dist.agent_mass(i))).fold(1.0, f64::max);
        for e in dist.supports.iter_mut().flatten() {
            e.probability /= load;
        }
        let rounded = round_with_witnesses(&dist, &inst).unwrap();
        let sets = rounded.allocation.sets(m);
        let total: f64 = sets.iter().enumerate().map(|(j, &s)| inst.function(j).eval(s)).sum();
        let projects: Vec<usize> = (0..m).collect();
        prop_assert!(total >= 0.5 * val(&dist, &inst, &projects, inst.all_agents()) - 1e-9);
        for (j, &s) in sets.iter().enumerate() {
            if !s.is_empty() {
                let w = rounded.witnesses[j].unwrap();
                prop_assert!(s.is_subset(w.set));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solve_is_sound_and_repeatable(seed in any::<u64>(), n in 1usize..=6, m in 1usize..=3, class in class_strategy(), c in 0usize..3) {
        let inst = GenSpec { n, m, class, costs: CostRegime::ALL[c], seed }.generate().unwrap();
        let params = Params::default();
        let a = solve(&inst, &params).unwrap();
        let b = solve(&inst, &params).unwrap();
        prop_assert_eq!(&a, &b);
        let opt = exact_opt(&inst, &params).unwrap().revenue;
        prop_assert!(a.total_revenue >= 0.0);
        prop_assert!(a.total_revenue <= opt + 1e-9);
        let recomputed = revenue(&inst, &a.allocation).unwrap().total_revenue;
        prop_assert!((recomputed - a.total_revenue).abs() < 1e-12);
    }
}
