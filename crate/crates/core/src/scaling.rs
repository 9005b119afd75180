//! Shrinking a team to a target value while keeping marginals large.
//!
//! Given `T ⊆ S`, a target `Ψ < f(T)` and `δ ∈ (0, 1]`, [`scale`] returns
//! `U ⊆ T` with `(1−δ)Ψ ≤ f(U) ≤ Ψ + max_{i∈T} f({i})` and
//! `f(i | U∖i) ≥ δ · f(i | S∖i)` for every `i ∈ U`. It removes agents one at
//! a time, always the one whose marginal in the current team is smallest
//! relative to its marginal in `S`, and returns the prefix of that schedule
//! with the best recorded ratio inside the window where the value crosses
//! `Ψ`.

use crate::error::{Error, Result};
use crate::instance::{AgentSet, Allocation, Instance, Params, SuccessFunction};
use crate::oracles::leave_one_out;
use crate::rounding::Witness;

#[derive(Clone, Copy, Debug)]
pub struct ScalingInput<'a> {
    pub f: &'a SuccessFunction,
    pub t: AgentSet,
    pub s: AgentSet,
    pub delta: f64,
    pub psi: f64,
}

/// Removes zero-marginal agents from `s` one at a time, lowest index first,
/// preferring agents outside `t`. `f(s)` is unchanged, and every remaining
/// agent ends with a positive marginal.
pub fn strip_zero_marginals(f: &SuccessFunction, mut s: AgentSet, t: AgentSet) -> (AgentSet, AgentSet) {
    loop {
        let zero = |i: &usize| leave_one_out(f, *i, s) <= 0.0;
        let next = s.difference(t).iter().find(zero).or_else(|| s.intersection(t).iter().find(zero));
        match next {
            Some(i) => s.remove(i),
            None => return (s, t.intersection(s)),
        }
    }
}

/// Removal schedule: `T_0 = T`, `T_s = T_{s−1} ∖ {i_s}`, and the ratios
/// `δ_s = f(i_s | T_s) / f(i_s | S∖i_s)`.
fn schedule(f: &SuccessFunction, t: AgentSet, s: AgentSet) -> (Vec<AgentSet>, Vec<f64>) {
    let mut prefixes = vec![t];
    let mut ratios = Vec::with_capacity(t.len());
    let mut cur = t;
    while !cur.is_empty() {
        let ratio = |i: usize| leave_one_out(f, i, cur) / leave_one_out(f, i, s);
        let mut best = cur.first().expect("non-empty");
        let mut best_ratio = ratio(best);
        for i in cur.iter().skip(1) {
            let r = ratio(i);
            if r < best_ratio {
                best = i;
                best_ratio = r;
            }
        }
        let next = cur.without(best);
        ratios.push((f.eval(cur) - f.eval(next)) / leave_one_out(f, best, s));
        prefixes.push(next);
        cur = next;
    }
    (prefixes, ratios)
}

/// See the module docs. Zero-marginal agents of `S` are stripped first.
pub fn scale(input: &ScalingInput<'_>) -> Result<AgentSet> {
    let f = input.f;
    if !input.t.is_subset(input.s) {
        return Err(Error::Precondition("T must be a subset of S".into()));
    }
    if !(input.delta > 0.0 && input.delta <= 1.0) {
        return Err(Error::Precondition(format!("delta must lie in (0, 1], got {}", input.delta)));
    }
    if input.s.span() > f.arity() {
        return Err(Error::AgentOutOfRange {
            agent: input.s.span() - 1,
            n_agents: f.arity(),
        });
    }
    let (s, t) = strip_zero_marginals(f, input.s, input.t);
    let ft = f.eval(t);
    if !(input.psi >= 0.0 && input.psi < ft) {
        return Err(Error::Precondition(format!("psi = {} must lie in [0, f(T) = {ft})", input.psi)));
    }
    let (prefixes, ratios) = schedule(f, t, s);
    let values: Vec<f64> = prefixes.iter().map(|&p| f.eval(p)).collect();
    let j_star = (1..values.len())
        .find(|&j| values[j] <= input.psi)
        .expect("the empty prefix has value 0 ≤ psi");
    let floor = (1.0 - input.delta) * values[j_star - 1];
    let k_star = (j_star..values.len())
        .find(|&k| values[k] <= floor)
        .expect("the empty prefix has value 0");
    let mut s_star = j_star;
    for s_idx in j_star..=k_star {
        if ratios[s_idx - 1] > ratios[s_star - 1] {
            s_star = s_idx;
        }
    }
    Ok(prefixes[s_star - 1])
}

/// Scales every project's rounded team against its witness column with
/// `Ψ = ψ · f_j(T_j)` and the scaling `δ` from `params`.
///
/// For `ψ = 1/128` and `δ = 1/2` each output satisfies
/// `f_j(U_j) ≥ f_j(T_j)/256` and `f_j(i | U_j∖i) ≥ √(2 c_ij f_j(U_j))`,
/// so its revenue is at least `f_j(U_j)/2`.
pub fn apply_scaling(inst: &Instance, params: &Params, rounded: &Allocation, witnesses: &[Option<Witness>]) -> Result<Allocation> {
    let m = inst.n_projects();
    if witnesses.len() != m {
        return Err(Error::Precondition(format!("{} witnesses for {m} projects", witnesses.len())));
    }
    let mut out = Allocation::empty(inst.n_agents());
    for (j, t) in rounded.sets(m).into_iter().enumerate() {
        if t.is_empty() {
            continue;
        }
        let Some(w) = witnesses[j] else {
            return Err(Error::Precondition(format!("project {j} has a team but no witness column")));
        };
        if !t.is_subset(w.set) {
            return Err(Error::Precondition(format!(
                "project {j}: rounded team {t:?} is not inside its witness {:?}",
                w.set
            )));
        }
        let f = inst.function(j);
        let (s, t) = strip_zero_marginals(f, w.set, t);
        let ft = f.eval(t);
        if t.is_empty() || ft <= 0.0 {
            continue;
        }
        let u = scale(&ScalingInput {
            f,
            t,
            s,
            delta: params.scale_delta,
            psi: params.psi_factor * ft,
        })?;
        for i in u.iter() {
            out.assign(i, Some(j));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[usize]) -> AgentSet {
        xs.iter().copied().collect()
    }

    #[test]
    fn singleton_team_is_kept() {
        let f = SuccessFunction::Additive { values: vec![0.3] };
        let u = scale(&ScalingInput {
            f: &f,
            t: set(&[0]),
            s: set(&[0]),
            delta: 0.5,
            psi: 0.1,
        })
        .unwrap();
        assert_eq!(u, set(&[0]));
    }

    #[test]
    fn four_equal_items() {
        let f = SuccessFunction::Additive { values: vec![0.1; 4] };
        let all = AgentSet::full(4);
        let u = scale(&ScalingInput {
            f: &f,
            t: all,
            s: all,
            delta: 0.5,
            psi: 0.15,
        })
        .unwrap();
        let fu = f.eval(u);
        assert!(fu >= 0.5 * 0.15 - 1e-12);
        assert!(fu <= 0.15 + 0.1 + 1e-12);
        for i in u.iter() {
            assert!(leave_one_out(&f, i, u) >= 0.5 * leave_one_out(&f, i, all) - 1e-12);
        }
    }

    #[test]
    fn psi_at_or_above_value_rejected() {
        let f = SuccessFunction::Additive { values: vec![0.1, 0.1] };
        let input = ScalingInput {
            f: &f,
            t: set(&[0]),
            s: set(&[0, 1]),
            delta: 0.5,
            psi: 0.1,
        };
        assert!(matches!(scale(&input), Err(Error::Precondition(_))));
        let input = ScalingInput { t: set(&[0, 1]), s: set(&[0]), psi: 0.0, ..input };
        assert!(scale(&input).is_err());
    }

    #[test]
    fn stripping_prefers_agents_outside_t() {
        // Both agents have zero marginal in {0, 1}; dropping agent 1 keeps T intact.
        let f = SuccessFunction::Xos {
            clauses: vec![vec![0.5, 0.0], vec![0.0, 0.5]],
        };
        let (s, t) = strip_zero_marginals(&f, set(&[0, 1]), set(&[0]));
        assert_eq!(s, set(&[0]));
        assert_eq!(t, set(&[0]));
    }

    #[test]
    fn empty_and_zero_teams_scale_to_empty() {
        let inst = Instance::new(
            vec![vec![0.0], vec![0.0]],
            vec![SuccessFunction::Additive { values: vec![0.0, 0.2] }],
        )
        .unwrap();
        let params = Params::default();
        let w = Some(Witness {
            set: set(&[0, 1]),
            estimate: 0.2,
        });
        let none = apply_scaling(&inst, &params, &Allocation::empty(2), &[w]).unwrap();
        assert!(none.is_empty());
        let zero_team = Allocation::from_assignment(vec![Some(0), None]);
        assert!(apply_scaling(&inst, &params, &zero_team, &[w]).unwrap().is_empty());
    }
}
