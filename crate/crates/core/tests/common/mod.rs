//! Brute-force oracles shared by the integration tests. They avoid the
//! library's search code and work from the definitions directly.
#![allow(dead_code)]

use std::collections::BTreeSet;

use causal_abstraction::intervention::enumerate_all;
use causal_abstraction::maps::{AssignmentMap, StateMap};
use causal_abstraction::{CausalModel, Intervention, InterventionMap, Limits, Value};

pub fn limits() -> Limits {
    Limits::default()
}

fn states(m: &CausalModel) -> Vec<Vec<Value>> {
    m.signature().state_space().iter().collect()
}

fn extends(state: &[Value], i: &Intervention) -> bool {
    i.pairs().iter().all(|&(k, v)| state[k] == v)
}

/// The induced intervention of `i`, found by comparing the image of its
/// restriction set with the restriction set of every high intervention.
pub fn omega_tau_brute(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    i: &Intervention,
) -> Option<Intervention> {
    let image: BTreeSet<Vec<Value>> =
        states(low).iter().filter(|s| extends(s, i)).map(|s| tau.apply(s).unwrap()).collect();
    let high_states = states(high);
    let matches: Vec<Intervention> = enumerate_all(high, &limits())
        .unwrap()
        .into_iter()
        .filter(|j| {
            let rst: BTreeSet<Vec<Value>> = high_states.iter().filter(|s| extends(s, j)).cloned().collect();
            rst == image
        })
        .collect();
    assert!(matches.len() <= 1, "two high interventions share a restriction set");
    matches.into_iter().next()
}

/// Whether some high context agrees with low context `u` on every
/// intervention in `i_l`.
pub fn correspondent_exists(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    omega: &InterventionMap,
    i_l: &[Intervention],
    u: &[Value],
) -> bool {
    high.signature().context_space().iter().any(|uh| {
        i_l.iter().all(|i| {
            let j = omega.get(i).expect("omega covers the allowed set");
            high.solve_under(&uh, j).unwrap() == tau.apply(&low.solve_under(u, i).unwrap()).unwrap()
        })
    })
}

/// Whether a compatible context map exists, by trying every map. `None`
/// when there are more than `cap` maps.
pub fn compatible_exists_by_enumeration(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    omega: &InterventionMap,
    i_l: &[Intervention],
    cap: u128,
) -> Option<bool> {
    let lc: Vec<Vec<Value>> = low.signature().context_space().iter().collect();
    let hc: Vec<Vec<Value>> = high.signature().context_space().iter().collect();
    let count = (hc.len() as u128).checked_pow(lc.len() as u32)?;
    if count > cap {
        return None;
    }
    let mut choice = vec![0usize; lc.len()];
    loop {
        let table = lc.iter().cloned().zip(choice.iter().map(|&h| hc[h].clone())).collect();
        let tau_u = AssignmentMap::table(table);
        let ok = lc.iter().all(|u| {
            let uh = tau_u.apply(u).unwrap();
            i_l.iter().all(|i| {
                high.solve_under(&uh, omega.get(i).unwrap()).unwrap()
                    == tau.apply(&low.solve_under(u, i).unwrap()).unwrap()
            })
        });
        if ok {
            return Some(true);
        }
        let mut k = 0;
        loop {
            if k == choice.len() {
                return Some(false);
            }
            choice[k] += 1;
            if choice[k] < hc.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}
