//! Distributions over contexts, pushed to states and through a state map.

use causal_abstraction::maps::AssignmentMap;
use causal_abstraction::prob::{interventional_dist, push_to_states, ratio, tau_pushforward, Distribution};
use causal_abstraction::report::rational_string;
use causal_abstraction::{Intervention, ModelBuilder, Result, VariableDecl};

fn main() -> Result<()> {
    let m = ModelBuilder::new()
        .exo(VariableDecl::binary("U1"))
        .exo(VariableDecl::binary("U2"))
        .endo(VariableDecl::binary("X1"), "U1")
        .endo(VariableDecl::binary("X2"), "U2")
        .endo(VariableDecl::range("S", 3), "X1 + X2")
        .build()?;
    let d = Distribution::new([
        (vec![0, 0], ratio(1, 3)),
        (vec![0, 1], ratio(1, 6)),
        (vec![1, 0], ratio(1, 6)),
        (vec![1, 1], ratio(1, 3)),
    ])?;
    let sig = m.signature();
    let show = |label: &str, d: &Distribution| {
        println!("{label}:");
        for (s, p) in d.iter() {
            println!("  {:?} {}", s, rational_string(p));
        }
    };
    show("states", &push_to_states(&m, &d)?);
    let i = Intervention::from_named(sig, [("X2", 1)])?;
    show(&format!("states under {}", i.display(sig)), &interventional_dist(&m, &d, &i)?);
    // keep only the sum
    let tau = AssignmentMap::projection(&[2]);
    show("sum only", &tau_pushforward(&tau, &push_to_states(&m, &d)?)?);
    Ok(())
}
