//! The intervention map induced by a state map, on the or-coarsening of
//! three bits.

use causal_abstraction::abstraction::{compute_induced_sets, derive_omega_tau};
use causal_abstraction::corpus;
use causal_abstraction::{Intervention, Limits, Result};

fn main() -> Result<()> {
    let (b, _) = corpus::build_appendix_example()?;
    let (ls, hs) = (b.low.signature(), b.high.signature());
    let limits = Limits::default().with_cross_check();
    let sets = compute_induced_sets(&b.low, &b.high, &b.tau, &limits)?;
    for (i, j) in sets.omega.iter() {
        println!("{:>16} ↦ {}", i.display(ls).to_string(), j.display(hs));
    }
    for i in &sets.undefined {
        println!("{:>16} ↦ undefined", i.display(ls).to_string());
    }
    println!("{} low interventions induced, {} high reached", sets.low.len(), sets.high.len());

    let i = Intervention::from_named(ls, [("X3", 0)])?;
    let image = derive_omega_tau(&b.low, &b.high, &b.tau, &i, &limits)?;
    println!("{} ↦ {:?}", i.display(ls), image.map(|j| j.display(hs).to_string()));
    Ok(())
}
