//! Voters grouped into blocs: a uniform transformation on ad interventions
//! and a constructive abstraction once every induced intervention is
//! allowed.

use causal_abstraction::abstraction::{check_constructive, derive_omega_tau};
use causal_abstraction::corpus::build_voting;
use causal_abstraction::report::{partition_json, CheckKind};
use causal_abstraction::{Intervention, Limits, Result};

fn main() -> Result<()> {
    let limits = Limits::default();
    let b = build_voting(4, 2, 1)?;
    let (ls, hs) = (b.low.signature(), b.high.signature());
    let uniform = b.check(CheckKind::Uniform, &limits)?.expect("bundle has an intervention map");
    println!("{}", uniform.summary(ls, hs));

    let x1 = Intervention::from_named(ls, [("X1", 1)])?;
    let image = derive_omega_tau(&b.low, &b.high, &b.tau, &x1, &limits)?;
    println!("{} ↦ {}", x1.display(ls), image.map_or("undefined".into(), |j| j.display(hs).to_string()));

    let partition = b.partition.as_ref().expect("bundle has a partition");
    println!("partition {}", partition_json(partition, ls, hs));
    let r = check_constructive(&b.low, &b.high, &b.tau, partition, None, &limits)?;
    println!("{}", r.summary(ls, hs));
    Ok(())
}
