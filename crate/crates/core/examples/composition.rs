//! Chaining two uniform transformations gives a uniform transformation.

use causal_abstraction::random::{random_chain, ModelShape};
use causal_abstraction::transform::{check_uniform, compose_transformations};
use causal_abstraction::{Limits, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let limits = Limits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut shown = 0;
    while shown < 5 {
        let c = random_chain(&mut rng, ModelShape::default(), &limits)?;
        let first = check_uniform(&c.m1, &c.m2, &c.tau1, &c.omega1, &limits)?.holds;
        let second = check_uniform(&c.m2, &c.m3, &c.tau2, &c.omega2, &limits)?.holds;
        if !(first && second) {
            continue;
        }
        let (tau, omega) = compose_transformations(&c.m1, (&c.tau1, &c.omega1), (&c.tau2, &c.omega2), &limits)?;
        let composed = check_uniform(&c.m1, &c.m3, &tau, &omega, &limits)?;
        println!(
            "{} → {} → {} variables: composed {}",
            c.m1.signature().endogenous().len(),
            c.m2.signature().endogenous().len(),
            c.m3.signature().endogenous().len(),
            composed.summary(c.m1.signature(), c.m3.signature())
        );
        shown += 1;
    }
    Ok(())
}
