//! A pair of models that is an exact transformation for one distribution
//! and a pair that is uniform only under the right intervention map.

use causal_abstraction::corpus;
use causal_abstraction::report::CheckKind;
use causal_abstraction::{Limits, Result};

fn main() -> Result<()> {
    let limits = Limits::default();
    for name in ["example3", "example4-omega12", "example4-identity"] {
        let b = corpus::by_name(name)?;
        println!("{name}: {}", b.description);
        for kind in [CheckKind::Exact, CheckKind::Uniform] {
            if let Some(r) = b.check(kind, &limits)? {
                println!("  {}", r.summary(b.low.signature(), b.high.signature()));
            }
        }
    }
    Ok(())
}
