//! Counting black pixels: two overlapping counters against one merged
//! counter.

use causal_abstraction::corpus::{build_pixel, PixelVariant};
use causal_abstraction::report::CheckKind;
use causal_abstraction::{Limits, Result};

fn main() -> Result<()> {
    let limits = Limits::default();
    for variant in [PixelVariant::TwoCounter, PixelVariant::Merged] {
        let b = build_pixel(2, variant)?;
        println!("{}: {}", b.name, b.description);
        for kind in [CheckKind::Uniform, CheckKind::TauAbstraction, CheckKind::Strong, CheckKind::Constructive] {
            if let Some(r) = b.check(kind, &limits)? {
                println!("  {}", r.summary(b.low.signature(), b.high.signature()));
            }
        }
    }
    Ok(())
}
