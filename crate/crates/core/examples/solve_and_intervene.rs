//! Build a model, solve it, intervene, and evaluate a causal formula.

use causal_abstraction::model::{CausalFormula, Formula};
use causal_abstraction::{Intervention, ModelBuilder, Result, VariableDecl};

fn main() -> Result<()> {
    let m = ModelBuilder::new()
        .exo(VariableDecl::binary("U1"))
        .exo(VariableDecl::binary("U2"))
        .endo(VariableDecl::binary("X1"), "U1")
        .endo(VariableDecl::binary("X2"), "X1 || U2")
        .endo(VariableDecl::range("Y", 3), "X1 + X2")
        .build()?;
    let sig = m.signature();

    for u in sig.context_space().iter() {
        println!("{} -> {}", sig.format_context(&u), sig.format_state(&m.solve(&u)?));
    }

    let i = Intervention::from_named(sig, [("X1", 0)])?;
    let u = vec![1, 0];
    println!("under {}: {}", i.display(sig), sig.format_state(&m.solve_under(&u, &i)?));

    // [X1 ← 0] (Y = 0)
    let f = CausalFormula { prefix: i, body: Formula::event(2, 0) };
    println!("[X1←0](Y=0) in context (1,0): {}", m.eval_formula(&u, &f)?);
    Ok(())
}
