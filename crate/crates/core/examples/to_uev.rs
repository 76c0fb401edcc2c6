//! Rewrite a model whose variables share exogenous parents into one where
//! each has its own, and confirm the two agree under every intervention.

use causal_abstraction::model::check_uev;
use causal_abstraction::prob::{equivalent, ratio, to_uev, Distribution};
use causal_abstraction::{Limits, ModelBuilder, Result, VariableDecl};

fn main() -> Result<()> {
    let m = ModelBuilder::new()
        .exo(VariableDecl::binary("U"))
        .exo(VariableDecl::binary("V"))
        .endo(VariableDecl::binary("X"), "U && V")
        .endo(VariableDecl::binary("Y"), "ite(X == 1, U, 1 - V)")
        .build()?;
    let d = Distribution::new([(vec![0, 0], ratio(1, 2)), (vec![1, 1], ratio(1, 4)), (vec![1, 0], ratio(1, 4))])?;
    let limits = Limits::default();
    println!("original uev: {}", check_uev(&m, &limits)?.holds);

    let (u, du) = to_uev(&m, &d, &limits)?;
    let sig = u.signature();
    for (decl, eq) in sig.endogenous().iter().zip(u.equations()) {
        println!("{} = {}", decl.name, sig.render_expr(eq));
    }
    println!("rewritten uev: {}", check_uev(&u, &limits)?.holds);
    let eq = equivalent(&m, &d, &u, &du, None, &limits)?;
    println!("equivalent on {} interventions: {}", eq.interventions.len(), eq.holds);
    Ok(())
}
