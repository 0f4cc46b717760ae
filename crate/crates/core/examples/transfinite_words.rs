//! Infinite words written with block rules: projections to finite levels,
//! local normal forms and level-by-level comparison.

use shrinking_wedge::transfinite::{self, Agreement};
use shrinking_wedge::{Result, WedgeConfig, WordExpr};

fn main() -> Result<()> {
    let cfg = WedgeConfig::integers();
    let x = |s: &str| WordExpr::parse(s, &cfg);

    // one loop around every circle, in order
    let a = x("omega[diag 1 1 const 1]")?;
    // the reverse order type, alternating signs on odd circles
    let b = x("omega*[diag 1 2 cycle 1 -1]")?;
    for k in [1, 3, 5] {
        println!("ρ_{k}(a)   = {}", transfinite::project_expr(&a, k, &cfg)?.display(&cfg));
        println!("ρ_{k}(b)   = {}", transfinite::project_expr(&b, k, &cfg)?.display(&cfg));
    }

    let ab = transfinite::multiply_expr(&a, &b);
    let back = transfinite::multiply_expr(&ab, &transfinite::invert_expr(&b, &cfg)?);
    println!("a·b·b⁻¹ normalizes to {}", transfinite::normalize(&back, &cfg)?.display(&cfg));

    let peeled = x("1:-1 omega[diag 1 1 const 1]")?;
    println!("{} → {}", peeled.display(&cfg), transfinite::normalize(&peeled, &cfg)?.display(&cfg));

    // equal projections through K are all a finite check can offer
    let c = x("( 1:1 omega[diag 2 1 const 1] )")?;
    match transfinite::equal_up_to(&a, &c, 12, &cfg)? {
        Agreement::AgreeThrough(k) => println!("a and c agree through level {k}"),
        Agreement::FirstDifference(k) => println!("a and c differ at level {k}"),
    }
    match transfinite::equal_up_to(&a, &b, 12, &cfg)? {
        Agreement::AgreeThrough(k) => println!("a and b agree through level {k}"),
        Agreement::FirstDifference(k) => println!("a and b differ at level {k}"),
    }
    println!("terminal summand of b: {:?}", transfinite::terminal_summand(&b, &cfg)?);
    println!("terminal summand of a: {:?}", transfinite::terminal_summand(&a, &cfg)?);
    Ok(())
}
