//! Reduced words in a free product with integer, cyclic and product-of-integer
//! summands: reduction, products, projections and coset splitting.

use shrinking_wedge::freeprod::{self, Alphabet, FiniteWord};
use shrinking_wedge::{Result, WedgeConfig};

fn main() -> Result<()> {
    let cfg = WedgeConfig::parse(
        "default integer\n\
         summand 2 cyclic 2\n\
         summand 4 integer2\n",
    )?;
    let w = |s: &str| FiniteWord::parse(s, &cfg);

    // letters from one summand merge, identities vanish
    let u = w("1:1 2:1 2:1 1:2 4:1,0")?;
    let v = w("4:-1,0 3:5")?;
    println!("u     = {}", u.display(&cfg));
    println!("v     = {}", v.display(&cfg));
    let uv = freeprod::multiply(&u, &v, &cfg)?;
    println!("u·v   = {}", uv.display(&cfg));
    println!("u⁻¹   = {}", freeprod::invert(&u, &cfg)?.display(&cfg));

    for k in 1..=4 {
        let p = freeprod::project_to_level(&uv, k, &cfg)?;
        println!("ρ_{k}(u·v) = {}", p.display(&cfg));
    }

    let x = w("2:1 1:3 2:1")?;
    let d = freeprod::decompose_nt(&x, 2, &cfg)?;
    println!(
        "{} = {} · 2:{}",
        x.display(&cfg),
        d.prefix.display(&cfg),
        cfg.format_elem(2, &d.tail)
    );

    // coset representatives for the second summand inside the level-3 product
    let alphabet = Alphabet::new().with_fallback(vec![shrinking_wedge::Elem::Int(1)]);
    let reps = freeprod::enumerate_nt(3, 2, 2, &cfg, &alphabet)?;
    let shown: Vec<String> = reps.iter().map(|r| r.display(&cfg).to_string()).collect();
    println!("nt(3, 2) up to length 2: {}", shown.join(", "));
    Ok(())
}
