//! Tree-translate sequences along infinite words and their certified limits.

use shrinking_wedge::covers;
use shrinking_wedge::{Error, Result, WedgeConfig, WordExpr};

fn show(text: &str, j: u32, bound: u32, cfg: &WedgeConfig) -> Result<()> {
    let w = WordExpr::parse(text, cfg)?;
    println!("# {text}, summand {j}, levels through {bound}");
    match covers::stabilize(&w, j, bound, cfg) {
        Ok(report) => print!("{}", report.to_text(cfg)),
        Err(Error::BoundTooSmall { needed, .. }) => println!("needs levels through {needed}"),
        Err(e) => println!("{e}"),
    }
    Ok(())
}

fn main() -> Result<()> {
    let cfg = WedgeConfig::integers();
    show("2:4 5:9", 2, 8, &cfg)?;
    show("2:1 5:1 2:1 7:1", 2, 10, &cfg)?;
    show("omega[diag 1 1 const 1]", 2, 6, &cfg)?;
    // a tail that starts late moves the value late
    show("2:1 omega[diag 6 1 const 1]", 2, 7, &cfg)?;
    show("2:1 omega[diag 6 1 const 1]", 2, 8, &cfg)?;
    // a letter below the target summand hides the earlier G_2 letter
    show("2:1 1:1 5:1", 2, 8, &cfg)?;
    Ok(())
}
