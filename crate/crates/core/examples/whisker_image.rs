//! Neighbourhoods in the wedge-point fiber and the image test for families
//! of coefficients indexed by coset representatives.

use shrinking_wedge::whisker::{self, FiberNbhd, ImageVerdict, ThetaElement};
use shrinking_wedge::{Result, WedgeConfig, WordExpr};

fn verdict(name: &str, el: &ThetaElement, cfg: &WedgeConfig) -> Result<()> {
    match whisker::in_theta_image(el, cfg)? {
        ImageVerdict::InImage => {
            let counts: Vec<String> = (1..=el.level)
                .map(|k| whisker::projection_count(el, k, cfg).map(|c| format!("{}", c.unwrap_or(0))))
                .collect::<Result<_>>()?;
            println!("{name}: in image, projections per level [{}]", counts.join(" "));
        }
        ImageVerdict::NotInImage(w) => println!("{name}: not in image ({w})"),
    }
    Ok(())
}

fn main() -> Result<()> {
    let cfg = WedgeConfig::integers();
    let base = WordExpr::parse("1:1 omega[diag 4 1 const 1]", &cfg)?;
    let nbhd = FiberNbhd { base: base.clone(), depth: 3 };
    for cand in ["1:1 5:2 omega[diag 4 1 const 1]", "1:1 omega[diag 4 1 const 1] 2:1", "1:1"] {
        let c = WordExpr::parse(cand, &cfg)?;
        println!("{cand}: {:?}", whisker::in_nbhd(&c, &nbhd, 12, &cfg)?);
    }

    // one empty-word representative per summand, converging to the base point
    let good = ThetaElement::parse(
        "theta earring level 6\n\
         iso 2 1:1 3\n\
         tail limit e summand diag 1 1 escape diag 1 1 members e coeffs const 1\n",
        &cfg,
    )?;
    // powers that never leave the first circle
    let bad = ThetaElement::parse(
        "theta earring level 6\n\
         tail limit e summand diag 2 1 escape const 0 members diag 1 0 pow 1 coeffs const 1\n",
        &cfg,
    )?;
    verdict("good", &good, &cfg)?;
    verdict("bad", &bad, &cfg)?;

    let report = whisker::check_convergence(&good.support.tails[0], 20, &cfg)?;
    println!("good tail: {} samples, first failure {:?}", report.samples, report.first_failure());

    let sum = whisker::add_theta(&good, &good, &cfg)?;
    print!("good + good:\n{}", sum.to_text(&cfg));
    let zero = whisker::add_theta(&good, &whisker::neg_theta(&good), &cfg)?;
    print!("good - good:\n{}", zero.to_text(&cfg));
    Ok(())
}
