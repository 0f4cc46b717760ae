//! Copies of the summand covers inside the cover of a finite wedge, how the
//! bonding map folds them down a level, and the attachment tree as DOT.
//!
//! `cargo run --example atlas_dot > atlas.dot && dot -Tsvg atlas.dot`

use shrinking_wedge::covers::{self, BondingImage};
use shrinking_wedge::freeprod::Alphabet;
use shrinking_wedge::{Result, SummandSpec, WedgeConfig};

fn main() -> Result<()> {
    let cfg = WedgeConfig::uniform(SummandSpec::cyclic(2)?);
    let atlas = covers::build_atlas(3, 2, &cfg, &Alphabet::new())?;
    eprintln!("{} copies, {} attachments", atlas.copies.len(), atlas.attachments.len());
    for c in &atlas.copies {
        let fold = match covers::bonding_image(c, &cfg)? {
            BondingImage::Collapsed(p) => format!("collapses to {}", p.display(&cfg)),
            BondingImage::MappedTo { target, deck } => format!(
                "maps to {} by {}",
                target.display(&cfg),
                cfg.format_elem(c.summand, &deck)
            ),
        };
        let beta = covers::tree_translate(c, &cfg)?;
        eprintln!("{}  β = {}  {fold}", c.display(&cfg), cfg.format_elem(c.summand, &beta));
    }
    print!("{}", covers::emit_atlas_dot(&atlas, &cfg)?);
    Ok(())
}
