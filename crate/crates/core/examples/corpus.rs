//! The built-in fixture sets, driven through the same entry point the `wedge`
//! binary uses.

use clap::Parser;
use shrinking_wedge::cli::{self, Cli, CorpusName};

fn main() -> std::io::Result<()> {
    let dir = std::env::temp_dir().join(format!("wedge-corpus-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let out = dir.to_string_lossy().into_owned();
    for name in CorpusName::ALL {
        let n = name.as_str();
        let run = |args: &[&str]| {
            let cli = Cli::parse_from(std::iter::once("wedge").chain(args.iter().copied()));
            cli::run(&cli, &mut std::io::empty())
        };
        run(&["corpus", n, "--out", &out]);
        println!("== {n}");
        let cfg = format!("{out}/{n}.cfg");
        let words = format!("{out}/{n}.words");
        print!("{}", run(&["--config", &cfg, "reduce", &words]).stdout);
        for side in ["in", "out"] {
            let o = run(&["theta-check", "--upto", "3", &format!("{out}/{n}-{side}.theta")]);
            print!("{side}: {}{}", o.stdout, o.stderr);
        }
    }
    std::fs::remove_dir_all(&dir)
}
