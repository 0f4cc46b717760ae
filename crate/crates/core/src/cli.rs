//! Command-line surface. [`run`] is pure apart from the files it is asked to
//! read or write, so it can be driven from tests without spawning a process.
//!
//! Exit codes: 0 for results and definitive verdicts, 1 for input errors,
//! 2 for inconclusive verdicts.

use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::covers;
use crate::error::{Error, Result};
use crate::freeprod::{self, Alphabet, FiniteWord};
use crate::summands::{Index, TableGroup, WedgeConfig};
use crate::syntax::content_lines;
use crate::transfinite::{self, Agreement, WordExpr};
use crate::whisker::{self, ImageVerdict, ThetaElement};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wedge", version, about = "Word arithmetic, cover atlases and image checks for shrinking wedges")]
pub struct Cli {
    /// Wedge configuration file; `default integer` when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Local normal form of each expression.
    Reduce { input: Option<PathBuf> },
    /// Product of the first two expressions.
    Mul { input: Option<PathBuf> },
    /// Inverse of each expression.
    Inv { input: Option<PathBuf> },
    /// Projection of each expression onto summands `1..=level`.
    Project {
        #[arg(long)]
        level: Index,
        input: Option<PathBuf>,
    },
    /// Compares the first two expressions level by level.
    Equal {
        #[arg(long)]
        upto: Index,
        input: Option<PathBuf>,
    },
    /// Splits the terminal letter of the given summand off each finite word.
    Decompose {
        #[arg(long)]
        summand: Index,
        input: Option<PathBuf>,
    },
    /// Tree-translate sequence of an expression and its certified limit.
    Stabilize {
        #[arg(long)]
        summand: Index,
        #[arg(long)]
        upto: Index,
        input: Option<PathBuf>,
    },
    /// Copies and attachments in the cover of the level-k wedge.
    Atlas {
        #[arg(long)]
        level: Index,
        #[arg(long)]
        maxlen: usize,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Letters used for summands without finitely many elements.
        #[arg(long, allow_hyphen_values = true)]
        alphabet: Option<String>,
    },
    /// Coset representatives not ending in the given summand.
    NtEnum {
        #[arg(long)]
        level: Index,
        #[arg(long)]
        summand: Index,
        #[arg(long)]
        maxlen: usize,
        #[arg(long, allow_hyphen_values = true)]
        alphabet: Option<String>,
    },
    /// Image verdict for a coefficient family.
    ThetaCheck {
        /// Levels reported; defaults to the level in the file header.
        #[arg(long)]
        upto: Option<Index>,
        input: Option<PathBuf>,
    },
    /// Writes a fixture set: configuration, words and two families.
    Corpus {
        name: CorpusName,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorpusName {
    Earring,
    RpWedge,
    ToriWedge,
}

impl CorpusName {
    pub const ALL: [CorpusName; 3] = [CorpusName::Earring, CorpusName::RpWedge, CorpusName::ToriWedge];

    pub fn as_str(&self) -> &'static str {
        match self {
            CorpusName::Earring => "earring",
            CorpusName::RpWedge => "rp-wedge",
            CorpusName::ToriWedge => "tori-wedge",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }
}

/// Runs a parsed command, reading stdin only when no input file is named.
pub fn run(cli: &Cli, stdin: &mut dyn Read) -> Outcome {
    match execute(cli, stdin) {
        Ok(o) => o,
        Err(e) => Outcome {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn read_path(p: &Path) -> Result<String> {
    fs::read_to_string(p).map_err(|source| Error::Io {
        path: p.display().to_string(),
        source,
    })
}

fn write_path(p: &Path, text: &str) -> Result<()> {
    fs::write(p, text).map_err(|source| Error::Io {
        path: p.display().to_string(),
        source,
    })
}

fn read_input(input: &Option<PathBuf>, stdin: &mut dyn Read) -> Result<String> {
    match input {
        Some(p) => read_path(p),
        None => {
            let mut s = String::new();
            stdin.read_to_string(&mut s).map_err(|source| Error::Io {
                path: "<stdin>".into(),
                source,
            })?;
            Ok(s)
        }
    }
}

/// Loads a configuration file, resolving table paths against its directory.
pub fn load_config(path: &Path) -> Result<WedgeConfig> {
    let text = read_path(path)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    WedgeConfig::parse_with(&text, |rel| {
        let p = dir.join(rel);
        TableGroup::parse(rel, &read_path(&p)?)
    })
}

fn config(cli: &Cli) -> Result<WedgeConfig> {
    match &cli.config {
        Some(p) => load_config(p),
        None => Ok(WedgeConfig::integers()),
    }
}

fn exprs(text: &str, cfg: &WedgeConfig) -> Result<Vec<WordExpr>> {
    content_lines(text)
        .map(|(no, line)| WordExpr::parse_line(line, no, cfg))
        .collect()
}

fn two_exprs(text: &str, cfg: &WedgeConfig) -> Result<(WordExpr, WordExpr)> {
    let mut v = exprs(text, cfg)?;
    if v.len() != 2 {
        return Err(Error::Mismatch(format!(
            "expected exactly two expressions, found {}",
            v.len()
        )));
    }
    let b = v.pop().unwrap();
    Ok((v.pop().unwrap(), b))
}

/// Finite words print in word syntax, anything else in expression syntax.
pub fn format_expr(w: &WordExpr, cfg: &WedgeConfig) -> String {
    let lits: Option<Vec<_>> = match w {
        WordExpr::Empty => Some(vec![]),
        WordExpr::Lit(l) => Some(vec![l.clone()]),
        WordExpr::Concat(parts) => parts
            .iter()
            .map(|p| match p {
                WordExpr::Lit(l) => Some(l.clone()),
                _ => None,
            })
            .collect(),
        _ => None,
    };
    match lits.and_then(|ls| freeprod::reduce(&ls, cfg).ok()) {
        Some(fw) => fw.display(cfg).to_string(),
        None => w.display(cfg).to_string(),
    }
}

fn alphabet(spec: &Option<String>, cfg: &WedgeConfig) -> Result<Alphabet> {
    let Some(text) = spec else {
        return Ok(Alphabet::new());
    };
    // Literals are parsed against the default summand; explicit finite
    // summands enumerate their own elements.
    let mut elems = Vec::new();
    let probe = cfg
        .default_spec()
        .ok_or_else(|| Error::InvalidConfig("an alphabet needs a default summand".into()))?;
    for tok in text.split_whitespace() {
        let e = probe.parse_elem(tok).ok_or_else(|| Error::BadElement {
            summand: 0,
            msg: format!("`{tok}` is not an element of {probe}"),
        })?;
        elems.push(e);
    }
    let mut a = Alphabet::new();
    for (&j, g) in cfg.explicit() {
        if let Some(all) = g.elements() {
            a = a.with(j, all);
        }
    }
    Ok(a.with_fallback(elems))
}

fn execute(cli: &Cli, stdin: &mut dyn Read) -> Result<Outcome> {
    let cfg = config(cli)?;
    let mut out = String::new();
    match &cli.command {
        Command::Reduce { input } => {
            for w in exprs(&read_input(input, stdin)?, &cfg)? {
                let n = transfinite::normalize(&w, &cfg)?;
                let _ = writeln!(out, "{}", format_expr(&n, &cfg));
            }
        }
        Command::Mul { input } => {
            let (u, v) = two_exprs(&read_input(input, stdin)?, &cfg)?;
            let n = transfinite::normalize(&transfinite::multiply_expr(&u, &v), &cfg)?;
            let _ = writeln!(out, "{}", format_expr(&n, &cfg));
        }
        Command::Inv { input } => {
            for w in exprs(&read_input(input, stdin)?, &cfg)? {
                let n = transfinite::normalize(&transfinite::invert_expr(&w, &cfg)?, &cfg)?;
                let _ = writeln!(out, "{}", format_expr(&n, &cfg));
            }
        }
        Command::Project { level, input } => {
            for w in exprs(&read_input(input, stdin)?, &cfg)? {
                let p = transfinite::project_expr(&w, *level, &cfg)?;
                let _ = writeln!(out, "{}", p.display(&cfg));
            }
        }
        Command::Equal { upto, input } => {
            let (u, v) = two_exprs(&read_input(input, stdin)?, &cfg)?;
            match transfinite::equal_up_to(&u, &v, *upto, &cfg)? {
                Agreement::FirstDifference(k) => {
                    let _ = writeln!(out, "differ at level {k}");
                }
                Agreement::AgreeThrough(k) => {
                    if transfinite::structurally_equal(&u, &v, &cfg)? {
                        let _ = writeln!(out, "identical");
                    } else {
                        let _ = writeln!(out, "agree through level {k}");
                        return Ok(Outcome {
                            code: EXIT_INCONCLUSIVE,
                            stdout: out,
                            stderr: String::new(),
                        });
                    }
                }
            }
        }
        Command::Decompose { summand, input } => {
            let text = read_input(input, stdin)?;
            for (no, line) in content_lines(&text) {
                let w = FiniteWord::parse(line, &cfg).map_err(|e| relocate(e, no))?;
                let d = freeprod::decompose_nt(&w, *summand, &cfg)?;
                let _ = writeln!(
                    out,
                    "prefix {} tail {}:{}",
                    d.prefix.display(&cfg),
                    summand,
                    cfg.format_elem(*summand, &d.tail)
                );
            }
        }
        Command::Stabilize {
            summand,
            upto,
            input,
        } => {
            let text = read_input(input, stdin)?;
            let ws = exprs(&text, &cfg)?;
            let [w] = ws.as_slice() else {
                return Err(Error::Mismatch(format!(
                    "expected one expression, found {}",
                    ws.len()
                )));
            };
            out = covers::stabilize(w, *summand, *upto, &cfg)?.to_text(&cfg);
        }
        Command::Atlas {
            level,
            maxlen,
            dot,
            alphabet: alpha,
        } => {
            let a = covers::build_atlas(*level, *maxlen, &cfg, &alphabet(alpha, &cfg)?)?;
            let _ = writeln!(out, "copies {}", a.copies.len());
            for c in &a.copies {
                let beta = covers::tree_translate(c, &cfg)?;
                let _ = writeln!(
                    out,
                    "copy {} {} beta {}",
                    c.summand,
                    c.index.display(&cfg),
                    cfg.format_elem(c.summand, &beta)
                );
            }
            let _ = writeln!(out, "attachments {}", a.attachments.len());
            for e in &a.attachments {
                let _ = writeln!(out, "attach {} {} at {}", e.a, e.b, e.point.display(&cfg));
            }
            if let Some(p) = dot {
                write_path(p, &covers::emit_atlas_dot(&a, &cfg)?)?;
            }
        }
        Command::NtEnum {
            level,
            summand,
            maxlen,
            alphabet: alpha,
        } => {
            for w in freeprod::enumerate_nt(*level, *summand, *maxlen, &cfg, &alphabet(alpha, &cfg)?)? {
                let _ = writeln!(out, "{}", w.display(&cfg));
            }
        }
        Command::ThetaCheck { upto, input } => {
            let text = read_input(input, stdin)?;
            let cfg = match &cli.config {
                Some(_) => cfg,
                None => theta_config(&text, input.as_deref())?,
            };
            let el = ThetaElement::parse(&text, &cfg)?;
            let bound = upto.unwrap_or(el.level);
            match whisker::in_theta_image(&el, &cfg)? {
                ImageVerdict::InImage => {
                    let _ = writeln!(out, "in-image");
                    for j in 1..=bound {
                        if let Some(n) = whisker::projection_count(&el, j, &cfg)? {
                            let _ = writeln!(out, "level {j} projections {n}");
                        }
                    }
                }
                ImageVerdict::NotInImage(w) => {
                    let _ = writeln!(out, "not-in-image {w}");
                }
            }
        }
        Command::Corpus { name, out: dir } => {
            fs::create_dir_all(dir).map_err(|source| Error::Io {
                path: dir.display().to_string(),
                source,
            })?;
            for (file, body) in corpus(*name) {
                let p = dir.join(&file);
                write_path(&p, &body)?;
                let _ = writeln!(out, "wrote {}", p.display());
            }
        }
    }
    Ok(Outcome::ok(out))
}

fn relocate(e: Error, line: usize) -> Error {
    match e {
        Error::Parse { pos, msg } => Error::parse(
            crate::error::Pos {
                line,
                col: pos.col,
            },
            msg,
        ),
        other => other,
    }
}

/// Configuration named in a theta header: a file next to the theta file, or
/// one of the corpus names.
fn theta_config(text: &str, theta_path: Option<&Path>) -> Result<WedgeConfig> {
    let reference = content_lines(text)
        .next()
        .and_then(|(_, l)| l.split_whitespace().nth(1))
        .unwrap_or("");
    if let Some(dir) = theta_path.and_then(Path::parent) {
        let p = dir.join(reference);
        if p.is_file() {
            return load_config(&p);
        }
    }
    let stem = reference.strip_suffix(".cfg").unwrap_or(reference);
    match CorpusName::ALL.iter().find(|c| c.as_str() == stem) {
        Some(c) => WedgeConfig::parse(&corpus_config(*c)),
        None => Err(Error::InvalidConfig(format!(
            "cannot resolve configuration `{reference}`; pass --config"
        ))),
    }
}

fn corpus_config(name: CorpusName) -> String {
    match name {
        CorpusName::Earring => "default integer\n",
        CorpusName::RpWedge => "default cyclic 2\n",
        CorpusName::ToriWedge => "default integer2\n",
    }
    .to_string()
}

/// The fixture files of a corpus, as `(file name, contents)`.
pub fn corpus(name: CorpusName) -> Vec<(String, String)> {
    let n = name.as_str();
    let cfg_name = format!("{n}.cfg");
    let (words, inside, outside) = match name {
        CorpusName::Earring => (
            "1:1 2:-1 1:1\n\
             omega[diag 1 1 const 1]\n\
             ( 1:1 omega*[diag 2 1 const -1] )\n\
             ( 2:1 5:1 2:1 7:1 )\n\
             ( omega[diag 1 2 cycle 1 -1] 2:3 )\n",
            "iso 1 e 1\n\
             iso 2 ( 1:1 3:-2 ) 5\n\
             tail limit e summand diag 1 1 escape diag 1 1 members e coeffs const 1\n",
            "tail limit e summand diag 2 1 escape const 0 members diag 1 0 pow 1 coeffs const 1\n",
        ),
        CorpusName::RpWedge => (
            "1:1 2:1 1:1\n\
             omega[diag 1 1 const 1]\n\
             ( 3:1 omega*[diag 4 2 const 1] 1:1 )\n",
            "iso 2 1:1 1\n\
             tail limit 1:1 summand diag 2 1 escape diag 1 1 members diag 3 1 const 1 coeffs cycle 1 0\n",
            "tail limit e summand diag 2 1 escape const 0 members diag 1 0 const 1 coeffs const 1\n",
        ),
        CorpusName::ToriWedge => (
            "1:1,0 2:0,1 1:-1,0\n\
             omega[diag 1 1 const 1,1]\n\
             ( 2:2,-1 omega[diag 3 1 pow 0,1] )\n",
            "iso 1 2:1,1 3\n\
             tail limit 2:1,0 summand diag 1 1 escape diag 2 1 members diag 4 1 const 1,0 coeffs const 1\n",
            "tail limit e summand diag 2 1 escape const 0 members diag 1 0 pow 1,0 coeffs const 1\n",
        ),
    };
    let header = format!("theta {cfg_name} level 8\n");
    vec![
        (cfg_name, corpus_config(name)),
        (format!("{n}.words"), words.to_string()),
        (format!("{n}-in.theta"), format!("{header}{inside}")),
        (format!("{n}-out.theta"), format!("{header}{outside}")),
    ]
}

