use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use game_comonads::comonad::DEFAULT_CAP;
use game_comonads::equiv::{decide, verify_verdict_certificate, Comonad, Side};
use game_comonads::lawcheck::{run_law_suite, GenConfig};
use game_comonads::params::{
    decomposition_to_pebble_cover, forest_cover_to_ef_coalgebra, modal_depth, pebble_cover_to_coalgebra,
    tree_depth, tree_width, verify_coalgebra, Coalgebra,
};
use game_comonads::structure::{parse_structure, PointedStructure, Structure};

#[derive(Parser)]
#[command(name = "gcomonad", version, about = "Model-comparison games and coalgebra numbers for finite structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether two structures are equivalent for a game and tier.
    Check {
        #[arg(long, value_enum)]
        game: ComonadArg,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        tier: u8,
        #[arg(short, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        a: PathBuf,
        b: PathBuf,
        /// Write the strategy certificate here when one exists.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Compute tree-depth, tree-width or modal depth with a witness.
    Param {
        #[arg(long, value_enum)]
        kind: Kind,
        a: PathBuf,
        /// Write the witness here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Build a coalgebra at bound k, or verify the given one.
    Coalgebra {
        #[arg(long, value_enum)]
        comonad: ComonadArg,
        #[arg(short, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        a: PathBuf,
        alpha: Option<PathBuf>,
    },
    /// Run the randomized comonad-law suite.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        iters: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ComonadArg {
    Ef,
    Pebble,
    Modal,
}

impl From<ComonadArg> for Comonad {
    fn from(c: ComonadArg) -> Self {
        match c {
            ComonadArg::Ef => Comonad::Ef,
            ComonadArg::Pebble => Comonad::Pebble,
            ComonadArg::Modal => Comonad::Modal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    TreeDepth,
    TreeWidth,
    ModalDepth,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: game_comonads::Error },
    #[error(transparent)]
    Core(#[from] game_comonads::Error),
    #[error("{0}")]
    Usage(String),
}

type Outcome = Result<ExitCode, CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("values serialize") + "\n";
    fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

fn load(path: &Path) -> Result<(Structure, Option<usize>), CliError> {
    parse_structure(&read(path)?).map_err(|source| CliError::Input { path: path.into(), source })
}

fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print(value: &Value) {
    emit(&(serde_json::to_string_pretty(value).expect("values serialize") + "\n"));
}

fn verdict_code(holds: bool) -> ExitCode {
    if holds {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn pointed(structure: Structure, point: Option<usize>, path: &Path) -> Result<PointedStructure, CliError> {
    let point = point.ok_or_else(|| CliError::Input { path: path.into(), source: game_comonads::Error::MissingPoint })?;
    Ok(PointedStructure::new(structure, point)?)
}

fn check(game: Comonad, tier: u8, k: usize, a: &Path, b: &Path, cert: Option<&Path>) -> Outcome {
    let (sa, pa) = load(a)?;
    let (sb, pb) = load(b)?;
    let (x, y) = (Side::new(&sa, pa), Side::new(&sb, pb));
    let verdict = decide(game, tier, x, y, k, DEFAULT_CAP)?;
    if let Some(c) = &verdict.certificate {
        if let Err(e) = verify_verdict_certificate(game, tier, x, y, k, c)? {
            return Err(CliError::Usage(format!("certificate failed its own verification: {e}")));
        }
    }
    if let Some(path) = cert {
        match &verdict.certificate {
            Some(c) => write_json(path, c)?,
            None => eprintln!("no certificate to write"),
        }
    }
    print(&verdict.to_json());
    Ok(verdict_code(verdict.equiv))
}

fn param(kind: Kind, a: &Path, witness: Option<&Path>) -> Outcome {
    let (s, point) = load(a)?;
    let (name, value, w) = match kind {
        Kind::TreeDepth => {
            let (d, cover) = tree_depth(&s)?;
            cover.verify(&s).map_err(CliError::Usage)?;
            ("tree-depth", json!(d), cover.to_json(&s))
        }
        Kind::TreeWidth => {
            let (w, td) = tree_width(&s)?;
            td.verify(&s).map_err(CliError::Usage)?;
            ("tree-width", json!(w), td.to_json(&s))
        }
        Kind::ModalDepth => {
            let p = pointed(s, point, a)?;
            match modal_depth(&p)? {
                Some(tree) => {
                    let c = tree.coalgebra(p.point, tree.height.max(1))?;
                    if let Err(v) = verify_coalgebra(&c, &p.structure)? {
                        return Err(CliError::Usage(format!("witness failed its own verification: {v}")));
                    }
                    ("modal-depth", json!(tree.height), c.to_json(&p.structure))
                }
                None => {
                    print(&json!({
                        "kind": "modal-depth",
                        "value": null,
                        "reason": "the generated submodel is not a synchronization tree; no coalgebra exists for any k",
                    }));
                    return Ok(ExitCode::from(1));
                }
            }
        }
    };
    if let Some(path) = witness {
        write_json(path, &w)?;
    }
    print(&json!({"kind": name, "value": value, "witness": w}));
    Ok(ExitCode::SUCCESS)
}

/// A coalgebra at `k` built from the optimal witness, or the reason there is none.
fn construct(comonad: Comonad, k: usize, s: &Structure, point: Option<usize>, path: &Path) -> Result<Result<Coalgebra, String>, CliError> {
    Ok(match comonad {
        Comonad::Ef => {
            let (d, cover) = tree_depth(s)?;
            if d > k {
                Err(format!("tree-depth is {d}"))
            } else {
                Ok(forest_cover_to_ef_coalgebra(&cover, k)?)
            }
        }
        Comonad::Pebble => {
            let (w, td) = tree_width(s)?;
            if w >= k {
                Err(format!("tree-width is {w}"))
            } else {
                Ok(pebble_cover_to_coalgebra(&decomposition_to_pebble_cover(&td, s, k)?, k)?)
            }
        }
        Comonad::Modal => {
            let p = pointed(s.clone(), point, path)?;
            match modal_depth(&p)? {
                None => Err("the generated submodel is not a synchronization tree".into()),
                Some(tree) if tree.height > k => Err(format!("modal depth is {}", tree.height)),
                Some(tree) => Ok(tree.coalgebra(p.point, k)?),
            }
        }
    })
}

fn coalgebra(comonad: Comonad, k: usize, a: &Path, alpha: Option<&Path>) -> Outcome {
    let (s, point) = load(a)?;
    if comonad == Comonad::Modal {
        pointed(s.clone(), point, a)?.check_kripke()?;
    }
    match alpha {
        None => match construct(comonad, k, &s, point, a)? {
            Ok(c) => {
                if let Err(v) = verify_coalgebra(&c, &s)? {
                    return Err(CliError::Usage(format!("constructed coalgebra failed verification: {v}")));
                }
                print(&json!({"exists": true, "coalgebra": c.to_json(&s)}));
                Ok(ExitCode::SUCCESS)
            }
            Err(reason) => {
                print(&json!({"exists": false, "comonad": comonad.to_string(), "k": k, "reason": reason}));
                Ok(ExitCode::from(1))
            }
        },
        Some(path) => {
            let text = read(path)?;
            let parsed: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Input { path: path.into(), source: e.into() })?;
            let c = Coalgebra::from_json(&parsed, comonad, k, &s, point)
                .map_err(|source| CliError::Input { path: path.into(), source })?;
            match verify_coalgebra(&c, &s)? {
                Ok(()) => {
                    print(&json!({"valid": true}));
                    Ok(ExitCode::SUCCESS)
                }
                Err(v) => {
                    print(&json!({"valid": false, "law": v.law.to_string(), "detail": v.detail}));
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}

fn selftest(seed: u64, iters: usize) -> Outcome {
    let report = run_law_suite(&GenConfig { seed, iterations: iters, ..GenConfig::default() });
    emit(&format!("{report}{}\n", report.to_json()));
    Ok(verdict_code(report.passed()))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Check { game, tier, k, a, b, cert } => {
            check(game.into(), tier, k as usize, &a, &b, cert.as_deref())
        }
        Command::Param { kind, a, witness } => param(kind, &a, witness.as_deref()),
        Command::Coalgebra { comonad, k, a, alpha } => coalgebra(comonad.into(), k as usize, &a, alpha.as_deref()),
        Command::Selftest { seed, iters } => selftest(seed, iters),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
