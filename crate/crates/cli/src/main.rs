//! Command-line front end.
//!
//! Exit codes: 0 affirmative verdict or computed value, 1 negative verdict,
//! 2 unknown or cap exceeded, 3 usage or input error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arboreal::classify::{nucleus, orbit_signalizer, polynomial_degree, NucleusReport};
use arboreal::conj_aut::{
    canonical_representative, clamp_depth, conj_graph, conjugate_in_aut, conjugate_in_aut_simultaneous,
    conjugate_in_fsg, ConjDecision, VERIFY_DEPTH,
};
use arboreal::conj_restricted::{conjugate_in_finitary, conjugate_in_pol0_cyclic, conjugate_in_pol_inf, SearchCaps};
use arboreal::dot::{conj_graph_dot, order_graph_dot};
use arboreal::oracle::{orbit_tree_code, orbit_tree_code_of, truncated_order, verify_conjugator};
use arboreal::order::{order, order_graph, OrderResult};
use arboreal::conj_aut::Conjugator;
use arboreal::{parse_system, Element, Equality, FRSystem, Group, Letter, SymId};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

const DEFAULT_CAP: usize = 10_000;

#[derive(Parser)]
#[command(name = "arboreal", version, about = "Decisions for finite-state automorphisms of regular rooted trees")]
struct Cli {
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and print a system.
    Parse { file: PathBuf },
    /// Decide whether two words define the same automorphism.
    Equal { file: PathBuf, w1: String, w2: String },
    /// Image of a vertex, given as letters (`0110` or `0,1,1,0`).
    Act { file: PathBuf, w: String, v: String },
    /// Order of an element.
    Order {
        file: PathBuf,
        w: String,
        /// Treat infinite order as a negative verdict.
        #[arg(long)]
        assert_finite: bool,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Activity class of an element.
    Classify { file: PathBuf, w: String },
    /// Orbit-signalizer of an element.
    Os {
        file: PathBuf,
        w: String,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Nucleus of the group generated by the states of an element.
    Nucleus {
        file: PathBuf,
        w: String,
        #[arg(long, default_value_t = 512)]
        size_cap: usize,
        #[arg(long, default_value_t = 12)]
        depth_cap: usize,
    },
    /// Export the order graph or the conjugator graph.
    Graph {
        kind: GraphKind,
        file: PathBuf,
        w1: String,
        w2: Option<String>,
        #[arg(long)]
        dot: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Decide conjugacy in a group of automorphisms.
    Conjugate {
        file: PathBuf,
        w1: String,
        w2: String,
        #[arg(long, value_enum, default_value_t = GroupKind::Aut)]
        group: GroupKind,
        /// Print the conjugator as a system.
        #[arg(long)]
        emit_conjugator: bool,
        #[arg(long, default_value_t = VERIFY_DEPTH)]
        verify_depth: usize,
        /// Files with further pairs `W1 W2`, one per line, over the same system.
        #[arg(long, num_args = 1..)]
        simultaneous: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Canonical representative of the conjugacy class, truncated.
    Representative {
        file: PathBuf,
        w: String,
        #[arg(long)]
        depth: usize,
    },
    /// Truncated-tree oracles.
    Oracle {
        #[command(subcommand)]
        query: OracleQuery,
    },
}

#[derive(Subcommand)]
enum OracleQuery {
    /// Canonical code of the orbit tree to a depth.
    OrbitTree {
        file: PathBuf,
        w: String,
        #[arg(long)]
        depth: usize,
    },
    /// Order of the action on a level.
    TruncOrder {
        file: PathBuf,
        w: String,
        #[arg(long)]
        depth: usize,
    },
    /// Check `h^-1 a h = b` to a depth.
    Verify {
        file: PathBuf,
        h: String,
        a: String,
        b: String,
        #[arg(long)]
        depth: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Order,
    Conj,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GroupKind {
    Aut,
    Fsg,
    #[value(name = "pol-1")]
    PolMinus1,
    #[value(name = "pol0")]
    Pol0,
    #[value(name = "polinf")]
    PolInf,
}

impl GroupKind {
    fn name(self) -> &'static str {
        match self {
            GroupKind::Aut => "aut",
            GroupKind::Fsg => "fsg",
            GroupKind::PolMinus1 => "pol-1",
            GroupKind::Pol0 => "pol0",
            GroupKind::PolInf => "polinf",
        }
    }
}

/// What a command produced.
struct Report {
    verdict: String,
    witness: Value,
    caps: Value,
    text: String,
    exit: u8,
}

impl Report {
    fn new(verdict: impl Into<String>, exit: u8, text: impl Into<String>) -> Self {
        Report {
            verdict: verdict.into(),
            witness: Value::Null,
            caps: json!({}),
            text: text.into(),
            exit,
        }
    }

    fn witness(mut self, w: Value) -> Self {
        self.witness = w;
        self
    }

    fn caps(mut self, c: Value) -> Self {
        self.caps = c;
        self
    }
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<Report, Failure>;

fn load(path: &Path) -> Result<Group, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    Group::parse(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn word(group: &mut Group, text: &str) -> Result<Element, Failure> {
    group.word(text).map_err(|e| Failure(format!("`{text}`: {e}")))
}

fn vertex(text: &str, degree: usize) -> Result<Vec<Letter>, Failure> {
    let parts: Vec<&str> = if text.contains(',') {
        text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
    } else {
        text.split("").filter(|s| !s.is_empty()).collect()
    };
    parts
        .iter()
        .map(|p| match p.parse::<usize>() {
            Ok(x) if x < degree => Ok(x),
            _ => Err(Failure(format!("`{p}` is not a letter of the alphabet 0..{degree}"))),
        })
        .collect()
}

fn letters(v: &[Letter]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let (name, inputs) = describe(&cli.command);
    match run(cli.command) {
        Ok(report) => {
            if cli.json {
                let out = json!({
                    "command": name,
                    "inputs": inputs,
                    "verdict": report.verdict,
                    "witness": report.witness,
                    "caps": report.caps,
                    "version": env!("CARGO_PKG_VERSION"),
                });
                println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
            } else {
                print!("{}", report.text);
                if !report.text.ends_with('\n') {
                    println!();
                }
            }
            ExitCode::from(report.exit)
        }
        Err(Failure(why)) => {
            if cli.json {
                let out = json!({
                    "command": name,
                    "inputs": inputs,
                    "verdict": "error",
                    "witness": why,
                    "caps": {},
                    "version": env!("CARGO_PKG_VERSION"),
                });
                println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
            }
            eprintln!("error: {why}");
            ExitCode::from(3)
        }
    }
}

fn digest(path: &Path) -> Value {
    match fs::read(path) {
        Ok(bytes) => {
            let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
            json!({ "path": path.display().to_string(), "sha256": hex })
        }
        Err(_) => json!({ "path": path.display().to_string(), "sha256": null }),
    }
}

fn describe(cmd: &Command) -> (&'static str, Value) {
    match cmd {
        Command::Parse { file } => ("parse", json!({ "file": digest(file) })),
        Command::Equal { file, w1, w2 } => ("equal", json!({ "file": digest(file), "words": [w1, w2] })),
        Command::Act { file, w, v } => ("act", json!({ "file": digest(file), "words": [w], "vertex": v })),
        Command::Order { file, w, .. } => ("order", json!({ "file": digest(file), "words": [w] })),
        Command::Classify { file, w } => ("classify", json!({ "file": digest(file), "words": [w] })),
        Command::Os { file, w, .. } => ("os", json!({ "file": digest(file), "words": [w] })),
        Command::Nucleus { file, w, .. } => ("nucleus", json!({ "file": digest(file), "words": [w] })),
        Command::Graph { file, w1, w2, .. } => ("graph", json!({ "file": digest(file), "words": [w1, w2] })),
        Command::Conjugate {
            file,
            w1,
            w2,
            group,
            simultaneous,
            ..
        } => (
            "conjugate",
            json!({
                "file": digest(file),
                "words": [w1, w2],
                "group": group.name(),
                "simultaneous": simultaneous.iter().map(|p| digest(p)).collect::<Vec<_>>(),
            }),
        ),
        Command::Representative { file, w, depth } => (
            "representative",
            json!({ "file": digest(file), "words": [w], "depth": depth }),
        ),
        Command::Oracle { query } => match query {
            OracleQuery::OrbitTree { file, w, depth } => (
                "oracle orbit-tree",
                json!({ "file": digest(file), "words": [w], "depth": depth }),
            ),
            OracleQuery::TruncOrder { file, w, depth } => (
                "oracle trunc-order",
                json!({ "file": digest(file), "words": [w], "depth": depth }),
            ),
            OracleQuery::Verify { file, h, a, b, depth } => (
                "oracle verify",
                json!({ "file": digest(file), "words": [h, a, b], "depth": depth }),
            ),
        },
    }
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Parse { file } => {
            let text = load(&file)?.system().to_string();
            Ok(Report::new("ok", 0, text.clone()).witness(json!(text)))
        }
        Command::Equal { file, w1, w2 } => {
            let mut g = load(&file)?;
            let (x, y) = (word(&mut g, &w1)?, word(&mut g, &w2)?);
            Ok(match g.equal(&x, &y) {
                Equality::Equal => Report::new("equal", 0, "equal"),
                Equality::NotEqual => Report::new("not equal", 1, "not equal"),
                Equality::ExceededCap => Report::new("unknown", 2, "unknown (equality check exceeded its cap)"),
            })
        }
        Command::Act { file, w, v } => {
            let mut g = load(&file)?;
            let x = word(&mut g, &w)?;
            let v = vertex(&v, g.degree())?;
            let image = g.act(&x, &v);
            Ok(Report::new("ok", 0, letters(&image)).witness(json!(image)))
        }
        Command::Order {
            file,
            w,
            assert_finite,
            cap,
        } => {
            let mut g = load(&file)?;
            let x = word(&mut g, &w)?;
            let caps = json!({ "orbit_signalizer": cap });
            Ok(match order(&mut g, &x, cap) {
                OrderResult::Finite(m) => Report::new("finite", 0, m.to_string()).witness(json!(m.to_string())),
                OrderResult::Infinite { cycle, labels } => {
                    let graph = order_graph(&mut g, &x, cap).expect("graph was complete");
                    let names: Vec<String> = cycle.iter().map(|&i| g.display(&graph.vertices()[i])).collect();
                    let path = names
                        .iter()
                        .zip(&labels)
                        .map(|(n, l)| format!("{n} --{l}-->"))
                        .collect::<Vec<_>>()
                        .join(" ");
                    let text = format!("infinite\ncycle: {path} {}", names[0]);
                    Report::new("infinite", u8::from(assert_finite), text)
                        .witness(json!({ "cycle": names, "labels": labels }))
                }
                OrderResult::Unknown(c) => Report::new("unknown", 2, format!("unknown (orbit-signalizer exceeded {c})")),
            }
            .caps(caps))
        }
        Command::Classify { file, w } => {
            let mut g = load(&file)?;
            let x = word(&mut g, &w)?;
            let class = polynomial_degree(&mut g, &x);
            let exit = if matches!(class, arboreal::classify::ActivityClass::Unknown(_)) { 2 } else { 0 };
            Ok(Report::new(class.to_string(), exit, class.to_string()))
        }
        Command::Os { file, w, cap } => {
            let mut g = load(&file)?;
            let x = word(&mut g, &w)?;
            let os = orbit_signalizer(&mut g, &x, cap);
            let names: Vec<String> = os.elements.iter().map(|e| g.display(e)).collect();
            let caps = json!({ "orbit_signalizer": cap });
            if os.is_complete() {
                let text = format!("{} elements\n{}", names.len(), names.join("\n"));
                Ok(Report::new("complete", 0, text).witness(json!(names)).caps(caps))
            } else {
                Ok(Report::new("exceeded cap", 2, format!("exceeded cap of {cap} elements")).caps(caps))
            }
        }
        Command::Nucleus {
            file,
            w,
            size_cap,
            depth_cap,
        } => {
            let mut g = load(&file)?;
            let x = word(&mut g, &w)?;
            let caps = json!({ "size": size_cap, "depth": depth_cap });
            Ok(match nucleus(&mut g, &x, size_cap, depth_cap) {
                NucleusReport::Contracting(n) => {
                    let names: Vec<String> = n.iter().map(|e| g.display(e)).collect();
                    let text = format!("contracting, nucleus of {} elements\n{}", names.len(), names.join("\n"));
                    Report::new("contracting", 0, text).witness(json!(names))
                }
                NucleusReport::Unknown(why) => Report::new("unknown", 2, format!("unknown ({why})")),
            }
            .caps(caps))
        }
        Command::Graph {
            kind,
            file,
            w1,
            w2,
            dot,
            cap,
        } => {
            let mut g = load(&file)?;
            let a = word(&mut g, &w1)?;
            let text = match kind {
                GraphKind::Order => match order_graph(&mut g, &a, cap) {
                    Some(graph) => order_graph_dot(&g, &graph),
                    None => return Ok(Report::new("exceeded cap", 2, format!("orbit-signalizer exceeded {cap}"))),
                },
                GraphKind::Conj => {
                    let w2 = w2.ok_or_else(|| Failure("the conjugator graph needs two words".into()))?;
                    let b = word(&mut g, &w2)?;
                    match conj_graph(&mut g, &a, &b, cap)? {
                        Some(graph) => conj_graph_dot(&g, &graph),
                        None => {
                            return Ok(Report::new("exceeded cap", 2, format!("orbit-signalizer exceeded {cap}")))
                        }
                    }
                }
            };
            fs::write(&dot, &text).map_err(|e| Failure(format!("{}: {e}", dot.display())))?;
            Ok(Report::new("ok", 0, format!("wrote {}", dot.display()))
                .witness(json!(dot.display().to_string()))
                .caps(json!({ "orbit_signalizer": cap })))
        }
        Command::Conjugate {
            file,
            w1,
            w2,
            group,
            emit_conjugator,
            verify_depth,
            simultaneous,
            cap,
        } => conjugate(&file, &w1, &w2, group, emit_conjugator, verify_depth, &simultaneous, cap),
        Command::Representative { file, w, depth } => {
            let mut g = load(&file)?;
            let x = word(&mut g, &w)?;
            let rep = canonical_representative(&mut g, &x, depth)?;
            let code = orbit_tree_code_of(&rep);
            let level: Vec<u32> = rep.level(rep.depth()).to_vec();
            let text = format!(
                "depth {}\norbit tree {code}\nlevel {}",
                rep.depth(),
                level.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
            );
            Ok(Report::new("ok", 0, text).witness(json!({ "depth": rep.depth(), "orbit_tree": code, "level": level })))
        }
        Command::Oracle { query } => match query {
            OracleQuery::OrbitTree { file, w, depth } => {
                let mut g = load(&file)?;
                let x = word(&mut g, &w)?;
                let code = orbit_tree_code(&mut g, &x, depth)?;
                Ok(Report::new("ok", 0, code.clone()).witness(json!(code)))
            }
            OracleQuery::TruncOrder { file, w, depth } => {
                let mut g = load(&file)?;
                let x = word(&mut g, &w)?;
                let m = truncated_order(&mut g, &x, depth)?;
                Ok(Report::new("ok", 0, m.to_string()).witness(json!(m.to_string())))
            }
            OracleQuery::Verify { file, h, a, b, depth } => {
                let mut g = load(&file)?;
                let (h, a, b) = (word(&mut g, &h)?, word(&mut g, &a)?, word(&mut g, &b)?);
                Ok(if verify_conjugator(&mut g, &h, &a, &b, depth)? {
                    Report::new("verified", 0, format!("verified to depth {depth}"))
                } else {
                    Report::new("refuted", 1, format!("refuted at depth {depth}"))
                })
            }
        },
    }
}

fn read_pairs(group: &mut Group, path: &Path) -> Result<Vec<(Element, Element)>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [x, y] = parts[..] else {
            return Err(Failure(format!("{}:{}: expected two words", path.display(), i + 1)));
        };
        out.push((word(group, x)?, word(group, y)?));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn conjugate(
    file: &Path,
    w1: &str,
    w2: &str,
    kind: GroupKind,
    emit: bool,
    verify_depth: usize,
    simultaneous: &[PathBuf],
    cap: usize,
) -> Outcome {
    let mut g = load(file)?;
    let a = word(&mut g, w1)?;
    let b = word(&mut g, w2)?;
    let mut pairs = vec![(a.clone(), b.clone())];
    for path in simultaneous {
        pairs.extend(read_pairs(&mut g, path)?);
    }
    let base = g.symbol_count() as SymId;
    let caps_search = SearchCaps {
        elements: cap,
        ..SearchCaps::default()
    };
    let decision = if pairs.len() > 1 {
        if kind != GroupKind::Aut {
            return Err(Failure("simultaneous conjugacy is decided in Aut(T) only".into()));
        }
        let (xs, ys): (Vec<Element>, Vec<Element>) = pairs.iter().cloned().unzip();
        conjugate_in_aut_simultaneous(&mut g, &xs, &ys, cap)?
    } else {
        match kind {
            GroupKind::Aut => conjugate_in_aut(&mut g, &a, &b, cap)?,
            GroupKind::Fsg => conjugate_in_fsg(&mut g, &a, &b, cap)?,
            GroupKind::PolMinus1 => conjugate_in_finitary(&mut g, &a, &b, cap)?,
            GroupKind::Pol0 => conjugate_in_pol0_cyclic(&mut g, &a, &b, caps_search)?,
            GroupKind::PolInf => conjugate_in_pol_inf(&mut g, &a, &b, caps_search)?,
        }
    };
    let depth = clamp_depth(g.degree(), verify_depth);
    let caps = json!({
        "orbit_signalizer": cap,
        "verify_depth": depth,
        "search_leaves": caps_search.leaves,
    });
    let report = match decision {
        ConjDecision::NotConjugate(why) => {
            Report::new("not conjugate", 1, format!("not conjugate in {}: {why}", kind.name())).witness(json!(why))
        }
        ConjDecision::Unknown(why) => {
            Report::new("unknown", 2, format!("unknown in {}: {why}", kind.name())).witness(json!(why))
        }
        ConjDecision::Conjugate(h) => {
            for (x, y) in &pairs {
                if !verify_conjugator(&mut g, &h.element, x, y, depth)? {
                    return Ok(Report::new(
                        "unknown",
                        2,
                        format!("unknown: the synthesized conjugator fails at depth {depth}"),
                    )
                    .caps(caps));
                }
            }
            let system = emitted_system(&mut g, &h, base)?;
            let mut text = format!("conjugate in {} (verified to depth {depth}", kind.name());
            if h.exact == Some(true) {
                text.push_str(", exact");
            }
            text.push(')');
            if let Some(class) = &h.class {
                text.push_str(&format!("\nconjugator is {class}"));
            }
            if emit {
                text.push('\n');
                text.push_str(&system.to_string());
            }
            Report::new("conjugate", 0, text).witness(json!({
                "conjugator": system.to_string(),
                "verified_depth": depth,
                "exact": h.exact,
                "machine_states": h.machine_states,
                "class": h.class.as_ref().map(ToString::to_string),
            }))
        }
    };
    Ok(report.caps(caps))
}

/// The conjugator's definitions, root first, followed by the input's, so the
/// text parses on its own. Falls back to the minimal machine of `h`.
fn emitted_system(g: &mut Group, h: &Conjugator, base: SymId) -> Result<FRSystem, Failure> {
    if !h.symbols.is_empty() {
        let syms: Vec<SymId> = h.symbols.iter().copied().chain(0..base).collect();
        let system = g.system_of(&syms);
        if parse_system(&system.to_string()).is_ok() {
            return Ok(system);
        }
    }
    Ok(g.machine(&h.element)?.system("h"))
}
