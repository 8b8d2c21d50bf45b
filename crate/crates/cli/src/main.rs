use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use picture_calculus::abelian::{abelianization, smith_normal_form, IntMatrix};
use picture_calculus::builder::{evaluate, glue, picture_from_certificate, witness_search, ConjugateProduct, MembershipVerdict};
use picture_calculus::freeprod::{FactorGroup, FiniteGroup, FreeProduct, Torsion};
use picture_calculus::moves::{build_xset, reduce_spherical, replay, Move};
use picture_calculus::picture::Picture;
use picture_calculus::presentation::{check_rc, check_small_cancellation, pieces, stars_disjoint, Presentation};
use picture_calculus::relative::{augment, augment_alphabet, check_orientable, format_relative, parse_relative, OrientabilityViolation};
use picture_calculus::words::Alphabet;

#[derive(Parser)]
#[command(name = "picalc", version, about = "Pictures over group presentations and related algorithms")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads for certificate search.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check condition RC.
    CheckRc { presentation: PathBuf },
    /// Check the small cancellation condition C(p).
    CheckC {
        presentation: PathBuf,
        #[arg(long, default_value_t = 6)]
        p: usize,
    },
    /// List the pieces of a presentation.
    Pieces { presentation: PathBuf },
    /// Compare the symmetrized relator sets of two presentations.
    StarsDisjoint { first: PathBuf, second: PathBuf },
    /// Smith normal form of an integer matrix.
    Snf { matrix: PathBuf },
    /// Abelian invariants of the presented group.
    Abelianization { presentation: PathBuf },
    /// Search for a product of conjugates of relators equal to a word.
    Witness {
        presentation: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 4)]
        max_factors: usize,
        #[arg(long = "max-conj", default_value_t = 2)]
        max_conj: usize,
        /// Also emit the picture built from the certificate.
        #[arg(long)]
        picture: bool,
    },
    /// Build the picture of a certificate file.
    Certificate {
        presentation: PathBuf,
        certificate: PathBuf,
        /// Write the picture to this file instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a picture against a presentation.
    PictureValidate { presentation: PathBuf, picture: PathBuf },
    /// Boundary label of a picture.
    PictureBoundary { presentation: PathBuf, picture: PathBuf },
    /// Dipoles and folding pairs of a picture.
    PictureDipoles { presentation: PathBuf, picture: PathBuf },
    /// Reduce a spherical picture, or replay a move trace on it.
    PictureReduce {
        presentation: PathBuf,
        picture: PathBuf,
        /// Move budget; defaults to ten moves per vertex.
        #[arg(long)]
        budget: Option<usize>,
        /// Replay this trace instead of searching.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Glue two disk pictures with equal boundary labels into a sphere.
    Glue {
        presentation1: PathBuf,
        picture1: PathBuf,
        presentation2: PathBuf,
        picture2: PathBuf,
        /// Write the glued picture to this file instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the combined presentation here when the two differ.
        #[arg(long)]
        presentation_out: Option<PathBuf>,
    },
    /// Order of a free product element, with a conjugator into a factor.
    FpOrder {
        /// `cyclic:N:name`, `z:name` or `table:FILE`; repeat per factor.
        #[arg(long = "factor", required = true)]
        factors: Vec<String>,
        #[arg(long)]
        element: String,
    },
    /// Orientability of a relative presentation (one relator per line).
    RelOrientable {
        relators: PathBuf,
        #[arg(long = "factor", required = true)]
        factors: Vec<String>,
        /// Names of the X-generators.
        #[arg(long, num_args = 1.., default_values_t = ["x".to_string()])]
        x: Vec<String>,
    },
    /// Augment a free product normal form into a relative word.
    Augment {
        #[arg(long = "factor", required = true)]
        factors: Vec<String>,
        #[arg(long)]
        element: String,
    },
}

struct Outcome {
    code: u8,
    text: String,
    json: Value,
}

impl Outcome {
    fn ok(holds: bool, text: String, json: Value) -> Self {
        Outcome { code: if holds { 0 } else { 1 }, text, json }
    }
}

struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn at(path: &Path) -> impl Fn(String) -> InputError + '_ {
    move |msg| InputError(format!("{}: {msg}", path.display()))
}

fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| at(path)(e.to_string()))
}

fn write(path: &Path, text: &str) -> Result<(), InputError> {
    std::fs::write(path, text).map_err(|e| at(path)(e.to_string()))
}

fn load_presentation(path: &Path) -> Result<Presentation, InputError> {
    Presentation::parse(&read(path)?).map_err(|e| at(path)(e.to_string()))
}

fn load_picture(path: &Path, alphabet: &Alphabet) -> Result<Picture, InputError> {
    Picture::from_json(&read(path)?, alphabet).map_err(|e| at(path)(e.to_string()))
}

fn load_factors(specs: &[String]) -> Result<FreeProduct, InputError> {
    let mut factors = Vec::new();
    for s in specs {
        let parts: Vec<&str> = s.splitn(3, ':').collect();
        let f = match parts.as_slice() {
            ["cyclic", n, name] => {
                let n: usize = n.parse().map_err(|_| InputError(format!("factor `{s}`: bad order")))?;
                if n == 0 {
                    return Err(InputError(format!("factor `{s}`: order must be positive")));
                }
                FactorGroup::Finite(FiniteGroup::cyclic(n, name))
            }
            ["z", name] => FactorGroup::InfiniteCyclic { name: name.to_string() },
            ["table", file] => {
                let path = Path::new(file);
                FactorGroup::Finite(FiniteGroup::parse(&read(path)?).map_err(|e| at(path)(e.to_string()))?)
            }
            _ => return Err(InputError(format!("factor `{s}`: expected cyclic:N:name, z:name or table:FILE"))),
        };
        factors.push(f);
    }
    Ok(FreeProduct::new(factors))
}

fn run(cli: &Cli) -> Result<Outcome, InputError> {
    Ok(match &cli.command {
        Command::CheckRc { presentation } => {
            let p = load_presentation(presentation)?;
            let rep = check_rc(&p);
            Outcome::ok(rep.holds, rep.to_string(), json!({ "holds": rep.holds, "violations": rep.violations }))
        }
        Command::CheckC { presentation, p: pval } => {
            let p = load_presentation(presentation)?;
            let sc = check_small_cancellation(&p, *pval)?;
            let mut text = format!("C({}) {}", sc.p, if sc.holds { "holds" } else { "fails" });
            for (i, m) in sc.min_pieces.iter().enumerate() {
                match m {
                    Some(k) => write!(text, "\nrelator {i}: {k} pieces").unwrap(),
                    None => write!(text, "\nrelator {i}: no piece decomposition").unwrap(),
                }
            }
            Outcome::ok(sc.holds, text, json!({ "p": sc.p, "holds": sc.holds, "min_pieces": sc.min_pieces }))
        }
        Command::Pieces { presentation } => {
            let p = load_presentation(presentation)?;
            let ps: Vec<String> = pieces(&p)?.iter().map(|pc| p.format(&pc.word)).collect();
            Outcome::ok(true, ps.join("\n"), json!({ "pieces": ps }))
        }
        Command::StarsDisjoint { first, second } => {
            let p1 = load_presentation(first)?;
            let p2 = load_presentation(second)?;
            if p1.alphabet() != p2.alphabet() {
                return Err(InputError("presentations use different generators".into()));
            }
            match stars_disjoint(p1.relators(), p2.relators())? {
                None => Outcome::ok(true, "disjoint".into(), json!({ "disjoint": true })),
                Some(w) => {
                    let w = p1.format(&w);
                    Outcome::ok(false, format!("not disjoint: {w}"), json!({ "disjoint": false, "witness": w }))
                }
            }
        }
        Command::Snf { matrix } => {
            let a = IntMatrix::parse(&read(matrix)?).map_err(|e| at(matrix)(e.to_string()))?;
            let snf = smith_normal_form(&a);
            let diag: Vec<Value> = snf.diagonal().iter().map(int).collect();
            let text = format!("D =\n{}\nU =\n{}\nV =\n{}", snf.d, snf.u, snf.v);
            Outcome::ok(
                true,
                text,
                json!({ "diagonal": diag, "u": rows(&snf.u), "d": rows(&snf.d), "v": rows(&snf.v) }),
            )
        }
        Command::Abelianization { presentation } => {
            let p = load_presentation(presentation)?;
            let inv = abelianization(&p);
            let torsion: Vec<Value> = inv.torsion.iter().map(int).collect();
            let listed: Vec<String> = inv.torsion.iter().map(|x| x.to_string()).collect();
            Outcome::ok(
                true,
                format!("rank {}, torsion [{}]", inv.free_rank, listed.join(", ")),
                json!({ "free_rank": inv.free_rank, "torsion": torsion }),
            )
        }
        Command::Witness { presentation, word, max_factors, max_conj, picture } => {
            let p = load_presentation(presentation)?;
            let w = p.alphabet().parse(word).map_err(|e| InputError(format!("--word: {e}")))?;
            match witness_search(&w, &p, *max_factors, *max_conj, cli.jobs)? {
                MembershipVerdict::Found(cp) => {
                    let cert = cp.to_json(p.alphabet());
                    let mut out = json!({ "verdict": "found", "certificate": cert });
                    let mut text = format!("found: {}", serde_json::to_string(&cert).unwrap());
                    if *picture {
                        let mut pic = picture_from_certificate(&cp, &p)?;
                        pic.presentation_ref = presentation.display().to_string();
                        out["picture"] = pic.to_json(p.alphabet());
                        write!(text, "\n{}", pic.to_json_string(p.alphabet())).unwrap();
                    }
                    Outcome::ok(true, text, out)
                }
                MembershipVerdict::NotFoundWithin { max_factors, max_conjugator_len } => Outcome::ok(
                    false,
                    format!("no certificate with at most {max_factors} factors and conjugators of length at most {max_conjugator_len}"),
                    json!({ "verdict": "not_found_within", "max_factors": max_factors, "max_conjugator_len": max_conjugator_len }),
                ),
                MembershipVerdict::RefutedByAbelianization(reason) => Outcome::ok(
                    false,
                    format!("not in the normal closure: {reason}"),
                    json!({ "verdict": "refuted_by_abelianization", "reason": reason }),
                ),
            }
        }
        Command::Certificate { presentation, certificate, out } => {
            let p = load_presentation(presentation)?;
            let cp = ConjugateProduct::from_json(&read(certificate)?, p.alphabet()).map_err(|e| at(certificate)(e.to_string()))?;
            let value = p.format(&evaluate(&cp, &p)?);
            let mut pic = picture_from_certificate(&cp, &p)?;
            pic.presentation_ref = presentation.display().to_string();
            let body = pic.to_json_string(p.alphabet());
            let text = match out {
                Some(path) => {
                    write(path, &body)?;
                    format!("value: {value}\npicture written to {}", path.display())
                }
                None => format!("value: {value}\n{body}"),
            };
            Outcome::ok(true, text, json!({ "value": value, "picture": pic.to_json(p.alphabet()) }))
        }
        Command::PictureValidate { presentation, picture } => {
            let p = load_presentation(presentation)?;
            let pic = load_picture(picture, p.alphabet())?;
            let rep = pic.validate(&p);
            let text = if rep.is_valid() {
                "valid".to_string()
            } else {
                rep.issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n")
            };
            Outcome::ok(rep.is_valid(), text, json!({ "valid": rep.is_valid(), "issues": rep.issues }))
        }
        Command::PictureBoundary { presentation, picture } => {
            let p = load_presentation(presentation)?;
            let pic = load_picture(picture, p.alphabet())?;
            let label = p.format(&pic.boundary_label());
            Outcome::ok(
                true,
                if label.is_empty() { "(empty)".into() } else { label.clone() },
                json!({ "boundary": label, "spherical": pic.is_spherical() }),
            )
        }
        Command::PictureDipoles { presentation, picture } => {
            let p = load_presentation(presentation)?;
            let pic = load_picture(picture, p.alphabet())?;
            let dips = pic.find_dipoles(&p)?;
            let pairs = pic.find_folding_pairs(&p)?;
            let mut text = format!("{} dipoles, {} folding pairs", dips.len(), pairs.len());
            for d in &dips {
                write!(text, "\ndipole: arc {} corners {} {}", d.arc, d.c1, d.c2).unwrap();
            }
            for fp in &pairs {
                write!(text, "\nfolding pair: vertices {} {}", fp.positive, fp.negative).unwrap();
            }
            Outcome::ok(true, text, json!({ "dipoles": dips, "folding_pairs": pairs }))
        }
        Command::PictureReduce { presentation, picture, budget, replay: trace } => {
            let p = load_presentation(presentation)?;
            let pic = load_picture(picture, p.alphabet())?;
            let xset = build_xset(&p)?;
            if let Some(path) = trace {
                let moves: Vec<Move> = serde_json::from_str(&read(path)?).map_err(|e| at(path)(e.to_string()))?;
                let out = replay(&pic, &moves, &p, &xset)?;
                return Ok(Outcome::ok(
                    true,
                    out.to_json_string(p.alphabet()),
                    json!({ "picture": out.to_json(p.alphabet()) }),
                ));
            }
            let budget = budget.unwrap_or(10 * pic.vertices.len().max(1));
            let red = reduce_spherical(&pic, &xset, &p, budget)?;
            let text = if red.emptied {
                format!("reduced to empty in {} moves\n{}", red.trace.len(), serde_json::to_string(&red.trace).unwrap())
            } else {
                format!(
                    "no reduction to empty found ({} moves, {} vertices left)\n{}",
                    red.trace.len(),
                    red.picture.vertices.len(),
                    serde_json::to_string(&red.trace).unwrap()
                )
            };
            Outcome::ok(
                red.emptied,
                text,
                json!({ "emptied": red.emptied, "trace": red.trace, "picture": red.picture.to_json(p.alphabet()) }),
            )
        }
        Command::Glue { presentation1, picture1, presentation2, picture2, out, presentation_out } => {
            let p1 = load_presentation(presentation1)?;
            let p2 = load_presentation(presentation2)?;
            let w1 = load_picture(picture1, p1.alphabet())?;
            let w2 = load_picture(picture2, p2.alphabet())?;
            let (g, gp) = glue(&w1, &p1, &w2, &p2)?;
            let mut json_out = json!({ "picture": g.to_json(gp.alphabet()) });
            let mut lines = Vec::new();
            if gp != p1 {
                json_out["presentation"] = json!(gp.to_text());
                match presentation_out {
                    Some(path) => {
                        write(path, &gp.to_text())?;
                        lines.push(format!("presentation written to {}", path.display()));
                    }
                    None => lines.push(gp.to_text()),
                }
            }
            let body = g.to_json_string(gp.alphabet());
            match out {
                Some(path) => {
                    write(path, &body)?;
                    lines.push(format!("picture written to {}", path.display()));
                }
                None => lines.push(body),
            }
            Outcome::ok(true, lines.join("\n"), json_out)
        }
        Command::FpOrder { factors, element } => {
            let fp = load_factors(factors)?;
            let e = fp.parse_element(element).map_err(|e| InputError(format!("--element: {e}")))?;
            match fp.torsion_witness(&e)? {
                Torsion::Infinite => Outcome::ok(true, "infinite order".into(), json!({ "order": "infinite" })),
                Torsion::FiniteOrder { order, conjugator, element } => {
                    let (g, x) = (fp.format(&conjugator), fp.format(&element));
                    Outcome::ok(
                        true,
                        format!("finite order {order}: conjugator {g}, element {x}"),
                        json!({ "order": order, "conjugator": g, "element": x }),
                    )
                }
            }
        }
        Command::RelOrientable { relators, factors, x } => {
            let fp = load_factors(factors)?;
            let xs = Alphabet::new(x)?;
            let text = read(relators)?;
            let mut rels = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let r = parse_relative(&fp, &xs, line).map_err(|e| at(relators)(format!("line {}: {e}", i + 1)))?;
                rels.push(r);
            }
            let o = check_orientable(&fp, &rels);
            let (text, why) = match o.violation {
                None => ("orientable".to_string(), Value::Null),
                Some(OrientabilityViolation::SharedClosure { index, other }) => (
                    format!("not orientable: relator {other} is a rotation of relator {index} or its inverse"),
                    json!({ "kind": "shared_closure", "index": index, "other": other }),
                ),
                Some(OrientabilityViolation::SelfInverse { index }) => (
                    format!("not orientable: relator {index} is a cyclic permutation of its inverse"),
                    json!({ "kind": "self_inverse", "index": index }),
                ),
            };
            Outcome::ok(o.orientable, text, json!({ "orientable": o.orientable, "violation": why }))
        }
        Command::Augment { factors, element } => {
            let fp = load_factors(factors)?;
            let u = fp.parse_element(element).map_err(|e| InputError(format!("--element: {e}")))?;
            let xs = augment_alphabet(&fp);
            let w = format_relative(&fp, &xs, &augment(&fp, &u)?);
            Outcome::ok(true, w.clone(), json!({ "augmented": w }))
        }
    })
}

fn int(x: &BigInt) -> Value {
    x.to_i64().map_or_else(|| json!(x.to_string()), |v| json!(v))
}

fn rows(m: &IntMatrix) -> Vec<Vec<Value>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| int(m.get(i, j))).collect()).collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            match cli.format {
                Format::Text => println!("{}", out.text),
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).unwrap()),
            }
            ExitCode::from(out.code)
        }
        Err(InputError(msg)) => {
            match cli.format {
                Format::Text => eprintln!("error: {msg}"),
                Format::Json => println!("{}", json!({ "error": msg })),
            }
            ExitCode::from(2)
        }
    }
}
