//! Command-line front end. `run` does all the work and returns the exit
//! code with the captured output, so tests can drive it without a process.

use std::fmt::Write as _;
use std::io::Read;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::braid::{self, BraidWord};
use crate::cordaug::{canonical_form, AugCandidate, AugCandidateJson, LinkData};
use crate::correspondence::{
    aug_to_sheaf, aug_to_subsheaf, canonical_trivialization_of, choose_trivialization, sheaf_to_aug,
};
use crate::error::Error;
use crate::exactfield::FieldSpec;
use crate::exactlinalg::Matrix;
use crate::moduli::{self, VerifyOptions, DEFAULT_BUDGET};
use crate::sheafmodel::{validate, SheafData, SheafJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "cordsheaf",
    version,
    about = "Augmentations of braid closures and their sheaves"
)]
pub struct Cli {
    /// machine-readable JSON instead of the text report
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct BraidArgs {
    /// signed generators separated by spaces or commas, e.g. "1 1 -2"
    #[arg(long, allow_hyphen_values = true)]
    pub braid: String,
    #[arg(long)]
    pub strands: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate augmentations over a prime field.
    Augs {
        #[command(flatten)]
        braid: BraidArgs,
        #[arg(long)]
        field: String,
        /// group points into reduced-dilation orbits
        #[arg(long)]
        modulo_dilation: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Build the sheaf of an augmentation read from JSON.
    Sheaf {
        /// augmentation JSON file, or - for stdin
        #[arg(long)]
        aug: String,
        #[command(flatten)]
        braid: BraidArgs,
    },
    /// Recover an augmentation from a sheaf read from JSON.
    ToAug {
        /// sheaf JSON file, or - for stdin
        #[arg(long)]
        sheaf: String,
    },
    /// Check the augmentation/sheaf correspondence exhaustively.
    Verify {
        #[command(flatten)]
        braid: BraidArgs,
        #[arg(long)]
        field: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
        /// per-dimension tuple budget of the independent sheaf search, 0 to skip it
        #[arg(long, default_value_t = 300_000)]
        cross_check_budget: u128,
        /// include every augmentation point in the report
        #[arg(long)]
        list_points: bool,
    },
    /// Compare two braids with the same closure.
    Markov {
        #[arg(long, allow_hyphen_values = true)]
        braid1: String,
        #[arg(long)]
        strands1: usize,
        #[arg(long, allow_hyphen_values = true)]
        braid2: String,
        #[arg(long)]
        strands2: usize,
        #[arg(long)]
        field: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Run the three-component unlink family end to end.
    ExampleUnlink3 {
        #[arg(long)]
        field: String,
        #[arg(long, allow_hyphen_values = true)]
        e12: i64,
        #[arg(long, allow_hyphen_values = true)]
        e13: i64,
        #[arg(long, allow_hyphen_values = true)]
        e32: i64,
        #[arg(long, allow_hyphen_values = true)]
        e33: i64,
    },
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::NotAnAugmentation(_)
        | Error::InvalidTrivialization(_)
        | Error::NoTransverseVector => EXIT_FAILED,
        _ => EXIT_INPUT,
    }
}

fn fail(e: Error) -> Outcome {
    Outcome {
        code: exit_code(&e),
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
    }
}

fn input_error(msg: impl Into<String>) -> Outcome {
    fail(Error::Input(msg.into()))
}

pub fn run<I, T>(argv: I, stdin: &mut dyn Read) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let json = cli.json;
    match cli.command {
        Command::Augs {
            braid,
            field,
            modulo_dilation,
            budget,
        } => augs(&braid, &field, modulo_dilation, budget, json),
        Command::Sheaf { aug, braid } => sheaf(&aug, &braid, stdin, json),
        Command::ToAug { sheaf } => to_aug(&sheaf, stdin, json),
        Command::Verify {
            braid,
            field,
            budget,
            cross_check_budget,
            list_points,
        } => {
            let opts = VerifyOptions {
                budget,
                cross_check_budget,
                list_points,
                ..VerifyOptions::default()
            };
            verify(&braid, &field, opts, json)
        }
        Command::Markov {
            braid1,
            strands1,
            braid2,
            strands2,
            field,
            budget,
        } => markov(
            &BraidArgs {
                braid: braid1,
                strands: strands1,
            },
            &BraidArgs {
                braid: braid2,
                strands: strands2,
            },
            &field,
            budget,
            json,
        ),
        Command::ExampleUnlink3 {
            field,
            e12,
            e13,
            e32,
            e33,
        } => example_unlink3(&field, [e12, e13, e32, e33], json),
    }
}

fn read_input(path: &str, stdin: &mut dyn Read) -> Result<String, Outcome> {
    let mut s = String::new();
    if path == "-" {
        stdin
            .read_to_string(&mut s)
            .map_err(|e| input_error(format!("reading stdin: {e}")))?;
    } else {
        s = std::fs::read_to_string(path).map_err(|e| input_error(format!("{path}: {e}")))?;
    }
    Ok(s)
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, Outcome> {
    serde_json::from_str(text).map_err(|e| input_error(format!("{what} JSON: {e}")))
}

fn prime_field(s: &str) -> Result<FieldSpec, Outcome> {
    let f: FieldSpec = s.parse().map_err(fail)?;
    if f.order().is_none() {
        return Err(input_error(format!("{s}: enumeration needs a prime field")));
    }
    Ok(f)
}

fn parse_braid(a: &BraidArgs) -> Result<BraidWord, Outcome> {
    BraidWord::parse(&a.braid, a.strands).map_err(fail)
}

/// Conjugates to a braid whose components occupy consecutive strands.
fn monotone(b: &BraidWord, notes: &mut Vec<String>) -> BraidWord {
    let m = braid::monotonize(b);
    if m.braid != *b {
        notes.push(format!(
            "relabelled {b} as the conjugate {} so components occupy consecutive strands",
            m.braid
        ));
    }
    m.braid
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn row(v: &[crate::exactfield::Scalar]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn describe_aug(c: &AugCandidate) -> String {
    format!(
        "R = {}  lambda = {}  mu = {}",
        c.r_mat,
        row(&c.lambda),
        row(&c.mu)
    )
}

fn describe_sheaf(out: &mut String, f: &SheafData) {
    let _ = writeln!(out, "N = {}", f.dim);
    for (i, m) in f.m.iter().enumerate() {
        let _ = writeln!(out, "M_{} = {}", i + 1, m);
    }
    for (i, w) in f.w.iter().enumerate() {
        let vs: Vec<String> = w.basis_vectors().iter().map(|v| row(v)).collect();
        let _ = writeln!(out, "W_{} = span{{{}}}", i + 1, vs.join(", "));
    }
    for d in &f.deg {
        let _ = writeln!(
            out,
            "degenerate summand on component {} with monodromy {}",
            d.component + 1,
            d.alpha
        );
    }
}

#[derive(Serialize)]
struct OrbitJson {
    rep: AugCandidateJson,
    size: usize,
}

#[derive(Serialize)]
struct AugsJson {
    braid: BraidWord,
    field: String,
    search_space: String,
    point_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<Vec<AugCandidateJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    orbits: Option<Vec<OrbitJson>>,
    notes: Vec<String>,
}

fn augs(a: &BraidArgs, field: &str, modulo: bool, budget: u128, json: bool) -> Outcome {
    let run = || -> Result<Outcome, Outcome> {
        let field = prime_field(field)?;
        let mut notes = Vec::new();
        let b = monotone(&parse_braid(a)?, &mut notes);
        let link = LinkData::new(&b).map_err(fail)?;
        let size = moduli::search_space(&link, field).map_err(fail)?;
        let points = moduli::enumerate_augs(&link, field, budget).map_err(fail)?;
        let orbits = modulo.then(|| moduli::quotient_by_dilation(&points));
        let stdout = if json {
            to_json(&AugsJson {
                braid: b.clone(),
                field: field.to_string(),
                search_space: size.to_string(),
                point_count: points.len(),
                points: (!modulo).then(|| points.iter().map(|c| c.to_json()).collect()),
                orbits: orbits.as_ref().map(|os| {
                    os.iter()
                        .map(|o| OrbitJson {
                            rep: o.rep.to_json(),
                            size: o.members.len(),
                        })
                        .collect()
                }),
                notes,
            })
        } else {
            let mut s = String::new();
            for n in &notes {
                let _ = writeln!(s, "note: {n}");
            }
            let _ = writeln!(s, "{b} over {field}: {} augmentations", points.len());
            match &orbits {
                Some(os) => {
                    let _ = writeln!(s, "{} orbits under reduced dilations", os.len());
                    for (k, o) in os.iter().enumerate() {
                        let _ = writeln!(
                            s,
                            "orbit {} (size {}): {}",
                            k + 1,
                            o.members.len(),
                            describe_aug(&o.rep)
                        );
                    }
                }
                None => {
                    for (k, c) in points.iter().enumerate() {
                        let _ = writeln!(s, "{}: {}", k + 1, describe_aug(c));
                    }
                }
            }
            s
        };
        Ok(Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        })
    };
    run().unwrap_or_else(|o| o)
}

fn sheaf(path: &str, a: &BraidArgs, stdin: &mut dyn Read, json: bool) -> Outcome {
    let mut run = || -> Result<Outcome, Outcome> {
        let text = read_input(path, stdin)?;
        let j: AugCandidateJson = parse_json(&text, "augmentation")?;
        let c = AugCandidate::from_json(&j).map_err(fail)?;
        let b = parse_braid(a)?;
        if b.n != c.n {
            return Err(input_error(format!(
                "augmentation has {} strands, braid has {}",
                c.n, b.n
            )));
        }
        let link = LinkData::new(&b).map_err(fail)?;
        if link.components.map != c.component_map {
            return Err(input_error(
                "component_map disagrees with the braid closure",
            ));
        }
        let real = aug_to_sheaf(&c, &link).map_err(fail)?;
        let stdout = if json {
            to_json(&real.sheaf.to_json())
        } else {
            let mut s = String::new();
            describe_sheaf(&mut s, &real.sheaf);
            s
        };
        Ok(Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        })
    };
    run().unwrap_or_else(|o| o)
}

fn to_aug(path: &str, stdin: &mut dyn Read, json: bool) -> Outcome {
    let mut run = || -> Result<Outcome, Outcome> {
        let text = read_input(path, stdin)?;
        let j: SheafJson = parse_json(&text, "sheaf")?;
        let f = SheafData::from_json(&j).map_err(fail)?;
        let rep = validate(&f);
        if !rep.is_ok() {
            return Ok(Outcome {
                code: EXIT_FAILED,
                stdout: String::new(),
                stderr: format!("error: invalid sheaf: {}\n", rep.failures.join("; ")),
            });
        }
        let t = choose_trivialization(&f).map_err(fail)?;
        let c = sheaf_to_aug(&f, &t).map_err(fail)?;
        let stdout = if json {
            to_json(&c.to_json())
        } else {
            format!("{}\n", describe_aug(&c))
        };
        Ok(Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        })
    };
    run().unwrap_or_else(|o| o)
}

fn verify(a: &BraidArgs, field: &str, opts: VerifyOptions, json: bool) -> Outcome {
    let run = || -> Result<Outcome, Outcome> {
        let field = prime_field(field)?;
        let mut notes = Vec::new();
        let b = monotone(&parse_braid(a)?, &mut notes);
        let mut report = moduli::verify_bijection(&b, field, opts).map_err(fail)?;
        report.notes.extend(notes);
        let code = if report.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_FAILED
        };
        let stdout = if json {
            to_json(&report)
        } else {
            let mut s = String::new();
            let _ = writeln!(s, "{} over {}", report.braid, report.field);
            let _ = writeln!(s, "search space: {} tuples", report.search_space);
            let _ = writeln!(s, "augmentations: {}", report.aug_point_count);
            let _ = writeln!(s, "orbits: {}", report.orbit_count());
            let _ = writeln!(s, "sheaf representatives: {}", report.sheaf_count());
            if let Some(cc) = &report.cross_check {
                let _ = writeln!(
                    s,
                    "independent sheaf search: dimensions {:?}, {} sheaves, complete: {}, undecided: {}",
                    cc.dims_checked, cc.sheaves_found, cc.complete, cc.undecided
                );
                for k in &cc.skipped {
                    let _ = writeln!(s, "  skipped {k}");
                }
            }
            for n in &report.notes {
                let _ = writeln!(s, "note: {n}");
            }
            let _ = writeln!(s, "failures: {}", report.failures.len());
            for f in &report.failures {
                let _ = writeln!(
                    s,
                    "  {} / {}: expected {}, got {}",
                    f.context, f.location, f.expected, f.got
                );
            }
            s
        };
        Ok(Outcome {
            code,
            stdout,
            stderr: String::new(),
        })
    };
    run().unwrap_or_else(|o| o)
}

fn markov(a: &BraidArgs, b: &BraidArgs, field: &str, budget: u128, json: bool) -> Outcome {
    let run = || -> Result<Outcome, Outcome> {
        let field = prime_field(field)?;
        let b1 = parse_braid(a)?;
        let b2 = parse_braid(b)?;
        let r = moduli::markov_compare(&b1, &b2, field, budget).map_err(fail)?;
        let ok = r.counts_equal && r.matched;
        let stdout = if json {
            to_json(&r)
        } else {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{}: {} orbits, {} unrealized",
                r.braid1, r.orbits1, r.unrealized1
            );
            let _ = writeln!(
                s,
                "{}: {} orbits, {} unrealized",
                r.braid2, r.orbits2, r.unrealized2
            );
            let _ = writeln!(s, "simplified: {} and {}", r.normal_form1, r.normal_form2);
            let _ = writeln!(
                s,
                "representatives matched: {} ({} isomorphic pairs)",
                r.matched, r.isomorphic_pairs
            );
            for f in &r.failures {
                let _ = writeln!(s, "  {f}");
            }
            s
        };
        Ok(Outcome {
            code: if ok { EXIT_OK } else { EXIT_FAILED },
            stdout,
            stderr: String::new(),
        })
    };
    run().unwrap_or_else(|o| o)
}

#[derive(Serialize)]
struct Unlink3Json {
    augmentation: AugCandidateJson,
    subsheaf: SheafJson,
    sheaf: SheafJson,
    f: Vec<Vec<String>>,
    f_inverse: Vec<Vec<String>>,
    recovered: AugCandidateJson,
    recovered_canonical: AugCandidateJson,
    ok: bool,
}

/// The candidate R = [[0,e12,e13],[0,0,0],[0,e32,e33]] on the three-strand
/// unlink, λ = 1 and μ read off the diagonal.
pub fn unlink3_candidate(field: FieldSpec, e: [i64; 4]) -> Result<AugCandidate, String> {
    let [e12, e13, e32, e33] = e.map(|x| field.from_i64(x));
    if [&e12, &e13, &e32, &e33].iter().any(|x| x.is_zero()) {
        return Err("entries e12, e13, e32, e33 must be nonzero".into());
    }
    let det = e12.mul(&e33).sub(&e13.mul(&e32));
    if det.is_zero() {
        return Err(format!(
            "determinant constraint violated: e12*e33 - e13*e32 = 0 in {field}"
        ));
    }
    let one = field.one();
    let mu3 = one.sub(&e33);
    if mu3.is_zero() {
        return Err("e33 = 1 would force mu = 0 on the third component".into());
    }
    let z = field.zero();
    let r = Matrix::from_rows(
        field,
        vec![
            vec![z.clone(), e12, e13],
            vec![z.clone(), z.clone(), z.clone()],
            vec![z, e32, e33],
        ],
    )
    .map_err(|e| e.to_string())?;
    AugCandidate::new(
        field,
        vec![0, 1, 2],
        r,
        vec![one.clone(), one.clone(), one.clone()],
        vec![one.clone(), one, mu3],
    )
    .map_err(|e| e.to_string())
}

fn example_unlink3(field: &str, e: [i64; 4], json: bool) -> Outcome {
    let run = || -> Result<Outcome, Outcome> {
        let field: FieldSpec = field.parse().map_err(fail)?;
        let c = unlink3_candidate(field, e).map_err(input_error)?;
        let link = LinkData::new(&BraidWord::new(3, vec![]).expect("valid")).map_err(fail)?;
        let sub = aug_to_subsheaf(&c, &link).map_err(fail)?;
        let real = aug_to_sheaf(&c, &link).map_err(fail)?;
        let t = canonical_trivialization_of(&c, &real);
        let back = sheaf_to_aug(&real.sheaf, &t).map_err(fail)?;
        let ok = back.r_mat == c.r_mat && back.lambda == c.lambda && back.mu == c.mu;
        let auto = choose_trivialization(&real.sheaf)
            .and_then(|t| sheaf_to_aug(&real.sheaf, &t))
            .map_err(fail)?;
        let ok = ok && canonical_form(&auto).0 == canonical_form(&c).0;
        let strings = |vs: &[Vec<crate::exactfield::Scalar>]| -> Vec<Vec<String>> {
            vs.iter()
                .map(|v| v.iter().map(|x| x.to_string()).collect())
                .collect()
        };
        let stdout = if json {
            to_json(&Unlink3Json {
                augmentation: c.to_json(),
                subsheaf: sub.sheaf.to_json(),
                sheaf: real.sheaf.to_json(),
                f: strings(&t.f),
                f_inverse: strings(&t.finv),
                recovered: back.to_json(),
                recovered_canonical: canonical_form(&auto).0.to_json(),
                ok,
            })
        } else {
            let mut s = String::new();
            let _ = writeln!(s, "augmentation: {}", describe_aug(&c));
            let _ = writeln!(s, "subrepresentation on the span of the columns of R:");
            describe_sheaf(&mut s, &sub.sheaf);
            let _ = writeln!(s, "sheaf:");
            describe_sheaf(&mut s, &real.sheaf);
            for i in 0..3 {
                let _ = writeln!(
                    s,
                    "f_{} = {}  f_{}^-1(1) = {}",
                    i + 1,
                    row(&t.f[i]),
                    i + 1,
                    row(&t.finv[i])
                );
            }
            let _ = writeln!(s, "recovered: {}", describe_aug(&back));
            if ok {
                let _ = writeln!(s, "ε_F(γ_ij) = ε_ij: OK");
            } else {
                let _ = writeln!(s, "ε_F(γ_ij) = ε_ij: MISMATCH");
            }
            s
        };
        Ok(Outcome {
            code: if ok { EXIT_OK } else { EXIT_FAILED },
            stdout,
            stderr: String::new(),
        })
    };
    run().unwrap_or_else(|o| o)
}
