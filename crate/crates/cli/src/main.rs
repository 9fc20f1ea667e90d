//! Command-line front end: coherence checks, p-adic arithmetic, characters,
//! leaf-curve sampling, smoothness probes, holonomy tables and lambda
//! certificates.
//!
//! Output is deterministic for a fixed request and seed. Exit code 0 means
//! every check passed, 1 a check failure, 2 a parse or argument error.
//! The environment variable PROLIM_TOL overrides the default numerical
//! tolerances.

use clap::{Parser, Subcommand};
use prolim_core::curves::{boman_harness, ProbeTarget};
use prolim_core::cylinder::CylFunction;
use prolim_core::error::Error;
use prolim_core::expr::random_trig_poly;
use prolim_core::family::{
    check_family_coherence, make_builtin_family, FamilyDescriptor, Index, LevelSpace,
};
use prolim_core::gauge::{
    graph_from_json, lambda_certificate, project_connection, Character, ConnectionU1,
};
use prolim_core::padic::PadicInt;
use prolim_core::report::Report;
use prolim_core::solenoid::leaf_curve;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::f64::consts::TAU;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "prolim", version, about = "Calculator for projective limits of manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit projection coherence of a built-in family on random samples.
    CoherenceCheck {
        /// Family kind: power-map-tower, divisibility-tower, padic-tower,
        /// jet-tower or product-circles.
        #[arg(long)]
        kind: String,
        /// Base p for the tower kinds.
        #[arg(long, default_value_t = 2)]
        p: u32,
        /// Source dimension for jet towers.
        #[arg(long, default_value_t = 1)]
        src: u32,
        /// Target dimension for jet towers.
        #[arg(long, default_value_t = 1)]
        tgt: u32,
        /// Number of circle factors for product-circles.
        #[arg(long, default_value_t = 2)]
        factors: usize,
        #[arg(long, default_value_t = 200)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact p-adic arithmetic on digit streams `d0 d1 ..|tail`.
    PadicArith {
        #[arg(long)]
        p: u32,
        /// add, sub, mul or neg.
        op: String,
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: Option<String>,
    },
    /// Evaluate the n-th solenoid character at (t, x).
    CharEval {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        t: f64,
        /// p-adic part: an integer or a digit stream.
        #[arg(long, default_value = "0")]
        x: String,
        #[arg(long)]
        n: usize,
    },
    /// Sample circle projections of a leaf curve as CSV (s, level, angle).
    SolenoidLeaf {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value = "0")]
        x: String,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Parameter range lo:hi.
        #[arg(long, default_value = "0:4")]
        range: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probe random structure curves on a product of circles.
    BomanProbe {
        #[arg(long, default_value_t = 10)]
        factors: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Probe a planted discontinuous function instead of a cylindrical
        /// one; the probe is then expected to fail.
        #[arg(long, default_value_t = false)]
        plant_discontinuity: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Holonomies of a smooth form over a graph, as CSV (edge, re, im).
    Holonomy {
        /// Path to the graph JSON.
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated component expressions, one per coordinate.
        #[arg(long)]
        form: String,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The real form of a smooth connection on a character, with its
    /// pairing certificate.
    LambdaCert {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        form: String,
        /// Character as edge:exponent pairs, e.g. "e1:3,e2:-1".
        #[arg(long)]
        character: String,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 1e-8)]
        cert_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::BadDescriptor(_)
        | Error::BadArgument(_)
        | Error::BadGraph(_)
        | Error::BadIndex(_, _)
        | Error::BaseMismatch(_, _)
        | Error::Incomparable(_, _)
        | Error::MissingEdge(_) => 2,
        _ => 1,
    }
}

/// PROLIM_TOL overrides the default tolerance when set.
fn default_tol(fallback: f64) -> f64 {
    std::env::var("PROLIM_TOL")
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|t| *t > 0.0)
        .unwrap_or(fallback)
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::BadArgument(format!("cannot write {}: {e}", path.display()))),
    }
}

fn parse_padic(text: &str, p: u32) -> Result<PadicInt, Error> {
    let trimmed = text.trim();
    if trimmed.contains('|') {
        PadicInt::parse(trimmed, p)
    } else {
        let m: i64 = trimmed
            .parse()
            .map_err(|_| Error::Parse(format!("not an integer or digit stream: '{trimmed}'")))?;
        PadicInt::from_integer(m, p)
    }
}

/// Minimal decimal rendering: integers print bare, everything else with 12
/// digits, trailing zeros trimmed.
fn fmt_num(v: f64) -> String {
    let rounded = v.round();
    if (v - rounded).abs() < 5e-13 {
        let r = if rounded == 0.0 { 0.0 } else { rounded };
        format!("{}", r as i64)
    } else {
        let s = format!("{v:.12}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn fmt_complex(re: f64, im: f64) -> String {
    if im < 0.0 {
        format!("{}-{}i", fmt_num(re), fmt_num(-im))
    } else {
        format!("{}+{}i", fmt_num(re), fmt_num(im))
    }
}

#[derive(Serialize)]
struct BomanPayload {
    factors: usize,
    target: String,
    #[serde(flatten)]
    report: prolim_core::curves::HarnessReport,
}

fn run(command: Command) -> Result<bool, Error> {
    match command {
        Command::CoherenceCheck {
            kind,
            p,
            src,
            tgt,
            factors,
            budget,
            seed,
            out,
        } => {
            let desc = match kind.as_str() {
                "power-map-tower" => FamilyDescriptor::PowerMapTower { p },
                "divisibility-tower" => FamilyDescriptor::DivisibilityTower,
                "padic-tower" => FamilyDescriptor::PadicTower { p },
                "jet-tower" => FamilyDescriptor::JetTower { src, tgt },
                "product-circles" => FamilyDescriptor::Product {
                    factors: vec![LevelSpace::Circle { period: TAU }; factors],
                },
                other => {
                    return Err(Error::BadDescriptor(format!("unknown family kind '{other}'")))
                }
            };
            let family = make_builtin_family(&desc)?;
            let report = check_family_coherence(&family, budget, seed)?;
            let pass = report.pass;
            let envelope = Report::new("coherence-check", pass, report);
            emit(out.as_ref(), &envelope.to_json_pretty())?;
            Ok(pass)
        }

        Command::PadicArith { p, op, a, b } => {
            let a = parse_padic(&a, p)?;
            let result = match (op.as_str(), b) {
                ("neg", None) => a.neg(),
                ("add", Some(b)) => a.add(&parse_padic(&b, p)?)?,
                ("sub", Some(b)) => a.sub(&parse_padic(&b, p)?)?,
                ("mul", Some(b)) => a.mul(&parse_padic(&b, p)?)?,
                (op, b) => {
                    return Err(Error::Parse(format!(
                        "bad operation '{op}' with {} operands",
                        1 + b.is_some() as usize
                    )))
                }
            };
            println!("{result}");
            Ok(true)
        }

        Command::CharEval { p, t, x, n } => {
            let x = parse_padic(&x, p)?;
            let z = prolim_core::solenoid::chi_raw(p, t, &x, n)?;
            println!("{}", fmt_complex(z.re, z.im));
            Ok(true)
        }

        Command::SolenoidLeaf {
            p,
            x,
            levels,
            samples,
            range,
            out,
        } => {
            if levels == 0 || samples == 0 {
                return Err(Error::BadArgument("levels and samples must be >= 1".into()));
            }
            let (lo, hi) = range
                .split_once(':')
                .and_then(|(a, b)| Some((a.parse::<f64>().ok()?, b.parse::<f64>().ok()?)))
                .ok_or_else(|| Error::Parse(format!("bad range '{range}', expected lo:hi")))?;
            if hi <= lo {
                return Err(Error::BadArgument("range must be increasing".into()));
            }
            let x = parse_padic(&x, p)?;
            let curve = leaf_curve(x);
            let mut csv = String::from("s,level,angle\n");
            for k in 0..samples {
                let s = lo + (hi - lo) * k as f64 / (samples - 1).max(1) as f64;
                for level in 1..=levels {
                    let angle = curve.angle_at_level(s, level)?;
                    csv.push_str(&format!("{s:.9},{level},{angle:.12}\n"));
                }
            }
            emit(out.as_ref(), &csv)?;
            Ok(true)
        }

        Command::BomanProbe {
            factors,
            trials,
            seed,
            plant_discontinuity,
            out,
        } => {
            if factors == 0 || trials == 0 {
                return Err(Error::BadArgument("factors and trials must be >= 1".into()));
            }
            let family = make_builtin_family(&FamilyDescriptor::Product {
                factors: vec![LevelSpace::Circle { period: TAU }; factors],
            })?;
            let (target, name) = if plant_discontinuity {
                (
                    ProbeTarget::raw(|full: &[f64]| {
                        if full[0].rem_euclid(TAU) < TAU / 2.0 {
                            0.0
                        } else {
                            1.0
                        }
                    }),
                    "planted step in factor 0".to_string(),
                )
            } else {
                // a cylindrical function of two seeded random factors
                let mut rng = StdRng::seed_from_u64(seed ^ 0x5eed);
                let i = rng.gen_range(0..factors as u32);
                let mut j = rng.gen_range(0..factors as u32);
                if factors > 1 && j == i {
                    j = (j + 1) % factors as u32;
                }
                let level = Index::subset([i, j]);
                let dims = family.level(&level)?.dimension();
                let expr = random_trig_poly(&vec![TAU; dims], 2, &mut rng);
                let name = format!("cylindrical on {{{i},{j}}}: {expr}");
                let f = CylFunction::new(
                    family.clone(),
                    level,
                    prolim_core::cylinder::ScalarField::from_expr(expr),
                )?;
                (ProbeTarget::Cyl(f), name)
            };
            let report = boman_harness(&family, &target, trials, seed)?;
            let pass = report.pass;
            let envelope = Report::new(
                "boman-probe",
                pass,
                BomanPayload {
                    factors,
                    target: name,
                    report,
                },
            );
            emit(out.as_ref(), &envelope.to_json_pretty())?;
            Ok(pass)
        }

        Command::Holonomy {
            graph,
            form,
            tol,
            out,
        } => {
            let json = std::fs::read_to_string(&graph)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", graph.display())))?;
            let graph = graph_from_json(&json)?;
            let components: Vec<&str> = form.split(',').collect();
            let a = ConnectionU1::from_expr_strs(&components)?;
            let tol = tol.unwrap_or_else(|| default_tol(1e-10));
            let mut csv = String::from("edge,re,im\n");
            let projected = project_connection(&a, &graph, tol)?;
            for id in projected.edge_ids() {
                let z = projected.value(&id)?;
                csv.push_str(&format!("{id},{:.12},{:.12}\n", z.re, z.im));
            }
            emit(out.as_ref(), &csv)?;
            Ok(true)
        }

        Command::LambdaCert {
            graph,
            form,
            character,
            tol,
            cert_tol,
            out,
        } => {
            let json = std::fs::read_to_string(&graph)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", graph.display())))?;
            let graph = graph_from_json(&json)?;
            let components: Vec<&str> = form.split(',').collect();
            let a = ConnectionU1::from_expr_strs(&components)?;
            let chi = Character::parse(&character)?;
            let tol = tol.unwrap_or_else(|| default_tol(1e-10));
            let cert = lambda_certificate(&a, &chi, &graph, tol, cert_tol)?;
            let pass = cert.pass;
            let envelope = Report::new("lambda-cert", pass, cert);
            emit(out.as_ref(), &envelope.to_json_pretty())?;
            Ok(pass)
        }
    }
}
