//! Command-line front-end: parse model/fan/complex files, dispatch the
//! library operations, and emit deterministic JSON reports.

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use tropmotive::complex::{
    delta_compatible_subdivision, is_delta_compatible, is_immersive, subcomplex_sigma_delta,
};
use tropmotive::error::TropError;
use tropmotive::fan::{complete_fan, is_complete};
use tropmotive::io::{
    complex_from_doc, complex_to_doc, fan_from_doc, fan_to_doc, matrix_from_doc, matrix_to_doc,
    model_from_doc, motivic_to_doc, vec_from_doc, vec_to_i64, ComplexDoc, FanDoc, ModelDoc,
    TermDoc,
};
use tropmotive::lattice::LatticeVector;
use tropmotive::snc::{is_proper_orthant_map, unimodular_envelope};
use tropmotive::volumes::{generating_function, volume, zeta_pipeline};

#[derive(Parser)]
#[command(name = "tropmotive", version, about = "Polyhedral toolkit for motivic volumes and zeta functions")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Check an SNC model against all its invariants.
    Validate {
        #[arg(long)]
        model: String,
    },
    /// Is an integer matrix a proper orthant map?
    CheckProper {
        #[arg(long)]
        matrix: String,
    },
    /// Is every cell map of a complex injective?
    CheckImmersive {
        #[arg(long)]
        complex: String,
    },
    /// Is a complex compatible with a target fan?
    CheckCompatible {
        #[arg(long)]
        complex: String,
        #[arg(long)]
        fan: String,
    },
    /// Compatible unimodular subdivision of a complex.
    Subdivide {
        #[arg(long)]
        complex: String,
        #[arg(long)]
        fan: String,
    },
    /// A complete fan containing the input verbatim.
    Complete {
        #[arg(long)]
        fan: String,
    },
    /// Common refinement of two fans.
    Refine {
        #[arg(long)]
        fan: String,
        #[arg(long)]
        fan2: String,
    },
    /// Unimodular-envelope decomposition of a proper orthant map.
    Envelope {
        #[arg(long)]
        matrix: String,
    },
    /// Motivic volume at one or more lattice points (semicolon-separated).
    Volume {
        #[arg(long)]
        model: String,
        #[arg(long)]
        w: String,
        #[arg(long, env = "TROPMOTIVE_JOBS", default_value_t = 1)]
        jobs: usize,
    },
    /// The generating function, one rational factor list per nerve face.
    Genfun {
        #[arg(long)]
        model: String,
    },
    /// Zeta series coefficients and candidate poles.
    Zeta {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 12)]
        bound: i64,
        /// 1-based coordinate; defaults to the last.
        #[arg(long)]
        axis: Option<usize>,
    },
    /// Candidate poles only.
    Poles {
        #[arg(long)]
        model: String,
        #[arg(long)]
        axis: Option<usize>,
    },
}

#[derive(Debug)]
enum CliError {
    Malformed(String),
    Module(TropError),
    Diagnostics(Vec<String>),
}

impl From<TropError> for CliError {
    fn from(e: TropError) -> CliError {
        match e {
            TropError::Malformed(m) => CliError::Malformed(m),
            other => CliError::Module(other),
        }
    }
}

/// An input argument: either inline JSON or a file path. The report records
/// a hash of the raw bytes either way.
struct Input {
    source: String,
    body: String,
    sha256: String,
}

fn read_input(arg: &str) -> Result<Input, CliError> {
    let trimmed = arg.trim_start();
    let (source, body) = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        ("<inline>".to_string(), arg.to_string())
    } else {
        let body = std::fs::read_to_string(arg)
            .map_err(|e| CliError::Malformed(format!("cannot read {arg}: {e}")))?;
        (arg.to_string(), body)
    };
    let sha256 = hex::encode(Sha256::digest(body.as_bytes()));
    Ok(Input { source, body, sha256 })
}

fn parse_json<T: serde::de::DeserializeOwned>(input: &Input, what: &str) -> Result<T, CliError> {
    serde_json::from_str(&input.body)
        .map_err(|e| CliError::Malformed(format!("{what} {}: {e}", input.source)))
}

fn parse_w(arg: &str) -> Result<Vec<LatticeVector>, CliError> {
    arg.split(';')
        .map(|p| {
            p.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<i64>()
                        .map_err(|e| CliError::Malformed(format!("bad coordinate {x:?}: {e}")))
                })
                .collect::<Result<Vec<i64>, _>>()
                .map(|v| vec_from_doc(&v))
        })
        .collect()
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    inputs: BTreeMap<String, InputStamp>,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
struct InputStamp {
    source: String,
    sha256: String,
}

fn emit<T: Serialize>(inputs: Vec<(&str, &Input)>, body: T) {
    let report = Report {
        inputs: inputs
            .into_iter()
            .map(|(k, i)| {
                (k.to_string(), InputStamp { source: i.source.clone(), sha256: i.sha256.clone() })
            })
            .collect(),
        body,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
}

fn axis_index(axis: Option<usize>, rank: usize) -> Result<usize, CliError> {
    let a = axis.unwrap_or(rank);
    if a == 0 || a > rank {
        return Err(CliError::Malformed(format!("axis {a} out of range 1..={rank}")));
    }
    Ok(a - 1)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.verb {
        Verb::Validate { model } => {
            let input = read_input(&model)?;
            let doc: ModelDoc = parse_json(&input, "model")?;
            let m = model_from_doc(&doc)?;
            let diagnostics = m.validate();
            #[derive(Serialize)]
            struct Body {
                valid: bool,
                diagnostics: Vec<String>,
            }
            emit(
                vec![("model", &input)],
                Body { valid: diagnostics.is_empty(), diagnostics: diagnostics.clone() },
            );
            if diagnostics.is_empty() {
                Ok(())
            } else {
                Err(CliError::Diagnostics(diagnostics))
            }
        }
        Verb::CheckProper { matrix } => {
            let input = read_input(&matrix)?;
            let rows: Vec<Vec<i64>> = parse_json(&input, "matrix")?;
            let m = matrix_from_doc(&rows, 0)?;
            #[derive(Serialize)]
            struct Body {
                proper: bool,
            }
            emit(vec![("matrix", &input)], Body { proper: is_proper_orthant_map(&m) });
            Ok(())
        }
        Verb::CheckImmersive { complex } => {
            let input = read_input(&complex)?;
            let doc: ComplexDoc = parse_json(&input, "complex")?;
            let c = complex_from_doc(&doc)?;
            #[derive(Serialize)]
            struct Body {
                immersive: bool,
            }
            emit(vec![("complex", &input)], Body { immersive: is_immersive(&c) });
            Ok(())
        }
        Verb::CheckCompatible { complex, fan } => {
            let ci = read_input(&complex)?;
            let fi = read_input(&fan)?;
            let c = complex_from_doc(&parse_json(&ci, "complex")?)?;
            let f = fan_from_doc(&parse_json(&fi, "fan")?)?;
            let (sub, proper) = subcomplex_sigma_delta(&c, &f);
            #[derive(Serialize)]
            struct Body {
                compatible: bool,
                subcomplex_cells: usize,
                extension_proper: bool,
            }
            emit(
                vec![("complex", &ci), ("fan", &fi)],
                Body {
                    compatible: is_delta_compatible(&c, &f),
                    subcomplex_cells: sub.cells.len(),
                    extension_proper: proper,
                },
            );
            Ok(())
        }
        Verb::Subdivide { complex, fan } => {
            let ci = read_input(&complex)?;
            let fi = read_input(&fan)?;
            let c = complex_from_doc(&parse_json(&ci, "complex")?)?;
            let f = fan_from_doc(&parse_json(&fi, "fan")?)?;
            let out = delta_compatible_subdivision(&c, &f)?;
            #[derive(Serialize)]
            struct Body {
                complex: ComplexDoc,
                cell_count: usize,
            }
            let doc = complex_to_doc(&out)?;
            emit(
                vec![("complex", &ci), ("fan", &fi)],
                Body { cell_count: doc.cells.len(), complex: doc },
            );
            Ok(())
        }
        Verb::Complete { fan } => {
            let fi = read_input(&fan)?;
            let f = fan_from_doc(&parse_json(&fi, "fan")?)?;
            let out = complete_fan(&f)?;
            #[derive(Serialize)]
            struct Body {
                fan: FanDoc,
                complete: bool,
            }
            emit(
                vec![("fan", &fi)],
                Body { complete: is_complete(&out), fan: fan_to_doc(&out)? },
            );
            Ok(())
        }
        Verb::Refine { fan, fan2 } => {
            let f1i = read_input(&fan)?;
            let f2i = read_input(&fan2)?;
            let f1 = fan_from_doc(&parse_json(&f1i, "fan")?)?;
            let f2 = fan_from_doc(&parse_json(&f2i, "fan")?)?;
            let out = f1.common_refinement(&f2);
            #[derive(Serialize)]
            struct Body {
                fan: FanDoc,
            }
            emit(vec![("fan", &f1i), ("fan2", &f2i)], Body { fan: fan_to_doc(&out)? });
            Ok(())
        }
        Verb::Envelope { matrix } => {
            let input = read_input(&matrix)?;
            let rows: Vec<Vec<i64>> = parse_json(&input, "matrix")?;
            let m = matrix_from_doc(&rows, 0)?;
            let (basis_v, basis_ext, a) = unimodular_envelope(&m)?;
            #[derive(Serialize)]
            struct Body {
                basis_v: Vec<Vec<i64>>,
                basis_ext: Vec<Vec<i64>>,
                a: Vec<Vec<i64>>,
            }
            emit(
                vec![("matrix", &input)],
                Body {
                    basis_v: basis_v.iter().map(|v| vec_to_i64(v)).collect::<Result<_, _>>()?,
                    basis_ext: basis_ext
                        .iter()
                        .map(|v| vec_to_i64(v))
                        .collect::<Result<_, _>>()?,
                    a: matrix_to_doc(&a)?,
                },
            );
            Ok(())
        }
        Verb::Volume { model, w, jobs } => {
            let input = read_input(&model)?;
            let m = model_from_doc(&parse_json(&input, "model")?)?;
            let points = parse_w(&w)?;
            let jobs = jobs.max(1);
            let reports: Vec<Result<tropmotive::volumes::VolumeReport, TropError>> =
                if jobs == 1 || points.len() == 1 {
                    points.iter().map(|p| volume(&m, p)).collect()
                } else {
                    // deterministic fan-out: results collected in input order
                    std::thread::scope(|scope| {
                        let handles: Vec<_> = points
                            .chunks(points.len().div_ceil(jobs))
                            .map(|chunk| {
                                let m = &m;
                                scope.spawn(move || {
                                    chunk.iter().map(|p| volume(m, p)).collect::<Vec<_>>()
                                })
                            })
                            .collect();
                        handles
                            .into_iter()
                            .flat_map(|h| h.join().expect("volume worker"))
                            .collect()
                    })
                };
            #[derive(Serialize)]
            struct Entry {
                w: Vec<i64>,
                value: Vec<TermDoc>,
                contributions: Vec<Contribution>,
            }
            #[derive(Serialize)]
            struct Contribution {
                #[serde(rename = "S")]
                s: Vec<String>,
                f: Vec<TermDoc>,
                class: Vec<TermDoc>,
            }
            #[derive(Serialize)]
            struct Body {
                volumes: Vec<Entry>,
            }
            let mut entries = Vec::new();
            for r in reports {
                let r = r?;
                entries.push(Entry {
                    w: vec_to_i64(&r.w)?,
                    value: motivic_to_doc(&r.value)?,
                    contributions: r
                        .contributions
                        .iter()
                        .map(|(s, f, class)| {
                            Ok(Contribution {
                                s: s.iter().cloned().collect(),
                                f: motivic_to_doc(f)?,
                                class: motivic_to_doc(class)?,
                            })
                        })
                        .collect::<Result<_, TropError>>()?,
                });
            }
            emit(vec![("model", &input)], Body { volumes: entries });
            Ok(())
        }
        Verb::Genfun { model } => {
            let input = read_input(&model)?;
            let m = model_from_doc(&parse_json(&input, "model")?)?;
            let gf = generating_function(&m)?;
            #[derive(Serialize)]
            struct Factor {
                v: Vec<i64>,
                m: u32,
            }
            #[derive(Serialize)]
            struct Entry {
                #[serde(rename = "S")]
                s: Vec<String>,
                prefactor: Vec<TermDoc>,
                factors: Vec<Factor>,
            }
            #[derive(Serialize)]
            struct Body {
                generating_function: Vec<Entry>,
            }
            let entries = gf
                .iter()
                .map(|(s, g)| {
                    Ok(Entry {
                        s: s.iter().cloned().collect(),
                        prefactor: motivic_to_doc(&g.prefactor)?,
                        factors: g
                            .factors
                            .iter()
                            .map(|(v, m)| Ok(Factor { v: vec_to_i64(v)?, m: *m }))
                            .collect::<Result<_, TropError>>()?,
                    })
                })
                .collect::<Result<_, TropError>>()?;
            emit(vec![("model", &input)], Body { generating_function: entries });
            Ok(())
        }
        Verb::Zeta { model, bound, axis } => {
            let input = read_input(&model)?;
            let m = model_from_doc(&parse_json(&input, "model")?)?;
            let axis = axis_index(axis, m.target_rank)?;
            let (z, poles) = zeta_pipeline(&m, axis, bound)?;
            #[derive(Serialize)]
            struct Body {
                coeffs: Vec<Vec<TermDoc>>,
                poles: Vec<(i64, i64)>,
                bound: i64,
            }
            emit(
                vec![("model", &input)],
                Body {
                    coeffs: z
                        .coeffs
                        .iter()
                        .map(motivic_to_doc)
                        .collect::<Result<_, TropError>>()?,
                    poles,
                    bound,
                },
            );
            Ok(())
        }
        Verb::Poles { model, axis } => {
            let input = read_input(&model)?;
            let m = model_from_doc(&parse_json(&input, "model")?)?;
            let axis = axis_index(axis, m.target_rank)?;
            let gf = generating_function(&m)?;
            let mut poles: Vec<(i64, i64)> = Vec::new();
            for (_, g) in &gf {
                for p in tropmotive::motivic::candidate_poles(g, axis) {
                    if !poles.contains(&p) {
                        poles.push(p);
                    }
                }
            }
            poles.sort();
            #[derive(Serialize)]
            struct Body {
                poles: Vec<(i64, i64)>,
            }
            emit(vec![("model", &input)], Body { poles });
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Malformed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Module(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Diagnostics(ds)) => {
            for d in &ds {
                eprintln!("diagnostic: {d}");
            }
            ExitCode::from(2)
        }
    }
}
