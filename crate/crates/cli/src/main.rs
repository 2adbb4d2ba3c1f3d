use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use peisert_core::budget::DEFAULT_BUDGET_SECS;
use peisert_core::clique::{enumerate_max_cliques, CliqueQuery};
use peisert_core::ekr::{
    build_ekr_basis_with, canonical_cliques_with, decompose_clique, maximal_clique_bound, strict_ekr_audit,
    AuditScope,
};
use peisert_core::field::{CosetIndex, FieldCtx};
use peisert_core::graph::{Clique, Graph};
use peisert_core::hadamard::{build_whd, check_diagonalization, is_weakly_hadamard, parse_whd_csv};
use peisert_core::oa::{block_graph, build_pointline_oa, OrthogonalArray, SubarraySelection};
use peisert_core::peisert::{build_cayley, default_alpha, family, Family, PeisertGraph};
use peisert_core::report::{
    counterexample_report, field_for_q, prime_power, reproduce_case_study, survey, Error, RunConfig,
};

#[derive(Parser)]
#[command(name = "peisert", version, about = "Peisert-type graphs: construction and exact certification")]
struct Cli {
    /// Wall-clock budget in seconds for exhaustive searches.
    #[arg(long, global = true, env = "PEISERT_BUDGET", default_value_t = DEFAULT_BUDGET_SECS)]
    budget: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Finite field tables.
    #[command(subcommand)]
    Field(FieldCmd),
    /// Cayley graph construction, SRG certification and clique search.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Point-line orthogonal arrays and their block graphs.
    #[command(subcommand)]
    Oa(OaCmd),
    /// Canonical cliques, EKR-module decomposition and strict-EKR audits.
    #[command(subcommand)]
    Ekr(EkrCmd),
    /// Weakly Hadamard diagonalization.
    #[command(subcommand)]
    Whd(WhdCmd),
    /// Reproduce the GP*(81,10) analysis.
    #[command(name = "reproduce-81")]
    Reproduce81 {
        /// Use another modulus for GF(81); only the counts are then checked.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        modulus: Option<Vec<i64>>,
        /// Write the clique/coefficient table as CSV.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every certificate over a batch of graphs.
    Survey {
        #[arg(long = "q", value_delimiter = ',', default_value = "3,5,7,9")]
        q_list: Vec<u32>,
        /// Target number of index sets per q (q = 3 is always exhaustive).
        #[arg(long, default_value_t = peisert_core::report::DEFAULT_SURVEY_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = peisert_core::report::DEFAULT_SURVEY_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FieldCmd {
    Inspect {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: u32,
        /// Coefficients c0,c1,...,cr, constant term first.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        modulus: Option<Vec<i64>>,
    },
}

#[derive(Args, Clone)]
struct GraphSpec {
    /// Base field order q; the graph lives on GF(q^2).
    #[arg(long)]
    q: u64,
    /// Modulus for GF(q^2), constant term first.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    modulus: Option<Vec<i64>>,
    /// paley, peisert, gp or gpstar.
    #[arg(long, conflicts_with = "cosets")]
    family: Option<Family>,
    /// Divisor for gp and gpstar.
    #[arg(long)]
    d: Option<u32>,
    /// Explicit coset indices, e.g. 0,1,2.
    #[arg(long, value_delimiter = ',')]
    cosets: Option<Vec<u32>>,
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Print the graph in DIMACS format.
    Build {
        #[command(flatten)]
        spec: GraphSpec,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify strong regularity and compare with the expected parameters.
    Srg {
        #[command(flatten)]
        spec: GraphSpec,
    },
    /// Enumerate maximum cliques (or cliques of a given size).
    Cliques {
        #[command(flatten)]
        spec: GraphSpec,
        /// Only cliques through this field-element label.
        #[arg(long)]
        through: Option<u32>,
        #[arg(long)]
        target: Option<usize>,
    },
}

#[derive(Subcommand)]
enum OaCmd {
    /// Print OA(q+1,q) as CSV, or the rows of a connection set when one is given.
    Build {
        #[arg(long)]
        q: u64,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        modulus: Option<Vec<i64>>,
        #[arg(long)]
        family: Option<Family>,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long, value_delimiter = ',')]
        cosets: Option<Vec<u32>>,
        /// Label of the element identifying the plane (default: automatic).
        #[arg(long)]
        alpha: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the orthogonal-array property of a CSV file.
    Verify { file: PathBuf },
    /// Block graph of a CSV orthogonal array, in DIMACS format.
    Blockgraph {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum EkrCmd {
    /// Enumerate maximum cliques and classify them as canonical or not.
    Audit {
        #[command(flatten)]
        spec: GraphSpec,
        /// Restrict to cliques through this vertex label.
        #[arg(long)]
        through: Option<u32>,
    },
    /// Decompose a maximum clique over the canonical-clique basis.
    Decompose {
        #[command(flatten)]
        spec: GraphSpec,
        /// Field-element labels of the clique.
        #[arg(long, value_delimiter = ',')]
        clique: Vec<u32>,
        #[arg(long, default_value_t = 0)]
        base: u32,
    },
    /// Build and audit the subspace counterexample.
    Counterexample {
        #[arg(long)]
        q: u64,
        /// Order of the proper subfield K of GF(q).
        #[arg(long)]
        subfield: u64,
    },
}

#[derive(Subcommand)]
enum WhdCmd {
    /// Build and certify the diagonalizing matrix; CSV has the diagonal first.
    Build {
        #[command(flatten)]
        spec: GraphSpec,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a CSV matrix; with a graph, also check the diagonalization.
    Verify {
        file: PathBuf,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        modulus: Option<Vec<i64>>,
        #[arg(long)]
        family: Option<Family>,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long, value_delimiter = ',')]
        cosets: Option<Vec<u32>>,
    },
}

/// A JSON document with the config that produced it.
#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    config: &'a RunConfig,
    pass: bool,
    result: T,
}

struct Outcome {
    text: String,
    pass: bool,
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize") + "\n"
}

fn report<T: Serialize>(config: &RunConfig, pass: bool, result: T) -> Outcome {
    Outcome { text: json(&Report { config, pass, result }), pass }
}

fn read(path: &PathBuf) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn write(path: &PathBuf, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn field(q: u64, modulus: Option<&[i64]>) -> Result<Arc<FieldCtx>, Error> {
    match modulus {
        None => field_for_q(q),
        Some(m) => {
            let (p, e) = prime_power(q).ok_or_else(|| Error::Input(format!("{q} is not a prime power")))?;
            Ok(Arc::new(FieldCtx::new(p, 2 * e, Some(m))?))
        }
    }
}

fn indices(ctx: &FieldCtx, fam: Option<Family>, d: Option<u32>, cosets: Option<&[u32]>) -> Result<Vec<CosetIndex>, Error> {
    match (fam, cosets) {
        (Some(f), _) => Ok(family(ctx, f, d)?),
        (None, Some(c)) => Ok(c.iter().copied().map(CosetIndex).collect()),
        (None, None) => Err(Error::Input("give --family or --cosets".into())),
    }
}

impl GraphSpec {
    fn record(&self, config: &mut RunConfig) {
        config.q = Some(self.q);
        config.p = prime_power(self.q).map(|(p, _)| p);
        config.r = prime_power(self.q).map(|(_, e)| 2 * e);
        config.modulus = self.modulus.clone();
        config.family = self.family.map(|f| f.to_string());
        config.d = self.d;
        config.cosets = self.cosets.clone();
    }

    fn build(&self) -> Result<PeisertGraph, Error> {
        let ctx = field(self.q, self.modulus.as_deref())?;
        let idx = indices(&ctx, self.family, self.d, self.cosets.as_deref())?;
        let mut x = build_cayley(ctx, &idx)?;
        x.graph_mut().certify()?;
        Ok(x)
    }

    fn build_with_selection(&self) -> Result<(PeisertGraph, SubarraySelection), Error> {
        let x = self.build()?;
        let sel = SubarraySelection::new(x.ctx_arc(), x.indices())?;
        Ok((x, sel))
    }
}

fn vertex(g: &Graph, label: u32) -> Result<usize, Error> {
    g.vertex_of_label(label).ok_or_else(|| Error::Input(format!("no vertex with label {label}")))
}

fn labels(g: &Graph, c: &Clique) -> Vec<u32> {
    c.vertices.iter().map(|&v| g.label(v)).collect()
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<String, Error> {
    match out {
        Some(path) => {
            write(path, text)?;
            Ok(String::new())
        }
        None => Ok(text.to_string()),
    }
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    let budget_secs = cli.budget;
    match cli.command {
        Command::Field(FieldCmd::Inspect { p, r, modulus }) => {
            let ctx = FieldCtx::new(p, r, modulus.as_deref())?;
            #[derive(Serialize)]
            struct Info {
                p: u32,
                r: u32,
                order: u32,
                modulus: Vec<u32>,
                generator: u32,
            }
            let info = Info {
                p: ctx.p(),
                r: ctx.degree(),
                order: ctx.order(),
                modulus: ctx.spec().modulus.clone(),
                generator: ctx.generator().0,
            };
            Ok(Outcome { text: json(&info), pass: true })
        }

        Command::Graph(cmd) => {
            let mut config = RunConfig::new("graph");
            config.budget_secs = Some(budget_secs);
            match cmd {
                GraphCmd::Build { spec, out } => {
                    let x = spec.build()?;
                    Ok(Outcome { text: emit(&x.graph().to_dimacs(), out.as_ref())?, pass: true })
                }
                GraphCmd::Srg { spec } => {
                    config.command = "graph srg".into();
                    spec.record(&mut config);
                    let x = spec.build()?;
                    let params = x.graph().srg().cloned().expect("certified");
                    let expected = x.expected_parameters();
                    let pass = (params.n, params.k, params.lambda, params.mu)
                        == (expected.0, expected.1, expected.2, Some(expected.3));
                    #[derive(Serialize)]
                    struct Srg {
                        params: peisert_core::graph::SrgParams,
                        expected: (usize, usize, usize, usize),
                        hoffman_bound: Option<usize>,
                    }
                    let hoffman_bound = params.integral_hoffman_bound();
                    Ok(report(&config, pass, Srg { params, expected, hoffman_bound }))
                }
                GraphCmd::Cliques { spec, through, target } => {
                    config.command = "graph cliques".into();
                    spec.record(&mut config);
                    let x = spec.build()?;
                    let g = x.graph();
                    let mut q = CliqueQuery::default().budget(config.budget());
                    if let Some(l) = through {
                        q = q.through(vertex(g, l)?);
                    }
                    if let Some(k) = target {
                        q = q.target(k);
                    }
                    let cliques = enumerate_max_cliques(g, &q)?;
                    let out: Vec<Vec<u32>> = cliques.iter().map(|c| labels(g, c)).collect();
                    #[derive(Serialize)]
                    struct Cliques {
                        size: usize,
                        count: usize,
                        cliques: Vec<Vec<u32>>,
                    }
                    let size = out.first().map_or(0, Vec::len);
                    Ok(report(&config, true, Cliques { size, count: out.len(), cliques: out }))
                }
            }
        }

        Command::Oa(cmd) => match cmd {
            OaCmd::Build { q, modulus, family: fam, d, cosets, alpha, out } => {
                let ctx = field(q, modulus.as_deref())?;
                let chosen = match (fam, cosets.as_deref()) {
                    (None, None) => None,
                    (f, c) => Some(indices(&ctx, f, d, c)?),
                };
                let alpha = match alpha {
                    Some(l) => ctx.element(l as u64)?,
                    None => default_alpha(&ctx, chosen.as_deref().unwrap_or(&[CosetIndex(0)]))?
                        .ok_or_else(|| Error::Input("no free coset for alpha".into()))?,
                };
                let oa = match chosen {
                    None => build_pointline_oa(&ctx, alpha)?,
                    Some(idx) => SubarraySelection::with_alpha(Arc::clone(&ctx), &idx, alpha)?.subarray().clone(),
                };
                Ok(Outcome { text: emit(&oa.to_csv(), out.as_ref())?, pass: true })
            }
            OaCmd::Verify { file } => {
                let oa = OrthogonalArray::from_csv(&read(&file)?)?;
                let mut config = RunConfig::new("oa verify");
                config.out = Some(file.display().to_string());
                let verdict = oa.verify();
                #[derive(Serialize)]
                struct V {
                    rows: usize,
                    n: usize,
                    columns: usize,
                    error: Option<String>,
                }
                let v = V { rows: oa.m(), n: oa.n(), columns: oa.columns(), error: verdict.as_ref().err().map(|e| e.to_string()) };
                Ok(report(&config, verdict.is_ok(), v))
            }
            OaCmd::Blockgraph { file, out } => {
                let oa = OrthogonalArray::from_csv(&read(&file)?)?;
                oa.verify()?;
                let b = block_graph(&oa);
                Ok(Outcome { text: emit(&b.graph.to_dimacs(), out.as_ref())?, pass: true })
            }
        },

        Command::Ekr(cmd) => {
            let mut config = RunConfig::new("ekr");
            config.budget_secs = Some(budget_secs);
            match cmd {
                EkrCmd::Audit { spec, through } => {
                    config.command = "ekr audit".into();
                    spec.record(&mut config);
                    let (x, sel) = spec.build_with_selection()?;
                    let canonical = canonical_cliques_with(&x, &sel);
                    let scope = match through {
                        Some(l) => AuditScope::ThroughVertex { vertex: vertex(x.graph(), l)? },
                        None => AuditScope::All,
                    };
                    let (audit, _) = strict_ekr_audit(&x, &canonical, scope, config.budget())?;
                    let v = match scope {
                        AuditScope::ThroughVertex { vertex } => vertex,
                        AuditScope::All => 0,
                    };
                    let maximal = maximal_clique_bound(&x, &sel, v, config.budget())?;
                    #[derive(Serialize)]
                    struct Audit {
                        m: u32,
                        q: u32,
                        canonical_cliques: usize,
                        audit: peisert_core::ekr::StrictEkrReport,
                        maximal_clique_bound: peisert_core::ekr::MaximalBoundReport,
                    }
                    let pass = audit.size_bound_holds && maximal.holds;
                    let body = Audit { m: x.m(), q: x.q(), canonical_cliques: canonical.len(), audit, maximal_clique_bound: maximal };
                    Ok(report(&config, pass, body))
                }
                EkrCmd::Decompose { spec, clique, base } => {
                    config.command = "ekr decompose".into();
                    spec.record(&mut config);
                    let (x, sel) = spec.build_with_selection()?;
                    let g = x.graph();
                    let verts = clique.iter().map(|&l| vertex(g, l)).collect::<Result<Vec<_>, _>>()?;
                    let basis = build_ekr_basis_with(&x, &sel, vertex(g, base)?)?;
                    let d = decompose_clique(&x, &basis, &Clique::new(verts))?;
                    let pass = d.residual_zero && d.lift_verified;
                    Ok(report(&config, pass, d.summary(&basis, g.labels())))
                }
                EkrCmd::Counterexample { q, subfield } => {
                    config.command = "ekr counterexample".into();
                    config.q = Some(q);
                    config.subfield = Some(subfield);
                    let r = counterexample_report(&config, q, subfield)?;
                    Ok(Outcome { text: json(&r), pass: r.pass })
                }
            }
        }

        Command::Whd(cmd) => {
            let mut config = RunConfig::new("whd");
            match cmd {
                WhdCmd::Build { spec, out } => {
                    config.command = "whd build".into();
                    spec.record(&mut config);
                    let (x, sel) = spec.build_with_selection()?;
                    let cert = build_whd(&x, &sel)?;
                    let csv = cert.to_csv();
                    match out {
                        None => Ok(Outcome { text: csv, pass: true }),
                        Some(path) => {
                            write(&path, &csv)?;
                            config.out = Some(path.display().to_string());
                            config.format = Some("csv".into());
                            #[derive(Serialize)]
                            struct Summary {
                                columns: usize,
                                rank: usize,
                                adjacency_eigenvalue_tally: std::collections::BTreeMap<i64, usize>,
                                ordering_is_natural: bool,
                            }
                            let s = Summary {
                                columns: cert.matrix.n(),
                                rank: cert.rank,
                                adjacency_eigenvalue_tally: cert.tally.clone(),
                                ordering_is_natural: cert.ordering.iter().copied().eq(0..cert.matrix.n()),
                            };
                            Ok(report(&config, true, s))
                        }
                    }
                }
                WhdCmd::Verify { file, q, modulus, family: fam, d, cosets } => {
                    config.command = "whd verify".into();
                    let (diagonal, p) = parse_whd_csv(&read(&file)?)?;
                    let verdict = is_weakly_hadamard(&p)?;
                    let mut diagonalizes = None;
                    if let Some(q) = q {
                        let spec = GraphSpec { q, modulus, family: fam, d, cosets };
                        spec.record(&mut config);
                        let x = spec.build()?;
                        diagonalizes = Some(match check_diagonalization(x.graph(), &p, &diagonal) {
                            Ok(()) => p.rank() == p.n(),
                            Err(_) => false,
                        });
                    }
                    #[derive(Serialize)]
                    struct Verify {
                        weakly_hadamard: peisert_core::hadamard::WeakHadamardVerdict,
                        #[serde(skip_serializing_if = "Option::is_none")]
                        diagonalizes_laplacian: Option<bool>,
                    }
                    let pass = verdict.holds() && diagonalizes != Some(false);
                    Ok(report(&config, pass, Verify { weakly_hadamard: verdict, diagonalizes_laplacian: diagonalizes }))
                }
            }
        }

        Command::Reproduce81 { modulus, table, out } => {
            let mut config = RunConfig::new("reproduce-81");
            config.budget_secs = Some(budget_secs);
            config.modulus = modulus;
            config.out = out.as_ref().map(|p| p.display().to_string());
            let r = reproduce_case_study(&config)?;
            if let Some(path) = table {
                write(&path, &r.table_csv)?;
            }
            Ok(Outcome { text: emit(&json(&r), out.as_ref())?, pass: r.pass })
        }

        Command::Survey { q_list, samples, seed, out } => {
            let config = RunConfig {
                q_list: Some(q_list),
                samples_per_q: Some(samples),
                seed: Some(seed),
                budget_secs: Some(budget_secs),
                out: out.as_ref().map(|p| p.display().to_string()),
                ..RunConfig::new("survey")
            };
            let r = survey(&config)?;
            Ok(Outcome { text: emit(&json(&r), out.as_ref())?, pass: r.pass })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(o) => {
            print!("{}", o.text);
            ExitCode::from(if o.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
