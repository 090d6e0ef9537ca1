use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use feynhopf::algebra::{AlgebraElement, Monomial, TensorElement};
use feynhopf::birkhoff::{check_renormalization, counterterm, dyson_check, parse_rules, renormalized, Bphz, Character, FeynmanRules};
use feynhopf::corpus::{load_dir, load_graph, read_text, NamedGraph};
use feynhopf::generate::{catalog, check_counting, export, GenerateOptions, DEFAULT_CAP};
use feynhopf::graph::{graph_theory_name, sym, GraphKey};
use feynhopf::greens::{GeneratorStyle, Greens};
use feynhopf::hopf::Hopf;
use feynhopf::laurent::Truncation;
use feynhopf::report::{CheckRecord, Report, SCHEMA_VERSION};
use feynhopf::theory::{parse_theory_named, Residue, Theory};

/// Exact Hopf algebra of Feynman graphs: symmetry factors, coproducts,
/// Green's functions, the Slavnov-Taylor ideal and renormalization.
#[derive(Parser)]
#[command(name = "feynhopf", version)]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Options {
    /// Theory file, or the name of a bundled theory (qed, qcd, phi3, phi34, qed-unoriented).
    #[arg(long, global = true, env = "FEYNHOPF_THEORY")]
    theory: Option<String>,
    /// Highest loop order.
    #[arg(long, global = true, env = "FEYNHOPF_LOOPS", default_value_t = 2,
          value_parser = clap::value_parser!(u32).range(1..))]
    loops: u32,
    /// Feynman rules file with `<graph> = <laurent series>` lines.
    #[arg(long, global = true, env = "FEYNHOPF_RULES")]
    rules: Option<PathBuf>,
    #[arg(long, global = true, env = "FEYNHOPF_FORMAT", value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "FEYNHOPF_JOBS")]
    jobs: Option<usize>,
    /// Limit on candidate matchings during generation.
    #[arg(long, global = true, env = "FEYNHOPF_CAP", default_value_t = DEFAULT_CAP)]
    cap: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Symmetry factor of a graph.
    Sym { graph: PathBuf },
    /// Residue of a graph.
    Residue { graph: PathBuf },
    /// Whether a graph is one-particle irreducible.
    Onepi { graph: PathBuf },
    /// Coproduct of a graph.
    Coproduct { graph: PathBuf },
    /// Antipode of a graph.
    Antipode { graph: PathBuf },
    /// All 1PI graphs up to `--loops`, optionally for a single residue.
    Generate {
        residue: Option<String>,
        /// Write one graph file per entry and an index into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Green's function of a residue, by loop order.
    Green { residue: String },
    /// Compare the three forms of the coproduct of Green's functions.
    PropCheck { residues: Vec<String> },
    /// Check that the ideal generated by the X_v differences is a Hopf ideal.
    IdealCheck,
    /// Check the closed coproduct formula modulo the ideal.
    ClosedCoproduct { residues: Vec<String> },
    /// Counterterms and renormalized values through the coproduct.
    Birkhoff { graph: Option<PathBuf> },
    /// Counterterms and renormalized values through the forest recursion.
    Bphz { graph: Option<PathBuf> },
    /// Check Dyson's formula for a theory with one vertex kind.
    Dyson {
        residues: Vec<String>,
        /// Highest power of the coupling compared.
        #[arg(long)]
        order: Option<u32>,
    },
    /// Coassociativity, counit, antipode and grading on every generator.
    Axioms { graphs: Vec<PathBuf> },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(feynhopf::Error),
}

impl From<feynhopf::Error> for Failure {
    fn from(e: feynhopf::Error) -> Self {
        Failure::Input(e)
    }
}

type Outcome = Result<bool, Failure>;

#[derive(Serialize)]
struct Output<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    result: T,
}

#[derive(Serialize)]
struct Term {
    coefficient: String,
    left: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    right: Option<Vec<String>>,
}

#[derive(Serialize)]
struct CatalogRow {
    name: String,
    residue: String,
    loops: u32,
    sym: u64,
    key: String,
}

#[derive(Serialize)]
struct Renormalized {
    graph: String,
    loops: u32,
    counterterm: String,
    renormalized: String,
}

fn emit<T: Serialize>(format: Format, command: &str, result: T, text: impl FnOnce() -> String) {
    match format {
        Format::Text => print!("{}", text()),
        Format::Json => {
            let out = Output {
                schema_version: SCHEMA_VERSION,
                command,
                result,
            };
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable output"));
        }
    }
}

fn emit_report(format: Format, command: &str, report: &Report) -> bool {
    match format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => {
            let out = Output {
                schema_version: SCHEMA_VERSION,
                command,
                result: report,
            };
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable output"));
        }
    }
    report.passed()
}

fn resolve_theory(arg: &str, near: Option<&Path>) -> Result<Arc<Theory>, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        return Ok(Arc::new(parse_theory_named(&read_text(path)?, &stem)?));
    }
    if let Some(dir) = near {
        for base in [dir.join("theories"), dir.join("../theories")] {
            let p = base.join(arg);
            if p.is_file() {
                return Ok(Arc::new(parse_theory_named(&read_text(&p)?, arg)?));
            }
        }
    }
    Ok(Theory::builtin(arg)?)
}

fn catalog_theory(opts: &Options) -> Result<Arc<Theory>, Failure> {
    let arg = opts
        .theory
        .as_deref()
        .ok_or_else(|| Failure::Usage("this command needs --theory".into()))?;
    resolve_theory(arg, None)
}

/// A graph file plus a Hopf algebra in which every graph of the same
/// directory is registered under its name.
struct GraphContext {
    hopf: Hopf,
    target: NamedGraph,
}

fn graph_context(path: &Path, opts: &Options) -> Result<GraphContext, Failure> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let theory = match &opts.theory {
        Some(t) => resolve_theory(t, Some(dir))?,
        None => {
            let text = read_text(path)?;
            let name = graph_theory_name(&text)
                .ok_or_else(|| Failure::Usage(format!("{} has no theory line; pass --theory", path.display())))?;
            resolve_theory(&name, Some(dir))?
        }
    };
    let target = load_graph(path, &theory)?;
    let hopf = Hopf::new(theory.clone());
    for ng in load_dir(dir, &theory)? {
        if ng.graph.is_1pi() && ng.graph.residue().is_ok() {
            hopf.register_named(&ng.graph, &ng.name)?;
        }
    }
    if target.graph.is_1pi() && target.graph.residue().is_ok() {
        hopf.register_named(&target.graph, &target.name)?;
    }
    Ok(GraphContext { hopf, target })
}

fn build_greens(opts: &Options) -> Result<Greens, Failure> {
    let t = catalog_theory(opts)?;
    let c = catalog(&t, opts.loops, &GenerateOptions { cap: opts.cap })?;
    Ok(Greens::new(c)?)
}

fn residues(t: &Theory, names: &[String]) -> Result<Vec<Residue>, Failure> {
    if names.is_empty() {
        return Ok(t.residues());
    }
    names.iter().map(|n| Ok(t.residue_by_name(n)?)).collect()
}

fn monomial_names(hopf: &Hopf, m: &Monomial) -> Vec<String> {
    m.keys().iter().map(|k| hopf.name_of(k)).collect()
}

fn element_terms(hopf: &Hopf, a: &AlgebraElement) -> Vec<Term> {
    a.terms()
        .map(|(m, c)| Term {
            coefficient: c.to_string(),
            left: monomial_names(hopf, m),
            right: None,
        })
        .collect()
}

fn tensor_terms(hopf: &Hopf, t: &TensorElement) -> Vec<Term> {
    t.terms()
        .map(|(l, r, c)| Term {
            coefficient: c.to_string(),
            left: monomial_names(hopf, l),
            right: Some(monomial_names(hopf, r)),
        })
        .collect()
}

fn rules(opts: &Options, hopf: &Hopf) -> Result<FeynmanRules, Failure> {
    match &opts.rules {
        Some(p) => Ok(parse_rules(&read_text(p)?, hopf)?),
        None => Ok(FeynmanRules::default()),
    }
}

fn print_values(opts: &Options, command: &str, hopf: &Hopf, keys: &[GraphKey], c: &Character, r: &Character) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for k in keys {
        rows.push(Renormalized {
            graph: hopf.name_of(k),
            loops: hopf.loops(k)?,
            counterterm: c.get(k)?.to_string(),
            renormalized: r.get(k)?.to_string(),
        });
    }
    let text = || {
        rows.iter()
            .map(|x| format!("{}: C = {}, R = {}\n", x.graph, x.counterterm, x.renormalized))
            .collect()
    };
    emit(opts.format, command, &rows, text);
    Ok(())
}

/// Generators the renormalization commands act on: the closure of one graph,
/// or the whole catalog.
fn renormalization_setup(opts: &Options, graph: &Option<PathBuf>) -> Result<(Hopf, Vec<GraphKey>), Failure> {
    match graph {
        Some(p) => {
            let ctx = graph_context(p, opts)?;
            let key = ctx.hopf.register(&ctx.target.graph)?;
            let keys = ctx.hopf.closure(&[key])?;
            Ok((ctx.hopf, keys))
        }
        None => {
            let g = build_greens(opts)?;
            let keys: Vec<GraphKey> = g.catalog.iter().map(|(_, _, e)| e.class.clone()).collect();
            let keys = g.hopf.closure(&keys)?;
            Ok((g.hopf, keys))
        }
    }
}

fn policy_for(hopf: &Hopf, keys: &[GraphKey], opts: &Options) -> Result<Truncation, Failure> {
    let mut top = opts.loops;
    for k in keys {
        top = top.max(hopf.loops(k)?);
    }
    Ok(Truncation::for_loops(top))
}

fn run(cli: Cli) -> Outcome {
    let opts = &cli.opts;
    match &cli.command {
        Command::Sym { graph } => {
            let g = graph_context(graph, opts)?.target.graph;
            let s = sym(&g);
            emit(opts.format, "sym", s, || format!("{s}\n"));
            Ok(true)
        }
        Command::Residue { graph } => {
            let g = graph_context(graph, opts)?.target.graph;
            let r = g.residue()?;
            let name = g.theory().residue_name(r).to_string();
            emit(opts.format, "residue", &name, || format!("{name}\n"));
            Ok(true)
        }
        Command::Onepi { graph } => {
            let g = graph_context(graph, opts)?.target.graph;
            let b = g.is_1pi();
            emit(opts.format, "onepi", b, || format!("{b}\n"));
            Ok(true)
        }
        Command::Coproduct { graph } => {
            let ctx = graph_context(graph, opts)?;
            let d = ctx.hopf.coproduct(&ctx.hopf.element(&ctx.target.graph)?)?;
            emit(opts.format, "coproduct", tensor_terms(&ctx.hopf, &d), || {
                format!("{}\n", ctx.hopf.format_tensor(&d))
            });
            Ok(true)
        }
        Command::Antipode { graph } => {
            let ctx = graph_context(graph, opts)?;
            let s = ctx.hopf.antipode(&ctx.hopf.element(&ctx.target.graph)?)?;
            emit(opts.format, "antipode", element_terms(&ctx.hopf, &s), || {
                format!("{}\n", ctx.hopf.format_element(&s))
            });
            Ok(true)
        }
        Command::Generate { residue, out } => {
            let t = catalog_theory(opts)?;
            let c = catalog(&t, opts.loops, &GenerateOptions { cap: opts.cap })?;
            let only = residue.as_ref().map(|r| t.residue_by_name(r)).transpose()?;
            let rows: Vec<CatalogRow> = c
                .iter()
                .filter(|(r, _, _)| only.is_none_or(|o| o == *r))
                .map(|(r, l, e)| CatalogRow {
                    name: e.name.clone(),
                    residue: t.residue_name(r).to_string(),
                    loops: l,
                    sym: e.sym,
                    key: e.form.short_id(),
                })
                .collect();
            if let Some(dir) = out {
                export(&c, dir)?;
            }
            emit(opts.format, "generate", &rows, || {
                rows.iter()
                    .map(|x| format!("{} {} {} {} {}\n", x.name, x.residue, x.loops, x.sym, x.key))
                    .collect()
            });
            let counting = check_counting(&c);
            for f in counting.failures() {
                eprintln!("counting identity failed: {} {}", f.check, f.subject.as_deref().unwrap_or(""));
            }
            Ok(counting.passed())
        }
        Command::Green { residue } => {
            let g = build_greens(opts)?;
            let r = g.theory().residue_by_name(residue)?;
            let s = g.green(r);
            let parts: Vec<Vec<Term>> = s.components.iter().map(|c| element_terms(&g.hopf, c)).collect();
            emit(opts.format, "green", &parts, || {
                s.components
                    .iter()
                    .enumerate()
                    .map(|(n, c)| format!("{n}: {}\n", g.hopf.format_element(c)))
                    .collect()
            });
            Ok(true)
        }
        Command::PropCheck { residues: names } => {
            let g = build_greens(opts)?;
            let mut report = Report::new();
            for r in residues(g.theory(), names)? {
                report.extend(g.check_proposition(r)?);
            }
            Ok(emit_report(opts.format, "prop-check", &report))
        }
        Command::IdealCheck => {
            let g = build_greens(opts)?;
            let t = g.theory().name.clone();
            let poly = g.ideal_basis(GeneratorStyle::Polynomial)?;
            let diff = g.ideal_basis(GeneratorStyle::Difference)?;
            let mut report = Report::new();
            for n in 1..=opts.loops {
                let (a, b) = (poly.dimension(n), diff.dimension(n));
                report.push(
                    CheckRecord::new("generator-styles-agree", &t, a == b)
                        .degree(n)
                        .subject(format!("dimension {a}"))
                        .residual(a.abs_diff(b)),
                );
            }
            let same = poly.contains_basis(&diff)? && diff.contains_basis(&poly)?;
            report.push(CheckRecord::new("generator-styles-same-span", &t, same));
            report.extend(g.check_hopf_ideal(&poly)?);
            Ok(emit_report(opts.format, "ideal-check", &report))
        }
        Command::ClosedCoproduct { residues: names } => {
            let g = build_greens(opts)?;
            let basis = g.ideal_basis(GeneratorStyle::Polynomial)?;
            let mut report = Report::new();
            for r in residues(g.theory(), names)? {
                report.extend(g.check_closed_coproduct(r, &basis)?);
            }
            Ok(emit_report(opts.format, "closed-coproduct", &report))
        }
        Command::Birkhoff { graph } => {
            let (hopf, keys) = renormalization_setup(opts, graph)?;
            let policy = policy_for(&hopf, &keys, opts)?;
            let rl = rules(opts, &hopf)?;
            let u = rl.character(&hopf, &keys, policy)?;
            let c = counterterm(&hopf, &u)?;
            let r = renormalized(&hopf, &u, &c)?;
            print_values(opts, "birkhoff", &hopf, &keys, &c, &r)?;
            let report = check_renormalization(&hopf, &keys, &rl, policy)?;
            if opts.format == Format::Text {
                print!("{}", report.to_text());
            }
            Ok(report.passed())
        }
        Command::Bphz { graph } => {
            let (hopf, keys) = renormalization_setup(opts, graph)?;
            let policy = policy_for(&hopf, &keys, opts)?;
            let u = rules(opts, &hopf)?.character(&hopf, &keys, policy)?;
            let (c, r) = Bphz::new(&hopf, &u).characters()?;
            print_values(opts, "bphz", &hopf, &keys, &c, &r)?;
            Ok(true)
        }
        Command::Dyson { residues: names, order } => {
            let g = build_greens(opts)?;
            let rl = rules(opts, &g.hopf)?;
            let mut report = Report::new();
            for r in residues(g.theory(), names)? {
                let max_order = 2 * opts.loops + g.theory().residue_valence(r) - 2;
                report.extend(dyson_check(&g, r, &rl, order.unwrap_or(max_order))?);
            }
            Ok(emit_report(opts.format, "dyson", &report))
        }
        Command::Axioms { graphs } => {
            let mut report = Report::new();
            let mut subjects: Vec<(Arc<Hopf>, String, AlgebraElement)> = Vec::new();
            if graphs.is_empty() {
                let g = build_greens(opts)?;
                let hopf = Arc::new(g.hopf);
                for (_, _, e) in g.catalog.iter() {
                    subjects.push((hopf.clone(), e.name.clone(), AlgebraElement::generator(e.class.clone())));
                }
            } else {
                for p in graphs {
                    let ctx = graph_context(p, opts)?;
                    let a = ctx.hopf.element(&ctx.target.graph)?;
                    subjects.push((Arc::new(ctx.hopf), ctx.target.name.clone(), a));
                }
            }
            for (hopf, name, a) in &subjects {
                let t = hopf.theory().name.clone();
                let checks = [
                    ("coassociativity", hopf.check_coassociativity(a)?),
                    ("counit", hopf.check_counit(a)?),
                    ("antipode", hopf.check_antipode(a)?),
                    ("grading", hopf.check_grading(a)?),
                ];
                for (check, ok) in checks {
                    report.push(CheckRecord::new(check, &t, ok).subject(name.clone()));
                }
            }
            Ok(emit_report(opts.format, "axioms", &report))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.opts.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
