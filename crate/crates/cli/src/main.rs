mod model_file;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value};

use nesy_core::{
    compile, grad_dirac, grad_loglinear, grad_wmc, infer, infer_compiled, map_inference,
    plan_preset, Backend, Belief, Error, Formula, GradTarget, GradientResult, IndependentBernoulli,
    Interpretation, LogicFn, MeasureSpec, Model, PartialInterpretation, Quadruple, Semantics,
    SymbolTable, SystemPreset, DEFAULT_GRID,
};

use model_file::{ModelFile, DEFAULT_SAMPLES, DEFAULT_SEED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Enum,
    Circuit,
    Quad,
    Mc,
}

/// Evaluate neurosymbolic queries over a model file and print one JSON document per query.
#[derive(Debug, Parser)]
#[command(name = "nesy", version)]
struct Args {
    /// Model file to load.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Run the named theory entry (repeatable). Replaces the file's queries.
    #[arg(long = "query", value_name = "NAME")]
    queries: Vec<String>,
    /// Run an inline formula (repeatable). Replaces the file's queries.
    #[arg(short = 'e', value_name = "EXPR")]
    exprs: Vec<String>,
    /// Integration backend, overriding the file's measure.
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Seed for Monte Carlo, overriding the file.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Add the gradient with respect to the belief parameters.
    #[arg(long)]
    grad: bool,
    /// Add the most probable interpretation.
    #[arg(long)]
    map: bool,
    /// Run through a system preset.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Force brute-force enumeration.
    #[arg(long)]
    oracle: bool,
    /// Pretty-print with N spaces of indentation (0 prints one line per document).
    #[arg(long, value_name = "N", default_value_t = 0)]
    json_indent: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn from_error(prefix: &str, e: &Error) -> Self {
        Failure {
            code: if e.is_numerical() { 2 } else { 1 },
            message: format!("{prefix}: {e}"),
        }
    }
}

struct Job {
    label: String,
    formula: Formula,
    logic: LogicFn,
    given: Option<PartialInterpretation>,
    origin: String,
}

#[derive(Serialize)]
struct KinkOut {
    connective: &'static str,
    symbols: Vec<String>,
}

#[derive(Serialize)]
struct MapOut {
    interpretation: Map<String, Value>,
    score: f64,
}

#[derive(Serialize)]
struct Output {
    query: String,
    backend: Backend,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grad: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grad_target: Option<GradTarget>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grad_std_error: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kinks: Option<Vec<KinkOut>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    models_visited: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<SystemPreset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quadruple: Option<Quadruple>,
    #[serde(skip_serializing_if = "Option::is_none")]
    map: Option<MapOut>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(&args, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let _ = out.flush();
            eprintln!("nesy: {}", f.message.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}

fn run(args: &Args, out: &mut impl Write) -> Result<(), Failure> {
    let path = args.model.display().to_string();
    let src =
        std::fs::read_to_string(&args.model).map_err(|e| Failure::input(format!("{path}: {e}")))?;
    let file = model_file::parse(&src).map_err(|e| match e {
        Error::ModelFile { line, message } => Failure::input(format!("{path}:{line}: {message}")),
        other => Failure::from_error(&path, &other),
    })?;
    let preset = match &args.preset {
        None => None,
        Some(name) => Some(SystemPreset::from_name(name).ok_or_else(|| {
            let names: Vec<_> = SystemPreset::ALL.iter().map(|p| p.name()).collect();
            Failure::input(format!(
                "unknown preset `{name}` (expected one of {})",
                names.join(", ")
            ))
        })?),
    };

    let jobs = jobs(args, &file, &path)?;
    let measure = effective_measure(args, &file.measure, file.table());
    for job in &jobs {
        let doc = evaluate(args, &file, preset, &measure, job)
            .map_err(|e| Failure::from_error(&job.origin, &e))?;
        let text = render(&doc, args.json_indent);
        writeln!(out, "{text}").map_err(|e| Failure::input(format!("stdout: {e}")))?;
    }
    Ok(())
}

fn jobs(args: &Args, file: &ModelFile, path: &str) -> Result<Vec<Job>, Failure> {
    if args.queries.is_empty() && args.exprs.is_empty() {
        if file.queries.is_empty() {
            return Err(Failure::input(format!(
                "{path}: no queries in file; pass --query or -e"
            )));
        }
        return Ok(file
            .queries
            .iter()
            .map(|q| Job {
                label: q.label.clone(),
                formula: q.formula.clone(),
                logic: q.logic.clone(),
                given: q.given.clone(),
                origin: format!("{path}:{}", q.line),
            })
            .collect());
    }
    let mut jobs = Vec::new();
    for name in &args.queries {
        let f = file
            .sentence(name)
            .ok_or_else(|| Failure::input(format!("{path}: no theory entry named `{name}`")))?;
        jobs.push(Job {
            label: name.clone(),
            formula: f.clone(),
            logic: LogicFn::Direct,
            given: None,
            origin: format!("{path}: query `{name}`"),
        });
    }
    for expr in &args.exprs {
        let origin = format!("-e \"{expr}\"");
        let f = nesy_core::parse_formula(expr, file.table())
            .map_err(|e| Failure::from_error(&origin, &e))?;
        jobs.push(Job {
            label: expr.clone(),
            formula: f,
            logic: LogicFn::Direct,
            given: None,
            origin,
        });
    }
    Ok(jobs)
}

fn borel_part(m: &MeasureSpec) -> Option<&MeasureSpec> {
    match m {
        MeasureSpec::Counting => None,
        MeasureSpec::ProductMixed { continuous } => Some(continuous),
        other => Some(other),
    }
}

/// The file's measure with command-line overrides applied.
fn effective_measure(args: &Args, file: &MeasureSpec, table: &SymbolTable) -> MeasureSpec {
    let mut m = match args.backend {
        None | Some(BackendArg::Circuit) => file.clone(),
        Some(BackendArg::Enum) => MeasureSpec::Counting,
        Some(BackendArg::Quad) => match borel_part(file) {
            Some(q @ MeasureSpec::BorelQuadrature { .. }) => q.clone(),
            _ => MeasureSpec::BorelQuadrature { grid: DEFAULT_GRID },
        },
        Some(BackendArg::Mc) => match borel_part(file) {
            Some(mc @ MeasureSpec::BorelMonteCarlo { .. }) => mc.clone(),
            _ => MeasureSpec::BorelMonteCarlo {
                samples: DEFAULT_SAMPLES,
                seed: DEFAULT_SEED,
            },
        },
    };
    if args.oracle {
        m = MeasureSpec::Counting;
    }
    if let Some(s) = args.seed {
        set_seed(&mut m, s);
    }
    let borel = matches!(
        m,
        MeasureSpec::BorelQuadrature { .. } | MeasureSpec::BorelMonteCarlo { .. }
    );
    if borel && table.iter().any(|s| s.domain.is_finite()) {
        m = MeasureSpec::ProductMixed {
            continuous: Box::new(m),
        };
    }
    m
}

fn set_seed(m: &mut MeasureSpec, s: u64) {
    match m {
        MeasureSpec::BorelMonteCarlo { seed, .. } => *seed = s,
        MeasureSpec::ProductMixed { continuous } => set_seed(continuous, s),
        _ => {}
    }
}

fn evaluate(
    args: &Args,
    file: &ModelFile,
    preset: Option<SystemPreset>,
    measure: &MeasureSpec,
    job: &Job,
) -> Result<Output, Error> {
    let force_enum = args.oracle || args.backend == Some(BackendArg::Enum);
    let (model, measure, compiled, quadruple) = match preset {
        Some(p) => {
            if job.logic != LogicFn::Direct {
                return Err(Error::Unsupported(format!(
                    "preset `{p}` fixes the logic function to direct, query uses {}",
                    job.logic.name()
                )));
            }
            let requested = match measure {
                MeasureSpec::Counting if !args.oracle => None,
                m => Some(m),
            };
            let plan = plan_preset(p, &file.model, &job.formula, requested)?;
            let compiled = plan.compiled && !force_enum;
            (plan.model, plan.measure, compiled, Some(plan.quadruple))
        }
        None => (
            file.model.clone(),
            measure.clone(),
            args.backend == Some(BackendArg::Circuit) && !args.oracle,
            None,
        ),
    };
    let given = job.given.as_ref();
    let result = if compiled {
        infer_compiled(&model, &job.logic, &job.formula, given)?
    } else {
        infer(&model, &job.logic, &job.formula, &measure, given)?
    };

    let mut doc = Output {
        query: job.label.clone(),
        backend: result.backend,
        value: result.value,
        std_error: result.std_error,
        grad: None,
        grad_target: None,
        grad_std_error: None,
        kinks: None,
        models_visited: result.models_visited,
        preset,
        quadruple,
        map: None,
    };
    if args.grad {
        let g = gradient(&model, &job.logic, &job.formula, &measure, given)?;
        let table = model.table();
        doc.grad = Some(g.grad);
        doc.grad_target = Some(g.target);
        doc.grad_std_error = g.std_error;
        if !g.kinks.is_empty() {
            doc.kinks = Some(
                g.kinks
                    .into_iter()
                    .map(|k| KinkOut {
                        connective: k.connective,
                        symbols: k
                            .symbols
                            .iter()
                            .map(|id| table.name(*id).to_string())
                            .collect(),
                    })
                    .collect(),
            );
        }
    }
    if args.map {
        let m = map_inference(&model, &job.logic, &job.formula, given)?;
        let interpretation = m
            .interpretation
            .named(model.table())
            .map(|(n, v)| (n.to_string(), Value::from(v)))
            .collect();
        doc.map = Some(MapOut {
            interpretation,
            score: m.score,
        });
    }
    Ok(doc)
}

fn gradient(
    model: &Model,
    l: &LogicFn,
    f: &Formula,
    measure: &MeasureSpec,
    given: Option<&PartialInterpretation>,
) -> Result<GradientResult, Error> {
    let table = model.table();
    let fixed = |id| given.is_some_and(|g| g.is_fixed(id));
    match model.belief() {
        Belief::Bernoulli(b) => {
            let circuit = compile(f, table)?;
            let pinned = IndependentBernoulli::new(
                table,
                b.probs()
                    .iter()
                    .map(|&(id, p)| (id, given.and_then(|g| g.get(id)).unwrap_or(p))),
            )?;
            let mut g = grad_wmc(&circuit, &pinned, table);
            let scale = l.select(1.0);
            g.value *= scale;
            for (d, (id, _)) in g.grad.iter_mut().zip(pinned.probs()) {
                *d = if fixed(*id) { 0.0 } else { *d * scale };
            }
            Ok(g)
        }
        Belief::LogLinear(_) => grad_loglinear(model, l, f, measure, given),
        Belief::Dirac(d) => {
            let Semantics::Fuzzy(tnorm) = model.semantics() else {
                return Err(Error::Unsupported(
                    "gradient of a Dirac belief needs a fuzzy semantics".into(),
                ));
            };
            let mut values = d.point().values().to_vec();
            if let Some(g) = given {
                for (id, v) in g.fixed() {
                    values[id.0] = v;
                }
            }
            let point = Interpretation::new(table, values)?;
            let mut g = grad_dirac(f, table, tnorm, &point)?;
            let selected = l.select(g.value);
            if selected != g.value || matches!(l, LogicFn::Threshold(_)) {
                g.grad.iter_mut().for_each(|d| *d = 0.0);
            }
            g.value = selected;
            for (i, d) in g.grad.iter_mut().enumerate() {
                if fixed(nesy_core::SymbolId(i)) {
                    *d = 0.0;
                }
            }
            Ok(g)
        }
        Belief::FuzzySet(_) => Err(Error::Unsupported(
            "gradients of fuzzy-set beliefs are not available".into(),
        )),
    }
}

fn render(doc: &Output, indent: usize) -> String {
    if indent == 0 {
        return serde_json::to_string(doc).expect("output serializes");
    }
    let pad = vec![b' '; indent];
    let mut buf = Vec::new();
    let fmt = serde_json::ser::PrettyFormatter::with_indent(&pad);
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    doc.serialize(&mut ser).expect("output serializes");
    String::from_utf8(buf).expect("json is utf-8")
}
