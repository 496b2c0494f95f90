//! `unlearn-lab`: dimensions, compression, unlearning schemes, lower-bound
//! demos and memory reports from the command line.
//!
//! Exit status is 0 on success, 1 when the library rejects the request and 2
//! for usage or input file problems.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use unlearn_core::adversary::run_adversary;
use unlearn_core::compression::{merge, vs_encode};
use unlearn_core::cost::CostModel;
use unlearn_core::dimensions::{eluder_dimension, vc_dimension, DimReport};
use unlearn_core::instances::{
    eluder_lb_instance, halfspace_lb_instance, shatter_lb_instance, vclb_instance, whitebox_erm_reduction,
    LbInstance,
};
use unlearn_core::io::{self, InputError, LoadedClass};
use unlearn_core::report::{measure, Report};
use unlearn_core::schemes::SchemeSpec;

const SEED_VAR: &str = "UNLEARN_LAB_SEED";

#[derive(Parser)]
#[command(name = "unlearn-lab", version, about = "Exact learning-unlearning schemes for realizability testing")]
struct Cli {
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dimensions of a class with certificates.
    Dims {
        class: PathBuf,
        #[arg(long, default_value_t = 16)]
        cap: usize,
        /// Include the witness of every value.
        #[arg(long)]
        witness: bool,
    },
    /// Compress a dataset to its version-space encoding.
    VsEncode { class: PathBuf, dataset: PathBuf },
    /// Merge two encodings.
    Merge { class: PathBuf, a: PathBuf, b: PathBuf },
    #[command(subcommand)]
    Scheme(SchemeCmd),
    #[command(subcommand)]
    Lb(LbCmd),
    /// Measured memory against the bounds, for a list of runs.
    Report {
        /// JSON file `{"runs": [{"scheme", "k"?, "d"?, "class", "dataset"}]}`;
        /// class and dataset are inline objects or paths relative to the file.
        runs: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value_t = 16)]
        cap: usize,
    },
}

#[derive(Subcommand)]
enum SchemeCmd {
    /// Learn a dataset and answer deletion queries.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scheme: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    class: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    cap: usize,
}

#[derive(Subcommand)]
enum LbCmd {
    /// Recover a secret through unlearning queries.
    Demo(DemoArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum InstanceName {
    Vclb,
    Eluder,
    Shatter,
    Halfspace,
    ErmWhitebox,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, value_enum)]
    instance: InstanceName,
    /// JSON object, inline or a file path.
    #[arg(long, default_value = "{}")]
    params: String,
    #[arg(long)]
    scheme: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Secret as a 0/1 string, index 0 first. Random when absent.
    #[arg(long)]
    secret: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

/// Bad flags or parameters; exits with 2 like an unreadable file.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn rng() -> anyhow::Result<ChaCha8Rng> {
    match std::env::var(SEED_VAR) {
        Ok(s) => {
            let seed = s.trim().parse().map_err(|_| usage(format!("{SEED_VAR} must be an unsigned integer")))?;
            Ok(ChaCha8Rng::seed_from_u64(seed))
        }
        Err(_) => Ok(ChaCha8Rng::from_entropy()),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize")
}

fn spec_of(name: &str, k: Option<usize>, d: Option<usize>) -> anyhow::Result<SchemeSpec> {
    SchemeSpec::parse(name, k, d).map_err(|e| usage(e.to_string()))
}

fn dims(class: &Path, cap: usize, witness: bool) -> anyhow::Result<Value> {
    let loaded = io::load_class(class, &mut rng()?)?;
    let r = DimReport::compute(&loaded.handle, cap)?;
    if witness {
        return Ok(serde_json::to_value(&r)?);
    }
    Ok(json!({
        "class": loaded.descriptor,
        "hypotheses": r.hypotheses,
        "vc": r.vc.value,
        "littlestone": r.littlestone.map(|f| f.value),
        "star": r.star.value,
        "hollow_star": r.hollow_star.value,
        "eluder": r.eluder.value,
        "mis": r.mis.map(|f| f.value),
    }))
}

fn encoding_json(loaded: &LoadedClass, enc: &unlearn_core::compression::VsEncoding) -> Value {
    let cost = CostModel::for_domain(loaded.handle.domain_size());
    json!({
        "encoding": enc,
        "pairs": enc.stored_pairs(),
        "bits": cost.encoding_bits(enc),
    })
}

fn scheme_run(a: &RunArgs) -> anyhow::Result<Value> {
    let spec = spec_of(&a.scheme, a.k, a.d)?;
    let loaded = io::load_class(&a.class, &mut rng()?)?;
    let data = io::load_dataset(&a.dataset)?;
    let queries = match &a.queries {
        Some(p) => io::load_queries(p)?,
        None => Vec::new(),
    };
    let scheme = spec.build(&loaded.handle)?;
    let dep = scheme.deploy(&data)?;
    let answers = queries
        .iter()
        .map(|q| Ok(json!({"indices": q.indices().collect::<Vec<_>>(), "answer": dep.unlearn(q)?})))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let record = measure(&spec, &loaded.handle, &loaded.descriptor, &data, a.cap)?;
    let mut out = json!({
        "scheme": spec.name(),
        "class": loaded.descriptor,
        "n": data.len(),
        "answer": dep.answer(),
        "queries": answers,
        "aux_bits": dep.aux_bits(),
        "bound": {"value": record.bound, "formula": record.formula, "pass": record.pass, "dims": record.dims},
    });
    let tickets = dep.ticket_bits();
    if !tickets.is_empty() {
        out["ticket_bits"] = json!(tickets);
        out["max_ticket_bits"] = json!(record.max_ticket_bits);
    }
    Ok(out)
}

fn parse_params(raw: &str) -> anyhow::Result<Value> {
    if let Ok(v) = serde_json::from_str::<Value>(raw) {
        return Ok(v);
    }
    let path = Path::new(raw);
    if path.exists() {
        return Ok(io::read_json(path)?);
    }
    Err(usage(format!("--params is neither JSON nor a readable file: {raw}")))
}

fn param(params: &Value, key: &str) -> anyhow::Result<usize> {
    params
        .get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| usage(format!("--params needs a natural number {key:?}")))
}

/// Class for eluder and shatter demos: `{"class": <class object>}`.
fn demo_class(params: &Value, rng: &mut ChaCha8Rng) -> anyhow::Result<LoadedClass> {
    let v = params.get("class").ok_or_else(|| usage("--params needs a \"class\" object"))?;
    Ok(io::class_from_value(Path::new("--params"), v, rng)?)
}

fn build_instance(name: InstanceName, params: &Value, rng: &mut ChaCha8Rng) -> anyhow::Result<LbInstance> {
    Ok(match name {
        InstanceName::Vclb => {
            let inv_beta = match params.get("beta").and_then(Value::as_f64) {
                Some(b) if b > 0.0 => (1.0 / b).round() as usize,
                Some(_) => return Err(usage("beta must be positive")),
                None => param(params, "inv_beta").unwrap_or(2),
            };
            vclb_instance(inv_beta, param(params, "m")?)?
        }
        InstanceName::Eluder => {
            let loaded = demo_class(params, rng)?;
            let witness = eluder_dimension(&loaded.handle, param(params, "cap").unwrap_or(64))?.witness;
            let n = param(params, "n").unwrap_or(2 * witness.len());
            eluder_lb_instance(&loaded.handle, &witness, n)?
        }
        InstanceName::Shatter => {
            let loaded = demo_class(params, rng)?;
            let points: Vec<usize> = match params.get("points") {
                Some(p) => serde_json::from_value(p.clone()).map_err(|e| usage(format!("points: {e}")))?,
                None => vc_dimension(&loaded.handle, param(params, "cap").unwrap_or(64))?.witness,
            };
            shatter_lb_instance(&loaded.handle, &points)?
        }
        InstanceName::Halfspace => halfspace_lb_instance(param(params, "d")?, param(params, "k")?)?.0,
        InstanceName::ErmWhitebox => {
            let base = match params.get("base").and_then(Value::as_str).unwrap_or("eluder") {
                "eluder" => InstanceName::Eluder,
                "vclb" => InstanceName::Vclb,
                other => return Err(usage(format!("unknown base instance {other:?}"))),
            };
            whitebox_erm_reduction(&build_instance(base, params, rng)?)?
        }
    })
}

fn lb_demo(a: &DemoArgs) -> anyhow::Result<(Value, bool)> {
    let mut rng = rng()?;
    let params = parse_params(&a.params)?;
    let inst = build_instance(a.instance, &params, &mut rng)?;
    let fixed = inst.fixed_bits();
    let z: Vec<bool> = match &a.secret {
        Some(s) => {
            let bits = s
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(usage(format!("secret must be a 0/1 string, got {s:?}"))),
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            if bits.len() != inst.p {
                return Err(usage(format!("secret has {} bits, instance {} needs {}", bits.len(), inst.name, inst.p)));
            }
            bits
        }
        None => fixed.iter().map(|f| f.unwrap_or_else(|| rng.gen_bool(0.5))).collect(),
    };
    let spec = spec_of(&a.scheme, a.k, a.d)?;
    if spec.is_erm() != inst.is_erm() {
        return Err(usage(format!(
            "scheme {} answers {} queries but instance {} needs {}",
            spec.name(),
            if spec.is_erm() { "ERM" } else { "realizability" },
            inst.name,
            if inst.is_erm() { "an ERM scheme" } else { "a realizability scheme" },
        )));
    }
    let scheme = spec.build(&inst.class)?;
    let run = run_adversary(&inst, scheme.as_ref(), &z)?;
    let bits = |v: &[bool]| v.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
    let ok = run.succeeded(&z);
    Ok((
        json!({
            "instance": run.instance,
            "scheme": run.scheme,
            "p": inst.p,
            "n": run.n,
            "secret": bits(&z),
            "recovered": bits(&run.recovered),
            "success": ok,
            "transcript": run.transcript,
            "aux_bits": run.aux_bits,
            "max_ticket_bits": run.max_ticket_bits,
            "queried_ticket_bits": run.queried_ticket_bits,
        }),
        ok,
    ))
}

fn inline_or_path(base: &Path, v: &Value, what: &str) -> anyhow::Result<(PathBuf, Value)> {
    match v {
        Value::String(rel) => {
            let p = base.join(rel);
            let loaded = io::read_json(&p)?;
            Ok((p, loaded))
        }
        Value::Object(_) => Ok((base.join(format!("<inline {what}>")), v.clone())),
        _ => Err(usage(format!("{what} must be an object or a path"))),
    }
}

fn report(runs: &Path, cap: usize) -> anyhow::Result<Report> {
    let v = io::read_json(runs)?;
    let base = runs.parent().unwrap_or(Path::new("."));
    let list = v
        .get("runs")
        .and_then(Value::as_array)
        .ok_or_else(|| InputError::Invalid { path: runs.to_path_buf(), msg: "needs a \"runs\" list".into() })?;
    let mut rng = rng()?;
    let mut records = Vec::with_capacity(list.len());
    for (i, run) in list.iter().enumerate() {
        let field = |k: &str| run.get(k).ok_or_else(|| usage(format!("run {i} needs {k:?}")));
        let name = field("scheme")?.as_str().ok_or_else(|| usage(format!("run {i}: scheme must be a string")))?;
        let num = |k: &str| run.get(k).and_then(Value::as_u64).map(|v| v as usize);
        let spec = spec_of(name, num("k"), num("d"))?;
        let (cpath, cval) = inline_or_path(base, field("class")?, "class")?;
        let loaded = io::class_from_value(&cpath, &cval, &mut rng)?;
        let (dpath, dval) = inline_or_path(base, field("dataset")?, "dataset")?;
        let data = io::dataset_from_value(&dpath, &dval)?;
        records.push(measure(&spec, &loaded.handle, &loaded.descriptor, &data, cap)?);
    }
    Ok(Report::new(records))
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match &cli.command {
        Command::Dims { class, cap, witness } => emit(&cli.out, &pretty(&dims(class, *cap, *witness)?))?,
        Command::VsEncode { class, dataset } => {
            let loaded = io::load_class(class, &mut rng()?)?;
            let data = io::load_dataset(dataset)?;
            let enc = vs_encode(&loaded.handle, &data)?;
            emit(&cli.out, &pretty(&encoding_json(&loaded, &enc)))?;
        }
        Command::Merge { class, a, b } => {
            let loaded = io::load_class(class, &mut rng()?)?;
            let (ea, eb) = (io::load_encoding(a)?, io::load_encoding(b)?);
            let merged = merge(&loaded.handle, &ea, &eb)?;
            emit(&cli.out, &pretty(&encoding_json(&loaded, &merged)))?;
        }
        Command::Scheme(SchemeCmd::Run(a)) => emit(&cli.out, &pretty(&scheme_run(a)?))?,
        Command::Lb(LbCmd::Demo(a)) => {
            let (v, ok) = lb_demo(a)?;
            emit(&cli.out, &pretty(&v))?;
            return Ok(ok);
        }
        Command::Report { runs, format, cap } => {
            let r = report(runs, *cap)?;
            let text = match format {
                Format::Json => r.to_json(),
                Format::Table => r.to_table(),
            };
            emit(&cli.out, text.trim_end())?;
        }
    }
    Ok(true)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.is::<Usage>() || e.is::<InputError>() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: the adversary did not recover the secret");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
