//! Command-line front end: run configuration, commands and deterministic output.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::exactpoly::{enumerate_pn, factor, IntPoly, DEFAULT_DEGREE_CAP, DEFAULT_ENUMERATION_BUDGET};
use crate::groupring::GroupRingMatrix;
use crate::groups::{GroupKind, GroupSpec};
use crate::quantize::{
    discrepancy_reports, dyadic_sectors, kronecker_transform, norm_quantize, sqrt2_gap_check,
};
use crate::rootlab::{isolate_roots, mahler_measure};
use crate::spectra::{
    analyze, arcsine_cdf, fk_determinant, galois_conjugate_check, kernel_dim_sequence, kesten_mckay_cdf, ks_distance,
    LambdaSpec, Schedule, SpectraOptions, DEFAULT_EXACT_CAP,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("computation error: {0}")]
    Compute(#[from] crate::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 3,
        }
    }

    pub fn diagnostic(&self) -> Value {
        let kind = match self {
            CliError::Config(_) => "config",
            CliError::Compute(_) => "computation",
            CliError::Io(_) => "io",
        };
        json!({ "tool": "sspec", "version": VERSION, "error": kind, "message": self.to_string() })
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn compute_err(e: impl Into<crate::Error>) -> CliError {
    CliError::Compute(e.into())
}

#[derive(Debug, Parser)]
#[command(name = "sspec", version, about = "Spectral analysis of integer group-ring operators over sofic groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral decomposition: atoms, continuous CDF, eigenvalue files and plots.
    Spectrum(RunArgs),
    /// Normalized kernel dimensions at the query points across the schedule.
    Kernel(RunArgs),
    /// Norm quantization verdict and the √2 gap check.
    Quantize(RunArgs),
    /// Fuglede–Kadison determinant and the Mahler measure lower-bound flag.
    Fkdet(RunArgs),
    /// Polynomial tools.
    #[command(subcommand)]
    Polylab(PolylabCommand),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration; inline flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Group as JSON or shorthand `cyclic:m`, `free_abelian:d`, `free:k`.
    #[arg(long)]
    pub group: Option<String>,
    /// Operator: a group-ring element, or a JSON array of rows of elements.
    #[arg(long)]
    pub op: Option<String>,
    /// Comma-separated strictly increasing scales.
    #[arg(long)]
    pub schedule: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub exact_cap: Option<usize>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Query point (repeatable): `1/3`, `0.7` or `t^2+t-1 @ 0.6`.
    #[arg(long = "lambda")]
    pub lambdas: Vec<String>,
    /// Comma-separated subset of json,csv,svg.
    #[arg(long)]
    pub formats: Option<String>,
    /// Skip numeric eigenvalues above the exact cap.
    #[arg(long)]
    pub no_numeric: bool,
    /// Fail when the Mahler measure lower-bound flag does not apply.
    #[arg(long)]
    pub require_flag: bool,
}

#[derive(Debug, Subcommand)]
pub enum PolylabCommand {
    /// Mahler measure with root enclosures.
    Mahler(PolyArgs),
    /// Factorization into irreducibles with multiplicities.
    Factor(PolyArgs),
    /// Angular discrepancy against the Erdős–Turán and Dubickas bounds.
    Discrepancy(DiscrepancyArgs),
    /// `t^deg · p(t + 1/t)`.
    Kronecker(PolyArgs),
    /// Monic integer polynomials of degree n with all roots in `|z| ≤ λ`.
    Enumerate(EnumerateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PolyArgs {
    pub poly: String,
    /// Also write the JSON to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DiscrepancyArgs {
    pub poly: String,
    /// Sector `α,β` in radians (repeatable).
    #[arg(long = "sector", allow_hyphen_values = true)]
    pub sectors: Vec<String>,
    /// Use all dyadic sectors down to this level.
    #[arg(long)]
    pub dyadic: Option<u32>,
    #[arg(long)]
    pub require_irreducible: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub degree: usize,
    #[arg(long)]
    pub radius: f64,
    #[arg(long)]
    pub budget: Option<u128>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_dir(), formats: default_formats() }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("sspec-out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv, Format::Svg]
}

fn default_exact_cap() -> usize {
    DEFAULT_EXACT_CAP
}

fn default_one() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_query_points() -> Vec<String> {
    vec!["0".to_string()]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub group: GroupSpec,
    /// Group-ring element string or array of rows of element strings.
    pub operator: Value,
    pub schedule: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_exact_cap")]
    pub exact_cap: usize,
    #[serde(default = "default_one")]
    pub jobs: usize,
    #[serde(default = "default_true")]
    pub numeric: bool,
    #[serde(default = "default_query_points")]
    pub query_points: Vec<String>,
    #[serde(default)]
    pub require_flag: bool,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Validated inputs of a run.
pub struct Prepared {
    pub spec: GroupSpec,
    pub operator: GroupRingMatrix,
    pub schedule: Schedule,
    pub options: SpectraOptions,
    pub lambdas: Vec<LambdaSpec>,
}

impl RunConfig {
    pub fn prepare(&self) -> Result<Prepared, CliError> {
        if self.output.formats.is_empty() {
            return Err(config_err("at least one output format is required"));
        }
        let operator = GroupRingMatrix::from_json_value(&self.group, &self.operator).map_err(config_err)?;
        let schedule = Schedule::new(&self.schedule, self.seed).map_err(config_err)?;
        let lambdas = self.query_points.iter().map(|s| LambdaSpec::parse(s)).collect::<Result<Vec<_>, _>>().map_err(config_err)?;
        Ok(Prepared {
            spec: self.group.clone(),
            operator,
            schedule,
            options: SpectraOptions { exact_cap: self.exact_cap, numeric: self.numeric, jobs: self.jobs.max(1) },
            lambdas,
        })
    }

    fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

/// Expands `cyclic:5`, `free_abelian:2`, `free:2` or parses JSON.
pub fn parse_group_arg(s: &str) -> Result<Value, CliError> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(config_err);
    }
    let (kind, n) = s.split_once(':').ok_or_else(|| config_err(format!("unrecognized group `{s}`")))?;
    let n: usize = n.trim().parse().map_err(|_| config_err(format!("bad group parameter in `{s}`")))?;
    match kind.trim() {
        "cyclic" => Ok(json!({ "type": "cyclic", "m": n })),
        "free_abelian" => Ok(json!({ "type": "free_abelian", "d": n })),
        "free" => Ok(json!({ "type": "free", "rank": n })),
        other => Err(config_err(format!("unknown group type `{other}`"))),
    }
}

/// Merges the config file with inline flags.
pub fn resolve_config(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut doc = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<Value>(&text).map_err(config_err)?
        }
        None => json!({}),
    };
    let obj = doc.as_object_mut().ok_or_else(|| config_err("configuration must be a JSON object"))?;
    if let Some(g) = &args.group {
        obj.insert("group".into(), parse_group_arg(g)?);
    }
    if let Some(op) = &args.op {
        let t = op.trim();
        let v = if t.starts_with('[') || t.starts_with('"') { serde_json::from_str(t).map_err(config_err)? } else { json!(t) };
        obj.insert("operator".into(), v);
    }
    if let Some(s) = &args.schedule {
        let scales = s
            .split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| x.trim().parse::<usize>().map_err(|_| config_err(format!("bad scale `{x}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        obj.insert("schedule".into(), json!(scales));
    }
    if let Some(seed) = args.seed {
        obj.insert("seed".into(), json!(seed));
    }
    if let Some(cap) = args.exact_cap {
        obj.insert("exact_cap".into(), json!(cap));
    }
    if let Some(jobs) = args.jobs {
        obj.insert("jobs".into(), json!(jobs));
    }
    if args.no_numeric {
        obj.insert("numeric".into(), json!(false));
    }
    if args.require_flag {
        obj.insert("require_flag".into(), json!(true));
    }
    if !args.lambdas.is_empty() {
        obj.insert("query_points".into(), json!(args.lambdas));
    }
    if args.out.is_some() || args.formats.is_some() {
        let output = obj.entry("output").or_insert_with(|| json!({}));
        let out = output.as_object_mut().ok_or_else(|| config_err("`output` must be an object"))?;
        if let Some(dir) = &args.out {
            out.insert("dir".into(), json!(dir));
        }
        if let Some(f) = &args.formats {
            let list: Vec<&str> = f.split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
            out.insert("formats".into(), json!(list));
        }
    }
    serde_json::from_value(doc).map_err(config_err)
}

/// `serde_json` formatter that writes every float with 17 significant digits.
struct FixedFloat<'a>(serde_json::ser::PrettyFormatter<'a>);

impl serde_json::ser::Formatter for FixedFloat<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with sorted keys and fixed-width floats.
pub fn to_json_string(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat(serde_json::ser::PrettyFormatter::new()));
    v.serialize(&mut ser).expect("serializing a JSON value cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON output is UTF-8")
}

fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("report types serialize to JSON")
}

fn envelope(command: &str, config: Value, result: Value) -> Value {
    json!({ "tool": "sspec", "version": VERSION, "command": command, "config": config, "result": result })
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

/// Files written by a run, plus the JSON document.
#[derive(Debug)]
pub struct RunOutput {
    pub document: Value,
    pub files: Vec<PathBuf>,
}

fn finish(config: &RunConfig, command: &str, result: Value, mut files: Vec<PathBuf>) -> Result<RunOutput, CliError> {
    let document = envelope(command, to_value(config), result);
    if config.wants(Format::Json) {
        files.insert(0, write_file(&config.output.dir, &format!("{command}.json"), &to_json_string(&document))?);
    }
    Ok(RunOutput { document, files })
}

pub fn cmd_spectrum(config: &RunConfig) -> Result<RunOutput, CliError> {
    let p = config.prepare()?;
    let (op, samples, report) = analyze(&p.operator, &p.spec, &p.schedule, &p.options).map_err(compute_err)?;
    let galois = galois_conjugate_check(&report.atoms);
    let continuous = &report.continuous_spectrum;
    let ks_arcsine = (!continuous.is_empty()).then(|| ks_distance(continuous, arcsine_cdf));
    let ks_kesten = match p.spec.kind() {
        GroupKind::Free { rank } if !continuous.is_empty() => Some(ks_distance(continuous, |x| kesten_mckay_cdf(x, 2 * rank))),
        _ => None,
    };
    let sample_summary: Vec<Value> = samples
        .iter()
        .map(|s| {
            json!({
                "scale": s.scale,
                "group_scale": s.group_scale,
                "seed": s.seed,
                "denominator": s.denominator.to_string(),
                "kernel_dims": to_value(&s.kernel_dims),
                "exact": s.charpoly.is_some(),
                "spectral_radius": s.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            })
        })
        .collect();
    let result = json!({
        "squared": op.squared,
        "report": to_value(&report),
        "galois": to_value(&galois),
        "samples": sample_summary,
        "ks_arcsine": ks_arcsine,
        "ks_kesten_mckay": ks_kesten,
    });
    let mut files = Vec::new();
    if config.wants(Format::Json) {
        let atoms = envelope("spectrum", to_value(config), json!({ "atoms": to_value(&report.atoms) }));
        files.push(write_file(&config.output.dir, "atoms.json", &to_json_string(&atoms))?);
    }
    if config.wants(Format::Csv) {
        for s in &samples {
            let mut csv = String::from("index,eigenvalue\n");
            for (i, x) in s.eigenvalues.iter().enumerate() {
                let _ = writeln!(csv, "{i},{x:.16e}");
            }
            files.push(write_file(&config.output.dir, &format!("eigenvalues_{}.csv", s.scale), &csv)?);
        }
    }
    if config.wants(Format::Svg) {
        files.push(write_file(&config.output.dir, "cdf.svg", &svg_cdf(&report.cdf_x, &report.cdf_y))?);
        if let Some(top) = samples.last() {
            files.push(write_file(&config.output.dir, "histogram.svg", &svg_histogram(&top.eigenvalues, 64))?);
        }
    }
    finish(config, "spectrum", result, files)
}

pub fn cmd_kernel(config: &RunConfig) -> Result<RunOutput, CliError> {
    let p = config.prepare()?;
    let traces = p
        .lambdas
        .iter()
        .map(|l| kernel_dim_sequence(&p.operator, &p.spec, l, &p.schedule, &p.options))
        .collect::<Result<Vec<_>, _>>()
        .map_err(compute_err)?;
    let mut files = Vec::new();
    if config.wants(Format::Csv) {
        let mut csv = String::from("lambda,scale,seed,dimension,normalized,path\n");
        for t in &traces {
            for pt in &t.points {
                let _ = writeln!(
                    csv,
                    "\"{}\",{},{},{:.16e},{:.16e},{:?}",
                    t.lambda, pt.scale, pt.seed, pt.dimension, pt.normalized_f64, pt.path
                );
            }
        }
        files.push(write_file(&config.output.dir, "kernel_trace.csv", &csv)?);
    }
    finish(config, "kernel", json!({ "traces": to_value(&traces) }), files)
}

pub fn cmd_quantize(config: &RunConfig) -> Result<RunOutput, CliError> {
    let p = config.prepare()?;
    let verdict = norm_quantize(&p.operator, &p.spec, &p.schedule, &p.options).map_err(compute_err)?;
    let sqrt2 = if p.operator.denominator() == 1.into() {
        Some(sqrt2_gap_check(&p.operator, &p.spec, &p.schedule, &p.options).map_err(compute_err)?)
    } else {
        None
    };
    finish(config, "quantize", json!({ "verdict": to_value(&verdict), "sqrt2": to_value(&sqrt2) }), Vec::new())
}

pub fn cmd_fkdet(config: &RunConfig) -> Result<RunOutput, CliError> {
    let p = config.prepare()?;
    let report =
        fk_determinant(&p.operator, &p.spec, &p.schedule, &p.options, config.require_flag).map_err(compute_err)?;
    finish(config, "fkdet", to_value(&report), Vec::new())
}

fn parse_poly(s: &str) -> Result<IntPoly, CliError> {
    s.parse().map_err(|e| config_err(format!("polynomial `{s}`: {e}")))
}

fn parse_sector(s: &str) -> Result<[f64; 2], CliError> {
    let bad = || config_err(format!("sector `{s}` must be `alpha,beta`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(bad());
    }
    Ok([a, b])
}

/// Runs a polynomial tool and returns its JSON document.
pub fn cmd_polylab(cmd: &PolylabCommand) -> Result<(Value, Option<PathBuf>), CliError> {
    let (name, args, result, out) = match cmd {
        PolylabCommand::Mahler(a) => {
            let p = parse_poly(&a.poly)?;
            let m = mahler_measure(&p).map_err(compute_err)?;
            let roots = isolate_roots(&p, 1e-12).map_err(compute_err)?;
            ("mahler", json!({ "poly": a.poly }), json!({ "poly": p.to_string(), "mahler": to_value(&m), "roots": to_value(&roots) }), &a.out)
        }
        PolylabCommand::Factor(a) => {
            let p = parse_poly(&a.poly)?;
            let f = factor(&p, DEFAULT_DEGREE_CAP).map_err(compute_err)?;
            let pretty: Vec<Value> =
                f.factors.iter().map(|x| json!({ "factor": x.poly.to_string(), "multiplicity": x.multiplicity })).collect();
            ("factor", json!({ "poly": a.poly }), json!({ "poly": p.to_string(), "factored": to_value(&f), "factors": pretty }), &a.out)
        }
        PolylabCommand::Kronecker(a) => {
            let p = parse_poly(&a.poly)?;
            let k = kronecker_transform(&p);
            ("kronecker", json!({ "poly": a.poly }), json!({ "input": p.to_string(), "output": k.to_string() }), &a.out)
        }
        PolylabCommand::Discrepancy(a) => {
            let p = parse_poly(&a.poly)?;
            let mut sectors = a.sectors.iter().map(|s| parse_sector(s)).collect::<Result<Vec<_>, _>>()?;
            if let Some(levels) = a.dyadic {
                sectors.extend(dyadic_sectors(levels));
            }
            if sectors.is_empty() {
                sectors.push([-std::f64::consts::PI, std::f64::consts::PI]);
            }
            let reports = discrepancy_reports(&p, &sectors, a.require_irreducible).map_err(compute_err)?;
            (
                "discrepancy",
                json!({ "poly": a.poly, "sectors": a.sectors, "dyadic": a.dyadic, "require_irreducible": a.require_irreducible }),
                json!({ "reports": to_value(&reports) }),
                &a.out,
            )
        }
        PolylabCommand::Enumerate(a) => {
            let budget = a.budget.unwrap_or(DEFAULT_ENUMERATION_BUDGET);
            let list = enumerate_pn(a.degree, a.radius, budget).map_err(compute_err)?;
            let names: Vec<String> = list.iter().map(|p| p.to_string()).collect();
            (
                "enumerate",
                json!({ "degree": a.degree, "radius": a.radius, "budget": budget.to_string() }),
                json!({ "count": names.len(), "polynomials": names }),
                &a.out,
            )
        }
    };
    let doc = envelope(&format!("polylab {name}"), args, result);
    let written = match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, to_json_string(&doc))?;
            Some(path.clone())
        }
        None => None,
    };
    Ok((doc, written))
}

/// Dispatches a parsed command line. Run commands print the list of written
/// files; polylab prints its JSON.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let run_with = |args: &RunArgs, f: fn(&RunConfig) -> Result<RunOutput, CliError>| -> Result<String, CliError> {
        let config = resolve_config(args)?;
        match f(&config) {
            Ok(out) => Ok(out.files.iter().map(|p| format!("{}\n", p.display())).collect()),
            Err(e) => {
                if !matches!(e, CliError::Config(_)) {
                    let _ = write_file(&config.output.dir, "error.json", &to_json_string(&e.diagnostic()));
                }
                Err(e)
            }
        }
    };
    match &cli.command {
        Command::Spectrum(a) => run_with(a, cmd_spectrum),
        Command::Kernel(a) => run_with(a, cmd_kernel),
        Command::Quantize(a) => run_with(a, cmd_quantize),
        Command::Fkdet(a) => run_with(a, cmd_fkdet),
        Command::Polylab(p) => cmd_polylab(p).map(|(doc, _)| to_json_string(&doc)),
    }
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 400.0;
const SVG_PAD: f64 = 40.0;

fn svg_frame(body: &str, title: &str, x_range: (f64, f64)) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{SVG_PAD}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n\
         <line x1=\"{SVG_PAD}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{SVG_PAD}\" y1=\"{SVG_PAD}\" x2=\"{SVG_PAD}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <text x=\"{SVG_PAD}\" y=\"{t}\" font-family=\"sans-serif\" font-size=\"11\">{lo:.3}</text>\n\
         <text x=\"{r}\" y=\"{t}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{hi:.3}</text>\n\
         {body}</svg>\n",
        b = SVG_H - SVG_PAD,
        r = SVG_W - SVG_PAD,
        t = SVG_H - SVG_PAD + 16.0,
        lo = x_range.0,
        hi = x_range.1,
    )
}

fn x_range(xs: &[f64]) -> (f64, f64) {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        (-1.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

/// Step plot of a CDF sampled on a grid.
pub fn svg_cdf(xs: &[f64], ys: &[f64]) -> String {
    let (lo, hi) = x_range(xs);
    let (w, h) = (SVG_W - 2.0 * SVG_PAD, SVG_H - 2.0 * SVG_PAD);
    let mut pts = String::new();
    for (x, y) in xs.iter().zip(ys) {
        let _ = write!(pts, "{:.3},{:.3} ", SVG_PAD + (x - lo) / (hi - lo) * w, SVG_H - SVG_PAD - y.clamp(0.0, 1.0) * h);
    }
    let body = format!("<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{}\"/>\n", pts.trim_end());
    svg_frame(&body, "continuous spectral CDF", (lo, hi))
}

/// Histogram of eigenvalues with `bins` equal-width bins.
pub fn svg_histogram(values: &[f64], bins: usize) -> String {
    let (lo, hi) = x_range(values);
    let bins = bins.max(1);
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((v - lo) / (hi - lo)) * bins as f64).floor() as usize;
        counts[k.min(bins - 1)] += 1;
    }
    let peak = counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let (w, h) = (SVG_W - 2.0 * SVG_PAD, SVG_H - 2.0 * SVG_PAD);
    let bw = w / bins as f64;
    let mut body = String::new();
    for (k, &c) in counts.iter().enumerate() {
        let bh = c as f64 / peak * h;
        let _ = writeln!(
            body,
            "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"steelblue\"/>",
            SVG_PAD + k as f64 * bw,
            SVG_H - SVG_PAD - bh,
            bw * 0.9,
            bh
        );
    }
    svg_frame(&body, "eigenvalue histogram", (lo, hi))
}
