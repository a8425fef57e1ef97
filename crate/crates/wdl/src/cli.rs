//! Command-line front end. [`execute`] parses arguments, runs one command and
//! returns the exit code with the rendered output, so it can be driven from
//! tests as well as from the `wdl` binary.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::blaschke::{cross_ratio_sweep, semi_sweep, Family};
use crate::classify::{
    attracting_rate, example, examples, kn_kn_bracket, parabolic_rates, run_example_on, summary_csv, summary_markdown,
    ClassificationReport,
};
use crate::error::{Error, Result};
use crate::hypgeo::{hyperbolic_estimate_sweep, SweepReport};
use crate::model::{hop_sweep, orbit, start_point, PerturbationModel};
use crate::schedule::{
    build_reefs, build_schedule, eps_definition, verify_disjointness, verify_laws, verify_surrounds, Schedule, SCHEMA,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Default output directory when `--output` is absent.
pub const OUTPUT_DIR_VAR: &str = "WDL_OUTPUT_DIR";

#[derive(Parser, Debug, Clone)]
#[command(name = "wdl", version, about = "Build, simulate and verify the wandering-domain model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub cfg: RunConfig,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Build the radius/scale schedule and print it.
    Schedule,
    /// Iterate the perturbed map from a start point.
    Orbit,
    /// Run one of the six classification examples, or all of them.
    Example,
    /// Run the invariant suite for a family, or a single lemma sweep.
    Verify,
    /// Summary table of the six examples.
    Report,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Md,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Md => "md",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// No perturbation: the model map itself.
    Zero,
    /// Seeded random displacements inside the envelope.
    Random,
    /// Seeded random real displacements.
    Real,
    /// Displacement of full envelope size, radially outward.
    Outward,
    /// Displacement of full envelope size, radially inward.
    Inward,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma {
    #[value(name = "hyperbolic", alias = "2.4")]
    Hyperbolic,
    #[value(name = "orbit-error", alias = "4.1")]
    OrbitError,
    #[value(name = "cross-ratio", alias = "4.2")]
    CrossRatio,
    #[value(name = "rates", alias = "4.3")]
    Rates,
    #[value(name = "semi", alias = "4.4")]
    Semi,
}

#[derive(clap::Args, Debug, Clone)]
pub struct RunConfig {
    /// square, par13, att12, identity, att56, semi or semi(<s>).
    #[arg(long, global = true, default_value = "square")]
    pub family: String,
    #[arg(long, global = true, default_value_t = 12)]
    pub depth: usize,
    /// Boundary samples per curve.
    #[arg(long, global = true, default_value_t = 1024)]
    pub samples: usize,
    /// Perturbation draws per check.
    #[arg(long, global = true, default_value_t = 20)]
    pub draws: u64,
    /// Fraction of the admissible displacement actually used.
    #[arg(long, global = true, default_value_t = 0.9)]
    pub envelope: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Perturbation::Random)]
    pub perturbation: Perturbation,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; defaults to stdout, or a file under $WDL_OUTPUT_DIR.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Example id (1a, 1b, 2a, 2b, 3a, 3b) or `all`.
    #[arg(long, global = true, default_value = "all")]
    pub id: String,
    /// Run one lemma sweep instead of the family suite.
    #[arg(long, global = true, value_enum)]
    pub lemma: Option<Lemma>,
    /// Sweep grid as `AxB`.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Orbit start point, `x` or `x,y`.
    #[arg(long, global = true, default_value = "4")]
    pub start: String,
}

impl RunConfig {
    fn family(&self) -> Result<Family> {
        self.family.parse()
    }

    fn validate(&self, command: Command) -> Result<()> {
        if self.depth < 1 {
            return Err(Error::Domain("depth must be at least 1".into()));
        }
        if self.samples < 8 {
            return Err(Error::Domain(format!("samples must be at least 8, got {}", self.samples)));
        }
        let upper = if command == Command::Verify { f64::INFINITY } else { 1.0 };
        if !(self.envelope >= 0.0 && self.envelope <= upper) {
            return Err(Error::Domain(format!("envelope fraction {} outside [0, 1]", self.envelope)));
        }
        Ok(())
    }

    fn model(&self) -> PerturbationModel {
        let m = match self.perturbation {
            Perturbation::Zero => PerturbationModel::zero(),
            Perturbation::Random => PerturbationModel::seeded(self.seed),
            Perturbation::Real => PerturbationModel::seeded_real(self.seed),
            Perturbation::Outward => PerturbationModel::extremal(true),
            Perturbation::Inward => PerturbationModel::extremal(false),
        };
        m.with_envelope(self.envelope)
    }

    fn grid(&self, default: (usize, usize)) -> Result<(usize, usize)> {
        let Some(g) = &self.grid else { return Ok(default) };
        let bad = || Error::Domain(format!("grid `{g}` is not of the form AxB"));
        let (a, b) = g.split_once(['x', 'X']).ok_or_else(bad)?;
        let a = a.trim().parse().map_err(|_| bad())?;
        let b = b.trim().parse().map_err(|_| bad())?;
        if a < 2 || b < 2 {
            return Err(bad());
        }
        Ok((a, b))
    }

    fn start(&self) -> Result<Complex64> {
        let bad = || Error::Domain(format!("start `{}` is not `x` or `x,y`", self.start));
        let parts: Vec<&str> = self.start.split(',').map(str::trim).collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        match parts.as_slice() {
            [x] => Ok(Complex64::new(num(x)?, 0.0)),
            [x, y] => Ok(Complex64::new(num(x)?, num(y)?)),
            _ => Err(bad()),
        }
    }
}

/// Exit code and rendered output of one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    /// The report, when it was not written to a file.
    pub stdout: String,
    pub stderr: String,
}

struct Rendered {
    code: i32,
    body: String,
    /// File stem used under the output directory.
    stem: String,
    /// One-line verdict for stderr.
    note: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn execute<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INCONCLUSIVE } else { EXIT_PASS };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    run(&cli)
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Outcome {
    let rendered = cli.cfg.validate(cli.command).and_then(|_| match cli.command {
        Command::Schedule => cmd_schedule(&cli.cfg),
        Command::Orbit => cmd_orbit(&cli.cfg),
        Command::Example => cmd_example(&cli.cfg),
        Command::Verify => cmd_verify(&cli.cfg),
        Command::Report => cmd_report(&cli.cfg),
    });
    match rendered {
        Ok(r) => emit(&cli.cfg, r),
        Err(e) => Outcome { code: error_code(&e), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Inconsistent(_) => EXIT_FAIL,
        _ => EXIT_INCONCLUSIVE,
    }
}

fn emit(cfg: &RunConfig, r: Rendered) -> Outcome {
    let path = match (&cfg.output, std::env::var_os(OUTPUT_DIR_VAR)) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) if !dir.is_empty() => {
            Some(PathBuf::from(dir).join(format!("{}.{}", r.stem, cfg.format.extension())))
        }
        _ => None,
    };
    match path {
        None => Outcome { code: r.code, stdout: r.body, stderr: r.note },
        Some(p) => {
            let written = p
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .map_or(Ok(()), std::fs::create_dir_all)
                .and_then(|_| std::fs::write(&p, &r.body));
            match written {
                Ok(()) => Outcome { code: r.code, stdout: String::new(), stderr: format!("{}wrote {}\n", r.note, p.display()) },
                Err(e) => Outcome {
                    code: EXIT_IO,
                    stdout: String::new(),
                    stderr: format!("error: writing {}: {e}\n", p.display()),
                },
            }
        }
    }
}

fn pretty<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(header)?;
    for row in rows {
        wtr.write_record(row)?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn md_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = format!("| {} |\n|{}\n", header.join(" | "), "---|".repeat(header.len()));
    for row in rows {
        let _ = writeln!(s, "| {} |", row.join(" | "));
    }
    s
}

fn table(format: Format, header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    match format {
        Format::Csv => csv_table(header, rows),
        _ => Ok(md_table(header, rows)),
    }
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "fail"
    }
}

fn cmd_schedule(cfg: &RunConfig) -> Result<Rendered> {
    let family = cfg.family()?;
    let sched = build_schedule(family, cfg.depth, cfg.samples)?;
    let body = match cfg.format {
        Format::Json => {
            let mut s = sched.to_json()?;
            s.push('\n');
            s
        }
        f => {
            let mut rows = Vec::new();
            for n in 0..=sched.depth() {
                let m = crate::model::ell(n as u64)?;
                rows.push(vec![
                    n.to_string(),
                    m.to_string(),
                    sched.degrees()[n].to_string(),
                    format!("{:.6}", sched.alpha(n)?.log2_magnitude()),
                    format!("{:.6}", sched.gap_in(m)?.log2_magnitude()),
                    format!("{:.6}", sched.gap_out(m)?.log2_magnitude()),
                ]);
            }
            table(f, &["n", "ell_n", "degree", "alpha_log2", "rgap_log2", "Rgap_log2"], &rows)?
        }
    };
    Ok(Rendered {
        code: EXIT_PASS,
        body,
        stem: format!("schedule-{}-{}", family.id(), cfg.depth),
        note: String::new(),
    })
}

fn cmd_orbit(cfg: &RunConfig) -> Result<Rendered> {
    let family = cfg.family()?;
    let sched = build_schedule(family, cfg.depth, cfg.samples)?;
    let trace = orbit(&start_point(&sched, cfg.start()?)?, sched.steps(), &cfg.model(), &sched)?;
    let body = match cfg.format {
        Format::Json => trace.to_jsonl()?,
        Format::Csv => trace.gphase_csv()?,
        Format::Md => {
            let rows: Vec<Vec<String>> = trace
                .gphase_records()
                .iter()
                .map(|r| {
                    let w = r.point.value();
                    vec![
                        r.phase.level().to_string(),
                        r.m.to_string(),
                        format!("{:.12}", w.re),
                        format!("{:.12}", w.im),
                        format!("{:.6e}", r.edge_gap),
                        format!("{:.6e}", r.boundary_gap),
                    ]
                })
                .collect();
            md_table(&["n", "m", "w_re", "w_im", "edge_gap", "boundary_gap"], &rows)
        }
    };
    Ok(Rendered {
        code: EXIT_PASS,
        body,
        stem: format!("orbit-{}-{}", family.id(), cfg.depth),
        note: String::new(),
    })
}

fn run_examples(cfg: &RunConfig) -> Result<Vec<ClassificationReport>> {
    let specs = if cfg.id == "all" { examples().to_vec() } else { vec![example(&cfg.id)?] };
    if cfg.depth < 10 {
        return Err(Error::Domain(format!("examples need depth >= 10, got {}", cfg.depth)));
    }
    let model = cfg.model();
    let mut out = Vec::new();
    for spec in &specs {
        let sched = build_schedule(spec.family, cfg.depth, cfg.samples)?;
        out.push(run_example_on(spec, &sched, &model)?);
    }
    Ok(out)
}

/// Inconclusive takes precedence over marker failure.
fn examples_code(reports: &[ClassificationReport]) -> i32 {
    if reports.iter().any(|r| r.inconclusive()) {
        EXIT_INCONCLUSIVE
    } else if reports.iter().all(|r| r.passed) {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn examples_note(reports: &[ClassificationReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = writeln!(s, "{}: {}, {} [{}]", r.id, r.hyperbolic_class, r.boundary_class, verdict(r.passed));
    }
    s
}

fn cmd_example(cfg: &RunConfig) -> Result<Rendered> {
    let reports = run_examples(cfg)?;
    let body = match cfg.format {
        Format::Json if reports.len() == 1 => pretty(&reports[0])?,
        Format::Json => pretty(&reports)?,
        Format::Csv => summary_csv(&reports)?,
        Format::Md => summary_markdown(&reports),
    };
    Ok(Rendered {
        code: examples_code(&reports),
        body,
        stem: format!("example-{}", cfg.id),
        note: examples_note(&reports),
    })
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    id: &'a str,
    family: &'a str,
    expected: [String; 2],
    observed: [String; 2],
    markers: Vec<(&'a str, bool)>,
    passed: bool,
}

fn cmd_report(cfg: &RunConfig) -> Result<Rendered> {
    let reports = run_examples(&RunConfig { id: "all".into(), ..cfg.clone() })?;
    let body = match cfg.format {
        Format::Json => {
            let rows: Vec<SummaryRow> = reports
                .iter()
                .map(|r| SummaryRow {
                    id: &r.id,
                    family: &r.family,
                    expected: [r.expected.0.to_string(), r.expected.1.to_string()],
                    observed: [r.hyperbolic_class.to_string(), r.boundary_class.to_string()],
                    markers: r.markers.iter().map(|m| (m.name.as_str(), m.passed)).collect(),
                    passed: r.passed,
                })
                .collect();
            pretty(&json!({ "schema": SCHEMA, "depth": cfg.depth, "model": cfg.model(), "examples": rows }))?
        }
        Format::Csv => summary_csv(&reports)?,
        Format::Md => summary_markdown(&reports),
    };
    Ok(Rendered { code: examples_code(&reports), body, stem: "report".into(), note: examples_note(&reports) })
}

/// One named item of a verification run.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyItem {
    pub name: String,
    pub passed: bool,
    /// Items that only report values never fail the run.
    pub informational: bool,
    pub summary: String,
    pub detail: Value,
}

impl VerifyItem {
    fn new(name: &str, passed: bool, summary: String, detail: Value) -> VerifyItem {
        VerifyItem { name: name.into(), passed, informational: false, summary, detail }
    }

    fn info(name: &str, summary: String, detail: Value) -> VerifyItem {
        VerifyItem { name: name.into(), passed: true, informational: true, summary, detail }
    }

    fn sweep(r: &SweepReport) -> Result<VerifyItem> {
        Ok(VerifyItem::new(
            &r.name,
            r.passed(),
            format!("{} checks, {} failures, min margin {:.3e}", r.checks, r.failures, r.min_margin),
            serde_json::to_value(r)?,
        ))
    }
}

fn within(name: &str, value: f64, lo: f64, hi: f64) -> SweepReport {
    let mut r = SweepReport::new(name);
    r.record((value - lo).min(hi - value), false, || format!("value {value}, window [{lo}, {hi}]"));
    r
}

/// Fitted rates: Par13 gap and step exponents near -1/2 and -3/2, and the
/// attracting ratios 2/3 and 1/11.
pub fn rates_reports() -> Result<Vec<SweepReport>> {
    let p = parabolic_rates(Family::Par13, 1000, 100_000)?;
    let a12 = attracting_rate(Family::Att12, 200)?;
    let a56 = attracting_rate(Family::Att56, 200)?;
    Ok(vec![
        within("parabolic_gap_exponent", p.gap.exponent, -0.55, -0.45),
        within("parabolic_step_exponent", p.step.exponent, -1.6, -1.4),
        within("attracting_ratio_att12", a12.last_ratio, 2.0 / 3.0 - 1e-6, 2.0 / 3.0 + 1e-6),
        within("attracting_ratio_att56", a56.last_ratio, 1.0 / 11.0 - 1e-6, 1.0 / 11.0 + 1e-6),
    ])
}

fn lemma_items(cfg: &RunConfig, lemma: Lemma) -> Result<Vec<VerifyItem>> {
    let reports = match lemma {
        Lemma::Hyperbolic => {
            let (grid, pairs) = cfg.grid((50, 10_000))?;
            hyperbolic_estimate_sweep(grid, pairs, cfg.seed)?
        }
        Lemma::OrbitError => {
            let sched = build_schedule(cfg.family()?, cfg.depth, cfg.samples)?;
            vec![hop_sweep(&sched, &cfg.model(), cfg.draws, cfg.seed)?]
        }
        Lemma::CrossRatio => {
            let (nr, nx) = cfg.grid((99, 999))?;
            vec![cross_ratio_sweep(nr, nx)?]
        }
        Lemma::Rates => rates_reports()?,
        Lemma::Semi => {
            let (ns, nx) = cfg.grid((100, 100))?;
            semi_sweep(ns, nx)?
        }
    };
    reports.iter().map(VerifyItem::sweep).collect()
}

/// The invariant suite for one schedule: growth laws, disjointness, reefs,
/// surrounds under the configured perturbation, hop bounds and the `k_n/K_n`
/// bracket, plus the `ε` breakdown for reference.
pub fn suite_items(sched: &Schedule, cfg: &RunConfig) -> Result<Vec<VerifyItem>> {
    let model = cfg.model();
    let mut items = Vec::new();

    let laws = verify_laws(sched)?;
    items.push(VerifyItem::new(
        "laws",
        laws.passed,
        format!("eps closed form max rel err {:.3e}, {} failures", laws.eps_closed_form_max_rel_err, laws.failures.len()),
        serde_json::to_value(&laws)?,
    ));

    let disj = verify_disjointness(sched)?;
    items.push(VerifyItem::new(
        "disjointness",
        disj.disjoint,
        format!("{} disc pairs", disj.items.len()),
        serde_json::to_value(&disj)?,
    ));

    let reefs = build_reefs(sched, cfg.samples)?;
    items.push(VerifyItem::new(
        "reefs",
        reefs.positive && reefs.decreasing,
        format!("{} arcs, positive {}, decreasing {}", reefs.arcs.len(), reefs.positive, reefs.decreasing),
        serde_json::to_value(&reefs)?,
    ));

    let surr = verify_surrounds(sched, &model, cfg.draws, cfg.samples, None)?;
    items.push(VerifyItem::new(
        "surrounds",
        surr.passed,
        format!(
            "{} checks through m = {}, {} failures, min margin {:.3e}",
            surr.checks,
            surr.through_m,
            surr.failures.len(),
            surr.min_margin
        ),
        serde_json::to_value(&surr)?,
    ));

    items.push(VerifyItem::sweep(&hop_sweep(sched, &model, cfg.draws, cfg.seed)?)?);

    let mut brackets = Vec::new();
    let mut ok = true;
    for n in 1..=sched.depth() {
        let b = kn_kn_bracket(sched, n)?;
        // k and K round to 1 in f64 after a few levels; the defects do not
        ok &= b.k_defect.is_positive() && b.big_k_excess.is_positive();
        brackets.push(b);
    }
    let last = brackets.last().copied();
    items.push(VerifyItem::new(
        "kn_bracket",
        ok,
        last.map_or(String::new(), |b| format!(
                "log2(1 - k_{n}) = {:.3}, log2(K_{n} - 1) = {:.3}",
                b.k_defect.log2_magnitude(),
                b.big_k_excess.log2_magnitude(),
                n = b.n
            )),
        serde_json::to_value(&brackets)?,
    ));

    let mut eps = Vec::new();
    for m in 0..sched.steps() {
        eps.push(eps_definition(sched, m, cfg.samples)?);
    }
    let by_delta = eps.iter().filter(|e| e.attained_by_delta).count();
    items.push(VerifyItem::info(
        "eps_definition",
        format!("{} steps, {} attained by delta", eps.len(), by_delta),
        serde_json::to_value(&eps)?,
    ));
    Ok(items)
}

fn cmd_verify(cfg: &RunConfig) -> Result<Rendered> {
    let (scope, items) = match cfg.lemma {
        Some(l) => (format!("lemma-{}", l.to_possible_value().expect("named").get_name()), lemma_items(cfg, l)?),
        None => {
            let family = cfg.family()?;
            let sched = build_schedule(family, cfg.depth, cfg.samples)?;
            (format!("family-{}", family.id()), suite_items(&sched, cfg)?)
        }
    };
    let passed = items.iter().all(|i| i.passed);
    let mut note = String::new();
    for i in &items {
        let tag = if i.informational { "info" } else { verdict(i.passed) };
        let _ = writeln!(note, "{}: {} ({})", i.name, tag, i.summary);
    }
    let body = match cfg.format {
        Format::Json => pretty(&json!({
            "schema": SCHEMA,
            "scope": scope,
            "depth": cfg.depth,
            "samples": cfg.samples,
            "draws": cfg.draws,
            "model": cfg.model(),
            "items": items,
            "passed": passed,
        }))?,
        f => {
            let rows: Vec<Vec<String>> = items
                .iter()
                .map(|i| {
                    let tag = if i.informational { "info" } else { verdict(i.passed) };
                    vec![i.name.clone(), tag.to_string(), i.summary.clone()]
                })
                .collect();
            table(f, &["item", "result", "summary"], &rows)?
        }
    };
    Ok(Rendered { code: if passed { EXIT_PASS } else { EXIT_FAIL }, body, stem: format!("verify-{scope}"), note })
}
