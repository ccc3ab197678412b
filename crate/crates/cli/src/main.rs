//! `isoadams`: element arithmetic, resolutions and Ext charts for the mod-2
//! generalized and isotropic Steenrod algebras.
//!
//! Exit codes: 0 success / match, 1 mismatch, 2 usage error,
//! 3 window truncation (under `--strict`, or when a result needs a larger window).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use isoadams::chart::{self, ChartFormat};
use isoadams::homological::{compare_charts, compare_doubling, vanishing_check, CellKey, ChartOptions, ExtChart};
use isoadams::isotropic::{
    baer_injectivity_check, hom_comparison_check, random_graded_space, IsotropicError, IsotropicWindow,
};
use isoadams::jobs::{self, Basis, ChartFlavor, JobError};

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_TRUNCATED: u8 = 3;

#[derive(Parser)]
#[command(name = "isoadams", version, about = "Generalized and isotropic Steenrod algebra calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multiply two elements and print the product in canonical form.
    Mul(MulArgs),
    /// Resolve F2 and emit the Ext chart.
    Resolve(ResolveArgs),
    /// Compare two chart files (CSV or JSON).
    Compare(CompareArgs),
    /// Compute a triple Massey product of named classes.
    Massey(MasseyArgs),
    /// Compute the isotropic chart and compare it with the classical chart in doubled degree.
    Isotropic(IsotropicArgs),
}

#[derive(Args)]
struct MulArgs {
    lhs: String,
    rhs: String,
    /// classical (words `Sq3 Sq1`), G or A0 (Milnor elements `Q0 P(1)`).
    #[arg(long, default_value = "A0", value_parser = parse_flavor)]
    flavor: ChartFlavor,
    /// Printed basis for A0/G: prqe (`P(1) Q0`) or qepr (`Q0 P(1)`).
    #[arg(long, default_value = "prqe", value_parser = parse_basis)]
    basis: Basis,
}

/// Bounds of the H window used for isotropic charts. Omitted bounds default
/// to the window that is exact through `--tmax`.
#[derive(Args, Clone, Default)]
struct WindowArgs {
    /// Largest index i of a generator r_i of H.
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pmin: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pmax: Option<i64>,
    /// Lower weight bound (also filters u for A0/G charts).
    #[arg(long, allow_hyphen_values = true)]
    qmin: Option<i64>,
    /// Upper weight bound (also filters u for A0/G charts).
    #[arg(long, allow_hyphen_values = true)]
    qmax: Option<i64>,
}

#[derive(Args, Clone)]
struct OutputArgs {
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: ChartFormat,
    /// Write the chart here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with code 3 if any cell in the window is truncated.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct ResolveArgs {
    #[arg(long, default_value = "classical", value_parser = parse_flavor)]
    flavor: ChartFlavor,
    #[arg(long, default_value_t = 20)]
    tmax: i64,
    #[arg(long, default_value_t = 8)]
    smax: usize,
    #[command(flatten)]
    window: WindowArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompareMode {
    /// The second chart equals the first under (s, t) -> (s, 2t, t) and vanishes off t = 2u.
    Doubling,
    /// Same non-zero cells with the same dimensions.
    Equality,
}

#[derive(Args)]
struct CompareArgs {
    chart_a: PathBuf,
    chart_b: PathBuf,
    #[arg(long, value_enum, default_value = "equality")]
    mode: CompareMode,
    /// Also write the machine-readable JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of the human one.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MasseyArgs {
    a: String,
    b: String,
    c: String,
    #[arg(long, default_value = "classical", value_parser = parse_flavor)]
    flavor: ChartFlavor,
    #[arg(long, default_value_t = 16)]
    tmax: i64,
    #[arg(long, default_value_t = 6)]
    smax: usize,
}

#[derive(Args)]
struct IsotropicArgs {
    #[arg(long, default_value_t = 44)]
    tmax: i64,
    #[arg(long, default_value_t = 8)]
    smax: usize,
    #[command(flatten)]
    window: WindowArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Also run the injectivity (Baer) and Hom-comparison checks.
    #[arg(long)]
    lemmas: bool,
    /// Seed for the sampled lemma checks.
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

fn parse_flavor(s: &str) -> Result<ChartFlavor, String> {
    s.parse()
}

fn parse_basis(s: &str) -> Result<Basis, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<ChartFormat, String> {
    s.parse()
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<JobError> for Failure {
    fn from(e: JobError) -> Self {
        let code = match e {
            JobError::Window(_) => EXIT_TRUNCATED,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mul(a) => cmd_mul(a),
        Command::Resolve(a) => cmd_resolve(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Massey(a) => cmd_massey(a),
        Command::Isotropic(a) => cmd_isotropic(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_mul(a: MulArgs) -> Result<u8, Failure> {
    match jobs::multiply_text(&a.lhs, &a.rhs, a.flavor, a.basis) {
        Ok(p) => {
            println!("{p}");
            Ok(0)
        }
        Err(JobError::Parse(e)) => {
            // point at the offending position in whichever operand failed
            let lhs_ok = match a.flavor {
                ChartFlavor::Classical => {
                    isoadams::text::parse_word_element(&a.lhs, isoadams::adem::WordFlavor::Classical).is_ok()
                }
                _ => isoadams::text::parse_element(&a.lhs).is_ok(),
            };
            let src = if lhs_ok { &a.rhs } else { &a.lhs };
            Err(Failure::usage(format!("{e}\n  {src}\n  {}^", " ".repeat(e.position))))
        }
        Err(e) => Err(e.into()),
    }
}

fn write_output(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// The H window from the flags, defaulting to the one exact through `tmax`.
fn isotropic_window(w: &WindowArgs, tmax: i64) -> Result<IsotropicWindow, Failure> {
    let pmin = w.pmin.unwrap_or(-tmax);
    let pmax = w.pmax.unwrap_or(0);
    let qmin = w.qmin.unwrap_or(-tmax);
    let qmax = w.qmax.unwrap_or(0);
    if pmin > pmax || qmin > qmax {
        return Err(Failure::usage("empty window: need pmin <= pmax and qmin <= qmax"));
    }
    match w.nmax {
        None => Ok(IsotropicWindow::new(pmin, pmax, qmin, qmax)),
        Some(n) if w.pmin.is_none() && w.qmin.is_none() => {
            // all of Λ(r_0..r_n), clipped to the requested depth
            let full = IsotropicWindow::full(n);
            IsotropicWindow::with_nmax(n, pmin.max(full.pmin), pmax, qmin.max(full.qmin), qmax)
                .map_err(|e| Failure::usage(e.to_string()))
        }
        Some(n) => IsotropicWindow::with_nmax(n, pmin, pmax, qmin, qmax).map_err(|e| match e {
            IsotropicError::IncompleteWindow(_) => Failure::usage(format!(
                "{e}; generators beyond r_{n} reach the requested box (raise --nmax or shrink --pmin/--qmin)"
            )),
            other => Failure::usage(other.to_string()),
        }),
    }
}

fn truncated_in_window(chart: &ExtChart) -> Vec<CellKey> {
    chart
        .truncated
        .iter()
        .filter(|k| chart.in_window(**k))
        .copied()
        .collect()
}

/// Describe the truncated part of the window: the exact region and the
/// computed cells lying outside it.
fn report_truncation(chart: &ExtChart) {
    eprintln!(
        "window truncation: only cells with s <= {} and t <= {} are exact",
        chart.exact_smax.map_or("-".into(), |s| s.to_string()),
        chart.exact_tmax.map_or("-".into(), |t| t.to_string())
    );
    let cells = truncated_in_window(chart);
    if !cells.is_empty() {
        let listed: Vec<String> = cells.iter().map(|k| k.to_string()).collect();
        eprintln!("truncated cells with computed cochains: {}", listed.join(" "));
    }
}

fn cmd_resolve(a: ResolveArgs) -> Result<u8, Failure> {
    if a.tmax < 0 {
        return Err(Failure::usage("--tmax must be non-negative"));
    }
    let mut chart = match a.flavor {
        ChartFlavor::Isotropic => {
            let window = isotropic_window(&a.window, a.tmax)?;
            jobs::isotropic_chart(&window, a.smax, a.tmax).map_err(|e| Failure {
                code: EXIT_MISMATCH,
                message: format!("action table not determined: {e}"),
            })?
        }
        f => {
            if a.window.nmax.is_some() || a.window.pmin.is_some() || a.window.pmax.is_some() {
                return Err(Failure::usage("--nmax/--pmin/--pmax apply to the isotropic flavor only"));
            }
            let options = if a.output.format == ChartFormat::Json {
                ChartOptions::all()
            } else {
                ChartOptions::default()
            };
            jobs::f2_chart(f.algebra(), a.smax, a.tmax, options)
        }
    };
    if a.flavor != ChartFlavor::Isotropic && (a.window.qmin.is_some() || a.window.qmax.is_some()) {
        if !chart.bigraded {
            return Err(Failure::usage("--qmin/--qmax need a bigraded flavor"));
        }
        let (lo, hi) = (a.window.qmin.unwrap_or(i64::MIN), a.window.qmax.unwrap_or(i64::MAX));
        chart.cells.retain(|c| c.u.is_some_and(|u| (lo..=hi).contains(&u)));
        chart.classes.retain(|c| c.u.is_some_and(|u| (lo..=hi).contains(&u)));
    }
    let text = chart::render(&chart, a.output.format).map_err(|e| Failure::usage(e.to_string()))?;
    write_output(&text, a.output.out.as_deref())?;
    if !chart.is_exact() {
        if a.output.strict {
            report_truncation(&chart);
            return Ok(EXIT_TRUNCATED);
        }
        eprintln!(
            "note: the window is truncated beyond s <= {}, t <= {}",
            chart.exact_smax.map_or("-".into(), |s| s.to_string()),
            chart.exact_tmax.map_or("-".into(), |t| t.to_string())
        );
    }
    Ok(0)
}

fn read_chart(path: &Path) -> Result<ExtChart, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    chart::read_chart(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    mode: &'a str,
    chart_a: String,
    chart_b: String,
    matched: bool,
    compared: usize,
    mismatches: &'a [String],
}

fn cmd_compare(a: CompareArgs) -> Result<u8, Failure> {
    let x = read_chart(&a.chart_a)?;
    let y = read_chart(&a.chart_b)?;
    let (mode, report) = match a.mode {
        CompareMode::Doubling => {
            if x.bigraded || !y.bigraded {
                return Err(Failure::usage(
                    "doubling mode compares a singly graded (classical) chart with a bigraded one",
                ));
            }
            ("doubling", compare_doubling(&x, &y, i64::MAX))
        }
        CompareMode::Equality => {
            if x.bigraded != y.bigraded {
                return Err(Failure::usage("equality mode needs two charts of the same grading"));
            }
            ("equality", compare_charts(&x, &y))
        }
    };
    let matched = report.mismatches.is_empty();
    let output = CompareOutput {
        mode,
        chart_a: a.chart_a.display().to_string(),
        chart_b: a.chart_b.display().to_string(),
        matched,
        compared: report.compared,
        mismatches: &report.mismatches,
    };
    let json = serde_json::to_string_pretty(&output).expect("report serialises") + "\n";
    if a.json {
        print!("{json}");
    } else {
        println!("mode: {mode}");
        println!("cells compared: {}", report.compared);
        for m in &report.mismatches {
            println!("mismatch: {m}");
        }
        println!("verdict: {}", if matched { "MATCH" } else { "MISMATCH" });
    }
    if let Some(path) = &a.out {
        write_output(&json, Some(path))?;
    }
    Ok(if matched { 0 } else { EXIT_MISMATCH })
}

fn cmd_massey(a: MasseyArgs) -> Result<u8, Failure> {
    let b = jobs::massey_by_name(a.flavor, a.smax, a.tmax, [&a.a, &a.b, &a.c])?;
    println!("{b}");
    Ok(0)
}

fn cmd_isotropic(a: IsotropicArgs) -> Result<u8, Failure> {
    if a.tmax < 0 {
        return Err(Failure::usage("--tmax must be non-negative"));
    }
    let window = isotropic_window(&a.window, a.tmax)?;
    let report = jobs::isotropic_report(&window, a.smax, a.tmax);

    if let Some(path) = &a.output.out {
        let text = chart::render(&report.chart, a.output.format).map_err(|e| Failure::usage(e.to_string()))?;
        write_output(&text, Some(path))?;
    }
    println!(
        "H window: p in [{}, {}], q in [{}, {}], generators r_0..r_{}",
        window.pmin,
        window.pmax,
        window.qmin,
        window.qmax,
        window.n_max().map_or("-".into(), |n| n.to_string())
    );
    println!("chart window: s <= {}, t <= {}", a.smax, a.tmax);
    match &report.ambiguity {
        None => println!("action table: unique"),
        Some(why) => println!("action table: NOT unique ({why}); assessing the G chart instead"),
    }
    println!("non-zero cells: {}", report.chart.cells.len());
    match (report.chart.exact_smax, report.chart.exact_tmax) {
        _ if report.chart.is_exact() => println!("exact region: the whole window"),
        (Some(s), Some(t)) => println!("exact region: s <= {s}, t <= {t} (the rest is truncated)"),
        _ => println!("exact region: none"),
    }
    println!(
        "doubling comparison with the classical chart: {} cells, {} mismatches",
        report.doubling.compared,
        report.doubling.mismatches.len()
    );
    for m in &report.doubling.mismatches {
        println!("  {m}");
    }
    let vanishing = vanishing_check(&report.chart);
    println!(
        "vanishing region (zero unless q <= p <= 2q, q >= 0): {} cells, {} violations",
        vanishing.compared,
        vanishing.mismatches.len()
    );
    for m in &vanishing.mismatches {
        println!("  {m}");
    }
    let mut matched = report.matches();
    if a.lemmas {
        matched &= run_lemmas(a.seed);
    }
    println!("verdict: {}", if matched { "MATCH" } else { "MISMATCH" });
    if !matched {
        return Ok(EXIT_MISMATCH);
    }
    if a.output.strict && !report.chart.is_exact() {
        report_truncation(&report.chart);
        return Ok(EXIT_TRUNCATED);
    }
    Ok(0)
}

fn run_lemmas(seed: u64) -> bool {
    let mut ok = true;
    for n in 0..=2 {
        let r = baer_injectivity_check(n, 0, seed);
        println!(
            "injectivity n_max={n}: {} ideals, {} morphisms, {}",
            r.ideals_checked,
            r.morphisms_checked,
            if r.passed() { "ok" } else { "FAILED" }
        );
        ok &= r.passed();
    }
    let r = baer_injectivity_check(3, 200, seed);
    println!(
        "injectivity n_max=3: {} sampled ideals, {} morphisms, {}",
        r.ideals_checked,
        r.morphisms_checked,
        if r.passed() { "ok" } else { "FAILED" }
    );
    ok &= r.passed();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hom_ok = 0;
    for _ in 0..100 {
        let n = random_graded_space(&mut rng, 3);
        let np = random_graded_space(&mut rng, 3);
        if hom_comparison_check(&n, &np).passed() {
            hom_ok += 1;
        }
    }
    println!("hom comparison: {hom_ok}/100 random pairs agree");
    ok && hom_ok == 100
}
