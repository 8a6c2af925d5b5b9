// `!(x < y)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod analysis;
mod error;
mod figures;
mod output;
mod spec;

use analysis::Outcome;
use clap::{Args, Parser, Subcommand};
use error::{CliError, CliResult};
use output::{fmt_f64, fmt_opt, write_atomic, write_csv};
use spec::{parse_bump, AnalysisSpec, Data, Format, GpdChoice, HypothesisSpec, McSpec, Model, OutputSpec, ScanArg};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Post-data probabilities of sharp and almost-sharp hypotheses.
#[derive(Parser)]
#[command(name = "sharpfid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an analysis from a JSON spec, or from flags with --model.
    Run {
        #[arg(long, conflicts_with = "model")]
        spec: Option<PathBuf>,
        #[arg(long, value_enum)]
        model: Option<Model>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Normal mean, known variance.
    NormalKnown(Flags),
    /// Normal mean, unknown variance, by Gibbs sampling of the full conditionals.
    NormalGibbs(Flags),
    /// Normal mean, unknown variance, from the joint fiducial density.
    NormalDirect(Flags),
    /// Binomial proportion.
    Binomial(Flags),
    /// Ratio of two binomial proportions.
    RelativeRisk(Flags),
    /// Write the data behind one of the nine figures.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=9))]
        id: u8,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Full Monte Carlo sizes for figures 4, 6 and 9.
        #[arg(long)]
        paper_scale: bool,
        #[arg(long, env = "SHARPFID_SEED")]
        seed: Option<u64>,
    },
}

#[derive(Args, Default)]
struct Flags {
    #[arg(long, allow_hyphen_values = true)]
    xbar: Option<f64>,
    #[arg(long)]
    se: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    sd: Option<f64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    x: Option<u64>,
    #[arg(long = "e-t")]
    e_t: Option<u64>,
    #[arg(long = "n-t")]
    n_t: Option<u64>,
    #[arg(long = "e-c")]
    e_c: Option<u64>,
    #[arg(long = "n-c")]
    n_c: Option<u64>,
    /// Half-width of the hypothesis interval (ratio: [1/(1+eps), 1+eps]).
    #[arg(long)]
    eps: Option<f64>,
    /// Centre of the interval; 0 for normal means, 0.5 for a proportion.
    #[arg(long, allow_hyphen_values = true)]
    centre: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    hi: Option<f64>,
    /// Prior probability of the hypothesis.
    #[arg(long)]
    prior: Option<f64>,
    /// Beta shapes a,b of the smoothing bump; implies a smoothed weighting.
    #[arg(long, value_parser = parse_bump)]
    bump: Option<[f64; 2]>,
    /// Smoothed weighting with Beta(4,4) bump.
    #[arg(long)]
    smoothed: bool,
    /// Fixed smoothing constant instead of the continuity solution.
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long, env = "SHARPFID_SEED")]
    seed: Option<u64>,
    /// fixed:μσ, fixed:σμ or random (ASCII: fixed:mu-sigma, fixed:sigma-mu).
    #[arg(long)]
    scan: Option<ScanArg>,
    /// Result file; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Flags {
    fn into_spec(self, model: Model) -> AnalysisSpec {
        let gpd = if self.smoothed || self.bump.is_some() || self.tau.is_some() {
            GpdChoice::Smoothed { bump: self.bump, tau: self.tau }
        } else {
            GpdChoice::Flat
        };
        AnalysisSpec {
            schema: spec::SCHEMA,
            model,
            data: Data {
                xbar: self.xbar,
                se: self.se,
                sigma: self.sigma,
                sd: self.sd,
                n: self.n,
                x: self.x,
                e_t: self.e_t,
                n_t: self.n_t,
                e_c: self.e_c,
                n_c: self.n_c,
            },
            hypothesis: HypothesisSpec { eps: self.eps, centre: self.centre, lo: self.lo, hi: self.hi, prior: self.prior },
            gpd,
            mc: McSpec { samples: self.samples, burn_in: self.burn_in, seed: self.seed, scan: self.scan },
            output: OutputSpec { path: self.out, format: self.format },
        }
    }

    /// Flags that may override a spec file.
    fn overrides(&self) -> bool {
        self.out.is_some() || self.format.is_some() || self.seed.is_some()
    }
}

const RECORD_HEADER: [&str; 12] =
    ["model", "lo", "hi", "prior", "p_in", "p_out", "tau", "mc_stderr", "ess", "samples", "seed", "diagnostics"];

fn record_csv(o: &Outcome) -> Vec<String> {
    let r = &o.record;
    let diag = r.diagnostics.iter().map(|(k, v)| format!("{k}={}", fmt_f64(*v))).collect::<Vec<_>>().join(";");
    vec![
        r.model.to_string(),
        fmt_f64(r.lo),
        fmt_f64(r.hi),
        fmt_f64(r.prior),
        fmt_f64(r.p_in),
        fmt_f64(r.p_out),
        fmt_opt(r.tau),
        fmt_opt(r.mc_stderr),
        fmt_opt(r.ess),
        r.samples.map(|v| v.to_string()).unwrap_or_default(),
        r.seed.map(|v| v.to_string()).unwrap_or_default(),
        diag,
    ]
}

fn render(o: &Outcome, format: Format) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &o.record).map_err(|e| CliError::Usage(format!("json: {e}")))?;
            buf.push(b'\n');
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(RECORD_HEADER)?;
            w.write_record(record_csv(o))?;
            w.flush().map_err(|e| CliError::io("stdout", e))?;
        }
    }
    Ok(buf)
}

/// `<dir>/<stem>_density.csv` beside the result file.
fn density_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "result".into());
    out.with_file_name(format!("{stem}_density.csv"))
}

fn execute(spec: &AnalysisSpec) -> CliResult<()> {
    let outcome = analysis::run(spec)?;
    let format = spec.output.format.unwrap_or_default();
    let bytes = render(&outcome, format)?;
    match &spec.output.path {
        Some(path) => {
            write_atomic(path, |w| w.write_all(&bytes).map_err(|e| CliError::io(path.display().to_string(), e)))?;
            let rows = outcome.density.iter().map(|&(x, d)| vec![fmt_f64(x), fmt_f64(d)]);
            write_csv(&density_path(path), &["x", "density"], rows)?;
        }
        None => std::io::stdout().write_all(&bytes).map_err(|e| CliError::io("stdout", e))?,
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { spec: Some(path), model: None, flags } => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(path.display().to_string(), e))?;
            let mut spec = AnalysisSpec::from_json(&text)?;
            if flags.overrides() {
                spec.output.path = flags.out.or(spec.output.path);
                spec.output.format = flags.format.or(spec.output.format);
                spec.mc.seed = flags.seed.or(spec.mc.seed);
            }
            execute(&spec)
        }
        Command::Run { spec: None, model: Some(model), flags } => execute(&flags.into_spec(model)),
        Command::Run { .. } => Err(CliError::Usage("run needs --spec FILE or --model".into())),
        Command::NormalKnown(f) => execute(&f.into_spec(Model::NormalKnown)),
        Command::NormalGibbs(f) => execute(&f.into_spec(Model::NormalGibbs)),
        Command::NormalDirect(f) => execute(&f.into_spec(Model::NormalDirect)),
        Command::Binomial(f) => execute(&f.into_spec(Model::Binomial)),
        Command::RelativeRisk(f) => execute(&f.into_spec(Model::RelativeRisk)),
        Command::Figure { id, out, paper_scale, seed } => {
            let opts = figures::FigureOptions { paper_scale, seed: seed.unwrap_or(analysis::DEFAULT_SEED) };
            for p in figures::generate(id, &out, opts)? {
                println!("{}", p.display());
            }
            Ok(())
        }
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
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
