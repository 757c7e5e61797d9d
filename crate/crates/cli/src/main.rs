mod config;

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use bernlab::anticoncentration::{u_degree_estimate, UDegreeParams};
use bernlab::bounds::{bounds_row, BoundsRow, BOUNDS_CSV_HEADER};
use bernlab::classes::{Classifier, ClassifierConfig};
use bernlab::exact::decide_singular;
use bernlab::harness::{
    exit_code, run_classify_survey, run_norm_tail, run_rowcol_only, run_singularity_mc, run_smin_quantiles,
    run_udeg_survey, summary_json, write_csv, CsvRecord, ExperimentMode, ExperimentSpec, Run,
};
use bernlab::io::{read_sbm, read_vectors, write_sbm};
use bernlab::matrix::{generate, BernoulliParams};
use clap::{Args, Parser, Subcommand};
use config::{pick, pick_list, FileConfig};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "bernlab",
    version,
    about = "Experiments on sparse Bernoulli(p) random 0/1 matrices"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed; trial i uses ChaCha20 stream i under this key.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads. Outputs do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file for per-trial CSV, matrices or JSON lines.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print summaries as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// TOML file of default settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct Experiment {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Record per-trial wall time (breaks byte-identical reruns).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Clone, Default)]
struct UdegArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    k2: Option<f64>,
    #[arg(long)]
    partition_samples: Option<usize>,
    #[arg(long)]
    quad_step_factor: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct ClassifierArgs {
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    c_tau: Option<f64>,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long)]
    big_c0: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one matrix and write it in the sparse text format.
    Gen {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        /// Trial index selecting the random stream.
        #[arg(long)]
        trial: Option<u64>,
    },
    /// Decide singularity of a matrix read from a file (or stdin).
    Singular { input: Option<PathBuf> },
    /// Singularity Monte Carlo with witness attribution.
    Mc {
        #[command(flatten)]
        exp: Experiment,
        /// Only look for zero rows and columns.
        #[arg(long)]
        rowcol_only: bool,
    },
    /// Quantiles of the smallest singular value.
    Smin {
        #[command(flatten)]
        exp: Experiment,
        #[arg(long, value_delimiter = ',')]
        thresholds: Vec<f64>,
    },
    /// Tail of the centred spectral norm.
    Norms {
        #[command(flatten)]
        exp: Experiment,
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
        #[arg(long)]
        rel_tol: Option<f64>,
    },
    /// u-degree of vectors from a file, or a survey over normal vectors.
    Udeg {
        #[command(flatten)]
        exp: Experiment,
        #[command(flatten)]
        params: UdegArgs,
        /// One vector per line; `-` reads stdin.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Classify vectors from a file, or survey sampled and normal vectors.
    Classify {
        #[command(flatten)]
        exp: Experiment,
        #[command(flatten)]
        constants: ClassifierArgs,
        /// One vector per line; `-` reads stdin.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Skip classifying normal vectors in the survey.
        #[arg(long)]
        no_normals: bool,
    },
    /// Table of closed-form quantities over an (n, p) grid.
    Bounds {
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        probs: Vec<f64>,
        /// Use p = k ln n / n for each listed k.
        #[arg(long, value_delimiter = ',')]
        log_multiples: Vec<f64>,
        /// Regime constant C in C ln n <= pn, p <= 1/C.
        #[arg(long)]
        c: Option<f64>,
    },
}

struct Ctx {
    seed: u64,
    workers: usize,
    out: Option<PathBuf>,
    json: bool,
    file: FileConfig,
}

impl Ctx {
    fn output(&self) -> anyhow::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn spec(&self, exp: &Experiment, mode: ExperimentMode) -> anyhow::Result<ExperimentSpec> {
        let n = pick(exp.n, &self.file.n).ok_or_else(|| anyhow!("--n is required"))?;
        let p = pick(exp.p, &self.file.p).ok_or_else(|| anyhow!("--p is required"))?;
        let trials = pick(exp.trials, &self.file.trials).unwrap_or(1000);
        let mut spec = ExperimentSpec::new(n, p, trials, self.seed, mode);
        spec.workers = self.workers;
        spec.output_path = self.out.clone();
        spec.options.record_timing = exp.timing || self.file.timing.unwrap_or(false);
        Ok(spec)
    }

    fn udeg_params(&self, a: &UdegArgs) -> UDegreeParams {
        let f = &self.file;
        let mut params = UDegreeParams::new(pick(a.m, &f.m).unwrap_or(4));
        params.k1 = pick(a.k1, &f.k1).unwrap_or(params.k1);
        params.k2 = pick(a.k2, &f.k2).unwrap_or(params.k2);
        params.partition_samples = pick(a.partition_samples, &f.partition_samples).unwrap_or(params.partition_samples);
        params.quad_step_factor = pick(a.quad_step_factor, &f.quad_step_factor).unwrap_or(params.quad_step_factor);
        params.t_max = pick(a.t_max, &f.t_max).unwrap_or(params.t_max);
        params.seed = self.seed;
        params
    }

    fn classifier_config(&self, n: usize, p: f64, a: &ClassifierArgs) -> ClassifierConfig {
        let f = &self.file;
        let mut cfg = ClassifierConfig::new(n, p);
        if let Some(r) = pick(a.r, &f.r) {
            // δ follows r unless given explicitly.
            cfg.r = r;
            cfg.delta = r / 3.01;
        }
        cfg.delta = pick(a.delta, &f.delta).unwrap_or(cfg.delta);
        cfg.rho = pick(a.rho, &f.rho).unwrap_or(cfg.rho);
        cfg.c_tau = pick(a.c_tau, &f.c_tau).unwrap_or(cfg.c_tau);
        cfg.c0 = pick(a.c0, &f.c0).unwrap_or(cfg.c0);
        cfg.big_c0 = pick(a.big_c0, &f.big_c0).unwrap_or(cfg.big_c0);
        cfg
    }

    /// Writes the CSV to `--out` when given, then prints the summary.
    fn finish<R: CsvRecord, S: Serialize>(&self, spec: &ExperimentSpec, run: Run<R, S>) -> anyhow::Result<()> {
        if let Some(path) = &self.out {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_csv(spec, &run.records, &mut w)?;
            w.flush()?;
        }
        let mut stdout = io::stdout().lock();
        if self.json {
            writeln!(stdout, "{}", summary_json(spec, &run.summary))?;
        } else {
            writeln!(stdout, "spec_hash = {}", spec.hash())?;
            print_plain(&mut stdout, &serde_json::to_value(&run.summary)?)?;
        }
        Ok(())
    }
}

/// `key = value` lines for the top level of a JSON object.
fn print_plain(w: &mut impl Write, value: &serde_json::Value) -> io::Result<()> {
    match value.as_object() {
        Some(map) => {
            for (k, v) in map {
                match v {
                    serde_json::Value::String(s) => writeln!(w, "{k} = {s}")?,
                    other => writeln!(w, "{k} = {other}")?,
                }
            }
            Ok(())
        }
        None => writeln!(w, "{value}"),
    }
}

fn reader(input: Option<&Path>) -> anyhow::Result<Box<dyn BufRead>> {
    Ok(match input {
        None => Box::new(BufReader::new(io::stdin())),
        Some(p) if p == Path::new("-") => Box::new(BufReader::new(io::stdin())),
        Some(p) => Box::new(BufReader::new(
            File::open(p).with_context(|| format!("opening {}", p.display()))?,
        )),
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.global.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let ctx = Ctx {
        seed: pick(cli.global.seed, &file.seed).unwrap_or(0),
        workers: pick(cli.global.workers, &file.workers).unwrap_or(1),
        out: pick(cli.global.out, &file.out),
        json: cli.global.json || file.json.unwrap_or(false),
        file,
    };
    match cli.command {
        Command::Gen { n, p, trial } => {
            let n = pick(n, &ctx.file.n).ok_or_else(|| anyhow!("--n is required"))?;
            let p = pick(p, &ctx.file.p).ok_or_else(|| anyhow!("--p is required"))?;
            let trial = pick(trial, &ctx.file.trial).unwrap_or(0);
            let m = generate(&BernoulliParams::new(n, p, ctx.seed, trial)?)?;
            let mut w = ctx.output()?;
            if ctx.json {
                let doc =
                    json!({"n": n, "p": p, "seed": ctx.seed, "trial_index": trial, "nnz": m.nnz(), "ones": m.ones()});
                writeln!(w, "{doc}")?;
            } else {
                write_sbm(&m, &mut w)?;
            }
            w.flush()?;
        }
        Command::Singular { input } => {
            let m = read_sbm(reader(input.as_deref())?)?;
            let verdict = decide_singular(&m);
            let scan = m.structural_scan();
            let mut w = ctx.output()?;
            if ctx.json {
                writeln!(w, "{}", json!({"n": m.n(), "verdict": verdict, "structural": scan}))?;
            } else {
                writeln!(w, "n = {}", m.n())?;
                print_plain(&mut w, &serde_json::to_value(&verdict)?)?;
                writeln!(w, "structural = {}", serde_json::to_string(&scan)?)?;
            }
            w.flush()?;
        }
        Command::Mc { exp, rowcol_only } => {
            if rowcol_only || ctx.file.rowcol_only.unwrap_or(false) {
                let spec = ctx.spec(&exp, ExperimentMode::RowcolOnly)?;
                ctx.finish(&spec, run_rowcol_only(&spec)?)?;
            } else {
                let spec = ctx.spec(&exp, ExperimentMode::Singularity)?;
                ctx.finish(&spec, run_singularity_mc(&spec)?)?;
            }
        }
        Command::Smin { exp, thresholds } => {
            let mut spec = ctx.spec(&exp, ExperimentMode::SminQuantiles)?;
            if let Some(t) = pick_list(thresholds, &ctx.file.thresholds) {
                spec.options.smin_thresholds = t;
            }
            ctx.finish(&spec, run_smin_quantiles(&spec)?)?;
        }
        Command::Norms { exp, t, rel_tol } => {
            let mut spec = ctx.spec(&exp, ExperimentMode::NormTail)?;
            if let Some(t) = pick_list(t, &ctx.file.t) {
                spec.options.norm_t = t;
            }
            spec.options.rel_tol = pick(rel_tol, &ctx.file.rel_tol).unwrap_or(spec.options.rel_tol);
            ctx.finish(&spec, run_norm_tail(&spec)?)?;
        }
        Command::Udeg { exp, params, input } => {
            let params = ctx.udeg_params(&params);
            if let Some(input) = input {
                let vectors = read_vectors(reader(Some(&input))?)?;
                let mut w = ctx.output()?;
                for (i, v) in vectors.iter().enumerate() {
                    let est = u_degree_estimate(v, &params)?;
                    writeln!(w, "{}", json!({"index": i, "estimate": est}))?;
                }
                w.flush()?;
            } else {
                let mut spec = ctx.spec(&exp, ExperimentMode::UdegSurvey)?;
                spec.options.udeg = params;
                ctx.finish(&spec, run_udeg_survey(&spec)?)?;
            }
        }
        Command::Classify {
            exp,
            constants,
            input,
            no_normals,
        } => {
            if let Some(input) = input {
                let p = pick(exp.p, &ctx.file.p).ok_or_else(|| anyhow!("--p is required"))?;
                let vectors = read_vectors(reader(Some(&input))?)?;
                let mut classifiers: HashMap<usize, Classifier> = HashMap::new();
                let mut w = ctx.output()?;
                for (i, v) in vectors.iter().enumerate() {
                    let c = match classifiers.get(&v.len()) {
                        Some(c) => c,
                        None => {
                            let c = Classifier::new(ctx.classifier_config(v.len(), p, &constants))?;
                            classifiers.entry(v.len()).or_insert(c)
                        }
                    };
                    let l = c.classify(v)?;
                    let line = json!({
                        "index": i,
                        "label": l.label,
                        "witness": l.witness,
                        "normalization": l.normalization,
                        "chain": l.chain,
                    });
                    writeln!(w, "{line}")?;
                }
                w.flush()?;
            } else {
                let mut spec = ctx.spec(&exp, ExperimentMode::ClassifySurvey)?;
                spec.options.classifier = Some(ctx.classifier_config(spec.n, spec.p, &constants));
                spec.options.classify_normals = !(no_normals || ctx.file.no_normals.unwrap_or(false));
                ctx.finish(&spec, run_classify_survey(&spec)?)?;
            }
        }
        Command::Bounds {
            sizes,
            probs,
            log_multiples,
            c,
        } => {
            let sizes = pick_list(sizes, &ctx.file.sizes).ok_or_else(|| anyhow!("--sizes is required"))?;
            let probs = pick_list(probs, &ctx.file.probs).unwrap_or_default();
            let multiples = pick_list(log_multiples, &ctx.file.log_multiples).unwrap_or_default();
            if probs.is_empty() && multiples.is_empty() {
                bail!("give --probs or --log-multiples");
            }
            let c = pick(c, &ctx.file.c).unwrap_or(1.0);
            let mut rows: Vec<BoundsRow> = Vec::new();
            for &n in &sizes {
                let ln = (n as f64).ln();
                let ps = probs.iter().copied().chain(multiples.iter().map(|k| k * ln / n as f64));
                for p in ps {
                    rows.push(bounds_row(n, p, c)?);
                }
            }
            let mut w = ctx.output()?;
            if ctx.json {
                writeln!(w, "{}", serde_json::to_string_pretty(&rows)?)?;
            } else {
                writeln!(w, "{BOUNDS_CSV_HEADER}")?;
                for r in &rows {
                    writeln!(w, "{}", r.to_csv())?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are "other" failures; 2 is reserved for regime errors.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<bernlab::Error>().map_or(1, exit_code);
            ExitCode::from(code as u8)
        }
    }
}
