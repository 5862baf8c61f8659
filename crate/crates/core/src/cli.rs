//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use crate::analyze::{self, Format};
use crate::enumerate::{self, java_double, ExhaustiveResult, SUPPORTED_N};
use crate::parallel::default_threads;
use crate::perm::{index_of, sc231_trace, sort_number, Permutation};
use crate::sample::{self, SampleRun, DEFAULT_LEVEL, DEFAULT_SAMPLES};
use crate::verify::{self, SuiteReport};

/// Lengths sampled when `--n-list` is not given.
pub const DEFAULT_N_LIST: [usize; 13] = [15, 25, 50, 100, 200, 300, 400, 500, 600, 700, 800, 900, 1000];

#[derive(Parser, Debug)]
#[command(name = "sc231", version, about = "231-avoiding consecutive stack sort toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Text,
    Csv,
    Json,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// Worker threads [env: SC231_THREADS; default: available cores]
    #[arg(long)]
    threads: Option<usize>,
    /// Output format
    #[arg(long, value_enum, default_value = "text")]
    format: OutFormat,
    /// Write the main output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Show every push and pop of one pass
    Trace {
        perm: String,
        #[command(flatten)]
        common: Common,
    },
    /// Iterate until periodic and print the trajectory
    SortNumber {
        perm: String,
        #[command(flatten)]
        common: Common,
    },
    /// Scan all of S_n: maximum, count at maximum, average, histogram, leading entries
    Exhaustive {
        #[arg(long)]
        n: usize,
        /// Scan every length 1..=n
        #[arg(long)]
        up_to: bool,
        /// Resumable progress file (single n only)
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Blocks per checkpoint write
        #[arg(long, default_value_t = 4)]
        batch: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Monte-Carlo estimates with t-intervals
    Sample {
        /// Comma-separated lengths
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_LEVEL)]
        level: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Fit y = a n^b to an `n,y` CSV file
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Also write the fitted curve as a two-column CSV
        #[arg(long)]
        plot_data: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run property suites; exit status 0 iff all pass
    Verify {
        /// Suite name or `all`
        #[arg(long)]
        suite: String,
        #[arg(long)]
        max_n: usize,
        /// Raise the per-suite length caps
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        common: Common,
    },
    /// All permutations mapped onto the given one
    Preimages {
        perm: String,
        #[command(flatten)]
        common: Common,
    },
    /// The map on all of S_n, one `p -> sort(p)` line per permutation
    Graph {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// Validated settings shared by the subcommands.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub n_list: Vec<usize>,
    pub threads: usize,
    pub seed: u64,
    pub samples: usize,
    pub level: f64,
    pub out: Option<PathBuf>,
    pub format: OutFormat,
    pub checkpoint: Option<PathBuf>,
}

impl RunConfig {
    fn new(subcommand: &'static str, common: &Common) -> anyhow::Result<Self> {
        let threads = common.threads.unwrap_or_else(default_threads);
        if threads == 0 {
            bail!("--threads must be at least 1");
        }
        Ok(RunConfig {
            subcommand,
            n_list: Vec::new(),
            threads,
            seed: 0,
            samples: DEFAULT_SAMPLES,
            level: DEFAULT_LEVEL,
            out: common.out.clone(),
            format: common.format,
            checkpoint: None,
        })
    }

    fn validate(&self) -> anyhow::Result<()> {
        if self.samples < 2 {
            bail!("--samples must be at least 2, got {}", self.samples);
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            bail!("--level must lie in (0, 1), got {}", self.level);
        }
        Ok(())
    }
}

/// Parses `args` (including the program name) and runs the command; returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            1
        }
    }
}

fn parse_perm(s: &str) -> anyhow::Result<Permutation> {
    s.parse::<Permutation>()
        .with_context(|| format!("invalid permutation {s:?}"))
}

fn sink<'a>(cfg: &RunConfig, stdout: &'a mut dyn Write) -> anyhow::Result<Box<dyn Write + 'a>> {
    Ok(match &cfg.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(stdout),
    })
}

fn table_format(f: OutFormat) -> Format {
    match f {
        OutFormat::Json => Format::Json,
        _ => Format::Csv,
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> anyhow::Result<i32> {
    match cmd {
        Command::Trace { perm, common } => {
            let cfg = RunConfig::new("trace", &common)?;
            let p = parse_perm(&perm)?;
            let trace = sc231_trace(&p);
            let mut w = sink(&cfg, stdout)?;
            match cfg.format {
                OutFormat::Json => writeln!(w, "{}", serde_json::to_string_pretty(&trace)?)?,
                OutFormat::Csv => {
                    writeln!(w, "kind,value,pre_popped")?;
                    for e in &trace.events {
                        let kind = match e.kind {
                            crate::perm::EventKind::Push => "push",
                            crate::perm::EventKind::Pop => "pop",
                        };
                        writeln!(w, "{kind},{},{}", e.value, e.pre_popped)?;
                    }
                }
                OutFormat::Text => {
                    write!(w, "{}", trace.render())?;
                    writeln!(w, "{} -> {}", trace.input.compact(), trace.output.compact())?;
                }
            }
            w.flush()?;
            Ok(0)
        }
        Command::SortNumber { perm, common } => {
            let cfg = RunConfig::new("sort-number", &common)?;
            let p = parse_perm(&perm)?;
            let traj = sort_number(&p)?;
            let mut w = sink(&cfg, stdout)?;
            match cfg.format {
                OutFormat::Json => writeln!(w, "{}", serde_json::to_string_pretty(&traj)?)?,
                OutFormat::Csv => {
                    writeln!(w, "step,permutation,index")?;
                    for (t, s) in traj.steps.iter().enumerate() {
                        writeln!(w, "{t},\"{s}\",{}", index_of(s))?;
                    }
                }
                OutFormat::Text => {
                    writeln!(w, "sort-number: {}", traj.sort_number)?;
                    for (t, s) in traj.steps.iter().enumerate() {
                        writeln!(w, "{t:>4}  {}  index {}", s.compact(), index_of(s))?;
                    }
                }
            }
            w.flush()?;
            Ok(0)
        }
        Command::Exhaustive {
            n,
            up_to,
            checkpoint,
            batch,
            common,
        } => {
            let mut cfg = RunConfig::new("exhaustive", &common)?;
            cfg.n_list = if up_to { (1..=n).collect() } else { vec![n] };
            cfg.checkpoint = checkpoint;
            if cfg.checkpoint.is_some() && up_to {
                bail!("--checkpoint works with a single length, not --up-to");
            }
            if n > SUPPORTED_N {
                writeln!(stderr, "warning: n = {n} exceeds {SUPPORTED_N}; expect a very long run")?;
            }
            let mut results: Vec<ExhaustiveResult> = Vec::new();
            for &len in &cfg.n_list {
                writeln!(stderr, "processing n = {len}")?;
                let r = match &cfg.checkpoint {
                    Some(path) => enumerate::exhaustive_summary_checkpointed(
                        len,
                        cfg.threads,
                        path,
                        batch,
                        |c| {
                            if let Some(next) = &c.next {
                                let _ = writeln!(stderr, "checkpoint: next {next}");
                            }
                        },
                    )?,
                    None => enumerate::exhaustive_summary(len, cfg.threads)?,
                };
                results.push(r);
            }
            let mut w = sink(&cfg, stdout)?;
            write_exhaustive(&results, cfg.format, up_to, &mut w)?;
            w.flush()?;
            Ok(0)
        }
        Command::Sample {
            n_list,
            samples,
            seed,
            level,
            common,
        } => {
            let mut cfg = RunConfig::new("sample", &common)?;
            cfg.n_list = n_list.unwrap_or_else(|| DEFAULT_N_LIST.to_vec());
            cfg.samples = samples;
            cfg.seed = seed;
            cfg.level = level;
            cfg.validate()?;
            let mut runs: Vec<SampleRun> = Vec::new();
            for &len in &cfg.n_list {
                writeln!(stderr, "processing n = {len}")?;
                runs.push(sample::sample_stats(len, cfg.samples, cfg.seed, cfg.level, cfg.threads)?);
            }
            let mut w = sink(&cfg, stdout)?;
            match cfg.format {
                OutFormat::Csv => sample::write_grid(&runs, &mut w)?,
                OutFormat::Json => writeln!(w, "{}", serde_json::to_string_pretty(&runs)?)?,
                OutFormat::Text => {
                    writeln!(
                        w,
                        "{:>6} {:>6} {:>14} {:>14} {:>14} {:>14}",
                        "n", "m", "mean", "sd", "ci_low", "ci_high"
                    )?;
                    for r in &runs {
                        let s = &r.stats;
                        writeln!(
                            w,
                            "{:>6} {:>6} {:>14.6} {:>14.6} {:>14.6} {:>14.6}",
                            s.n, s.m, s.mean, s.sd, s.ci_low, s.ci_high
                        )?;
                    }
                    writeln!(
                        w,
                        "level {}, seed {}, rng {}",
                        cfg.level,
                        cfg.seed,
                        sample::RNG_ALGORITHM
                    )?;
                }
            }
            w.flush()?;
            Ok(0)
        }
        Command::Fit {
            input,
            plot_data,
            common,
        } => {
            let cfg = RunConfig::new("fit", &common)?;
            let file = File::open(&input).with_context(|| format!("cannot open {}", input.display()))?;
            let points = analyze::read_points(file)?;
            let fit = analyze::power_fit(&points)?;
            if !fit.converged {
                writeln!(stderr, "warning: fit did not converge; reporting best iterate")?;
            }
            if let Some(path) = plot_data {
                let curve: Vec<(f64, f64)> =
                    fit.points.iter().map(|r| (r.n, r.predicted)).collect();
                analyze::write_points(&curve, File::create(&path)?)?;
            }
            let mut w = sink(&cfg, stdout)?;
            match cfg.format {
                OutFormat::Text => {
                    writeln!(w, "a = {}", fit.a)?;
                    writeln!(w, "b = {}", fit.b)?;
                    match fit.r {
                        Some(r) => writeln!(w, "r = {r}")?,
                        None => writeln!(w, "r = undefined (all observations equal)")?,
                    }
                    writeln!(w, "ss_res = {}", fit.ss_res)?;
                    writeln!(w, "log-log start: a = {}, b = {}", fit.log_log_a, fit.log_log_b)?;
                    writeln!(w, "iterations = {}, converged = {}", fit.iterations, fit.converged)?;
                    writeln!(w, "residual signs: {}", analyze::residual_signs(&fit))?;
                    analyze::emit_fit(&fit, Format::Csv, &mut w)?;
                }
                f => analyze::emit_fit(&fit, table_format(f), &mut w)?,
            }
            w.flush()?;
            Ok(0)
        }
        Command::Verify {
            suite,
            max_n,
            force,
            common,
        } => {
            let cfg = RunConfig::new("verify", &common)?;
            let reports: Vec<SuiteReport> = if suite == "all" {
                verify::run_all(max_n, force, cfg.threads)?
            } else {
                vec![verify::run_suite(&suite, max_n, force, cfg.threads)?]
            };
            for r in &reports {
                writeln!(stderr, "{}: {:.3}s", r.suite, r.elapsed.as_secs_f64())?;
            }
            let mut w = sink(&cfg, stdout)?;
            match cfg.format {
                OutFormat::Json => writeln!(w, "{}", serde_json::to_string_pretty(&reports)?)?,
                _ => {
                    for r in &reports {
                        writeln!(
                            w,
                            "{} {} max_n={} checks={} failures={}",
                            if r.passed() { "PASS" } else { "FAIL" },
                            r.suite,
                            r.max_n,
                            r.checks,
                            r.failures_total
                        )?;
                        for note in &r.notes {
                            writeln!(w, "    {note}")?;
                        }
                        for f in &r.failures {
                            writeln!(
                                w,
                                "    failure: input {} expected {} actual {}",
                                f.input, f.expected, f.actual
                            )?;
                        }
                    }
                }
            }
            w.flush()?;
            Ok(if reports.iter().all(SuiteReport::passed) { 0 } else { 1 })
        }
        Command::Preimages { perm, common } => {
            let cfg = RunConfig::new("preimages", &common)?;
            let p = parse_perm(&perm)?;
            let pre = verify::preimages(&p)?;
            let mut w = sink(&cfg, stdout)?;
            match cfg.format {
                OutFormat::Json => writeln!(w, "{}", serde_json::to_string(&pre)?)?,
                OutFormat::Csv => {
                    for q in &pre {
                        writeln!(w, "\"{q}\"")?;
                    }
                }
                OutFormat::Text => {
                    writeln!(w, "{} preimages of {}", pre.len(), p.compact())?;
                    for q in &pre {
                        writeln!(w, "{}", q.compact())?;
                    }
                }
            }
            w.flush()?;
            Ok(0)
        }
        Command::Graph { n, common } => {
            let cfg = RunConfig::new("graph", &common)?;
            let graph = verify::functional_graph(n)?;
            let mut w = sink(&cfg, stdout)?;
            match cfg.format {
                OutFormat::Json => writeln!(w, "{}", serde_json::to_string(&graph)?)?,
                OutFormat::Csv => {
                    writeln!(w, "from,to")?;
                    for (a, b) in &graph {
                        writeln!(w, "\"{a}\",\"{b}\"")?;
                    }
                }
                OutFormat::Text => {
                    for (a, b) in &graph {
                        writeln!(w, "{} -> {}", a.compact(), b.compact())?;
                    }
                }
            }
            w.flush()?;
            Ok(0)
        }
    }
}

fn write_exhaustive(
    results: &[ExhaustiveResult],
    format: OutFormat,
    many: bool,
    w: &mut dyn Write,
) -> anyhow::Result<()> {
    match format {
        OutFormat::Csv => {
            let hists: Vec<_> = results.iter().map(|r| &r.histogram).collect();
            enumerate::write_histogram_csv(&hists, w)?;
        }
        OutFormat::Json => {
            let reports: Vec<_> = results.iter().map(ExhaustiveResult::report).collect();
            let text = if many {
                serde_json::to_string_pretty(&reports)?
            } else {
                serde_json::to_string_pretty(&reports[0])?
            };
            writeln!(w, "{text}")?;
        }
        OutFormat::Text => {
            writeln!(w, "{:>3} {:>5} {:>12} {:>22}", "n", "max", "count", "average")?;
            for r in results {
                let s = &r.summary;
                writeln!(
                    w,
                    "{:>3} {:>5} {:>12} {:>22}",
                    s.n,
                    s.max_sort_number,
                    s.count_at_max,
                    java_double(s.average)
                )?;
            }
            if let [r] = results {
                writeln!(w)?;
                writeln!(w, "histogram (k: count)")?;
                for (k, c) in r.histogram.nonzero() {
                    writeln!(w, "{k:>5}: {c}")?;
                }
                writeln!(w)?;
                writeln!(w, "{:>7} {:>5} {:>12} {:>22}", "leading", "max", "count", "average")?;
                for (i, h) in r.leading.by_leading.iter().enumerate() {
                    if let Some(s) = h.summary() {
                        writeln!(
                            w,
                            "{:>7} {:>5} {:>12} {:>22}",
                            i + 1,
                            s.max_sort_number,
                            s.count_at_max,
                            java_double(s.average)
                        )?;
                    }
                }
            }
        }
    }
    Ok(())
}
