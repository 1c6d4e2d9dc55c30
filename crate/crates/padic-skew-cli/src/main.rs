//! Batch front end: sampling, canonical forms, estimator runs, and the
//! verification suites, all seeded and reproducible.
//!
//! Exit codes: 0 on success (and suite pass), 1 when a suite or check
//! fails, 2 on usage, validation, or precision errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::RngCore;

use padic_skew::{
    charfn_closed_form, exact_quotient_integral, gl_vs_mat_gap_bound, mc_charfn, mc_orbital,
    run_suite, skew_canonical_form, tau_identity_check, BoundReport, Domain, EnsembleSample,
    ExperimentConfig, ExtInt, FieldSpec, Kernel, LocalElem, LocalMatrix, McOptions, Signature,
    SuiteKind,
};

/// Environment variable naming the default output directory for relative
/// `--out` paths.
const OUT_DIR_ENV: &str = "PADIC_SKEW_OUTDIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldArg {
    Padic,
    Laurent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "padic-skew",
    version,
    about = "Local-field skew-matrix ensembles: samplers, canonical forms, and verification suites"
)]
struct Cli {
    /// Field kind.
    #[arg(long, global = true, value_enum, default_value = "padic")]
    field: FieldArg,
    /// Residue characteristic (a prime).
    #[arg(long, global = true, default_value_t = 3)]
    p: u32,
    /// Tracked digits of relative precision.
    #[arg(long, global = true, default_value_t = 24)]
    prec: u32,
    /// Seed; generated and echoed to stderr when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; stdout when omitted. Relative paths are resolved
    /// against $PADIC_SKEW_OUTDIR when that is set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: FormatArg,
    /// Worker threads (defaults to the machine's cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Args)]
struct SignatureArgs {
    /// Comma-separated nonincreasing spike exponents, e.g. "2,1,-1".
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    spikes: String,
    /// Tail exponent: an integer or "-inf".
    #[arg(long, default_value = "-inf", allow_hyphen_values = true)]
    tail: String,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Draw corners of the random skew matrix attached to a signature.
    Sample {
        #[command(flatten)]
        signature: SignatureArgs,
        /// Corner size (even).
        #[arg(long, default_value_t = 4)]
        corner: usize,
        /// Number of samples to emit.
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Canonical form of a skew matrix read from a JSON file.
    Canon {
        /// Input matrix file; see the matrix JSON schema.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Monte Carlo characteristic function against the closed form.
    Charfn {
        #[command(flatten)]
        signature: SignatureArgs,
        /// Comma-separated block exponents of the test matrix.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        ells: String,
        /// Corner size (even, at least twice the block count).
        #[arg(long, default_value_t = 4)]
        corner: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Monte Carlo orbital integral against the theta product and bound.
    Orbital {
        /// Comma-separated exponents of the diagonal scales.
        #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
        d_exps: String,
        /// Comma-separated exponents of the test-matrix scales.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        a_exps: String,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Exact residue-level gap between group and matrix averages.
    Glmat {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// Residue depth of the enumeration.
        #[arg(long, default_value_t = 1)]
        depth: u32,
    },
    /// Both sides of the pushforward identity at one grid point.
    Correspond {
        #[arg(long, default_value_t = 0)]
        k: i64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        x_exp: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        y_exp: i64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Run a verification suite and write its report.
    Suite {
        /// canonical | charfn | orbital | glmat | correspondence |
        /// invariance | exchangeability
        #[arg(long)]
        name: String,
        /// JSON config file overriding the default grid.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        samples: Option<u64>,
    },
}

fn parse_int_list(s: &str) -> anyhow::Result<Vec<i64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| anyhow!("not an integer: {t:?}"))
        })
        .collect()
}

fn parse_tail(s: &str) -> anyhow::Result<ExtInt> {
    match s.trim() {
        "-inf" => Ok(ExtInt::NegInf),
        t => t
            .parse::<i64>()
            .map(ExtInt::Int)
            .map_err(|_| anyhow!("tail must be an integer or \"-inf\", got {t:?}")),
    }
}

fn parse_signature(args: &SignatureArgs) -> anyhow::Result<Signature> {
    let spikes = parse_int_list(&args.spikes)?;
    let tail = parse_tail(&args.tail)?;
    Ok(Signature::new(spikes, tail)?)
}

fn resolve_out(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) => PathBuf::from(dir).join(path),
        None => path.to_path_buf(),
    }
}

fn write_output(text: &str, out: &Option<PathBuf>) -> anyhow::Result<()> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            let path = resolve_out(path);
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)
                        .with_context(|| format!("creating {}", parent.display()))?;
                }
            }
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
    }
}

/// Stamp a schema version onto a report object.
fn with_schema(value: serde_json::Value) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    map.insert("schema".into(), serde_json::json!("1"));
    if let serde_json::Value::Object(obj) = value {
        for (k, v) in obj {
            map.insert(k, v);
        }
    }
    serde_json::Value::Object(map)
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let spec = match cli.field {
        FieldArg::Padic => FieldSpec::padic(cli.p, cli.prec)?,
        FieldArg::Laurent => FieldSpec::laurent(cli.p, cli.prec)?,
    };
    let seed = cli.seed.unwrap_or_else(|| rand::rng().next_u64());
    eprintln!("seed: {seed}");

    match &cli.cmd {
        Cmd::Sample {
            signature,
            corner,
            count,
        } => {
            if corner % 2 != 0 || *corner < 2 {
                return Err(anyhow!("corner must be even and at least 2"));
            }
            let sig = parse_signature(signature)?;
            let samples: Vec<EnsembleSample> = (0..*count)
                .map(|i| {
                    padic_skew::ensemble::draw_skew_ergodic(
                        &sig,
                        *corner,
                        spec,
                        seed.wrapping_add(i),
                    )
                })
                .collect();
            let body = serde_json::json!({"samples": samples});
            write_output(&pretty(&with_schema(body)), &cli.out)?;
            Ok(0)
        }
        Cmd::Canon { input } => {
            let text = std::fs::read_to_string(input)
                .with_context(|| format!("reading {}", input.display()))?;
            let matrix: LocalMatrix = serde_json::from_str(&text)?;
            let cf = skew_canonical_form(&matrix)?;
            let body = serde_json::json!({
                "exponents": cf.exponents,
                "transform": cf.transform,
                "round_trip_ok": cf.reconstruct()?.agrees_with(&matrix),
            });
            write_output(&pretty(&with_schema(body)), &cli.out)?;
            Ok(0)
        }
        Cmd::Charfn {
            signature,
            ells,
            corner,
            trials,
        } => {
            let sig = parse_signature(signature)?;
            let ells = parse_int_list(ells)?;
            if ells.is_empty() {
                return Err(anyhow!("need at least one block exponent"));
            }
            let opts = McOptions::new(*trials, seed);
            let est = mc_charfn(&sig, &ells, *corner, &opts, &spec)?;
            let main = charfn_closed_form(&sig, &ells, &spec);
            let rep = BoundReport::evaluate(
                "charfn",
                serde_json::json!({
                    "signature": sig,
                    "ells": ells,
                    "corner": corner,
                    "q": spec.q(),
                }),
                main,
                0.0,
                est,
            );
            let pass = rep.pass;
            write_output(
                &pretty(&with_schema(serde_json::to_value(&rep)?)),
                &cli.out,
            )?;
            Ok(if pass { 0 } else { 1 })
        }
        Cmd::Orbital {
            d_exps,
            a_exps,
            trials,
        } => {
            let d: Vec<ExtInt> = parse_int_list(d_exps)?.into_iter().map(ExtInt::Int).collect();
            let a: Vec<ExtInt> = parse_int_list(a_exps)?.into_iter().map(ExtInt::Int).collect();
            let opts = McOptions::new(*trials, seed);
            let rep = mc_orbital(&d, &a, &opts, &spec)?;
            let pass = rep.pass;
            write_output(
                &pretty(&with_schema(serde_json::to_value(&rep)?)),
                &cli.out,
            )?;
            Ok(if pass { 0 } else { 1 })
        }
        Cmd::Glmat { n, r, depth } => {
            let coeffs = LocalMatrix::from_entries(
                spec,
                *r,
                *n,
                vec![LocalElem::uniformizer_pow(spec, -1); r * n],
            )?;
            let kernel = Kernel::Row { coeffs };
            let mat = exact_quotient_integral(&kernel, Domain::Mat, &spec, Some(*depth))?;
            let gl = exact_quotient_integral(&kernel, Domain::Gl, &spec, Some(*depth))?;
            let gap = (gl.to_complex() - mat.to_complex()).norm();
            let bound = gl_vs_mat_gap_bound(*n, *r, spec.q())?;
            let pass = gap <= bound + 1e-12;
            let body = serde_json::json!({
                "experiment": "glmat",
                "params": {"n": n, "r": r, "q": spec.q(), "depth": depth},
                "mat": {"re": mat.to_complex().re, "im": mat.to_complex().im, "points": mat.points},
                "gl": {"re": gl.to_complex().re, "im": gl.to_complex().im, "points": gl.points},
                "gap": gap,
                "bound": bound,
                "pass": pass,
            });
            write_output(&pretty(&with_schema(body)), &cli.out)?;
            Ok(if pass { 0 } else { 1 })
        }
        Cmd::Correspond {
            k,
            x_exp,
            y_exp,
            trials,
        } => {
            let opts = McOptions::new(*trials, seed);
            let (left, right) = tau_identity_check(*k, *x_exp, *y_exp, &opts, &spec)?;
            let pass = left.agrees_with(&right, 3.0);
            let body = serde_json::json!({
                "experiment": "correspondence",
                "params": {"k": k, "x_exp": x_exp, "y_exp": y_exp, "q": spec.q()},
                "left": serde_json::to_value(left)?,
                "right": serde_json::to_value(right)?,
                "pass": pass,
            });
            write_output(&pretty(&with_schema(body)), &cli.out)?;
            Ok(if pass { 0 } else { 1 })
        }
        Cmd::Suite {
            name,
            config,
            trials,
            samples,
        } => {
            let suite = SuiteKind::parse(name)
                .ok_or_else(|| anyhow!("unknown suite {name:?}; see --help"))?;
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
                    cfg.suite = suite;
                    cfg
                }
                None => ExperimentConfig::new(spec, suite, seed),
            };
            if config.is_none() {
                cfg.seed = seed;
            }
            if let Some(t) = trials {
                cfg.trials = *t;
            }
            if let Some(s) = samples {
                cfg.samples = *s;
            }
            let report = run_suite(&cfg)?;
            eprintln!(
                "suite {name}: {} ({} cases, {} ms)",
                if report.pass { "pass" } else { "FAIL" },
                report.cases.len(),
                report.wall_clock_ms
            );
            match cli.format {
                FormatArg::Json => write_output(&report.to_json(), &cli.out)?,
                FormatArg::Csv => write_output(&report.to_csv(), &cli.out)?,
            }
            // A file output gets the CSV sibling for plotting.
            if let (Some(path), FormatArg::Json) = (&cli.out, cli.format) {
                let csv_path = resolve_out(path).with_extension("csv");
                std::fs::write(&csv_path, report.to_csv())
                    .with_context(|| format!("writing {}", csv_path.display()))?;
                eprintln!("wrote {}", csv_path.display());
            }
            Ok(if report.pass { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not size the thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
