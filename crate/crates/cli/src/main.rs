use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use chaoszeta::characters::CharacterGroup;
use chaoszeta::functionals::{l_functional, l_truncated, CutoffPolicy};
use chaoszeta::harness::report::write_csv;
use chaoszeta::harness::{render, run_with_threads, ExperimentConfig, Format, ResultRow};
use chaoszeta::oracles::{
    e_m1m2_closed, gaussian_covariance_closed, kernel_square_ratio, kernel_weighted_ratio, kernel_sum_zero,
    prime_power_correction, variance_enumerated, variance_kernel_sum, KernelSumSpec,
};
use chaoszeta::quadrature::PanelRule;
use chaoszeta::randmodel::{chi_moment_enumerated, chi_moment_oracle, omega_moment_oracle, MomentTuple};
use chaoszeta::testfn::{build_cache, log_frequency, TestFunction};
use chaoszeta::zetafn::{covariance_kernel, zeta_detailed, ZetaEvalConfig};

/// Exit code when every step ran but some check failed.
const EXIT_CHECK_FAILED: u8 = 2;
/// Largest modulus for which `moments` also averages over all characters.
const MOMENT_ENUMERATION_LIMIT: u64 = 2_000;

#[derive(Parser, Debug)]
#[command(name = "chaoszeta", version, about = "Dirichlet characters, smoothed L-functionals and random Euler products")]
struct Cli {
    /// Seed for every random stream; overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct BumpArgs {
    #[arg(long, default_value_t = 0.0)]
    center: f64,
    #[arg(long, default_value_t = 1.0)]
    half_width: f64,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
}

impl BumpArgs {
    fn build(self) -> anyhow::Result<TestFunction> {
        Ok(TestFunction::bump(self.center, self.half_width, self.amplitude)?)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Values χ(n), 1 ≤ n ≤ q, of every character mod q.
    Chars {
        #[arg(long)]
        q: u64,
    },
    /// Joint moment E∏χ(n)^k conj χ(n)^m; tuples as `n:k:m`, comma separated.
    Moments {
        #[arg(long)]
        q: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        tuples: Vec<String>,
    },
    /// Coefficients f̂(log n/2π) of the bump for 1 ≤ n ≤ n-max.
    Testfn {
        #[arg(long, default_value_t = 20)]
        n_max: u64,
        #[command(flatten)]
        bump: BumpArgs,
    },
    /// ζ(s) with its Euler–Maclaurin error bound.
    Zeta {
        #[arg(long, allow_hyphen_values = true)]
        re: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        im: f64,
    },
    /// The covariance kernel log ζ(1+iu) and the prime sum up to N.
    Kernel {
        #[arg(long, allow_hyphen_values = true)]
        u: f64,
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
    },
    /// L_q(f) for one character, plus its truncation at M.
    Functional {
        #[arg(long)]
        q: u64,
        /// Character index in the enumeration order, 1 ≤ index < φ(q).
        #[arg(long, default_value_t = 1)]
        index: u64,
        #[arg(long, default_value_t = 20)]
        m: u64,
        /// Complete periods summed; the tail bound is reported.
        #[arg(long, default_value_t = 100)]
        blocks: u64,
        #[command(flatten)]
        bump: BumpArgs,
    },
    /// One of the closed-form oracles.
    Oracle {
        #[arg(long, value_enum)]
        which: OracleKind,
        #[arg(long, default_value_t = 101)]
        q: u64,
        #[arg(long, default_value_t = 10)]
        m: u64,
        #[arg(long, default_value_t = 8)]
        m1: u64,
        #[arg(long, default_value_t = 2)]
        m2: u64,
        #[arg(long, default_value_t = 0)]
        a: u32,
        #[arg(long, default_value_t = 0)]
        b: u32,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        u: f64,
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 3)]
        blocks: u64,
        #[command(flatten)]
        bump: BumpArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleKind {
    KernelZero,
    KernelSquare,
    KernelWeighted,
    Kernel,
    Em1m2,
    Cov,
}

fn complex_rows(rows: &mut Vec<ResultRow>, base: ResultRow, stat: &str, z: Complex64) {
    let mut re = base.clone();
    re.statistic = format!("{stat}_re");
    re.value = z.re;
    let mut im = base;
    im.statistic = format!("{stat}_im");
    im.value = z.im;
    rows.push(re);
    rows.push(im);
}

fn parse_tuple(text: &str) -> anyhow::Result<MomentTuple> {
    let parts: Vec<&str> = text.split(':').collect();
    let [n, k, m] = parts.as_slice() else {
        bail!("moment tuple `{text}` is not of the form n:k:m");
    };
    Ok(MomentTuple::new(n.trim().parse()?, k.trim().parse()?, m.trim().parse()?))
}

fn write_output(bytes: &[u8], out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn render_rows(rows: &[ResultRow], format: Format) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(rows, &mut buf)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &serde_json::json!({ "records": rows }))?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

fn tool_rows(cli: &Cli) -> anyhow::Result<Vec<ResultRow>> {
    let seed = cli.seed.unwrap_or(0);
    let mut rows = Vec::new();
    match &cli.command {
        Command::Run { .. } => unreachable!("handled by the caller"),
        Command::Chars { q } => {
            let group = CharacterGroup::new(*q);
            for chi in group.characters() {
                for n in 1..=*q {
                    let base = ResultRow::new("chars", &format!("chi{}", chi.index()), 0.0, seed).q(*q).n(n);
                    complex_rows(&mut rows, base, &format!("chi{}", chi.index()), chi.evaluate(n));
                }
            }
        }
        Command::Moments { q, tuples } => {
            let tuples = tuples.iter().map(|t| parse_tuple(t)).collect::<anyhow::Result<Vec<_>>>()?;
            let row = |stat: &str, v: f64| ResultRow::new("moments", stat, v, seed).q(*q);
            rows.push(row("chi_oracle", chi_moment_oracle(*q, &tuples) as f64));
            rows.push(row("omega_oracle", omega_moment_oracle(&tuples) as f64));
            if *q <= MOMENT_ENUMERATION_LIMIT {
                let z = chi_moment_enumerated(&CharacterGroup::new(*q), &tuples);
                complex_rows(&mut rows, row("", 0.0), "chi_enumerated", z);
            }
        }
        Command::Testfn { n_max, bump } => {
            let f = bump.build()?;
            let cache = build_cache(&f, *n_max, 1e-12)?;
            for n in 1..=*n_max {
                let base = ResultRow::new("testfn", "", 0.0, seed).n(n).t(log_frequency(n));
                complex_rows(&mut rows, base, "fourier", cache.get(n));
            }
        }
        Command::Zeta { re, im } => {
            let s = Complex64::new(*re, *im);
            let z = zeta_detailed(s, &ZetaEvalConfig::default())?;
            let base = ResultRow::new("zeta", "", 0.0, seed).sigma(*re).t(*im);
            complex_rows(&mut rows, base.clone(), "zeta", z.value);
            let mut err = base;
            err.statistic = "remainder_bound".into();
            err.value = z.remainder_bound;
            rows.push(err);
        }
        Command::Kernel { u, n } => {
            let base = ResultRow::new("kernel", "", 0.0, seed).t(*u).n(*n);
            complex_rows(&mut rows, base.clone(), "log_zeta", covariance_kernel(*u, &ZetaEvalConfig::default())?);
            complex_rows(&mut rows, base.clone(), "prime_sum", gaussian_covariance_closed(*u, *n)?);
            complex_rows(&mut rows, base, "prime_power_correction", prime_power_correction(*u, *n, 30));
        }
        Command::Functional { q, index, m, blocks, bump } => {
            let group = CharacterGroup::new(*q);
            if *index == 0 || *index >= group.order() {
                bail!("character index must lie in 1..{}", group.order());
            }
            let chi = group.character(*index);
            let f = bump.build()?;
            let probe = build_cache(&f, (blocks * q).max(*m), 1e-12)?;
            let v = l_functional(&probe, &chi, CutoffPolicy::Blocks(*blocks))?;
            let base = ResultRow::new("functional", "", 0.0, seed).q(*q).n(v.cutoff);
            complex_rows(&mut rows, base.clone(), "l_functional", v.value);
            let mut budget = base;
            budget.statistic = "error_budget".into();
            budget.value = v.error_budget();
            rows.push(budget);
            let t = l_truncated(&probe, &chi, *m)?;
            complex_rows(&mut rows, ResultRow::new("functional", "", 0.0, seed).q(*q).m1(*m), "l_truncated", t);
        }
        Command::Oracle { which, q, m, m1, m2, a, b, sigma, u, n, blocks, bump } => {
            let name = "oracle";
            match which {
                OracleKind::KernelZero => {
                    let mut spec = KernelSumSpec::new(*q, *a, *b, *sigma);
                    spec.m = *m;
                    let z = kernel_sum_zero(&spec)?;
                    let base = ResultRow::new(name, "", 0.0, seed).q(*q).sigma(*sigma);
                    complex_rows(&mut rows, base, "kernel_zero_value", z.value);
                    rows.push(ResultRow::new(name, "kernel_zero_relative", z.relative(), seed).q(*q).sigma(*sigma));
                }
                OracleKind::KernelSquare => {
                    let v = kernel_square_ratio(*q, *a, *b, *sigma)?;
                    rows.push(ResultRow::new(name, "kernel_square_ratio", v, seed).q(*q).sigma(*sigma));
                }
                OracleKind::KernelWeighted => {
                    let v = kernel_weighted_ratio(*q, *a, *b, *sigma)?;
                    rows.push(ResultRow::new(name, "kernel_weighted_ratio", v, seed).q(*q).sigma(*sigma));
                }
                OracleKind::Kernel => {
                    let f = bump.build()?;
                    let cache = build_cache(&f, (blocks * q).max(*m), 1e-12)?;
                    let k = variance_kernel_sum(*q, *m, &cache, *blocks)?;
                    let row = |stat: &str, v: f64| ResultRow::new(name, stat, v, seed).q(*q).m1(*m).n(blocks * q);
                    rows.push(row("variance_kernel", k.total.re).ci(k.remainder_bound));
                    if *q <= 2_000 {
                        let e = variance_enumerated(&CharacterGroup::new(*q), *m, &cache, *blocks)?;
                        rows.push(row("variance_enumerated", e));
                    }
                }
                OracleKind::Em1m2 => {
                    let f = bump.build()?;
                    let cache = build_cache(&f, *m1, 1e-12)?;
                    let c = e_m1m2_closed(&cache, *m1, *m2, &PanelRule::with_tolerance(1e-10))?;
                    rows.push(ResultRow::new(name, "e_m1m2", c.value, seed).m1(*m1).m2(*m2).ci(c.error));
                }
                OracleKind::Cov => {
                    let base = ResultRow::new(name, "", 0.0, seed).t(*u).n(*n);
                    complex_rows(&mut rows, base, "covariance", gaussian_covariance_closed(*u, *n)?);
                }
            }
        }
    }
    Ok(rows)
}

fn main_inner(cli: &Cli) -> anyhow::Result<bool> {
    let format = Format::from(cli.format);
    if let Command::Run { config } = &cli.command {
        let mut cfg = ExperimentConfig::load(config)?;
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        let result = run_with_threads(&cfg, cli.threads)?;
        let out = cli.out.clone().or_else(|| cfg.output.clone());
        write_output(&render(&result, format)?, out.as_deref())?;
        for check in &result.checks {
            eprintln!("{check}");
        }
        return Ok(result.passed());
    }
    let rows = tool_rows(cli)?;
    write_output(&render_rows(&rows, format)?, cli.out.as_deref())?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            // Library errors embed their cause in the message already.
            let mut text = e.to_string();
            for cause in e.chain().skip(1) {
                let c = cause.to_string();
                if !text.ends_with(&c) {
                    text = format!("{text}: {c}");
                }
            }
            eprintln!("error: {text}");
            ExitCode::FAILURE
        }
    }
}
