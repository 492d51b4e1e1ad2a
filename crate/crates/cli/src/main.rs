//! Command-line front end: exact mass/marginal/moment queries, seeded
//! sampling, Monte-Carlo cokernel runs, the quotient-process simulation, and
//! the exact identity suite. All numeric parameters are validated before any
//! computation starts; every command is a thin wrapper over the library.
//!
//! Exit status: 0 on success, 1 on validation failure, 2 on usage errors.

use std::io::Write;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use coker::exact::{parse_rational, to_decimal_string, Rational};
use coker::groups::{self, RankBound};
use coker::matrix::{self, parse_ensemble_spec};
use coker::measures::{MeasureSpec, MeasureValue};
use coker::partition::Partition;
use coker::sampler::{EmpiricalDistribution, PartitionSampler, RandomStream};
use coker::validate;

#[derive(Parser)]
#[command(name = "coker", version, about = "Exact partition measures, samplers, and random-matrix cokernel experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutputOpts {
    /// Output format
    #[arg(long, default_value = "text", value_parser = ["text", "json", "csv"])]
    format: String,
    /// Write output to a file instead of standard output
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Render rationals as 12-significant-digit decimals
    #[arg(long)]
    decimal: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Exact mass of one partition under a measure
    Pmf {
        /// Measure, e.g. "general:p=2,u=1,d=3", "alt:p=3,n=4", "syminf:p=2"
        #[arg(long)]
        measure: String,
        /// Partition, e.g. "[3,1,1]" ("[]" for the empty partition)
        #[arg(long)]
        partition: String,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Closed-form marginals: number of parts, size, or the joint cell
    Marginal {
        #[arg(long)]
        measure: String,
        /// Number of parts r
        #[arg(long)]
        parts: Option<u32>,
        /// Size n
        #[arg(long)]
        size: Option<u32>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Draw seeded partitions from a measure
    Sample {
        #[arg(long)]
        measure: String,
        /// Number of draws
        #[arg(long)]
        trials: u64,
        /// Random seed (required: every randomized run must be replayable)
        #[arg(long)]
        seed: u64,
        /// Emit an aggregated empirical distribution instead of one
        /// partition per line
        #[arg(long)]
        aggregate: bool,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Surjection moment of a measure onto a fixed partition
    Moment {
        #[arg(long)]
        measure: String,
        /// Target partition mu
        #[arg(long)]
        mu: String,
        /// closed: exact formula; truncated: partial sum plus tail bound
        #[arg(long, default_value = "closed", value_parser = ["closed", "truncated"])]
        mode: String,
        /// Truncation size for the truncated mode
        #[arg(long, default_value_t = 20)]
        max_size: u32,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Expected p^ell-torsion count
    Torsion {
        #[arg(long)]
        measure: String,
        #[arg(long)]
        ell: u32,
        /// Expected count of elements of order exactly p^ell instead
        #[arg(long)]
        exact_order: bool,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Monte-Carlo cokernel run over a random matrix ensemble
    Montecarlo {
        /// Ensemble, e.g. "square:p=2,d=2", "rect:p=2,rows=2,cols=3",
        /// "alt:p=2,n=4", "sym:p=3,n=3"
        #[arg(long)]
        ensemble: String,
        /// Working precision: entries are uniform mod p^k
        #[arg(long, default_value_t = 8)]
        precision_k: u32,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Measure to compare against (TV distance on a truncated support)
        #[arg(long)]
        compare_to: Option<String>,
        /// Support truncation cap by partition size
        #[arg(long, default_value_t = 30)]
        max_size: u32,
        /// Off-support mass target for the comparison support
        #[arg(long, default_value = "1/1000")]
        epsilon: String,
        /// Worker count; results depend only on (seed, jobs)
        #[arg(long, default_value_t = 1)]
        jobs: u32,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// The three-step random-quotient simulation
    QuotientSim {
        /// Number of random elements to quotient by
        #[arg(long)]
        w: u32,
        /// Prime p
        #[arg(long)]
        p: u64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Measure to compare against (defaults to general:p=p,u=1/p^w,d=inf)
        #[arg(long)]
        compare_to: Option<String>,
        #[arg(long, default_value_t = 30)]
        max_size: u32,
        #[arg(long, default_value = "1/1000")]
        epsilon: String,
        #[arg(long, default_value_t = 1)]
        jobs: u32,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Run the exact identity suite
    Validate {
        #[command(flatten)]
        output: OutputOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn emit(output: &OutputOpts, text: String) -> anyhow::Result<()> {
    match &output.out {
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            f.write_all(text.as_bytes())?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn render_rational(x: &Rational, output: &OutputOpts) -> String {
    if output.decimal {
        to_decimal_string(x, 12)
    } else {
        x.to_string()
    }
}

fn render_value(v: &MeasureValue, output: &OutputOpts) -> String {
    match v {
        MeasureValue::Exact(x) => render_rational(x, output),
        MeasureValue::Enclosure(e) => {
            if output.decimal {
                format!(
                    "[{}, {}]",
                    to_decimal_string(e.lower(), 12),
                    to_decimal_string(e.upper(), 12)
                )
            } else {
                format!("{e}")
            }
        }
    }
}

fn value_json(v: &MeasureValue) -> serde_json::Value {
    match v {
        MeasureValue::Exact(x) => serde_json::json!({
            "exact": x.to_string(),
            "decimal": to_decimal_string(x, 12),
        }),
        MeasureValue::Enclosure(e) => serde_json::json!({
            "lower": e.lower().to_string(),
            "upper": e.upper().to_string(),
            "decimal": to_decimal_string(&e.midpoint(), 12),
        }),
    }
}

fn parse_measure(s: &str) -> anyhow::Result<MeasureSpec> {
    MeasureSpec::from_str(s).map_err(|e| anyhow!("{e}"))
}

fn parse_partition(s: &str) -> anyhow::Result<Partition> {
    Partition::from_str(s).map_err(|e| anyhow!("{e}"))
}

fn measure_rank_params(spec: &MeasureSpec) -> anyhow::Result<(RankBound, Rational, Rational)> {
    match spec {
        MeasureSpec::GeneralDU { p, u, d } => Ok((RankBound::Finite(*d), u.clone(), p.clone())),
        MeasureSpec::GeneralInfU { p, u } => Ok((RankBound::Infinite, u.clone(), p.clone())),
        other => bail!("moments are defined for the general family, got {other}"),
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Pmf { measure, partition, output } => {
            let spec = parse_measure(&measure)?;
            let lam = parse_partition(&partition)?;
            let value = spec.pmf(&lam);
            let text = match output.format.as_str() {
                "json" => format!(
                    "{}\n",
                    serde_json::json!({
                        "measure": spec.to_string(),
                        "partition": lam.to_string(),
                        "pmf": value_json(&value),
                    })
                ),
                _ => format!("{}\n", render_value(&value, &output)),
            };
            emit(&output, text)
        }
        Command::Marginal { measure, parts, size, output } => {
            let spec = parse_measure(&measure)?;
            let (label, value) = match (size, parts) {
                (Some(n), Some(r)) => {
                    let v = spec.prob_size_and_parts(n, r).map_err(|e| anyhow!("{e}"))?;
                    (format!("size={n},parts={r}"), MeasureValue::Exact(v))
                }
                (Some(n), None) => {
                    (format!("size={n}"), spec.prob_size(n).map_err(|e| anyhow!("{e}"))?)
                }
                (None, Some(r)) => {
                    (format!("parts={r}"), spec.prob_num_parts(r).map_err(|e| anyhow!("{e}"))?)
                }
                (None, None) => bail!("pass --size, --parts, or both"),
            };
            let text = match output.format.as_str() {
                "json" => format!(
                    "{}\n",
                    serde_json::json!({
                        "measure": spec.to_string(),
                        "marginal": label,
                        "value": value_json(&value),
                    })
                ),
                _ => format!("{}\n", render_value(&value, &output)),
            };
            emit(&output, text)
        }
        Command::Sample { measure, trials, seed, aggregate, output } => {
            let spec = parse_measure(&measure)?;
            let mut sampler = PartitionSampler::new(spec).map_err(|e| anyhow!("{e}"))?;
            let mut stream = RandomStream::new(seed);
            if aggregate {
                let dist = EmpiricalDistribution::from_samples(
                    (0..trials).map(|_| sampler.sample(&mut stream)),
                );
                let text = match output.format.as_str() {
                    "json" => format!("{}\n", dist.to_json()),
                    _ => dist.to_csv_string(),
                };
                emit(&output, text)
            } else {
                let mut text = String::new();
                for _ in 0..trials {
                    text.push_str(&sampler.sample(&mut stream).to_string());
                    text.push('\n');
                }
                emit(&output, text)
            }
        }
        Command::Moment { measure, mu, mode, max_size, output } => {
            let spec = parse_measure(&measure)?;
            let mu = parse_partition(&mu)?;
            let (d, u, p) = measure_rank_params(&spec)?;
            let closed = groups::moment_closed_form(&mu, d, &u, &p);
            let text = if mode == "closed" {
                match output.format.as_str() {
                    "json" => format!(
                        "{}\n",
                        serde_json::json!({
                            "measure": spec.to_string(),
                            "mu": mu.to_string(),
                            "moment": value_json(&MeasureValue::Exact(closed)),
                        })
                    ),
                    _ => format!("{}\n", render_rational(&closed, &output)),
                }
            } else {
                let trunc = groups::moment_truncated(&mu, d, &u, &p, max_size)
                    .map_err(|e| anyhow!("{e}"))?;
                match output.format.as_str() {
                    "json" => format!(
                        "{}\n",
                        serde_json::json!({
                            "measure": spec.to_string(),
                            "mu": mu.to_string(),
                            "partial_lower": trunc.partial.lower().to_string(),
                            "partial_upper": trunc.partial.upper().to_string(),
                            "tail_bound": trunc.tail_bound.to_string(),
                            "closed_form": closed.to_string(),
                            "encloses_closed_form": trunc.encloses(&closed),
                        })
                    ),
                    _ => format!(
                        "partial in [{}, {}], tail bound {}, closed form {}\n",
                        render_rational(trunc.partial.lower(), &output),
                        render_rational(trunc.partial.upper(), &output),
                        render_rational(&trunc.tail_bound, &output),
                        render_rational(&closed, &output),
                    ),
                }
            };
            emit(&output, text)
        }
        Command::Torsion { measure, ell, exact_order, output } => {
            if ell < 1 {
                bail!("--ell must be >= 1");
            }
            let spec = parse_measure(&measure)?;
            let (d, u, p) = measure_rank_params(&spec)?;
            let value = if exact_order {
                groups::torsion_expectation_exact_order(ell, d, &u, &p)
            } else {
                groups::torsion_expectation(ell, d, &u, &p)
            };
            let text = match output.format.as_str() {
                "json" => format!(
                    "{}\n",
                    serde_json::json!({
                        "measure": spec.to_string(),
                        "ell": ell,
                        "exact_order": exact_order,
                        "expectation": value_json(&MeasureValue::Exact(value)),
                    })
                ),
                _ => format!("{}\n", render_rational(&value, &output)),
            };
            emit(&output, text)
        }
        Command::Montecarlo {
            ensemble,
            precision_k,
            trials,
            seed,
            compare_to,
            max_size,
            epsilon,
            jobs,
            output,
        } => {
            if trials == 0 {
                bail!("--trials must be >= 1");
            }
            let (ens, p) = parse_ensemble_spec(&ensemble).map_err(|e| anyhow!("{e}"))?;
            let compare = compare_to.as_deref().map(parse_measure).transpose()?;
            let epsilon = parse_rational(&epsilon).map_err(|e| anyhow!("{e}"))?;
            let dist = matrix::monte_carlo_cokernel_parallel(ens, p, precision_k, trials, seed, jobs)
                .map_err(|e| anyhow!("{e}"))?;
            emit_comparison_report(&ensemble, seed, &dist, compare, max_size, &epsilon, &output)
        }
        Command::QuotientSim {
            w,
            p,
            trials,
            seed,
            compare_to,
            max_size,
            epsilon,
            jobs,
            output,
        } => {
            if trials == 0 {
                bail!("--trials must be >= 1");
            }
            let compare = match compare_to.as_deref() {
                Some(s) => Some(parse_measure(s)?),
                None => {
                    let p_rat = coker::exact::int(p as i64);
                    let u = coker::exact::pow(&p_rat, w as u64).recip();
                    Some(
                        MeasureSpec::general(p_rat, u, RankBound::Infinite)
                            .map_err(|e| anyhow!("{e}"))?,
                    )
                }
            };
            let epsilon = parse_rational(&epsilon).map_err(|e| anyhow!("{e}"))?;
            let dist = matrix::quotient_process_monte_carlo(w, p, trials, seed, jobs)
                .map_err(|e| anyhow!("{e}"))?;
            let label = format!("quotient:w={w},p={p}");
            emit_comparison_report(&label, seed, &dist, compare, max_size, &epsilon, &output)
        }
        Command::Validate { output } => {
            let results = validate::run_default_suite().map_err(|e| anyhow!("{e}"))?;
            let failures = results.iter().filter(|r| !r.passed).count();
            let text = match output.format.as_str() {
                "json" => {
                    let rows: Vec<_> = results.iter().map(|r| r.to_json()).collect();
                    format!(
                        "{}\n",
                        serde_json::json!({ "checks": rows, "failures": failures })
                    )
                }
                _ => {
                    let mut t = String::new();
                    for r in &results {
                        if r.passed {
                            t.push_str(&format!("PASS {} [{}]\n", r.name, r.params));
                        } else {
                            t.push_str(&format!(
                                "FAIL {} [{}]: {}\n",
                                r.name,
                                r.params,
                                r.detail.as_deref().unwrap_or("")
                            ));
                        }
                    }
                    t.push_str(&format!(
                        "{} checks, {} failures\n",
                        results.len(),
                        failures
                    ));
                    t
                }
            };
            emit(&output, text)?;
            if failures > 0 {
                bail!("{failures} identity checks failed");
            }
            Ok(())
        }
    }
}

fn emit_comparison_report(
    source: &str,
    seed: u64,
    dist: &EmpiricalDistribution,
    compare: Option<MeasureSpec>,
    max_size: u32,
    epsilon: &Rational,
    output: &OutputOpts,
) -> anyhow::Result<()> {
    use coker::exact::int;
    let comparison = compare.map(|spec| {
        let target = int(1) - epsilon;
        let (support, support_mass) = spec.support_with_mass(&target, max_size);
        let tv = matrix::tv_distance(dist, &spec, &support);
        (spec, support, support_mass, tv)
    });
    match output.format.as_str() {
        "csv" => emit(output, dist.to_csv_string()),
        "json" => {
            let mut report = serde_json::json!({
                "source": source,
                "seed": seed,
                "empirical": dist.to_json(),
            });
            if let Some((spec, support, support_mass, tv)) = &comparison {
                let rows: Vec<_> = support
                    .iter()
                    .map(|lam| {
                        serde_json::json!({
                            "partition": lam.to_string(),
                            "count": dist.count(lam),
                            "empirical": to_decimal_string(&dist.frequency(lam), 12),
                            "exact": value_json(&spec.pmf(lam)),
                        })
                    })
                    .collect();
                report["compare_to"] = serde_json::json!(spec.to_string());
                report["support_mass"] = serde_json::json!(to_decimal_string(support_mass, 12));
                report["rows"] = serde_json::json!(rows);
                report["tv_distance"] = serde_json::json!({
                    "exact": tv.to_string(),
                    "decimal": to_decimal_string(tv, 12),
                });
            }
            emit(output, format!("{report}\n"))
        }
        _ => {
            let mut t = String::new();
            t.push_str(&format!(
                "{source}: {} trials, {} ambiguous (seed {seed})\n",
                dist.total(),
                dist.ambiguous()
            ));
            if let Some((spec, support, support_mass, tv)) = &comparison {
                t.push_str(&format!(
                    "compared to {spec} on {} partitions (exact mass >= {})\n",
                    support.len(),
                    to_decimal_string(support_mass, 6),
                ));
                t.push_str(&format!("tv distance {}\n", to_decimal_string(tv, 6)));
            } else {
                t.push_str(&dist.to_csv_string());
            }
            emit(output, t)
        }
    }
}
