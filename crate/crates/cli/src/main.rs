//! `bel`: command-line front end for the barcode-entropy toolkit.

// negated comparisons also reject NaN arguments
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use bel_core::io::{self, FlowModel};
use bel_core::{
    barcode_entropy, corollary_c_report, eps_entropy, CrossingEnergyModel, EntropyEstimate,
    EvaluationSchedule,
};

#[derive(Parser, Debug)]
#[command(
    name = "bel",
    version,
    about = "Barcode and orbit growth-rate computations on persistence data and symbolic flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Tsv,
}

#[derive(Subcommand, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Count bars of length > eps born before s in a barcode file.
    Count {
        /// Barcode file (tab-separated `birth death multiplicity` lines).
        #[arg(long)]
        barcode: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        s: f64,
    },
    /// Estimate the growth rate of the bar count of a barcode file.
    Entropy {
        #[arg(long)]
        barcode: PathBuf,
        /// Single bar-length threshold; mutually exclusive with --eps-grid.
        #[arg(long, conflicts_with = "eps_grid")]
        eps: Option<f64>,
        /// Decreasing comma-separated thresholds for the eps -> 0 limit.
        #[arg(long, value_delimiter = ',')]
        eps_grid: Option<Vec<f64>>,
        #[arg(long)]
        tau_max: f64,
        #[arg(long, default_value_t = 1.0)]
        tau_step: f64,
        #[arg(long, default_value_t = 0.5)]
        tail_fraction: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Reduce a filtration file to its barcode.
    Reduce {
        /// Filtration file (id dim birth boundary... per line).
        #[arg(long)]
        filtration: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,
    },
    /// Tabulate the periodic-orbit count p(s) of a flow model.
    Orbits {
        /// Flow model JSON file.
        flow: PathBuf,
        #[arg(long)]
        smax: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
    /// Shadow seeded pseudo-orbits of a torus flow model.
    Shadow {
        /// Flow model JSON file (kind = torus).
        flow: PathBuf,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        seeds: u64,
    },
    /// Certify the invariants of a radial profile file.
    ProfileCheck {
        /// Profile JSON file.
        profile: PathBuf,
    },
    /// Compare barcode growth of synthesized band barcodes with orbit growth.
    CorollaryC {
        #[arg(long)]
        flow: PathBuf,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        sigma: f64,
        /// Decreasing comma-separated band gaps.
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05")]
        eta_schedule: Vec<f64>,
        #[arg(long)]
        smax: f64,
        /// Decreasing comma-separated thresholds; default scales with sigma.
        #[arg(long, value_delimiter = ',')]
        eps_grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1)]
        bars_per_orbit: u32,
        /// Optional TSV trace output path (eta, per-band estimate, ratio).
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    if let Ok(threads) = std::env::var("BEL_THREADS") {
        let n: usize = threads
            .parse()
            .map_err(|_| anyhow!("BEL_THREADS must be a positive integer, got {threads:?}"))?;
        if n == 0 {
            bail!("BEL_THREADS must be a positive integer");
        }
        // ignore failure: the pool may already be running
        let _ = bel_core::set_worker_threads(n);
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Count { barcode, eps, s } => {
            let code = io::parse_barcode(&read(&barcode)?)?;
            println!("{}", code.count_bars(eps, s)?);
        }
        Command::Entropy {
            barcode,
            eps,
            eps_grid,
            tau_max,
            tau_step,
            tail_fraction,
            format,
        } => {
            let code = io::parse_barcode(&read(&barcode)?)?;
            let grid = match (&eps, &eps_grid) {
                (Some(_), _) => vec![],
                (None, Some(g)) => g.clone(),
                (None, None) => bail!("provide --eps or --eps-grid"),
            };
            let sched = EvaluationSchedule::uniform(tau_max, tau_step, grid)?
                .with_tail_fraction(tail_fraction)?;
            let est = match eps {
                Some(e) => eps_entropy(&code, e, &sched)?,
                None => barcode_entropy(&code, &sched)?,
            };
            print_estimate(&est, format)?;
        }
        Command::Reduce { filtration, format } => {
            let complex = io::parse_filtration(&read(&filtration)?)?;
            let code = complex.reduce();
            match format {
                Format::Tsv => print!("{}", io::emit_barcode(&code)),
                Format::Json => {
                    let bars: Vec<serde_json::Value> = code
                        .bars()
                        .iter()
                        .map(|b| {
                            serde_json::json!({
                                "birth": b.birth(),
                                "death": if b.is_infinite() {
                                    serde_json::Value::String("inf".into())
                                } else {
                                    serde_json::json!(b.death())
                                },
                                "multiplicity": b.multiplicity(),
                            })
                        })
                        .collect();
                    println!(
                        "{}",
                        io::canonical_json(&serde_json::json!({ "bars": bars }))?
                    );
                }
            }
        }
        Command::Orbits { flow, smax, step } => {
            if !(step > 0.0) || !(smax >= step) {
                bail!("need 0 < step <= smax");
            }
            let model = io::parse_flow_spec(&read(&flow)?)?;
            let sft = match model {
                FlowModel::Sft(f) => f,
                FlowModel::Torus(_) => bail!("orbit tabulation needs an sft flow model"),
            };
            let n = (smax / step).floor() as usize;
            for k in 1..=n {
                let s = k as f64 * step;
                println!("{}\t{}", io::fmt_f64(s), sft.count_orbits(s)?);
            }
        }
        Command::Shadow { flow, eta, seeds } => {
            let model = io::parse_flow_spec(&read(&flow)?)?;
            let torus = match model {
                FlowModel::Torus(f) => f,
                FlowModel::Sft(_) => bail!("shadowing needs a torus flow model"),
            };
            println!("# seed\tperiod\tdefect\tdistance\tresidual\tdistance/eta");
            let mut max_ratio = 0.0f64;
            for seed in 0..seeds {
                let (pseudo, _) = torus.seeded_pseudo_orbit(seed, eta)?;
                let defect = torus.pseudo_orbit_defect(&pseudo)?;
                let shadowed = torus.shadow(&pseudo, eta)?;
                let ratio = shadowed.section_distance / eta;
                max_ratio = max_ratio.max(ratio);
                println!(
                    "{seed}\t{}\t{}\t{}\t{}\t{}",
                    shadowed.orbit.period(),
                    io::fmt_f64(defect),
                    io::fmt_f64(shadowed.section_distance),
                    io::fmt_f64(shadowed.residual_defect),
                    io::fmt_f64(ratio),
                );
            }
            println!("# empirical_distance_constant\t{}", io::fmt_f64(max_ratio));
        }
        Command::ProfileCheck { profile } => {
            let p = match io::parse_profile_spec(&read(&profile)?) {
                Ok(p) => p,
                Err(e) => {
                    println!("certification: FAIL");
                    bail!("{e}");
                }
            };
            for check in p.certification_report() {
                println!(
                    "{}\t{}\t{}",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.name,
                    io::fmt_f64(check.worst),
                );
            }
            println!(
                "slope\t{}\trmax\t{}\tc\t{}",
                io::fmt_f64(p.slope()),
                io::fmt_f64(p.rmax()),
                io::fmt_f64(p.linear_offset()),
            );
            println!("certification: PASS");
        }
        Command::CorollaryC {
            flow,
            profile,
            sigma,
            eta_schedule,
            smax,
            eps_grid,
            bars_per_orbit,
            trace_out,
            format,
        } => {
            let model = io::parse_flow_spec(&read(&flow)?)?;
            let sft = match model {
                FlowModel::Sft(f) => f,
                FlowModel::Torus(_) => bail!("the comparison pipeline needs an sft flow model"),
            };
            let p = io::parse_profile_spec(&read(&profile)?)?;
            let grid = eps_grid.unwrap_or_else(|| vec![0.9 * sigma, 0.6 * sigma, 0.4 * sigma]);
            let sched = EvaluationSchedule::uniform(smax, 1.0, grid)?;
            // band radii are derived from the eta schedule; the constructor
            // band is a placeholder inside the profile domain
            let r_mid = 1.0 + 0.5 * (p.rmax() - 1.0);
            let r_hi = 1.0 + 0.75 * (p.rmax() - 1.0);
            let base = CrossingEnergyModel::new(sigma, (r_mid, r_hi))?
                .with_bars_per_orbit(bars_per_orbit)?;
            let report = corollary_c_report(&sft, &p, &base, &sched, &eta_schedule)?;
            if let Some(path) = trace_out {
                let mut tsv = String::from("# eta\thbar_band\tratio_band\n");
                let htop = report.htop_estimate.value;
                for (eta, hbar) in &report.hbar_estimate.trace {
                    let ratio = if htop > 0.0 { hbar / htop } else { f64::NAN };
                    tsv.push_str(&format!(
                        "{}\t{}\t{}\n",
                        io::fmt_f64(*eta),
                        io::fmt_f64(*hbar),
                        if htop > 0.0 {
                            io::fmt_f64(ratio)
                        } else {
                            "undefined".to_string()
                        }
                    ));
                }
                fs::write(&path, tsv).with_context(|| format!("writing {}", path.display()))?;
            }
            match format {
                Format::Json => println!("{}", io::emit_report(&report)?),
                Format::Tsv => {
                    println!(
                        "hbar\t{}\nhtop\t{}\nratio\t{}",
                        io::fmt_f64(report.hbar_estimate.value),
                        io::fmt_f64(report.htop_estimate.value),
                        match report.ratio {
                            bel_core::RatioReport::Value(r) => io::fmt_f64(r),
                            bel_core::RatioReport::UndefinedZeroHtop =>
                                "undefined (htop=0)".to_string(),
                        }
                    );
                }
            }
        }
    }
    Ok(())
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn print_estimate(est: &EntropyEstimate, format: Format) -> Result<()> {
    match format {
        Format::Json => println!("{}", io::emit_estimate(est)?),
        Format::Tsv => {
            println!("# value\t{}", io::fmt_f64(est.value));
            println!("# tail_sup\t{}", io::fmt_f64(est.tail_sup));
            println!("# slope\t{}", io::fmt_f64(est.slope));
            println!("# stable\t{}", est.stable);
            for (x, y) in &est.trace {
                println!("{}\t{}", io::fmt_f64(*x), io::fmt_f64(*y));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_canonical_json() {
        let commands = [
            Command::Count {
                barcode: PathBuf::from("b.tsv"),
                eps: 0.25,
                s: 3.0,
            },
            Command::Entropy {
                barcode: PathBuf::from("b.tsv"),
                eps: None,
                eps_grid: Some(vec![0.5, 0.25]),
                tau_max: 20.0,
                tau_step: 1.0,
                tail_fraction: 0.5,
                format: Format::Json,
            },
            Command::CorollaryC {
                flow: PathBuf::from("f.json"),
                profile: PathBuf::from("p.json"),
                sigma: 0.5,
                eta_schedule: vec![0.2, 0.1, 0.05],
                smax: 25.0,
                eps_grid: None,
                bars_per_orbit: 1,
                trace_out: None,
                format: Format::Json,
            },
        ];
        for cmd in commands {
            let v = serde_json::to_value(&cmd).unwrap();
            let text = io::canonical_json(&v).unwrap();
            let back: Command =
                serde_json::from_value(serde_json::from_str(&text).unwrap()).unwrap();
            assert_eq!(cmd, back);
        }
    }
}
