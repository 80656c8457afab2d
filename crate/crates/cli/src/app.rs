use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands;
use crate::config::{CommonArgs, RunConfig, WORKERS_ENV};
use crate::error::CliError;
use crate::report::render;
use crate::svg::{self, Figure};
use crate::verify::run_verify;

#[derive(Parser, Debug)]
#[command(name = "tpoly", version, about = "Hodge and Newton polygons of exponential sums over a lattice triangle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Improved Hodge polygon from weight-minimal prefixes.
    Ihp(CommonArgs),
    /// Closed-form vertices (x_k, h(T_k)) against the assignment oracle.
    GnpVertices {
        #[command(flatten)]
        common: CommonArgs,
        /// Slope bands for P = p^(m-1).
        #[arg(long = "band-m", default_value_t = 1)]
        band_m: u32,
    },
    /// Greedy and oracle h of T_k or of an explicit multiset.
    HodgeH {
        #[command(flatten)]
        common: CommonArgs,
        /// Level k of T_k
        #[arg(long, default_value_t = 1)]
        k: i64,
        /// Multiset as `x,y;x,y;...`, instead of T_k.
        #[arg(long)]
        points: Option<String>,
    },
    /// T-adic valuations of the characteristic series for random f.
    DworkNp(CommonArgs),
    /// det on the T_1 block against the combo formula, for random f.
    LeadingCoeff(CommonArgs),
    /// Enumerate special bijections and sum their monomials.
    Special {
        #[command(flatten)]
        common: CommonArgs,
        /// Include every relatedness class with its size and sign balance
        #[arg(long)]
        emit_classes: bool,
    },
    /// Build β̃ and characterise its relatedness class.
    Beta {
        #[command(flatten)]
        common: CommonArgs,
        /// Enumerate the exhaustive class of β̃.
        #[arg(long)]
        class: bool,
        /// Also draw β̃ as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Draw a point-set figure as SVG.
    Figure {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        which: Figure,
    },
    /// Run the verification battery; exit 1 if any check fails.
    Verify(CommonArgs),
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    RunConfig::from_args(common, std::env::var(WORKERS_ENV).ok().as_deref())
}

/// Execute `cli`; returns the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    let (name, text, code) = match &cli.command {
        Command::Ihp(c) => {
            let cfg = config(c)?;
            let r = cfg.in_pool(|| commands::cmd_ihp(&cfg))??;
            (cfg.clone(), render("ihp", &cfg, r)?, 0)
        }
        Command::GnpVertices { common, band_m } => {
            let cfg = config(common)?;
            let r = cfg.in_pool(|| commands::cmd_gnp_vertices(&cfg, *band_m))??;
            (cfg.clone(), render("gnp-vertices", &cfg, r)?, 0)
        }
        Command::HodgeH { common, k, points } => {
            let cfg = config(common)?;
            let r = cfg.in_pool(|| commands::cmd_hodge_h(&cfg, *k, points.as_deref()))??;
            (cfg.clone(), render("hodge-h", &cfg, r)?, 0)
        }
        Command::DworkNp(c) => {
            let cfg = config(c)?;
            let r = cfg.in_pool(|| commands::cmd_dwork_np(&cfg))??;
            (cfg.clone(), render("dwork-np", &cfg, r)?, 0)
        }
        Command::LeadingCoeff(c) => {
            let cfg = config(c)?;
            let r = cfg.in_pool(|| commands::cmd_leading_coeff(&cfg))??;
            (cfg.clone(), render("leading-coeff", &cfg, r)?, 0)
        }
        Command::Special { common, emit_classes } => {
            let cfg = config(common)?;
            let r = cfg.in_pool(|| commands::cmd_special(&cfg, *emit_classes))??;
            (cfg.clone(), render("special", &cfg, r)?, 0)
        }
        Command::Beta { common, class, svg } => {
            let cfg = config(common)?;
            let r = cfg.in_pool(|| commands::cmd_beta(&cfg, *class, svg.as_ref()))??;
            (cfg.clone(), render("beta", &cfg, r)?, 0)
        }
        Command::Figure { common, which } => {
            let cfg = config(common)?;
            let text = svg::render(*which, cfg.require_side()?, cfg.p)?;
            (cfg, text, 0)
        }
        Command::Verify(c) => {
            let cfg = config(c)?;
            let r = run_verify(&cfg)?;
            let code = if r.has_failures() { 1 } else { 0 };
            (cfg.clone(), render("verify", &cfg, r)?, code)
        }
    };
    emit(&name, &text)?;
    Ok(code)
}
