use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ownet_cli::config::{load_config, Overrides};
use ownet_cli::stages;

/// Inter-urban ownership network analytics: validate inputs, assign firms
/// to cities, extract control chains, and compute scope, flow, sector and
/// correspondence-analysis artifacts.
#[derive(Parser)]
#[command(name = "ownet", version, about)]
struct Cli {
    /// Run configuration file (TOML).
    #[arg(
        long,
        global = true,
        env = "OWNET_CONFIG",
        default_value = "ownet.toml"
    )]
    config: PathBuf,

    /// Restrict to one or more snapshot years (repeatable).
    #[arg(long, global = true)]
    year: Vec<i32>,

    /// Override the focal city FUA id.
    #[arg(long, global = true)]
    focal: Option<String>,

    /// Override the capital city FUA id.
    #[arg(long, global = true)]
    capital: Option<String>,

    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Drop links with share_pct below this value (default keeps all).
    #[arg(long, global = true)]
    share_threshold: Option<f64>,

    /// Override the bundled NACE division->section table (CSV).
    #[arg(long, global = true)]
    division_table: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse all inputs, writing quarantine reports and a summary.
    Validate,
    /// Assign firms to functional urban areas (writes assigned firm files).
    Assign,
    /// Extract L1->L2->L3 chains through the focal city.
    Chains,
    /// Geographic scope distributions of focal-city ownership.
    Scope,
    /// Ordered city-pair flow matrices.
    Flows,
    /// The stacked (city, year) x sector revenue matrix.
    Sectors,
    /// Correspondence analysis with trajectories and the SVG map.
    Ca,
    /// Graph exports in DOT and GraphML.
    Export,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        years: cli.year.clone(),
        focal: cli.focal.clone(),
        capital: cli.capital.clone(),
        out: cli.out.clone(),
        share_threshold: cli.share_threshold,
        division_table: cli.division_table.clone(),
    };
    let cfg = match load_config(&cli.config, &overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("ownet: {e}");
            return ExitCode::from(2);
        }
    };

    let outcome = match cli.command {
        Command::Validate => stages::run_validate(&cfg).map(|s| {
            println!(
                "validate: {} year(s), {} quarantined row(s), {} FUA(s) -> {}",
                s.years.len(),
                s.total_quarantined(),
                s.fuas_accepted,
                cfg.out_dir.join("validate_summary.json").display()
            );
        }),
        Command::Assign => stages::run_assign(&cfg).map(|s| {
            for y in &s.years {
                println!(
                    "assign {}: {}/{} firm(s) in an FUA ({} boundary hit(s))",
                    y.year, y.assigned, y.firms, y.boundary_flags
                );
            }
        }),
        Command::Chains => stages::run_chains(&cfg).map(|s| {
            for y in &s.years {
                println!(
                    "chains {} @ {}: {} chain(s), {} distinct firm(s), {} distinct link(s)",
                    y.year, s.focal, y.stats.chains, y.stats.distinct_firms, y.stats.distinct_links
                );
            }
        }),
        Command::Scope => stages::run_scope(&cfg).map(|s| {
            for y in &s.years {
                let fmt = |d: &Option<stages::SideDistribution>| match d {
                    Some(d) => format!("{} link(s), domestic {:.1}%", d.total, d.domestic_share),
                    None => "no links".to_string(),
                };
                println!(
                    "scope {} @ {}: owned[{}] owning[{}]",
                    y.year,
                    s.focal,
                    fmt(&y.city_owned),
                    fmt(&y.city_owning)
                );
            }
        }),
        Command::Flows => stages::run_flows(&cfg).map(|s| {
            for y in &s.years {
                println!(
                    "flows {}: {} pair(s), {} link(s), total force {} (thousands, {})",
                    y.year, y.pairs, y.links, y.total_force, y.currency
                );
            }
        }),
        Command::Sectors => stages::run_sectors(&cfg).map(|s| {
            println!(
                "sectors: {} row(s) over {} cit(ies), {} year(s){}",
                s.rows,
                s.cities.len(),
                s.years.len(),
                if s.all_zero {
                    " [warning: all-zero matrix]"
                } else {
                    ""
                }
            );
        }),
        Command::Ca => stages::run_ca(&cfg).map(|s| {
            println!(
                "ca: {} dimension(s), total inertia {:.6}, {} trajectory(ies) -> {}",
                s.dims,
                s.total_inertia,
                s.trajectory_cities.len(),
                cfg.out_dir.join("ca_map.svg").display()
            );
        }),
        Command::Export => stages::run_export(&cfg).map(|s| {
            for y in &s.years {
                println!(
                    "export {}: {} node(s), {} edge(s)",
                    y.year, y.nodes, y.edges
                );
            }
        }),
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ownet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
