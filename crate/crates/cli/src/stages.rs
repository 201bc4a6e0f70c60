//! Pipeline stages behind the CLI subcommands. Each stage writes exactly
//! its declared artifacts plus a manifest, and identical inputs reproduce
//! identical digests.
//!
//! Exit-code contract: structural input failures are exit 2, a missing
//! upstream stage is exit 3, a degenerate analysis is exit 4.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use ownet_core::ca::{
    ca_report, coordinates_csv, correspondence_analysis, svg::trajectory_map, svg::SvgOptions,
    trajectories, CaError, ContingencyInput,
};
use ownet_core::geo::{assign_all, SpatialIndex};
use ownet_core::ingest::{
    assemble_snapshot, parse_firms, parse_fua, parse_links, write_firms_csv, FirmColumns,
    FuaRejection, LinkColumns, Snapshot,
};
use ownet_core::metrics::{
    aggregate_city_forces, city_pair_matrix, compute_forces, flows_csv, sector_matrix,
    DivisionTable, SectorMatrix,
};
use ownet_core::netgraph::{
    chain_stats, chains_csv, export, scope_distribution, ChainStats, GeoScope, GraphError,
    LinkSide, OwnershipGraph, ScopeDistribution,
};

use crate::config::{RunConfig, SnapshotFiles};
use crate::manifest::StageOutputs;

#[derive(Debug, Error)]
pub enum StageError {
    #[error("{0}")]
    Structural(String),
    #[error("missing upstream stage '{stage}': {detail}")]
    MissingStage { stage: &'static str, detail: String },
    #[error("DEGENERATE: {0}")]
    Degenerate(String),
}

impl StageError {
    pub fn exit_code(&self) -> i32 {
        match self {
            StageError::Structural(_) => 2,
            StageError::MissingStage { .. } => 3,
            StageError::Degenerate(_) => 4,
        }
    }
}

fn structural<E: std::fmt::Display>(e: E) -> StageError {
    StageError::Structural(e.to_string())
}

fn graph_error(e: GraphError) -> StageError {
    StageError::Structural(e.to_string())
}

fn load_boundaries(cfg: &RunConfig) -> Result<(SpatialIndex, Vec<FuaRejection>), StageError> {
    let (fuas, rejections) = parse_fua(&cfg.boundaries).map_err(structural)?;
    Ok((SpatialIndex::build(fuas), rejections))
}

fn division_table(cfg: &RunConfig) -> Result<DivisionTable, StageError> {
    match &cfg.division_table {
        None => Ok(DivisionTable::bundled().clone()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                StageError::Structural(format!("cannot read {}: {e}", path.display()))
            })?;
            DivisionTable::from_csv_str(&text).map_err(structural)
        }
    }
}

/// Parse one year's raw inputs and apply the share-threshold policy.
fn parse_raw_snapshot(
    cfg: &RunConfig,
    files: &SnapshotFiles,
) -> Result<(Snapshot, u64), StageError> {
    let (firms, firm_quarantine) =
        parse_firms(&files.firms, &FirmColumns::default()).map_err(structural)?;
    let (mut links, link_quarantine) =
        parse_links(&files.links, &LinkColumns::default(), &firms).map_err(structural)?;
    let before = links.len();
    links.retain(|l| l.share_pct >= cfg.share_threshold);
    let filtered = (before - links.len()) as u64;
    Ok((
        assemble_snapshot(files.year, firms, firm_quarantine, links, link_quarantine),
        filtered,
    ))
}

fn assigned_firms_filename(year: i32) -> String {
    format!("assigned_firms_{year}.csv")
}

/// Reload a year with geo-assigned cities from the assign stage's artifact.
fn load_assigned_snapshot(
    cfg: &RunConfig,
    files: &SnapshotFiles,
) -> Result<(Snapshot, u64), StageError> {
    let path = cfg.out_dir.join(assigned_firms_filename(files.year));
    if !path.exists() {
        return Err(StageError::MissingStage {
            stage: "assign",
            detail: format!("expected {}", path.display()),
        });
    }
    let (firms, firm_quarantine) =
        parse_firms(&path, &FirmColumns::with_city()).map_err(structural)?;
    let (mut links, link_quarantine) =
        parse_links(&files.links, &LinkColumns::default(), &firms).map_err(structural)?;
    let before = links.len();
    links.retain(|l| l.share_pct >= cfg.share_threshold);
    let filtered = (before - links.len()) as u64;
    Ok((
        assemble_snapshot(files.year, firms, firm_quarantine, links, link_quarantine),
        filtered,
    ))
}

/// Analysis city set: configured list, or every known FUA when empty.
fn analysis_cities(cfg: &RunConfig, index: &SpatialIndex) -> BTreeSet<String> {
    if cfg.analysis_cities.is_empty() {
        index.universe().ids().map(str::to_string).collect()
    } else {
        cfg.analysis_cities.iter().cloned().collect()
    }
}

#[derive(Debug, Serialize)]
pub struct YearValidation {
    pub year: i32,
    pub currency: String,
    pub firm_rows: u64,
    pub firms_accepted: u64,
    pub firms_quarantined: u64,
    pub link_rows: u64,
    pub links_accepted: u64,
    pub links_quarantined: u64,
    pub links_filtered_by_threshold: u64,
}

#[derive(Debug, Serialize)]
pub struct ValidateSummary {
    pub currency: String,
    pub unit: &'static str,
    pub share_threshold: f64,
    pub domestic_outside_eu: bool,
    pub fuas_accepted: u64,
    pub fuas_rejected: u64,
    pub years: Vec<YearValidation>,
}

impl ValidateSummary {
    pub fn total_quarantined(&self) -> u64 {
        self.years
            .iter()
            .map(|y| y.firms_quarantined + y.links_quarantined)
            .sum()
    }
}

pub fn run_validate(cfg: &RunConfig) -> Result<ValidateSummary, StageError> {
    let (index, rejections) = load_boundaries(cfg)?;
    let mut outputs = StageOutputs::new(&cfg.out_dir)?;

    let mut fua_csv = String::from("feature_index,fua_id,reason\n");
    for r in &rejections {
        fua_csv.push_str(&format!(
            "{},{},{}\n",
            r.feature_index,
            r.fua_id.as_deref().unwrap_or(""),
            r.reason.code()
        ));
    }
    outputs.write_csv("fua_rejections", "fua_rejections.csv", &fua_csv)?;

    let mut years = Vec::new();
    for files in &cfg.snapshots {
        let (snapshot, filtered) = parse_raw_snapshot(cfg, files)?;
        outputs.write_csv(
            &format!("quarantine_firms_{}", files.year),
            &format!("quarantine_firms_{}.csv", files.year),
            &snapshot.quarantine.firms.to_csv(),
        )?;
        outputs.write_csv(
            &format!("quarantine_links_{}", files.year),
            &format!("quarantine_links_{}.csv", files.year),
            &snapshot.quarantine.links.to_csv(),
        )?;
        years.push(YearValidation {
            year: files.year,
            currency: files.currency.clone(),
            firm_rows: snapshot.quarantine.firms.input_rows,
            firms_accepted: snapshot.quarantine.firms.accepted,
            firms_quarantined: snapshot.quarantine.firms.quarantined(),
            link_rows: snapshot.quarantine.links.input_rows,
            links_accepted: snapshot.quarantine.links.accepted,
            links_quarantined: snapshot.quarantine.links.quarantined(),
            links_filtered_by_threshold: filtered,
        });
    }

    let summary = ValidateSummary {
        currency: cfg.currency.clone(),
        unit: "thousands",
        share_threshold: cfg.share_threshold,
        domestic_outside_eu: cfg.scope.domestic_outside_eu(),
        fuas_accepted: index.fuas().len() as u64,
        fuas_rejected: rejections.len() as u64,
        years,
    };
    outputs.write_json("validate_summary", "validate_summary.json", &summary)?;
    outputs.finish("validate")?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct CountryCoverage {
    pub assigned: u64,
    pub unassigned: u64,
}

#[derive(Debug, Serialize)]
pub struct YearAssign {
    pub year: i32,
    pub firms: u64,
    pub assigned: u64,
    pub unassigned: u64,
    pub boundary_flags: u64,
    pub per_country: std::collections::BTreeMap<String, CountryCoverage>,
}

#[derive(Debug, Serialize)]
pub struct AssignSummary {
    pub years: Vec<YearAssign>,
}

pub fn run_assign(cfg: &RunConfig) -> Result<AssignSummary, StageError> {
    let (index, _) = load_boundaries(cfg)?;
    let mut outputs = StageOutputs::new(&cfg.out_dir)?;
    let mut years = Vec::new();
    for files in &cfg.snapshots {
        let (snapshot, _) = parse_raw_snapshot(cfg, files)?;
        let (assigned, report) = assign_all(&snapshot, &index);

        let mut buf = Vec::new();
        write_firms_csv(&mut buf, assigned.firms.values(), true).map_err(structural)?;
        outputs.write_csv(
            &format!("assigned_firms_{}", files.year),
            &assigned_firms_filename(files.year),
            &String::from_utf8(buf).expect("utf8 csv"),
        )?;
        outputs.write_csv(
            &format!("coverage_{}", files.year),
            &format!("coverage_{}.csv", files.year),
            &report.coverage_csv(),
        )?;

        years.push(YearAssign {
            year: files.year,
            firms: assigned.firms.len() as u64,
            assigned: report.assigned_count(),
            unassigned: report.unassigned_count(),
            boundary_flags: report.rows.iter().filter(|r| r.boundary).count() as u64,
            per_country: report
                .per_country
                .iter()
                .map(|(country, (a, u))| {
                    (
                        country.clone(),
                        CountryCoverage {
                            assigned: *a,
                            unassigned: *u,
                        },
                    )
                })
                .collect(),
        });
    }
    let summary = AssignSummary { years };
    outputs.write_json("assign_summary", "assign_summary.json", &summary)?;
    outputs.finish("assign")?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct YearChains {
    pub year: i32,
    #[serde(flatten)]
    pub stats: ChainStats,
    /// Strongly connected components of size > 1 (cross-holdings).
    pub cycle_components: u64,
}

#[derive(Debug, Serialize)]
pub struct ChainsSummary {
    pub focal: String,
    pub years: Vec<YearChains>,
}

pub fn run_chains(cfg: &RunConfig) -> Result<ChainsSummary, StageError> {
    let (index, _) = load_boundaries(cfg)?;
    let universe = index.universe();
    let mut outputs = StageOutputs::new(&cfg.out_dir)?;
    let mut years = Vec::new();
    for files in &cfg.snapshots {
        let (snapshot, _) = load_assigned_snapshot(cfg, files)?;
        let graph = OwnershipGraph::build(&snapshot);
        let chains = graph
            .extract_chains(&cfg.scope.focal_fua_id, &universe, &cfg.scope)
            .map_err(graph_error)?;
        outputs.write_csv(
            &format!("chains_{}", files.year),
            &format!("chains_{}.csv", files.year),
            &chains_csv(&chains),
        )?;

        let cycles = graph.detect_cycles();
        let mut cycles_csv = String::from("component,members,example_cycle\n");
        for (i, c) in cycles.components.iter().enumerate() {
            cycles_csv.push_str(&format!(
                "{i},{},{}\n",
                c.members.join("|"),
                c.example_cycle.join(">")
            ));
        }
        outputs.write_csv(
            &format!("cycles_{}", files.year),
            &format!("cycles_{}.csv", files.year),
            &cycles_csv,
        )?;

        years.push(YearChains {
            year: files.year,
            stats: chain_stats(&chains),
            cycle_components: cycles.count() as u64,
        });
    }
    let summary = ChainsSummary {
        focal: cfg.scope.focal_fua_id.clone(),
        years,
    };
    outputs.write_json("chains_summary", "chains_summary.json", &summary)?;
    outputs.finish("chains")?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct ScopeShare {
    pub scope: &'static str,
    pub count: u64,
    pub pct: f64,
}

#[derive(Debug, Serialize)]
pub struct SideDistribution {
    pub total: u64,
    pub domestic_share: f64,
    pub shares: Vec<ScopeShare>,
}

fn side_distribution(dist: &ScopeDistribution) -> SideDistribution {
    SideDistribution {
        total: dist.total,
        domestic_share: dist.domestic_share(),
        shares: GeoScope::ALL
            .iter()
            .map(|s| ScopeShare {
                scope: s.code(),
                count: dist.count(*s),
                pct: dist.pct(*s),
            })
            .collect(),
    }
}

#[derive(Debug, Serialize)]
pub struct YearScope {
    pub year: i32,
    /// Firms in the focal city owned by others: where the owners sit.
    pub city_owned: Option<SideDistribution>,
    /// Firms in the focal city owning others: where the owned firms sit.
    pub city_owning: Option<SideDistribution>,
}

#[derive(Debug, Serialize)]
pub struct ScopeSummary {
    pub focal: String,
    pub years: Vec<YearScope>,
}

pub fn run_scope(cfg: &RunConfig) -> Result<ScopeSummary, StageError> {
    let (index, _) = load_boundaries(cfg)?;
    let universe = index.universe();
    let mut outputs = StageOutputs::new(&cfg.out_dir)?;
    let mut years = Vec::new();
    for files in &cfg.snapshots {
        let (snapshot, _) = load_assigned_snapshot(cfg, files)?;
        let graph = OwnershipGraph::build(&snapshot);
        let focal = cfg.scope.focal_fua_id.as_str();
        let inbound = graph.inbound_links(focal, &universe).map_err(graph_error)?;
        let outbound = graph
            .outbound_links(focal, &universe)
            .map_err(graph_error)?;

        let owned = match scope_distribution(&inbound, LinkSide::Owner, &cfg.scope, &snapshot.firms)
        {
            Ok(d) => Some(d),
            Err(GraphError::EmptySet) => None,
            Err(e) => return Err(graph_error(e)),
        };
        let owning =
            match scope_distribution(&outbound, LinkSide::Owned, &cfg.scope, &snapshot.firms) {
                Ok(d) => Some(d),
                Err(GraphError::EmptySet) => None,
                Err(e) => return Err(graph_error(e)),
            };

        let mut csv = String::from("side,scope,count,pct\n");
        for (side, dist) in [("city_owned", &owned), ("city_owning", &owning)] {
            if let Some(dist) = dist {
                for scope in GeoScope::ALL {
                    csv.push_str(&format!(
                        "{side},{},{},{}\n",
                        scope.code(),
                        dist.count(scope),
                        dist.pct(scope)
                    ));
                }
            }
        }
        outputs.write_csv(
            &format!("scope_{}", files.year),
            &format!("scope_{}.csv", files.year),
            &csv,
        )?;
        years.push(YearScope {
            year: files.year,
            city_owned: owned.as_ref().map(side_distribution),
            city_owning: owning.as_ref().map(side_distribution),
        });
    }
    let summary = ScopeSummary {
        focal: cfg.scope.focal_fua_id.clone(),
        years,
    };
    outputs.write_json("scope_summary", "scope_summary.json", &summary)?;
    outputs.finish("scope")?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct YearFlows {
    pub year: i32,
    pub currency: String,
    pub pairs: u64,
    pub links: u64,
    pub total_force: f64,
    pub missing_turnover_links: u64,
}

#[derive(Debug, Serialize)]
pub struct FlowsSummary {
    pub currency: String,
    pub unit: &'static str,
    pub cities: Vec<String>,
    pub years: Vec<YearFlows>,
}

pub fn run_flows(cfg: &RunConfig) -> Result<FlowsSummary, StageError> {
    let (index, _) = load_boundaries(cfg)?;
    let cities = analysis_cities(cfg, &index);
    let mut outputs = StageOutputs::new(&cfg.out_dir)?;
    let mut years = Vec::new();
    for files in &cfg.snapshots {
        let (snapshot, _) = load_assigned_snapshot(cfg, files)?;
        let flows = city_pair_matrix(&snapshot, &cities);
        outputs.write_csv(
            &format!("flows_{}", files.year),
            &format!("flows_{}.csv", files.year),
            &flows_csv(&flows),
        )?;
        let mut force = ownet_core::metrics::CompensatedSum::default();
        for f in &flows {
            force.add(f.total_force);
        }
        years.push(YearFlows {
            year: files.year,
            currency: files.currency.clone(),
            pairs: flows.len() as u64,
            links: flows.iter().map(|f| f.n_links).sum(),
            total_force: force.value(),
            missing_turnover_links: flows.iter().map(|f| f.n_missing_turnover).sum(),
        });
    }
    let summary = FlowsSummary {
        currency: cfg.currency.clone(),
        unit: "thousands",
        cities: cities.into_iter().collect(),
        years,
    };
    outputs.write_json("flows_summary", "flows_summary.json", &summary)?;
    outputs.finish("flows")?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct SectorsSummary {
    pub currencies: std::collections::BTreeMap<i32, String>,
    /// The stacked matrix assumes a common unit; differing snapshot
    /// currencies are surfaced here, never converted.
    pub mixed_currencies: bool,
    pub unit: &'static str,
    pub cities: Vec<String>,
    pub years: Vec<i32>,
    pub rows: u64,
    pub all_zero: bool,
    pub excluded: std::collections::BTreeMap<i32, ExcludedJson>,
}

#[derive(Debug, Serialize)]
pub struct ExcludedJson {
    pub missing_turnover: u64,
    pub unknown_division: u64,
}

pub fn run_sectors(cfg: &RunConfig) -> Result<SectorsSummary, StageError> {
    let (index, _) = load_boundaries(cfg)?;
    let cities = analysis_cities(cfg, &index);
    let table = division_table(cfg)?;
    let mut outputs = StageOutputs::new(&cfg.out_dir)?;

    let mut snapshots = Vec::new();
    for files in &cfg.snapshots {
        let (snapshot, _) = load_assigned_snapshot(cfg, files)?;
        snapshots.push(snapshot);
    }
    let refs: Vec<&Snapshot> = snapshots.iter().collect();
    let matrix = sector_matrix(&refs, &cities, &table);

    outputs.write_csv("sector_matrix", "sector_matrix.csv", &matrix.to_csv())?;
    let mut excluded_csv = String::from("year,missing_turnover,unknown_division\n");
    for (year, ex) in &matrix.excluded {
        excluded_csv.push_str(&format!(
            "{year},{},{}\n",
            ex.missing_turnover, ex.unknown_division
        ));
    }
    outputs.write_csv("sectors_excluded", "sectors_excluded.csv", &excluded_csv)?;

    let currencies: std::collections::BTreeMap<i32, String> = cfg
        .snapshots
        .iter()
        .map(|s| (s.year, s.currency.clone()))
        .collect();
    let mixed_currencies = currencies.values().collect::<BTreeSet<_>>().len() > 1;
    let summary = SectorsSummary {
        currencies,
        mixed_currencies,
        unit: "thousands",
        cities: cities.into_iter().collect(),
        years: cfg.snapshots.iter().map(|s| s.year).collect(),
        rows: matrix.rows.len() as u64,
        // CA requires a nonzero matrix; surfaced here as a warning flag.
        all_zero: matrix.is_all_zero(),
        excluded: matrix
            .excluded
            .iter()
            .map(|(year, ex)| {
                (
                    *year,
                    ExcludedJson {
                        missing_turnover: ex.missing_turnover,
                        unknown_division: ex.unknown_division,
                    },
                )
            })
            .collect(),
    };
    outputs.write_json("sectors_summary", "sectors_summary.json", &summary)?;
    outputs.finish("sectors")?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct CaSummary {
    pub dims: usize,
    pub total_inertia: f64,
    pub singular_values: Vec<f64>,
    pub principal_inertias: Vec<f64>,
    pub explained: Vec<f64>,
    pub dropped_rows: Vec<String>,
    pub dropped_cols: Vec<String>,
    pub trajectory_cities: Vec<String>,
    pub skipped_cities: Vec<String>,
}

pub fn run_ca(cfg: &RunConfig) -> Result<CaSummary, StageError> {
    let matrix_path = cfg.out_dir.join("sector_matrix.csv");
    if !matrix_path.exists() {
        return Err(StageError::MissingStage {
            stage: "sectors",
            detail: format!("expected {}", matrix_path.display()),
        });
    }
    let text = std::fs::read_to_string(&matrix_path).map_err(structural)?;
    let matrix = SectorMatrix::from_csv_str(&text).ok_or_else(|| {
        StageError::Structural(format!("corrupt sector matrix {}", matrix_path.display()))
    })?;

    let input = ContingencyInput::from_sector_matrix(&matrix);
    let result = match correspondence_analysis(&input) {
        Ok(r) => r,
        Err(CaError::Degenerate(d)) => return Err(StageError::Degenerate(d)),
        Err(e) => return Err(structural(e)),
    };

    let cities: BTreeSet<String> = if cfg.analysis_cities.is_empty() {
        matrix.rows.iter().map(|(city, _)| city.clone()).collect()
    } else {
        cfg.analysis_cities.iter().cloned().collect()
    };
    let (trajs, skipped) = trajectories(&result, &cities).map_err(structural)?;

    let mut outputs = StageOutputs::new(&cfg.out_dir)?;
    outputs.write_csv(
        "ca_coordinates",
        "ca_coordinates.csv",
        &coordinates_csv(&result),
    )?;

    let mut report_csv = String::from("row_label,rank,col_label,distance\n");
    for row in ca_report(&result, 3) {
        for (rank, (col, distance)) in row.neighbors.iter().enumerate() {
            report_csv.push_str(&format!(
                "{},{},{col},{distance}\n",
                row.row_label,
                rank + 1
            ));
        }
    }
    outputs.write_csv("ca_report", "ca_report.csv", &report_csv)?;

    let svg = trajectory_map(&result, &trajs, &SvgOptions::default());
    outputs.write_text("ca_map", "ca_map.svg", &svg)?;

    let summary = CaSummary {
        dims: result.dims(),
        total_inertia: result.total_inertia,
        singular_values: result.singular_values.clone(),
        principal_inertias: result.principal_inertias.clone(),
        explained: result.explained.clone(),
        dropped_rows: result.dropped_rows.clone(),
        dropped_cols: result.dropped_cols.clone(),
        trajectory_cities: trajs.iter().map(|t| t.city.clone()).collect(),
        skipped_cities: skipped,
    };
    outputs.write_json("ca_summary", "ca_summary.json", &summary)?;
    outputs.finish("ca")?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct YearExport {
    pub year: i32,
    pub nodes: u64,
    pub edges: u64,
}

#[derive(Debug, Serialize)]
pub struct ExportSummary {
    pub years: Vec<YearExport>,
}

pub fn run_export(cfg: &RunConfig) -> Result<ExportSummary, StageError> {
    let mut outputs = StageOutputs::new(&cfg.out_dir)?;
    let mut years = Vec::new();
    for files in &cfg.snapshots {
        let (snapshot, _) = load_assigned_snapshot(cfg, files)?;
        let graph = OwnershipGraph::build(&snapshot);
        outputs.write_text(
            &format!("graph_dot_{}", files.year),
            &format!("graph_{}.dot", files.year),
            &export::to_dot(&graph),
        )?;
        outputs.write_text(
            &format!("graph_graphml_{}", files.year),
            &format!("graph_{}.graphml", files.year),
            &export::to_graphml(&graph),
        )?;
        years.push(YearExport {
            year: files.year,
            nodes: graph.node_count() as u64,
            edges: graph.edge_count() as u64,
        });
    }
    let summary = ExportSummary { years };
    outputs.write_json("export_summary", "export_summary.json", &summary)?;
    outputs.finish("export")?;
    Ok(summary)
}

/// Run every stage in dependency order; used by tests and batch scripts.
pub fn run_all(cfg: &RunConfig) -> Result<(), StageError> {
    run_validate(cfg)?;
    run_assign(cfg)?;
    run_chains(cfg)?;
    run_scope(cfg)?;
    run_flows(cfg)?;
    run_sectors(cfg)?;
    run_ca(cfg)?;
    run_export(cfg)?;
    Ok(())
}

/// City force totals for one assigned snapshot; kept public for ad-hoc
/// inspection from tests.
pub fn city_totals(snapshot: &Snapshot) -> ownet_core::metrics::CityForceTotals {
    aggregate_city_forces(&compute_forces(snapshot))
}

/// Expose the assigned-snapshot loader for the acceptance suite.
pub fn load_assigned(cfg: &RunConfig, files: &SnapshotFiles) -> Result<Snapshot, StageError> {
    load_assigned_snapshot(cfg, files).map(|(s, _)| s)
}

/// Locate the per-year input descriptor.
pub fn snapshot_files(cfg: &RunConfig, year: i32) -> Option<&SnapshotFiles> {
    cfg.snapshots.iter().find(|s| s.year == year)
}

/// Paths of the manifest written by a stage.
pub fn manifest_path(out_dir: &Path, stage: &str) -> std::path::PathBuf {
    out_dir.join(format!("manifest-{stage}.json"))
}
