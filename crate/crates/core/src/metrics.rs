//! The ownership-links-revenue index ("force") and its aggregates: per-city
//! totals, ordered city-pair flows, NACE section aggregation, the
//! (city, year) x sector matrix, and top-k link rankings.
//!
//! A link's force is share_pct/100 times the owned firm's turnover,
//! attributed to the owned firm's city. Links with missing turnover carry
//! no force and are counted separately; they still count in link counts.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Firm, OwnershipLink, Snapshot};

/// Neumaier compensated summation; keeps city totals bit-stable and exact
/// to within 1e-12 relative over tens of thousands of terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// City label for force attribution: the assigned FUA, or a country-scoped
/// pseudo-city when the firm sits outside every FUA.
pub fn attribution_city(firm: &Firm) -> String {
    match &firm.city_id {
        Some(city) => city.clone(),
        None => format!("UNASSIGNED:{}", firm.country),
    }
}

/// One link's revenue contribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkForce {
    pub owner_id: String,
    pub owned_id: String,
    pub share_pct: f64,
    /// share_pct/100 x owned-firm turnover, in thousands.
    pub force: f64,
    pub origin_city: String,
    pub dest_city: String,
}

/// A link that carries no force because the owned firm's turnover is missing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissingForce {
    pub owner_id: String,
    pub owned_id: String,
    pub dest_city: String,
}

/// Force of a single accepted link; `None` when the owned firm's turnover is
/// missing (or the link does not resolve against `firms`).
pub fn link_force(link: &OwnershipLink, firms: &BTreeMap<String, Firm>) -> Option<LinkForce> {
    let owner = firms.get(&link.owner_id)?;
    let owned = firms.get(&link.owned_id)?;
    let turnover = owned.turnover?;
    Some(LinkForce {
        owner_id: link.owner_id.clone(),
        owned_id: link.owned_id.clone(),
        share_pct: link.share_pct,
        force: link.share_pct / 100.0 * turnover,
        origin_city: attribution_city(owner),
        dest_city: attribution_city(owned),
    })
}

/// All link forces of a snapshot, plus the links excluded for missing
/// turnover. Order follows the snapshot's canonical link order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ForceTable {
    pub forces: Vec<LinkForce>,
    pub missing: Vec<MissingForce>,
}

pub fn compute_forces(snapshot: &Snapshot) -> ForceTable {
    let mut table = ForceTable::default();
    for link in &snapshot.links {
        match link_force(link, &snapshot.firms) {
            Some(f) => table.forces.push(f),
            None => {
                if let Some(owned) = snapshot.firms.get(&link.owned_id) {
                    table.missing.push(MissingForce {
                        owner_id: link.owner_id.clone(),
                        owned_id: link.owned_id.clone(),
                        dest_city: attribution_city(owned),
                    });
                }
            }
        }
    }
    table
}

/// Per-city force totals with per-city missing-turnover counts.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CityForceTotals {
    pub totals: BTreeMap<String, f64>,
    pub missing_counts: BTreeMap<String, u64>,
}

/// Aggregate forces to the destination (owned-firm) city, the canonical
/// attribution. Deterministic ordered reduction; grand total matches the
/// naive sum within 1e-12 relative.
pub fn aggregate_city_forces(table: &ForceTable) -> CityForceTotals {
    aggregate_by(table, |f| &f.dest_city, |m| Some(&m.dest_city))
}

/// Alternative owner-side view: the same forces credited to the owning
/// firm's city instead. Not the canonical attribution; totals still
/// conserve the grand sum.
pub fn aggregate_origin_city_forces(table: &ForceTable) -> CityForceTotals {
    aggregate_by(table, |f| &f.origin_city, |_| None)
}

fn aggregate_by<'a>(
    table: &'a ForceTable,
    city_of: impl Fn(&'a LinkForce) -> &'a str,
    missing_city_of: impl Fn(&'a MissingForce) -> Option<&'a str>,
) -> CityForceTotals {
    let mut sums: BTreeMap<String, CompensatedSum> = BTreeMap::new();
    for f in &table.forces {
        sums.entry(city_of(f).to_string()).or_default().add(f.force);
    }
    let mut missing_counts: BTreeMap<String, u64> = BTreeMap::new();
    for m in &table.missing {
        if let Some(city) = missing_city_of(m) {
            *missing_counts.entry(city.to_string()).or_default() += 1;
        }
    }
    CityForceTotals {
        totals: sums.into_iter().map(|(k, v)| (k, v.value())).collect(),
        missing_counts,
    }
}

/// One ordered origin->destination cell of the inter-city flow matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CityPairFlow {
    pub origin: String,
    pub dest: String,
    pub year: i32,
    /// Count of all links, including those with missing turnover.
    pub n_links: u64,
    /// Links excluded from total_force for missing turnover.
    pub n_missing_turnover: u64,
    pub total_force: f64,
    /// Diagonal cells (origin == dest) are kept but flagged.
    pub internal: bool,
}

/// Ordered city-pair flows over the given city set. Rows are emitted for
/// pairs with at least one link, sorted by (origin, dest).
pub fn city_pair_matrix(snapshot: &Snapshot, cities: &BTreeSet<String>) -> Vec<CityPairFlow> {
    struct Cell {
        n_links: u64,
        n_missing: u64,
        force: CompensatedSum,
    }
    let mut cells: BTreeMap<(String, String), Cell> = BTreeMap::new();
    for link in &snapshot.links {
        let (Some(owner), Some(owned)) = (
            snapshot.firms.get(&link.owner_id),
            snapshot.firms.get(&link.owned_id),
        ) else {
            continue;
        };
        let (Some(origin), Some(dest)) = (owner.city_id.as_deref(), owned.city_id.as_deref())
        else {
            continue;
        };
        if !cities.contains(origin) || !cities.contains(dest) {
            continue;
        }
        let cell = cells
            .entry((origin.to_string(), dest.to_string()))
            .or_insert(Cell {
                n_links: 0,
                n_missing: 0,
                force: CompensatedSum::default(),
            });
        cell.n_links += 1;
        match owned.turnover {
            Some(t) => cell.force.add(link.share_pct / 100.0 * t),
            None => cell.n_missing += 1,
        }
    }
    cells
        .into_iter()
        .map(|((origin, dest), cell)| CityPairFlow {
            internal: origin == dest,
            origin,
            dest,
            year: snapshot.year,
            n_links: cell.n_links,
            n_missing_turnover: cell.n_missing,
            total_force: cell.force.value(),
        })
        .collect()
}

/// Flow matrix CSV: origin,dest,year,n_links,total_force,flags.
pub fn flows_csv(flows: &[CityPairFlow]) -> String {
    let mut out = String::from("origin,dest,year,n_links,total_force,flags\n");
    for f in flows {
        let flags = if f.internal { "INTERNAL" } else { "" };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            f.origin, f.dest, f.year, f.n_links, f.total_force, flags
        ));
    }
    out
}

/// First-level NACE Rev.2 section letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[allow(missing_docs)]
pub enum SectorCode {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
    K,
    L,
    M,
    N,
    O,
    P,
    Q,
    R,
    S,
    T,
    U,
}

impl SectorCode {
    pub const ALL: [SectorCode; 21] = [
        SectorCode::A,
        SectorCode::B,
        SectorCode::C,
        SectorCode::D,
        SectorCode::E,
        SectorCode::F,
        SectorCode::G,
        SectorCode::H,
        SectorCode::I,
        SectorCode::J,
        SectorCode::K,
        SectorCode::L,
        SectorCode::M,
        SectorCode::N,
        SectorCode::O,
        SectorCode::P,
        SectorCode::Q,
        SectorCode::R,
        SectorCode::S,
        SectorCode::T,
        SectorCode::U,
    ];

    pub fn letter(&self) -> char {
        (b'A' + *self as u8) as char
    }

    pub fn from_letter(c: char) -> Option<SectorCode> {
        let offset = (c as u32).checked_sub('A' as u32)?;
        Self::ALL.get(offset as usize).copied()
    }
}

impl std::fmt::Display for SectorCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NaceError {
    #[error("UNKNOWN_DIVISION: division {0:02} is unallocated in NACE Rev.2")]
    UnknownDivision(u8),
    #[error("invalid NACE code '{0}'")]
    InvalidCode(String),
}

/// Division (01-99) to section lookup. The bundled table ships as a data
/// file and can be overridden with a custom (division,section) CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisionTable {
    sections: [Option<SectorCode>; 100],
}

static BUNDLED_TABLE: OnceLock<DivisionTable> = OnceLock::new();
const BUNDLED_CSV: &str = include_str!("../data/nace_divisions.csv");

impl DivisionTable {
    /// The table shipped with the crate (official NACE Rev.2 allocation).
    pub fn bundled() -> &'static DivisionTable {
        BUNDLED_TABLE
            .get_or_init(|| DivisionTable::from_csv_str(BUNDLED_CSV).expect("bundled table parses"))
    }

    /// Parse a (division,section) CSV with a header row.
    pub fn from_csv_str(text: &str) -> Result<DivisionTable, NaceError> {
        let mut sections = [None; 100];
        for (i, line) in text.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let (div, sec) = line
                .split_once(',')
                .ok_or_else(|| NaceError::InvalidCode(line.to_string()))?;
            let division: u8 = div
                .trim()
                .parse()
                .map_err(|_| NaceError::InvalidCode(line.to_string()))?;
            if division == 0 || division > 99 {
                return Err(NaceError::InvalidCode(line.to_string()));
            }
            let letter = sec
                .trim()
                .chars()
                .next()
                .and_then(SectorCode::from_letter)
                .ok_or_else(|| NaceError::InvalidCode(line.to_string()))?;
            sections[division as usize] = Some(letter);
        }
        Ok(DivisionTable { sections })
    }

    pub fn section_of_division(&self, division: u8) -> Result<SectorCode, NaceError> {
        if division == 0 || division > 99 {
            return Err(NaceError::InvalidCode(format!("{division:02}")));
        }
        self.sections[division as usize].ok_or(NaceError::UnknownDivision(division))
    }

    /// Section of a 4-digit activity code via its 2-digit division.
    pub fn section(&self, nace4: &str) -> Result<SectorCode, NaceError> {
        if nace4.len() != 4 || !nace4.bytes().all(|b| b.is_ascii_digit()) {
            return Err(NaceError::InvalidCode(nace4.to_string()));
        }
        let division: u8 = nace4[0..2]
            .parse()
            .map_err(|_| NaceError::InvalidCode(nace4.to_string()))?;
        if division == 0 {
            return Err(NaceError::InvalidCode(nace4.to_string()));
        }
        self.section_of_division(division)
    }
}

/// Section lookup against the bundled table.
pub fn nace_section(nace4: &str) -> Result<SectorCode, NaceError> {
    DivisionTable::bundled().section(nace4)
}

/// Links excluded from the sector matrix, by reason.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ExcludedLinks {
    pub missing_turnover: u64,
    pub unknown_division: u64,
}

/// (city, year) x sector contingency table of link forces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorMatrix {
    /// Row labels in snapshot order, cities sorted within each year.
    pub rows: Vec<(String, i32)>,
    /// One cell per row per section, ordered as [`SectorCode::ALL`].
    pub cells: Vec<[f64; 21]>,
    /// Sidecar: per-year counts of unclassifiable links.
    pub excluded: BTreeMap<i32, ExcludedLinks>,
}

impl SectorMatrix {
    pub fn is_all_zero(&self) -> bool {
        self.cells.iter().all(|row| row.iter().all(|v| *v == 0.0))
    }

    pub fn row_sum(&self, row: usize) -> f64 {
        let mut s = CompensatedSum::default();
        for v in &self.cells[row] {
            s.add(*v);
        }
        s.value()
    }

    /// Sector matrix CSV: city,year,A..U.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("city,year");
        for s in SectorCode::ALL {
            out.push(',');
            out.push(s.letter());
        }
        out.push('\n');
        for (i, (city, year)) in self.rows.iter().enumerate() {
            out.push_str(&format!("{city},{year}"));
            for v in &self.cells[i] {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    /// Parse the CSV produced by [`SectorMatrix::to_csv`].
    pub fn from_csv_str(text: &str) -> Option<SectorMatrix> {
        let mut rows = Vec::new();
        let mut cells = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 23 {
                return None;
            }
            let year: i32 = fields[1].parse().ok()?;
            let mut row = [0.0; 21];
            for (j, v) in fields[2..].iter().enumerate() {
                row[j] = v.parse().ok()?;
            }
            rows.push((fields[0].to_string(), year));
            cells.push(row);
        }
        Some(SectorMatrix {
            rows,
            cells,
            excluded: BTreeMap::new(),
        })
    }
}

/// Build the stacked (city, year) x sector matrix over the given cities.
/// Unclassifiable links (missing turnover, unallocated division) are
/// excluded from cells and counted in the sidecar.
pub fn sector_matrix(
    snapshots: &[&Snapshot],
    cities: &BTreeSet<String>,
    table: &DivisionTable,
) -> SectorMatrix {
    let mut rows = Vec::new();
    let mut sums: Vec<[CompensatedSum; 21]> = Vec::new();
    let mut row_index: BTreeMap<(String, i32), usize> = BTreeMap::new();
    let mut excluded: BTreeMap<i32, ExcludedLinks> = BTreeMap::new();

    for snapshot in snapshots {
        for city in cities {
            let key = (city.clone(), snapshot.year);
            row_index.insert(key.clone(), rows.len());
            rows.push(key);
            sums.push([CompensatedSum::default(); 21]);
        }
        let tally = excluded.entry(snapshot.year).or_default();
        for link in &snapshot.links {
            let Some(owned) = snapshot.firms.get(&link.owned_id) else {
                continue;
            };
            let Some(city) = owned.city_id.as_deref() else {
                continue;
            };
            if !cities.contains(city) {
                continue;
            }
            let section = match table.section(&owned.nace4) {
                Ok(s) => s,
                Err(_) => {
                    tally.unknown_division += 1;
                    continue;
                }
            };
            let Some(turnover) = owned.turnover else {
                tally.missing_turnover += 1;
                continue;
            };
            let row = row_index[&(city.to_string(), snapshot.year)];
            sums[row][section as usize].add(link.share_pct / 100.0 * turnover);
        }
    }

    SectorMatrix {
        rows,
        cells: sums
            .into_iter()
            .map(|row| {
                let mut out = [0.0; 21];
                for (i, s) in row.iter().enumerate() {
                    out[i] = s.value();
                }
                out
            })
            .collect(),
        excluded,
    }
}

/// Top-k links from `origin` to `dest`, descending by force; ties break by
/// (owner_id, owned_id). Returns fewer than k rows when fewer exist.
pub fn top_links<'a>(
    forces: &'a [LinkForce],
    origin: &str,
    dest: &str,
    k: usize,
) -> Vec<&'a LinkForce> {
    let mut selected: Vec<&LinkForce> = forces
        .iter()
        .filter(|f| f.origin_city == origin && f.dest_city == dest)
        .collect();
    selected.sort_by(|a, b| {
        b.force
            .partial_cmp(&a.force)
            .expect("forces are finite")
            .then_with(|| {
                (a.owner_id.as_str(), a.owned_id.as_str())
                    .cmp(&(b.owner_id.as_str(), b.owned_id.as_str()))
            })
    });
    selected.truncate(k);
    selected
}
