//! Firm and ownership-link ingestion.
//!
//! Parsers never abort on per-row data errors: bad rows land in a quarantine
//! report with their file line and a reason code, and accepted + quarantined
//! always equals the input row count. Only structural problems (missing
//! file, missing mandatory column) are fatal.

mod geojson;

pub use geojson::{parse_fua, parse_fua_str, FuaRejectReason, FuaRejection};

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A geolocated establishment with turnover and a 4-digit activity code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Firm {
    pub firm_id: String,
    pub name: String,
    pub lon: f64,
    pub lat: f64,
    /// ISO 3166-1 alpha-2.
    pub country: String,
    /// Four decimal digits, division (first two) in 01-99.
    pub nace4: String,
    /// Thousands of the snapshot currency; missing is representable.
    pub turnover: Option<f64>,
    /// Filled by geo assignment; `None` until then or when outside all FUAs.
    pub city_id: Option<String>,
}

/// Directed owner -> owned relation with a capital share percentage in (0, 100].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OwnershipLink {
    pub owner_id: String,
    pub owned_id: String,
    pub share_pct: f64,
}

/// Why a row was quarantined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuarantineReason {
    CsvSyntax,
    FieldCount,
    EmptyId,
    BadNumber,
    CoordRange,
    CountryFormat,
    NaceFormat,
    TurnoverNegative,
    DupId,
    SelfLoop,
    ShareRange,
    Dangling,
    DupPair,
}

impl QuarantineReason {
    pub fn code(&self) -> &'static str {
        match self {
            QuarantineReason::CsvSyntax => "CSV_SYNTAX",
            QuarantineReason::FieldCount => "FIELD_COUNT",
            QuarantineReason::EmptyId => "EMPTY_ID",
            QuarantineReason::BadNumber => "BAD_NUMBER",
            QuarantineReason::CoordRange => "COORD_RANGE",
            QuarantineReason::CountryFormat => "COUNTRY_FORMAT",
            QuarantineReason::NaceFormat => "NACE_FORMAT",
            QuarantineReason::TurnoverNegative => "TURNOVER_NEGATIVE",
            QuarantineReason::DupId => "DUP_ID",
            QuarantineReason::SelfLoop => "SELF_LOOP",
            QuarantineReason::ShareRange => "SHARE_RANGE",
            QuarantineReason::Dangling => "DANGLING",
            QuarantineReason::DupPair => "DUP_PAIR",
        }
    }
}

impl std::fmt::Display for QuarantineReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

/// One rejected input row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarantineEntry {
    /// 1-based physical file line (the header is line 1).
    pub line: u64,
    pub reason: QuarantineReason,
    pub raw_row: String,
}

/// Rejected-record report for one parsed file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuarantineReport {
    pub entries: Vec<QuarantineEntry>,
    pub input_rows: u64,
    pub accepted: u64,
}

impl QuarantineReport {
    pub fn quarantined(&self) -> u64 {
        self.entries.len() as u64
    }

    /// Quarantine CSV: line,reason,raw_row.
    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["line", "reason", "raw_row"])
            .expect("in-memory write");
        for e in &self.entries {
            wtr.write_record([
                e.line.to_string().as_str(),
                e.reason.code(),
                e.raw_row.as_str(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf8")
    }
}

/// Quarantine reports for the two tabular inputs of a snapshot.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SnapshotQuarantine {
    pub firms: QuarantineReport,
    pub links: QuarantineReport,
}

/// An internally consistent data vintage: every link endpoint resolves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub year: i32,
    pub firms: BTreeMap<String, Firm>,
    pub links: Vec<OwnershipLink>,
    pub quarantine: SnapshotQuarantine,
}

impl Snapshot {
    pub fn new(year: i32) -> Self {
        Self {
            year,
            firms: BTreeMap::new(),
            links: Vec::new(),
            quarantine: SnapshotQuarantine::default(),
        }
    }

    pub fn firm(&self, id: &str) -> Option<&Firm> {
        self.firms.get(id)
    }

    pub fn insert_firm(&mut self, firm: Firm) {
        self.firms.insert(firm.firm_id.clone(), firm);
    }

    /// Sort links into the canonical (owner_id, owned_id) order.
    pub fn sort_links(&mut self) {
        self.links.sort_by(|a, b| {
            (a.owner_id.as_str(), a.owned_id.as_str())
                .cmp(&(b.owner_id.as_str(), b.owned_id.as_str()))
        });
    }
}

/// Column-header mapping for firm files. Extra columns are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmColumns {
    pub id: String,
    pub name: String,
    pub lon: String,
    pub lat: String,
    pub country: String,
    pub nace4: String,
    pub turnover: String,
    /// Optional column carrying a pre-assigned city; used to reload
    /// geo-assigned firm files.
    pub city: Option<String>,
}

impl Default for FirmColumns {
    fn default() -> Self {
        Self {
            id: "id".into(),
            name: "name".into(),
            lon: "lon".into(),
            lat: "lat".into(),
            country: "country".into(),
            nace4: "nace4".into(),
            turnover: "turnover".into(),
            city: None,
        }
    }
}

impl FirmColumns {
    /// Mapping for files written by [`write_firms_csv`] with cities included.
    pub fn with_city() -> Self {
        Self {
            city: Some("city_id".into()),
            ..Self::default()
        }
    }
}

/// Column-header mapping for link files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkColumns {
    pub owner_id: String,
    pub owned_id: String,
    pub share_pct: String,
}

impl Default for LinkColumns {
    fn default() -> Self {
        Self {
            owner_id: "owner_id".into(),
            owned_id: "owned_id".into(),
            share_pct: "share_pct".into(),
        }
    }
}

/// Structural ingestion failures. Per-row problems are never errors.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing mandatory column '{column}' in {path}")]
    MissingColumn { column: String, path: String },
    #[error("{path}: {message}")]
    Malformed { path: String, message: String },
}

struct HeaderIndex {
    indices: Vec<usize>,
    max_index: usize,
}

fn resolve_columns(
    headers: &csv::StringRecord,
    wanted: &[&str],
    path: &str,
) -> Result<HeaderIndex, IngestError> {
    let mut indices = Vec::with_capacity(wanted.len());
    for name in wanted {
        let idx =
            headers
                .iter()
                .position(|h| h == *name)
                .ok_or_else(|| IngestError::MissingColumn {
                    column: (*name).to_string(),
                    path: path.to_string(),
                })?;
        indices.push(idx);
    }
    let max_index = indices.iter().copied().max().unwrap_or(0);
    Ok(HeaderIndex { indices, max_index })
}

fn raw_row(record: &csv::StringRecord) -> String {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    wtr.write_record(record).expect("in-memory write");
    let mut bytes = wtr.into_inner().expect("in-memory flush");
    if bytes.last() == Some(&b'\n') {
        bytes.pop();
    }
    String::from_utf8(bytes).expect("utf8")
}

fn record_line(record: &csv::StringRecord, fallback: u64) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(fallback)
}

fn parse_finite(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn valid_country(field: &str) -> bool {
    field.len() == 2 && field.bytes().all(|b| b.is_ascii_uppercase())
}

fn valid_nace4(field: &str) -> bool {
    if field.len() != 4 || !field.bytes().all(|b| b.is_ascii_digit()) {
        return false;
    }
    &field[0..2] != "00"
}

/// Parse a firm CSV file. Accepted firms satisfy all [`Firm`] invariants;
/// every rejected row appears in the quarantine with line and reason.
pub fn parse_firms(
    path: &Path,
    columns: &FirmColumns,
) -> Result<(BTreeMap<String, Firm>, QuarantineReport), IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_firms_from_reader(file, columns, &path.display().to_string())
}

/// Reader-based variant of [`parse_firms`].
pub fn parse_firms_from_reader<R: Read>(
    reader: R,
    columns: &FirmColumns,
    path: &str,
) -> Result<(BTreeMap<String, Firm>, QuarantineReport), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::Malformed {
            path: path.to_string(),
            message: format!("unreadable header: {e}"),
        })?
        .clone();

    let mut wanted = vec![
        columns.id.as_str(),
        columns.name.as_str(),
        columns.lon.as_str(),
        columns.lat.as_str(),
        columns.country.as_str(),
        columns.nace4.as_str(),
        columns.turnover.as_str(),
    ];
    if let Some(city) = &columns.city {
        wanted.push(city.as_str());
    }
    let header_index = resolve_columns(&headers, &wanted, path)?;
    let idx = &header_index.indices;

    let mut firms: BTreeMap<String, Firm> = BTreeMap::new();
    let mut report = QuarantineReport::default();
    let mut fallback_line = 1;

    for result in rdr.records() {
        fallback_line += 1;
        report.input_rows += 1;
        let record = match result {
            Ok(r) => r,
            Err(e) => {
                report.entries.push(QuarantineEntry {
                    line: e.position().map(|p| p.line()).unwrap_or(fallback_line),
                    reason: QuarantineReason::CsvSyntax,
                    raw_row: String::new(),
                });
                continue;
            }
        };
        let line = record_line(&record, fallback_line);
        let reject = |reason| QuarantineEntry {
            line,
            reason,
            raw_row: raw_row(&record),
        };

        if record.len() <= header_index.max_index {
            report.entries.push(reject(QuarantineReason::FieldCount));
            continue;
        }

        let firm_id = record[idx[0]].to_string();
        if firm_id.is_empty() {
            report.entries.push(reject(QuarantineReason::EmptyId));
            continue;
        }
        let name = record[idx[1]].to_string();
        let (lon, lat) = match (parse_finite(&record[idx[2]]), parse_finite(&record[idx[3]])) {
            (Some(lon), Some(lat)) => (lon, lat),
            _ => {
                report.entries.push(reject(QuarantineReason::BadNumber));
                continue;
            }
        };
        if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
            report.entries.push(reject(QuarantineReason::CoordRange));
            continue;
        }
        let country = record[idx[4]].to_string();
        if !valid_country(&country) {
            report.entries.push(reject(QuarantineReason::CountryFormat));
            continue;
        }
        let nace4 = record[idx[5]].to_string();
        if !valid_nace4(&nace4) {
            report.entries.push(reject(QuarantineReason::NaceFormat));
            continue;
        }
        let turnover_field = record[idx[6]].trim();
        let turnover = if turnover_field.is_empty() {
            None
        } else {
            match parse_finite(turnover_field) {
                Some(v) if v >= 0.0 => Some(v),
                Some(_) => {
                    report
                        .entries
                        .push(reject(QuarantineReason::TurnoverNegative));
                    continue;
                }
                None => {
                    report.entries.push(reject(QuarantineReason::BadNumber));
                    continue;
                }
            }
        };
        let city_id = match idx.get(7) {
            Some(&ci) => {
                let v = record[ci].to_string();
                if v.is_empty() {
                    None
                } else {
                    Some(v)
                }
            }
            None => None,
        };

        match firms.entry(firm_id.clone()) {
            Entry::Occupied(_) => {
                report.entries.push(reject(QuarantineReason::DupId));
            }
            Entry::Vacant(slot) => {
                slot.insert(Firm {
                    firm_id,
                    name,
                    lon,
                    lat,
                    country,
                    nace4,
                    turnover,
                    city_id,
                });
                report.accepted += 1;
            }
        }
    }

    debug_assert_eq!(report.accepted + report.quarantined(), report.input_rows);
    Ok((firms, report))
}

/// Parse a link CSV file against an already-parsed firm collection.
pub fn parse_links(
    path: &Path,
    columns: &LinkColumns,
    firms: &BTreeMap<String, Firm>,
) -> Result<(Vec<OwnershipLink>, QuarantineReport), IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_links_from_reader(file, columns, firms, &path.display().to_string())
}

/// Reader-based variant of [`parse_links`]. Duplicate (owner, owned) pairs
/// keep the first occurrence; later ones are quarantined.
pub fn parse_links_from_reader<R: Read>(
    reader: R,
    columns: &LinkColumns,
    firms: &BTreeMap<String, Firm>,
    path: &str,
) -> Result<(Vec<OwnershipLink>, QuarantineReport), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::Malformed {
            path: path.to_string(),
            message: format!("unreadable header: {e}"),
        })?
        .clone();
    let wanted = [
        columns.owner_id.as_str(),
        columns.owned_id.as_str(),
        columns.share_pct.as_str(),
    ];
    let header_index = resolve_columns(&headers, &wanted, path)?;
    let idx = &header_index.indices;

    let mut links = Vec::new();
    let mut seen: std::collections::BTreeSet<(String, String)> = std::collections::BTreeSet::new();
    let mut report = QuarantineReport::default();
    let mut fallback_line = 1;

    for result in rdr.records() {
        fallback_line += 1;
        report.input_rows += 1;
        let record = match result {
            Ok(r) => r,
            Err(e) => {
                report.entries.push(QuarantineEntry {
                    line: e.position().map(|p| p.line()).unwrap_or(fallback_line),
                    reason: QuarantineReason::CsvSyntax,
                    raw_row: String::new(),
                });
                continue;
            }
        };
        let line = record_line(&record, fallback_line);
        let reject = |reason| QuarantineEntry {
            line,
            reason,
            raw_row: raw_row(&record),
        };

        if record.len() <= header_index.max_index {
            report.entries.push(reject(QuarantineReason::FieldCount));
            continue;
        }
        let owner_id = record[idx[0]].to_string();
        let owned_id = record[idx[1]].to_string();
        if owner_id.is_empty() || owned_id.is_empty() {
            report.entries.push(reject(QuarantineReason::EmptyId));
            continue;
        }
        let share_pct = match parse_finite(&record[idx[2]]) {
            Some(v) => v,
            None => {
                report.entries.push(reject(QuarantineReason::BadNumber));
                continue;
            }
        };
        if share_pct <= 0.0 || share_pct > 100.0 {
            report.entries.push(reject(QuarantineReason::ShareRange));
            continue;
        }
        if owner_id == owned_id {
            report.entries.push(reject(QuarantineReason::SelfLoop));
            continue;
        }
        if !firms.contains_key(&owner_id) || !firms.contains_key(&owned_id) {
            report.entries.push(reject(QuarantineReason::Dangling));
            continue;
        }
        if !seen.insert((owner_id.clone(), owned_id.clone())) {
            report.entries.push(reject(QuarantineReason::DupPair));
            continue;
        }
        links.push(OwnershipLink {
            owner_id,
            owned_id,
            share_pct,
        });
        report.accepted += 1;
    }

    links.sort_by(|a, b| {
        (a.owner_id.as_str(), a.owned_id.as_str()).cmp(&(b.owner_id.as_str(), b.owned_id.as_str()))
    });
    debug_assert_eq!(report.accepted + report.quarantined(), report.input_rows);
    Ok((links, report))
}

/// Assemble a snapshot from parsed parts.
pub fn assemble_snapshot(
    year: i32,
    firms: BTreeMap<String, Firm>,
    firm_quarantine: QuarantineReport,
    links: Vec<OwnershipLink>,
    link_quarantine: QuarantineReport,
) -> Snapshot {
    let mut snapshot = Snapshot {
        year,
        firms,
        links,
        quarantine: SnapshotQuarantine {
            firms: firm_quarantine,
            links: link_quarantine,
        },
    };
    snapshot.sort_links();
    snapshot
}

/// Write firms in the ingest CSV schema. With `with_city`, appends the
/// `city_id` column so geo-assigned snapshots round-trip.
pub fn write_firms_csv<W: Write>(
    writer: W,
    firms: impl IntoIterator<Item = impl std::borrow::Borrow<Firm>>,
    with_city: bool,
) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["id", "name", "lon", "lat", "country", "nace4", "turnover"];
    if with_city {
        header.push("city_id");
    }
    wtr.write_record(&header)?;
    for firm in firms {
        let f = firm.borrow();
        let turnover = f.turnover.map(|t| t.to_string()).unwrap_or_default();
        let mut row = vec![
            f.firm_id.clone(),
            f.name.clone(),
            f.lon.to_string(),
            f.lat.to_string(),
            f.country.clone(),
            f.nace4.clone(),
            turnover,
        ];
        if with_city {
            row.push(f.city_id.clone().unwrap_or_default());
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()
}

/// Write links in the ingest CSV schema.
pub fn write_links_csv<W: Write>(
    writer: W,
    links: impl IntoIterator<Item = impl std::borrow::Borrow<OwnershipLink>>,
) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["owner_id", "owned_id", "share_pct"])?;
    for link in links {
        let l = link.borrow();
        wtr.write_record([
            l.owner_id.as_str(),
            l.owned_id.as_str(),
            &l.share_pct.to_string(),
        ])?;
    }
    wtr.flush()
}
