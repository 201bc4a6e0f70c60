//! Functional urban areas and firm-to-city assignment.
//!
//! Containment uses even-odd ray casting with boundary-inclusive semantics;
//! when several FUAs contain a point the one with the smallest total
//! outer-ring area wins. All geometry is planar lon/lat.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ingest::{Firm, Snapshot};

/// A lon/lat vertex in WGS84 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub lon: f64,
    pub lat: f64,
}

impl Point {
    pub fn new(lon: f64, lat: f64) -> Self {
        Self { lon, lat }
    }
}

/// One polygon of a (possibly multi-part) FUA: an outer ring plus holes.
/// Rings are closed (first vertex equals last) with at least 4 vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonPart {
    pub outer: Vec<Point>,
    pub holes: Vec<Vec<Point>>,
}

/// A named polygonal city boundary used for firm assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalUrbanArea {
    pub fua_id: String,
    pub name: String,
    pub country: String,
    pub population: u64,
    pub parts: Vec<PolygonPart>,
}

impl FunctionalUrbanArea {
    /// Total unsigned shoelace area of the outer rings, in square degrees.
    /// Holes are not subtracted; this is the tie-break key for overlaps.
    pub fn outer_area(&self) -> f64 {
        self.parts.iter().map(|p| ring_area(&p.outer)).sum()
    }
}

/// Unsigned shoelace area of a closed ring.
pub fn ring_area(ring: &[Point]) -> f64 {
    if ring.len() < 4 {
        return 0.0;
    }
    let mut twice = 0.0;
    for w in ring.windows(2) {
        twice += w[0].lon * w[1].lat - w[1].lon * w[0].lat;
    }
    twice.abs() / 2.0
}

/// Where a point sits relative to a polygon. Boundary counts as contained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Interior,
    Boundary,
    Exterior,
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    let cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    if cross != 0.0 {
        return false;
    }
    p.lon >= a.lon.min(b.lon)
        && p.lon <= a.lon.max(b.lon)
        && p.lat >= a.lat.min(b.lat)
        && p.lat <= a.lat.max(b.lat)
}

fn ray_crossings(p: Point, ring: &[Point]) -> u32 {
    let mut crossings = 0;
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        // Half-open rule so a vertex exactly at the ray height is counted once.
        if (a.lat > p.lat) != (b.lat > p.lat) {
            let t = (p.lat - a.lat) / (b.lat - a.lat);
            let x = a.lon + t * (b.lon - a.lon);
            if x > p.lon {
                crossings += 1;
            }
        }
    }
    crossings
}

/// Even-odd containment against one polygon part, counting holes.
pub fn locate_in_part(p: Point, part: &PolygonPart) -> Containment {
    for ring in std::iter::once(&part.outer).chain(part.holes.iter()) {
        for w in ring.windows(2) {
            if on_segment(p, w[0], w[1]) {
                return Containment::Boundary;
            }
        }
    }
    let mut crossings = ray_crossings(p, &part.outer);
    for hole in &part.holes {
        crossings += ray_crossings(p, hole);
    }
    if crossings % 2 == 1 {
        Containment::Interior
    } else {
        Containment::Exterior
    }
}

/// Containment against a whole FUA: interior of any part wins over boundary.
pub fn locate_in_fua(p: Point, fua: &FunctionalUrbanArea) -> Containment {
    let mut best = Containment::Exterior;
    for part in &fua.parts {
        match locate_in_part(p, part) {
            Containment::Interior => return Containment::Interior,
            Containment::Boundary => best = Containment::Boundary,
            Containment::Exterior => {}
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Bbox {
    min_lon: f64,
    min_lat: f64,
    max_lon: f64,
    max_lat: f64,
}

impl Bbox {
    fn of_ring(ring: &[Point]) -> Self {
        let mut b = Bbox {
            min_lon: f64::INFINITY,
            min_lat: f64::INFINITY,
            max_lon: f64::NEG_INFINITY,
            max_lat: f64::NEG_INFINITY,
        };
        for p in ring {
            b.min_lon = b.min_lon.min(p.lon);
            b.min_lat = b.min_lat.min(p.lat);
            b.max_lon = b.max_lon.max(p.lon);
            b.max_lat = b.max_lat.max(p.lat);
        }
        b
    }

    fn union(&self, other: &Bbox) -> Bbox {
        Bbox {
            min_lon: self.min_lon.min(other.min_lon),
            min_lat: self.min_lat.min(other.min_lat),
            max_lon: self.max_lon.max(other.max_lon),
            max_lat: self.max_lat.max(other.max_lat),
        }
    }

    fn contains(&self, p: Point) -> bool {
        p.lon >= self.min_lon
            && p.lon <= self.max_lon
            && p.lat >= self.min_lat
            && p.lat <= self.max_lat
    }
}

#[derive(Debug)]
struct Entry {
    bbox: Bbox,
    fua: usize,
}

/// Bounding-box grid over FUA parts. Candidate lookup returns a superset of
/// the FUAs that actually contain the query point.
#[derive(Debug)]
pub struct SpatialIndex {
    fuas: Vec<FunctionalUrbanArea>,
    areas: Vec<f64>,
    entries: Vec<Entry>,
    grid_bbox: Option<Bbox>,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl SpatialIndex {
    /// Build the index. FUAs are sorted by id so results never depend on
    /// input order. An empty collection yields an index with no candidates.
    pub fn build(mut fuas: Vec<FunctionalUrbanArea>) -> Self {
        fuas.sort_by(|a, b| a.fua_id.cmp(&b.fua_id));
        let areas: Vec<f64> = fuas.iter().map(|f| f.outer_area()).collect();

        let mut entries = Vec::new();
        for (fi, fua) in fuas.iter().enumerate() {
            for part in &fua.parts {
                entries.push(Entry {
                    bbox: Bbox::of_ring(&part.outer),
                    fua: fi,
                });
            }
        }

        let grid_bbox = entries.iter().map(|e| e.bbox).reduce(|a, b| a.union(&b));

        let n = (entries.len() as f64).sqrt().ceil() as usize;
        let nx = n.clamp(1, 64);
        let ny = nx;
        let mut cells = vec![Vec::new(); nx * ny];
        if let Some(gb) = grid_bbox {
            let w = (gb.max_lon - gb.min_lon).max(f64::MIN_POSITIVE);
            let h = (gb.max_lat - gb.min_lat).max(f64::MIN_POSITIVE);
            for (ei, e) in entries.iter().enumerate() {
                let x0 = (((e.bbox.min_lon - gb.min_lon) / w) * nx as f64) as usize;
                let x1 = (((e.bbox.max_lon - gb.min_lon) / w) * nx as f64) as usize;
                let y0 = (((e.bbox.min_lat - gb.min_lat) / h) * ny as f64) as usize;
                let y1 = (((e.bbox.max_lat - gb.min_lat) / h) * ny as f64) as usize;
                for x in x0..=x1.min(nx - 1) {
                    for y in y0..=y1.min(ny - 1) {
                        cells[y * nx + x].push(ei as u32);
                    }
                }
            }
        }

        Self {
            fuas,
            areas,
            entries,
            grid_bbox,
            nx,
            ny,
            cells,
        }
    }

    pub fn fuas(&self) -> &[FunctionalUrbanArea] {
        &self.fuas
    }

    pub fn is_empty(&self) -> bool {
        self.fuas.is_empty()
    }

    /// Indices of FUAs with at least one part whose bounding box contains `p`,
    /// sorted and deduplicated.
    pub fn candidates(&self, p: Point) -> Vec<usize> {
        let gb = match self.grid_bbox {
            Some(gb) if gb.contains(p) => gb,
            _ => return Vec::new(),
        };
        let w = (gb.max_lon - gb.min_lon).max(f64::MIN_POSITIVE);
        let h = (gb.max_lat - gb.min_lat).max(f64::MIN_POSITIVE);
        let x = ((((p.lon - gb.min_lon) / w) * self.nx as f64) as usize).min(self.nx - 1);
        let y = ((((p.lat - gb.min_lat) / h) * self.ny as f64) as usize).min(self.ny - 1);
        let mut out: Vec<usize> = self.cells[y * self.nx + x]
            .iter()
            .map(|&ei| &self.entries[ei as usize])
            .filter(|e| e.bbox.contains(p))
            .map(|e| e.fua)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Candidate FUA ids, for bounding-box oracle tests.
    pub fn candidate_ids(&self, p: Point) -> Vec<&str> {
        self.candidates(p)
            .into_iter()
            .map(|i| self.fuas[i].fua_id.as_str())
            .collect()
    }

    /// The containing FUA for `p`, if any, with how the hit was decided.
    /// Overlaps resolve to the smallest total outer-ring area, then lowest id.
    pub fn locate(&self, p: Point) -> Option<(&FunctionalUrbanArea, Containment)> {
        let mut best: Option<(usize, Containment)> = None;
        for fi in self.candidates(p) {
            let c = locate_in_fua(p, &self.fuas[fi]);
            if c == Containment::Exterior {
                continue;
            }
            best = match best {
                None => Some((fi, c)),
                Some((bi, bc)) => {
                    let key = (self.areas[fi], self.fuas[fi].fua_id.as_str());
                    let best_key = (self.areas[bi], self.fuas[bi].fua_id.as_str());
                    if key < best_key {
                        Some((fi, c))
                    } else {
                        Some((bi, bc))
                    }
                }
            };
        }
        best.map(|(fi, c)| (&self.fuas[fi], c))
    }

    /// The set of known city ids served by this index.
    pub fn universe(&self) -> CityUniverse {
        CityUniverse::from_ids(self.fuas.iter().map(|f| f.fua_id.clone()))
    }
}

/// The set of valid FUA ids, used to reject lookups against unknown cities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CityUniverse(BTreeSet<String>);

impl CityUniverse {
    pub fn from_ids<I: IntoIterator<Item = String>>(ids: I) -> Self {
        Self(ids.into_iter().collect())
    }

    pub fn contains(&self, fua_id: &str) -> bool {
        self.0.contains(fua_id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Assign one firm to its FUA, if any.
pub fn assign_fua(firm: &Firm, index: &SpatialIndex) -> Option<String> {
    index
        .locate(Point::new(firm.lon, firm.lat))
        .map(|(fua, _)| fua.fua_id.clone())
}

/// One coverage row per firm, in firm-id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentRow {
    pub firm_id: String,
    pub city: Option<String>,
    pub boundary: bool,
}

/// Outcome of assigning a whole snapshot: per-firm rows, per-country
/// coverage counts, and the known-city universe.
#[derive(Debug, Clone, Default)]
pub struct Assignments {
    pub rows: Vec<AssignmentRow>,
    /// country -> (assigned, unassigned)
    pub per_country: BTreeMap<String, (u64, u64)>,
    pub universe: CityUniverse,
}

impl Assignments {
    pub fn assigned_count(&self) -> u64 {
        self.per_country.values().map(|(a, _)| a).sum()
    }

    pub fn unassigned_count(&self) -> u64 {
        self.per_country.values().map(|(_, u)| u).sum()
    }

    /// Coverage report CSV: firm_id,fua_id|UNASSIGNED,flag.
    pub fn coverage_csv(&self) -> String {
        let mut out = String::from("firm_id,fua_id,flag\n");
        for row in &self.rows {
            let city = row.city.as_deref().unwrap_or("UNASSIGNED");
            let flag = if row.boundary { "BOUNDARY" } else { "" };
            out.push_str(&format!("{},{},{}\n", row.firm_id, city, flag));
        }
        out
    }
}

/// Fill `city_id` on every firm of the snapshot. Deterministic: firms are
/// visited in id order and each assignment depends only on the firm itself.
pub fn assign_all(snapshot: &Snapshot, index: &SpatialIndex) -> (Snapshot, Assignments) {
    let mut assigned = snapshot.clone();
    let mut rows = Vec::with_capacity(assigned.firms.len());
    let mut per_country: BTreeMap<String, (u64, u64)> = BTreeMap::new();

    for firm in assigned.firms.values_mut() {
        let hit = index.locate(Point::new(firm.lon, firm.lat));
        let (city, boundary) = match hit {
            Some((fua, c)) => (Some(fua.fua_id.clone()), c == Containment::Boundary),
            None => (None, false),
        };
        firm.city_id = city.clone();
        let slot = per_country.entry(firm.country.clone()).or_insert((0, 0));
        if city.is_some() {
            slot.0 += 1;
        } else {
            slot.1 += 1;
        }
        rows.push(AssignmentRow {
            firm_id: firm.firm_id.clone(),
            city,
            boundary,
        });
    }

    let assignments = Assignments {
        rows,
        per_country,
        universe: index.universe(),
    };
    (assigned, assignments)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64, side: f64) -> Vec<Point> {
        vec![
            Point::new(x0, y0),
            Point::new(x0 + side, y0),
            Point::new(x0 + side, y0 + side),
            Point::new(x0, y0 + side),
            Point::new(x0, y0),
        ]
    }

    fn fua(id: &str, outer: Vec<Point>) -> FunctionalUrbanArea {
        FunctionalUrbanArea {
            fua_id: id.to_string(),
            name: id.to_string(),
            country: "XA".to_string(),
            population: 1000,
            parts: vec![PolygonPart {
                outer,
                holes: Vec::new(),
            }],
        }
    }

    fn firm_at(id: &str, lon: f64, lat: f64) -> Firm {
        Firm {
            firm_id: id.to_string(),
            name: id.to_string(),
            lon,
            lat,
            country: "XA".to_string(),
            nace4: "6420".to_string(),
            turnover: Some(100.0),
            city_id: None,
        }
    }

    #[test]
    fn unit_square_area_is_one() {
        assert_eq!(ring_area(&square(0.0, 0.0, 1.0)), 1.0);
    }

    #[test]
    fn empty_index_returns_no_candidates() {
        let index = SpatialIndex::build(Vec::new());
        assert!(index.candidates(Point::new(0.5, 0.5)).is_empty());
        assert!(index.locate(Point::new(0.5, 0.5)).is_none());
    }

    #[test]
    fn disjoint_squares_yield_single_candidate() {
        let index = SpatialIndex::build(vec![
            fua("a", square(0.0, 0.0, 1.0)),
            fua("b", square(5.0, 0.0, 1.0)),
        ]);
        assert_eq!(index.candidate_ids(Point::new(0.5, 0.5)), vec!["a"]);
        assert_eq!(index.candidate_ids(Point::new(5.5, 0.5)), vec!["b"]);
    }

    #[test]
    fn overlapping_squares_yield_both_candidates() {
        // Overlap region [1,2]x[0,1]; bbox oracle says both boxes contain it.
        let index = SpatialIndex::build(vec![
            fua("a", square(0.0, 0.0, 2.0)),
            fua("b", square(1.0, 0.0, 2.0)),
        ]);
        assert_eq!(index.candidate_ids(Point::new(1.5, 0.5)), vec!["a", "b"]);
    }

    #[test]
    fn interior_point_is_assigned() {
        let index = SpatialIndex::build(vec![fua("a", square(0.0, 0.0, 1.0))]);
        let firm = firm_at("f1", 0.5, 0.5);
        assert_eq!(assign_fua(&firm, &index), Some("a".to_string()));
    }

    #[test]
    fn exterior_point_is_unassigned() {
        let index = SpatialIndex::build(vec![fua("a", square(0.0, 0.0, 1.0))]);
        let firm = firm_at("f1", 2.0, 2.0);
        assert_eq!(assign_fua(&firm, &index), None);
    }

    #[test]
    fn nested_overlap_resolves_to_smaller_area() {
        // Shoelace areas 1.0 vs 9.0; the unit square must win.
        let index = SpatialIndex::build(vec![
            fua("big", square(-1.0, -1.0, 3.0)),
            fua("small", square(0.0, 0.0, 1.0)),
        ]);
        let firm = firm_at("f1", 0.5, 0.5);
        assert_eq!(assign_fua(&firm, &index), Some("small".to_string()));
    }

    #[test]
    fn boundary_point_counts_as_inside() {
        let index = SpatialIndex::build(vec![fua("a", square(0.0, 0.0, 1.0))]);
        for p in [
            Point::new(0.0, 0.5),
            Point::new(1.0, 0.5),
            Point::new(0.5, 0.0),
            Point::new(0.0, 0.0),
        ] {
            let (hit, c) = index.locate(p).expect("boundary point must be inside");
            assert_eq!(hit.fua_id, "a");
            assert_eq!(c, Containment::Boundary);
        }
    }

    #[test]
    fn shared_edge_assigns_smaller_fua_with_boundary_flag() {
        // Two squares sharing the edge lon=1; "right" is smaller.
        let left = fua("left", square(0.0, 0.0, 1.0));
        let mut right = fua("right", square(1.0, 0.25, 0.5));
        right.parts[0].outer = vec![
            Point::new(1.0, 0.25),
            Point::new(1.5, 0.25),
            Point::new(1.5, 0.75),
            Point::new(1.0, 0.75),
            Point::new(1.0, 0.25),
        ];
        let index = SpatialIndex::build(vec![left, right]);

        let mut snap = Snapshot::new(2016);
        snap.insert_firm(firm_at("f1", 1.0, 0.5));
        let (assigned, report) = assign_all(&snap, &index);
        assert_eq!(
            assigned.firms["f1"].city_id.as_deref(),
            Some("right"),
            "smaller shoelace area wins on the shared edge"
        );
        assert!(report.rows[0].boundary);
        assert!(report.coverage_csv().contains("f1,right,BOUNDARY"));
    }

    #[test]
    fn hole_interior_is_outside() {
        let part = PolygonPart {
            outer: square(0.0, 0.0, 4.0),
            holes: vec![square(1.0, 1.0, 2.0)],
        };
        assert_eq!(
            locate_in_part(Point::new(2.0, 2.0), &part),
            Containment::Exterior
        );
        assert_eq!(
            locate_in_part(Point::new(0.5, 0.5), &part),
            Containment::Interior
        );
        assert_eq!(
            locate_in_part(Point::new(1.0, 2.0), &part),
            Containment::Boundary
        );
    }

    #[test]
    fn multipart_area_sums_parts() {
        let f = FunctionalUrbanArea {
            fua_id: "m".into(),
            name: "m".into(),
            country: "XA".into(),
            population: 0,
            parts: vec![
                PolygonPart {
                    outer: square(0.0, 0.0, 1.0),
                    holes: Vec::new(),
                },
                PolygonPart {
                    outer: square(3.0, 0.0, 2.0),
                    holes: Vec::new(),
                },
            ],
        };
        assert_eq!(f.outer_area(), 5.0);
    }

    #[test]
    fn coverage_mixed_fixture_is_seventy_percent() {
        let index = SpatialIndex::build(vec![fua("a", square(0.0, 0.0, 1.0))]);
        let mut snap = Snapshot::new(2016);
        // 7 hand-placed interior points, 3 exterior.
        for (i, (lon, lat)) in [
            (0.1, 0.1),
            (0.2, 0.8),
            (0.5, 0.5),
            (0.9, 0.9),
            (0.3, 0.4),
            (0.7, 0.2),
            (0.6, 0.6),
            (5.0, 5.0),
            (-2.0, 0.5),
            (0.5, 9.0),
        ]
        .iter()
        .enumerate()
        {
            snap.insert_firm(firm_at(&format!("f{i:02}"), *lon, *lat));
        }
        let (_, report) = assign_all(&snap, &index);
        assert_eq!(report.assigned_count(), 7);
        assert_eq!(report.unassigned_count(), 3);
        let unassigned: Vec<_> = report.rows.iter().filter(|r| r.city.is_none()).collect();
        assert_eq!(unassigned.len(), 3);
    }

    #[test]
    fn assign_all_is_idempotent() {
        let index = SpatialIndex::build(vec![
            fua("a", square(0.0, 0.0, 1.0)),
            fua("b", square(2.0, 0.0, 1.0)),
        ]);
        let mut snap = Snapshot::new(2010);
        snap.insert_firm(firm_at("f1", 0.5, 0.5));
        snap.insert_firm(firm_at("f2", 2.5, 0.5));
        snap.insert_firm(firm_at("f3", 9.0, 9.0));
        let (once, r1) = assign_all(&snap, &index);
        let (twice, r2) = assign_all(&once, &index);
        assert_eq!(once, twice);
        assert_eq!(r1.rows, r2.rows);
    }

    #[test]
    fn adding_fua_never_unassigns() {
        let base = vec![fua("a", square(0.0, 0.0, 2.0))];
        let mut extended = base.clone();
        extended.push(fua("inner", square(0.5, 0.5, 0.5)));

        let before = SpatialIndex::build(base);
        let after = SpatialIndex::build(extended);
        let mut snap = Snapshot::new(2013);
        snap.insert_firm(firm_at("f1", 0.75, 0.75));
        snap.insert_firm(firm_at("f2", 1.5, 1.5));
        let (snap_before, _) = assign_all(&snap, &before);
        let (snap_after, _) = assign_all(&snap, &after);
        for (id, firm) in &snap_before.firms {
            if firm.city_id.is_some() {
                assert!(
                    snap_after.firms[id].city_id.is_some(),
                    "{id} lost its assignment"
                );
            }
        }
        // The nested point re-assigns to the smaller FUA.
        assert_eq!(snap_after.firms["f1"].city_id.as_deref(), Some("inner"));
    }
}
