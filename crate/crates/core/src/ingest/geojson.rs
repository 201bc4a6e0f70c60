//! GeoJSON-subset boundary parsing: FeatureCollections of Polygon and
//! MultiPolygon features with id, name and population properties.

use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::geo::{FunctionalUrbanArea, Point, PolygonPart};

use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuaRejectReason {
    MissingId,
    DupId,
    BadGeometry,
    BadCoordinates,
    RingShort,
    RingOpen,
    ZeroArea,
}

impl FuaRejectReason {
    pub fn code(&self) -> &'static str {
        match self {
            FuaRejectReason::MissingId => "MISSING_ID",
            FuaRejectReason::DupId => "DUP_ID",
            FuaRejectReason::BadGeometry => "BAD_GEOMETRY",
            FuaRejectReason::BadCoordinates => "BAD_COORDINATES",
            FuaRejectReason::RingShort => "RING_SHORT",
            FuaRejectReason::RingOpen => "RING_OPEN",
            FuaRejectReason::ZeroArea => "ZERO_AREA",
        }
    }
}

/// A feature that failed validation, with its index in the collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuaRejection {
    pub feature_index: usize,
    pub fua_id: Option<String>,
    pub reason: FuaRejectReason,
}

/// Parse an FUA boundary file. Invalid features are rejected individually;
/// only an unreadable or structurally broken file is fatal.
pub fn parse_fua(
    path: &Path,
) -> Result<(Vec<FunctionalUrbanArea>, Vec<FuaRejection>), IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_fua_str(&text, &path.display().to_string())
}

/// String-based variant of [`parse_fua`].
pub fn parse_fua_str(
    text: &str,
    path: &str,
) -> Result<(Vec<FunctionalUrbanArea>, Vec<FuaRejection>), IngestError> {
    let root: Value = serde_json::from_str(text).map_err(|e| IngestError::Malformed {
        path: path.to_string(),
        message: format!("invalid JSON: {e}"),
    })?;
    if root.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(IngestError::Malformed {
            path: path.to_string(),
            message: "expected a FeatureCollection".to_string(),
        });
    }
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| IngestError::Malformed {
            path: path.to_string(),
            message: "missing features array".to_string(),
        })?;

    let mut fuas: Vec<FunctionalUrbanArea> = Vec::new();
    let mut seen_ids = std::collections::BTreeSet::new();
    let mut rejections = Vec::new();

    for (i, feature) in features.iter().enumerate() {
        let props = feature.get("properties").cloned().unwrap_or(Value::Null);
        let fua_id = props.get("id").and_then(property_string);
        let reject = |id: Option<String>, reason| FuaRejection {
            feature_index: i,
            fua_id: id,
            reason,
        };

        let Some(fua_id) = fua_id else {
            rejections.push(reject(None, FuaRejectReason::MissingId));
            continue;
        };
        if seen_ids.contains(&fua_id) {
            rejections.push(reject(Some(fua_id), FuaRejectReason::DupId));
            continue;
        }
        let name = props
            .get("name")
            .and_then(property_string)
            .unwrap_or_else(|| fua_id.clone());
        let country = props
            .get("country")
            .and_then(property_string)
            .unwrap_or_default();
        let population = props
            .get("population")
            .and_then(Value::as_f64)
            .filter(|v| *v >= 0.0)
            .map(|v| v as u64)
            .unwrap_or(0);

        let geometry = feature.get("geometry").cloned().unwrap_or(Value::Null);
        let parts = match parse_geometry(&geometry) {
            Ok(parts) => parts,
            Err(reason) => {
                rejections.push(reject(Some(fua_id), reason));
                continue;
            }
        };

        seen_ids.insert(fua_id.clone());
        fuas.push(FunctionalUrbanArea {
            fua_id,
            name,
            country,
            population,
            parts,
        });
    }

    fuas.sort_by(|a, b| a.fua_id.cmp(&b.fua_id));
    Ok((fuas, rejections))
}

fn property_string(value: &Value) -> Option<String> {
    match value {
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn parse_geometry(geometry: &Value) -> Result<Vec<PolygonPart>, FuaRejectReason> {
    let gtype = geometry
        .get("type")
        .and_then(Value::as_str)
        .ok_or(FuaRejectReason::BadGeometry)?;
    let coords = geometry
        .get("coordinates")
        .and_then(Value::as_array)
        .ok_or(FuaRejectReason::BadGeometry)?;
    match gtype {
        "Polygon" => Ok(vec![parse_polygon(coords)?]),
        "MultiPolygon" => {
            if coords.is_empty() {
                return Err(FuaRejectReason::BadGeometry);
            }
            coords
                .iter()
                .map(|poly| {
                    poly.as_array()
                        .ok_or(FuaRejectReason::BadGeometry)
                        .and_then(|rings| parse_polygon(rings))
                })
                .collect()
        }
        _ => Err(FuaRejectReason::BadGeometry),
    }
}

fn parse_polygon(rings: &[Value]) -> Result<PolygonPart, FuaRejectReason> {
    if rings.is_empty() {
        return Err(FuaRejectReason::BadGeometry);
    }
    let mut parsed = rings.iter().map(parse_ring);
    let outer = parsed.next().unwrap()?;
    if crate::geo::ring_area(&outer) <= 0.0 {
        return Err(FuaRejectReason::ZeroArea);
    }
    let holes = parsed.collect::<Result<Vec<_>, _>>()?;
    Ok(PolygonPart { outer, holes })
}

fn parse_ring(ring: &Value) -> Result<Vec<Point>, FuaRejectReason> {
    let vertices = ring.as_array().ok_or(FuaRejectReason::BadCoordinates)?;
    let mut out = Vec::with_capacity(vertices.len());
    for v in vertices {
        let pair = v.as_array().ok_or(FuaRejectReason::BadCoordinates)?;
        if pair.len() < 2 {
            return Err(FuaRejectReason::BadCoordinates);
        }
        let lon = pair[0].as_f64().ok_or(FuaRejectReason::BadCoordinates)?;
        let lat = pair[1].as_f64().ok_or(FuaRejectReason::BadCoordinates)?;
        if !lon.is_finite() || !lat.is_finite() {
            return Err(FuaRejectReason::BadCoordinates);
        }
        out.push(Point::new(lon, lat));
    }
    if out.len() < 4 {
        return Err(FuaRejectReason::RingShort);
    }
    if out.first() != out.last() {
        return Err(FuaRejectReason::RingOpen);
    }
    Ok(out)
}
