//! Batch analytics for inter-urban corporate ownership networks.
//!
//! The crate reconstructs firm-level ownership graphs from CSV and GeoJSON
//! inputs, assigns firms to functional urban areas, extracts depth-2
//! control chains around a focal city, computes share-weighted
//! ownership-revenue metrics and city-pair flows, and characterises city
//! specialisation with correspondence analysis.
//!
//! Modules follow the pipeline order:
//!
//! * [`ingest`] - CSV/GeoJSON parsing with per-row quarantine.
//! * [`geo`] - point-in-polygon city assignment over an indexed boundary set.
//! * [`netgraph`] - ownership graph, geographic scopes, L1->L2->L3 chains.
//! * [`metrics`] - the ownership-links-revenue index and its aggregates.
//! * [`ca`] - correspondence analysis, trajectories and SVG maps.
//!
//! Everything is deterministic: identical inputs produce byte-identical
//! outputs regardless of iteration or thread interleaving.

pub mod ca;
pub mod geo;
pub mod ingest;
pub mod metrics;
pub mod netgraph;
