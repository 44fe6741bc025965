//! Legal consultation pipeline: client intake with conflict screening,
//! document ingestion, an adaptive interview, federated research across
//! several legal databases, citation consolidation and report generation.

pub mod bench;
pub mod clock;
pub mod config;
pub mod conflict;
pub mod consolidation;
pub mod domain;
pub mod ingest;
pub mod interview;
pub mod llm;
pub mod orchestrator;
pub mod report;
pub mod providers;
pub mod research;
pub mod scenario;
pub mod text;
