pub mod analysis;
pub mod chaid;
pub mod encoding;
pub mod regress;
pub mod report;
pub mod ingest;
pub mod manifest;
pub mod scoring;
pub mod statcore;
pub mod types;
