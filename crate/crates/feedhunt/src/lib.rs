//! Analytics over antivirus scan-report feeds.
//!
//! The pipeline ingests line-delimited scan reports (one scan of one sample
//! per line), reduces them to per-sample feature vectors, clusters samples
//! at scale, scores cluster quality against ground truth, and hunts for
//! samples whose zero detections look out of place next to their cluster.
//!
//! Modules follow the pipeline stages:
//!
//! - [`report`]: the report record and its wire format
//! - [`filetype`]: canonical filetype vote over report evidence
//! - [`labeler`]: family plurality labeling from AV detection names
//! - [`features`]: per-sample feature vectors and the feature file
//! - [`tlsh`]: fuzzy-digest decoding and distance
//! - [`cluster`]: feature-value grouping, single-linkage clustering, and
//!   threshold clustering over a vantage-point tree
//! - [`evaluation`]: precision/recall/F1 against family ground truth
//! - [`hunting`]: cluster verdicts, undetected-sample flagging, and
//!   originally-fully-undetected detection
//! - [`stats`]: feed characterization
//! - [`extsort`]: the external merge sort behind the disk-based paths
//! - [`synth`]: synthetic feeds with ground-truth manifests

pub mod cluster;
pub mod evaluation;
pub mod extsort;
pub mod features;
pub mod filetype;
pub mod hunting;
pub mod labeler;
pub mod report;
pub mod stats;
pub mod synth;
pub mod time;
pub mod tlsh;

pub use cluster::{Clustering, DistanceSpec, SingletonReason};
pub use features::{ClusterFeature, SampleFeatures};
pub use labeler::{LabelResult, Taxonomy};
pub use report::ReportRecord;
pub use time::TimeWindow;
pub use tlsh::TlshDigest;
