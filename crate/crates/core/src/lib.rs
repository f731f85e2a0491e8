//! EEG affect-recognition toolkit.
//!
//! The crate covers the full desk-scale pipeline for valence/arousal
//! classification from multi-channel EEG:
//!
//! * [`signal`] — trial/rating data model, canonical on-disk dataset format,
//!   channel selection, and a seeded synthetic-EEG generator.
//! * [`filter`] — equiripple (Parks–McClellan) linear-phase FIR band-pass
//!   design and zero-phase decomposition into the δ/θ/α/β bands.
//! * [`features`] — statistical descriptors, per-band log power, and Higher
//!   Order Crossing sequences assembled into layout-tagged feature vectors.
//! * [`labeling`] — SAM-rating → Low/Medium/High mapping under the
//!   bipartition and tripartition schemes.
//! * [`classifiers`] — from-scratch linear C-SVM (dual coordinate descent)
//!   and Random Forest with a shared train/predict/score contract.
//! * [`evaluation`] — stratified k-fold cross-validation, accuracy tables,
//!   ROC curves, and class-conditional feature histograms.
//!
//! Everything is deterministic given the seeds carried by the configuration
//! types; no operation reads ambient randomness or wall-clock time.

mod bands;

pub mod classifiers;
pub mod evaluation;
pub mod features;
pub mod filter;
pub mod labeling;
pub mod seed;
pub mod signal;

pub use classifiers::{ClassifierKind, TrainConfig, TrainedModel};
pub use features::{FeatureDescriptor, FeatureMethod, FeatureVector};
pub use filter::{BandDefinition, BandName, FilterSpec, FirCoefficients};
pub use labeling::{AffectDimension, Label, LabeledDataset, PartitionScheme};
pub use signal::{ChannelId, Dataset, Ratings, TrialKey, TrialRecording};
