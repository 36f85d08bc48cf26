//! Adversarial driving-scenario toolkit.
//!
//! The crate covers the full evaluation loop for perception attacks against
//! LLM-based driving agents:
//!
//! - [`scene`]: domain model (scenes, events, tracked objects, decisions) and
//!   invariant validation.
//! - [`dsl`]: text codec for the scene format plus raw-log ingestion.
//! - [`oracle`]: kinematic safe-decision oracle (TTC analysis, forward
//!   simulation, conservative labeling).
//! - [`forge`]: benign scene generation and the attack-goal mutator registry.
//! - [`prompt`]: scene-to-prose rendering and prompt assembly.
//! - [`gateway`]: pluggable LLM backends (scripted mock, remote HTTP).
//! - [`verdict`]: response parsing, inconsistency classification, judging and
//!   metric aggregation.
//! - [`campaign`]: batch runner, ablations and reporting.

pub mod campaign;
pub mod dsl;
pub mod forge;
pub mod gateway;
pub mod oracle;
pub mod prompt;
pub mod scene;
pub mod verdict;
