//! Schema-based reinforcement learning: a pool of option nodes grown by
//! accommodation, weighted by trace-discounted assimilation, and queried by
//! attention-weighted nearest-node matching, together with native
//! classic-control environments and an experiment harness.

pub mod config;
pub mod env;
pub mod error;
pub mod harness;
pub mod inference;
pub mod interpret;
pub mod learning;
pub mod option_graph;
pub mod trace;

pub use config::RunFileConfig;
pub use env::{Action, ActionMode, Env, EnvironmentSpec, StepResult};
pub use error::{Error, Result};
pub use harness::{run_experiment, ExperimentConfig, RunRecord};
pub use inference::{DecisionPath, InferenceConfig};
pub use learning::{Decision, Learner, LearnerConfig, TraceBuffer};
pub use option_graph::{AttentionWeights, Edge, NodeId, NodeKind, OptionNode, OptionPool};
pub use trace::TraceRow;
