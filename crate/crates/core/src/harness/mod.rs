//! Experiment protocol: configs, oracles, training, studies and reports.

pub mod config;
pub mod experiments;
pub mod oracle;
pub mod report;
pub mod scenario;
pub mod train;

pub use config::{ExperimentConfig, HarnessError, LearnerConfig, Method};
pub use experiments::{
    ablation_text, find_action, input_weights, interpretability_report, run_ablation, run_comparison, run_comparison_with_models,
    run_event_study, top_k_agreement, AblationRow, FeatureWeight, TrainedModel,
};
pub use oracle::{CaseRule, Oracle, OracleError, OracleKind, ValueTable};
pub use report::{ReportRow, ReportTable, SummaryRow};
pub use scenario::{EvalState, Scenario};
pub use train::{eval_pass_rate, pass_rate, Arm, TrainOutcome, Trainer};
