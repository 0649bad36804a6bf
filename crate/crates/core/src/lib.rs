//! Migration of crosscutting concerns to aspects, organised by concern sort:
//! fact extraction, aspect mining, sort queries, a persistent concern model
//! and template-based refactoring plans.

pub mod concern_model;
pub mod corpus;
pub mod ids;
pub mod minilang;
pub mod mining;
pub mod queries;
pub mod refactoring;
pub mod source_model;

pub use concern_model::{ConcernError, CONCERN_SCHEMA_VERSION, ConcernModel, ConcernNode, DriftReport, Instance, Snapshot};
pub use ids::{CallId, FieldId, MethodId, TypeId};
pub use mining::{MiningConfig, Seed};
pub use queries::{execute, Hit, QueryBinding, QueryError, QueryResult, SortKind};
pub use refactoring::{plan, plan_group, PlanError, PlanOptions, RefactoringPlan, RiskCode};
pub use source_model::{DispatchPolicy, FactsError, SourceModel, FACTS_SCHEMA_VERSION};
