//! Parsing, deterministic rewriting and rule-based validation of ABB RAPID
//! movement routines, plus the harness used to evaluate LLM-generated
//! rewrites of them.

pub mod config;
pub mod corpus;
pub mod exec;
pub mod inference;
pub mod metrics;
pub mod prompts;
pub mod syntax;
pub mod transforms;
pub mod validator;
