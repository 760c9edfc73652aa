//! Harness for studying code prompting on conditional-reasoning QA.
//!
//! The crate converts QA instances into a restricted pseudo-code dialect with a
//! two-step LLM chain, runs text baselines and code ablations, probes how well
//! the model tracks key entities mid-reasoning, and scores everything. Every
//! model call goes through [`llm::LlmClient`], which can replay recorded
//! fixtures so whole experiments are reproducible offline.

pub mod pseudocode;
pub mod corpus;
pub mod prompts;
pub mod llm;
pub mod chain;
pub mod eval;
pub mod experiment;
