//! Scientometric prediction toolkit: citation corpus ingestion, impact
//! factors, future h-index regression and paper-contribution classification.

pub mod artifacts;
pub mod collabnet;
pub mod corpus;
pub mod evalkit;
pub mod factorlab;
pub mod learners;
pub mod persist;
pub mod pipeline;
pub mod scholarmetrics;
pub mod synth;
pub mod topicmodel;
