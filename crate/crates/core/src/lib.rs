//! Core models for a patient-monitoring chatbot backed by a literature
//! knowledge graph.
//!
//! The pipeline runs corpus → [`ner`] → [`kg`]; conversations run through
//! [`dialogue`], which records events into [`patient`] profiles and answers
//! drug-attribute questions from the graph.

pub mod corpus;
pub mod ner;
pub mod kg;
pub mod analysis;
pub mod patient;
pub mod dialogue;
