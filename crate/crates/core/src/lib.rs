//! Knowledge patterns: reusable first-order theories that are specialised to
//! a domain by symbol-renaming morphisms, assembled into knowledge bases and
//! evaluated by a stratified Horn-clause reasoner.

pub mod cli;
pub mod compose;
pub mod eval;
pub mod morphism;
pub mod oracle;
pub mod stdlib;
pub mod syntax;
pub mod terms;
