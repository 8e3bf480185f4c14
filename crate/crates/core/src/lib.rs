//! Proof checking and proof construction for the Calculus of Constructions
//! with existential variables, constraints and sections in contexts.

pub mod context;
pub mod db;
pub mod engine;
pub mod error;
pub mod kernel;
pub mod reduction;
pub mod session;
pub mod tactics;
pub mod term;
pub mod typing;
pub mod unify;
pub mod vernacular;

pub use context::{Classification, Context, Item, Quantifier};
pub use engine::{Config, EngineState};
pub use error::{Error, Result};
pub use reduction::Fuel;
pub use term::{Name, Sort, Term};
