pub mod presets;
pub mod schema;
pub mod syntax;
pub mod validate;
pub mod benchmark;
pub mod engine;
pub mod llm;
pub mod dialogue;
pub mod eval;
