//! Data files bundled into the library: schema presets, fixture graphs and
//! prompt templates.

pub fn schema_text(name: &str) -> Option<&'static str> {
    match name {
        "movie" => Some(include_str!("../../../schemas/movie.schema")),
        "mardi" => Some(include_str!("../../../schemas/mardi.schema")),
        "hyena" => Some(include_str!("../../../schemas/hyena.schema")),
        _ => None,
    }
}

pub fn fixture_text(name: &str) -> Option<&'static str> {
    match name {
        "movie" => Some(include_str!("../../../fixtures/movie.graph")),
        "mardi" => Some(include_str!("../../../fixtures/mardi.graph")),
        "hyena" => Some(include_str!("../../../fixtures/hyena.graph")),
        _ => None,
    }
}

/// Prompt template text by file stem. Panics on an unknown stem.
pub fn prompt_text(stem: &str) -> &'static str {
    match stem {
        "generation" => include_str!("../../../prompts/generation.txt"),
        "explanation" => include_str!("../../../prompts/explanation.txt"),
        "amendment" => include_str!("../../../prompts/amendment.txt"),
        "hyena_generation" => include_str!("../../../prompts/hyena_generation.txt"),
        other => panic!("no bundled prompt `{other}`"),
    }
}
