//! Inputs shared by the criterion benches.

/// Queries over the bundled MaRDI fixture, from a single lookup to
/// aggregation with an optional match.
pub const MARDI_QUERIES: &[(&str, &str)] = &[
    (
        "lookup",
        "MATCH (s:SoftwarePackage {name:'graphclust'})-[:HAS_AUTHOR]->(a:Author) RETURN a.name",
    ),
    (
        "top_authors",
        "MATCH (a:Author)<-[:HAS_AUTHOR]-(s:SoftwarePackage) RETURN a.name AS authorName, COUNT(s) AS packageCount ORDER BY packageCount DESC LIMIT 10",
    ),
    (
        "optional_collect",
        "MATCH (a:Author) OPTIONAL MATCH (a)<-[:HAS_AUTHOR]-(d:Dataset) RETURN a.name, COLLECT(d) AS datasets",
    ),
    (
        "shared_authors",
        "MATCH (a:Author)<-[:HAS_AUTHOR]-(d1:Dataset), (a)<-[:HAS_AUTHOR]-(d2:Dataset) WHERE d1.name <> d2.name RETURN DISTINCT a.name",
    ),
];

/// Discordance counts for a five-model pairwise comparison.
pub fn discordance_family() -> Vec<(String, String, u64, u64)> {
    let models = ["m1", "m2", "m3", "m4", "m5"];
    let mut out = Vec::new();
    for (i, a) in models.iter().enumerate() {
        for (j, b) in models.iter().enumerate().skip(i + 1) {
            out.push((a.to_string(), b.to_string(), (3 * i + j) as u64, (2 * j + 7) as u64));
        }
    }
    out
}
