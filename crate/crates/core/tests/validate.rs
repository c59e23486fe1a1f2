use graphtalk::schema::preset;
use graphtalk::syntax::parse_query;
use graphtalk::validate::*;
use proptest::prelude::*;

fn kinds(q: &str, schema: &str) -> Vec<PerturbationKind> {
    let ast = parse_query(q).unwrap();
    validate(&ast, &preset(schema).unwrap())
        .unwrap()
        .into_iter()
        .map(|d| d.kind)
        .collect()
}

fn movie(q: &str) -> Vec<PerturbationKind> {
    kinds(q, "movie")
}

#[test]
fn nonsense_relationship_only() {
    let ast = parse_query("MATCH (a:Actor)-[:EATS]->(m:Movie) RETURN a.name, m.title").unwrap();
    let d = validate(&ast, &preset("movie").unwrap()).unwrap();
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].kind, PerturbationKind::NonsenseRelLabel);
    assert_eq!(d[0].message, "relationship EATS does not exist between Actor and Movie");
}

#[test]
fn clean_query_has_no_diagnostics() {
    assert!(movie(r#"MATCH (p:Person {name:"Alice"})-[:ACTED_IN]->(m:Movie) RETURN p, m"#).is_empty());
}

#[test]
fn flipped_direction() {
    assert_eq!(
        movie("MATCH (m:Movie)-[:ACTED_IN]->(p:Person) RETURN p.name"),
        vec![PerturbationKind::FlippedDirection]
    );
    assert_eq!(
        movie("MATCH (m:Movie)<-[:ACTED_IN]-(p:Person) RETURN p.name"),
        vec![]
    );
}

#[test]
fn where_faults() {
    let base = "MATCH (p:Person)-[:ACTED_IN]->(m:Movie) WHERE ";
    assert_eq!(
        movie(&format!("{base}m.release_year > 2020 AND m.release_year < 2019 RETURN m.title")),
        vec![PerturbationKind::ContradictoryWhere]
    );
    assert_eq!(
        movie(&format!("{base}m.title > 2020 RETURN m.title")),
        vec![PerturbationKind::IllFormedValueTest]
    );
    assert_eq!(
        movie(&format!("{base}m.release_year = -1 RETURN m.title")),
        vec![PerturbationKind::IllogicalWhereValue]
    );
    assert_eq!(
        movie(&format!("{base}m.release_year > 2000 RETURN m.title")),
        vec![]
    );
    // disjunctions are not tested for contradictions
    assert_eq!(
        movie(&format!("{base}m.release_year > 2020 OR m.release_year < 2019 RETURN m.title")),
        vec![]
    );
}

#[test]
fn nonsense_node_label() {
    assert_eq!(
        movie("MATCH (a:Person)-[:ACTED_IN]->(m:Food) RETURN a"),
        vec![PerturbationKind::NonsenseNodeLabel]
    );
    assert_eq!(
        movie("MATCH (a:Person)-[:ACTED_IN]->(m:City) RETURN a"),
        vec![PerturbationKind::NonsenseNodeLabel]
    );
    assert_eq!(movie("MATCH (f:Cloud) RETURN f"), vec![PerturbationKind::NonsenseNodeLabel]);
}

#[test]
fn misleading_variable_name() {
    assert_eq!(
        movie("MATCH (p:Person)-[:ACTED_IN]->(city) RETURN city.title"),
        vec![PerturbationKind::MissingNodeTypeMisleadingName]
    );
    // generic names and consistent names are left alone
    assert!(movie("MATCH (p:Person)-[:ACTED_IN]->(x) RETURN x").is_empty());
    assert!(movie("MATCH (p:Person)-[:ACTED_IN]->(movie) RETURN movie").is_empty());
    assert!(movie("MATCH (p:Person)-[:ACTED_IN]->(movie2) RETURN movie2").is_empty());
}

#[test]
fn unknown_variable_is_an_error() {
    let ast = parse_query("MATCH (p:Person) WHERE q.name = 'x' RETURN p").unwrap();
    assert_eq!(
        validate(&ast, &preset("movie").unwrap()),
        Err(ValidateError::UnknownVariable { name: "q".into() })
    );
}

#[test]
fn reference_queries_are_clean() {
    for q in [
        "MATCH (s:SoftwarePackage {name:'graphclust'})-[:HAS_AUTHOR]->(a:Author) RETURN a.name",
        "MATCH (p:Publication {name:\"graphclust\"})-[:HAS_AUTHOR]->(a:Author) RETURN a.name",
        "MATCH (p:Author)<-[:HAS_AUTHOR]-(d:Dataset) WITH p, COUNT(d) AS numberOfDatasets WHERE numberOfDatasets >= 5 RETURN p.name AS authorName, numberOfDatasets ORDER BY numberOfDatasets DESC",
        "MATCH (p:SoftwarePackage) WHERE NOT (p)-[:HAS_AUTHOR]->(:Author) RETURN p.packageId AS packageId, p.name AS packageName",
    ] {
        assert!(kinds(q, "mardi").is_empty(), "{q}");
    }
    assert_eq!(
        kinds(
            "MATCH (a:Author)-[:HAS_AUTHOR]->(s:SoftwarePackage) RETURN a.name, COUNT(s) AS packageCount ORDER BY packageCount DESC LIMIT 10",
            "mardi"
        ),
        vec![PerturbationKind::FlippedDirection]
    );
}

fn op_strategy() -> impl Strategy<Value = (&'static str, graphtalk::syntax::CompareOp)> {
    use graphtalk::syntax::CompareOp::*;
    prop::sample::select(vec![
        ("=", Eq),
        ("<>", Ne),
        ("<", Lt),
        ("<=", Le),
        (">", Gt),
        (">=", Ge),
    ])
}

fn holds(op: graphtalk::syntax::CompareOp, x: f64, a: f64) -> bool {
    use graphtalk::syntax::CompareOp::*;
    match op {
        Eq => x == a,
        Ne => x != a,
        Lt => x < a,
        Le => x <= a,
        Gt => x > a,
        Ge => x >= a,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    /// Integer-typed property: brute force over a range well beyond the constants.
    #[test]
    fn contradiction_matches_integer_brute_force(
        cons in prop::collection::vec((op_strategy(), -6i64..=6), 1..=4)
    ) {
        let text = cons
            .iter()
            .map(|((s, _), v)| format!("m.release_year {s} {v}"))
            .collect::<Vec<_>>()
            .join(" AND ");
        let q = format!("MATCH (m:Movie) WHERE {text} RETURN m");
        let flagged = movie(&q).contains(&PerturbationKind::ContradictoryWhere);
        let sat = (-50..=50).any(|x| cons.iter().all(|((_, op), a)| holds(*op, x as f64, *a as f64)));
        prop_assert_eq!(flagged, !sat, "{}", q);
    }

    /// Float-typed property: constants on a half-integer grid, witnesses on a quarter grid.
    #[test]
    fn contradiction_matches_real_brute_force(
        cons in prop::collection::vec((op_strategy(), -8i64..=8), 1..=4)
    ) {
        let text = cons
            .iter()
            .map(|((s, _), v)| format!("m.rating {s} {:?}", *v as f64 / 2.0))
            .collect::<Vec<_>>()
            .join(" AND ");
        let q = format!("MATCH (m:Movie) WHERE {text} RETURN m");
        let flagged = movie(&q).contains(&PerturbationKind::ContradictoryWhere);
        let sat = (-200..=200).any(|x| {
            let x = x as f64 / 4.0;
            cons.iter().all(|((_, op), a)| holds(*op, x, *a as f64 / 2.0))
        });
        prop_assert_eq!(flagged, !sat, "{}", q);
    }
}
