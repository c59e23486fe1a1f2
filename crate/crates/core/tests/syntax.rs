use graphtalk::syntax::*;
use proptest::prelude::*;

const CORPUS: &[&str] = &[
    "MATCH (p:Publication {name:\"graphclust\"})-[:HAS_AUTHOR]->(a:Author)\nRETURN a.name;",
    "MATCH (s:SoftwarePackage {name:'graphclust'})-[:HAS_AUTHOR]->(a:Author)\nRETURN a.name;",
    "MATCH (a:Actor)-[:ACTED_IN]->(m:Movie) \nWHERE m.release_year > 2000 \nRETURN a.name, m.title",
    "MATCH (p:Person)-[:ACTED_IN]->(m:Movie) RETURN p.name, m.title",
    "MATCH (p:Person)-[:ACTED_IN]->(m:Movie)<-[:HAS_FAVORITE]-(c:Critic) RETURN p.name, c.name",
    "MATCH (p:Person {name: \"Alice\"})-[:ACTED_IN]->(m:Movie) \nRETURN p, m, \n    CASE WHEN m.release_year < 2010 THEN 'old' ELSE 'new' END as movie_age",
    "MATCH (a:Actor)-[:EATS]->(m:Movie)\nRETURN a.name, m.title",
    "MATCH (a:Actor)-[EATS]->(m:Movie) RETURN a.name, m.title",
    "MATCH (a:Author)-[:HAS_AUTHOR]->(s:SoftwarePackage) \n        RETURN a.name, COUNT(s) AS packageCount ORDER BY packageCount DESC LIMIT 10",
    "MATCH (s:SoftwarePackage)-[:HAS_AUTHOR]->(a:Author) \n        RETURN a.name, COUNT(s) AS packageCount ORDER BY packageCount DESC LIMIT 10",
    "MATCH (cub:Hyena)-[:HAS_FATHER]->(dad:Hyena) \n        OPTIONAL MATCH (dad)-[:BIRTH_CLAN]->(bc:Clan) \n        OPTIONAL MATCH (dad)-[:CURRENT_CLAN]->(cc:Clan) \n        WITH COUNT(cub) AS totalCubs, \n        SUM(CASE WHEN dad.sex = 'male' AND bc = cc THEN 1 ELSE 0 END) AS philopatCubs \n        RETURN philopatCubs * 1.0 / totalCubs AS proportion",
    "MATCH (cub:Hyena)-[:HAS_FATHER]->(dad:Hyena) \n        OPTIONAL MATCH (dad)-[:BIRTH_CLAN]->(clan:Clan)<-[:CURRENT_CLAN]-(dad) \n        WITH COUNT(cub) AS totalCubs, \n        COUNT\n            (CASE WHEN dad.sex = 'male' AND clan IS NOT NULL  \n                AND NOT (dad)-[:CHANGED_CLAN]->() THEN 1 END) \n            AS philopatricCubs \n        RETURN toFloat(philopatricCubs) / totalCubs AS proportion",
    "MATCH (t:Tree)-[r:WAS_CUT]->(:Event) RETURN t.name, COUNT(*) AS cuttings ORDER BY cuttings",
    "MATCH (sp:SoftwarePackage {name:\"graphclust\"})-[:HAS_AUTHOR]\n->(a:Author) RETURN a;",
    "MATCH (p:Publication) WHERE p.title CONTAINS \"Pareto\" MATCH (p)-[:HAS_AUTHOR]->(a:Author) RETURN DISTINCT a.name AS authorName, a.authorId AS authorId",
    "MATCH (a:Author)<-[:HAS_AUTHOR]-(s:SoftwarePackage) RETURN a.name AS authorName, a.authorId AS authorId, COUNT(s) AS packageCount ORDER BY packageCount DESC LIMIT 10",
    "MATCH (a:Author { name: \"Rob Hyndman\" })<-[:HAS_AUTHOR]-(d:Dataset) RETURN count(d) AS numberOfDatasets",
    "MATCH (p:Author)<-[:HAS_AUTHOR]-(d:Dataset) WITH p, COUNT(d) AS numberOfDatasets WHERE numberOfDatasets >= 5 RETURN p.name AS authorName,  numberOfDatasets ORDER BY numberOfDatasets DESC",
    "MATCH (a:Author) OPTIONAL MATCH (a)<-[:HAS_AUTHOR]\n-(d:Dataset) RETURN a.name AS authorName, a.authorId AS authorId, COLLECT(d) AS datasets\t",
    "MATCH (a:Author)<-[:HAS_AUTHOR]-(d1:Dataset), (a)<-[:HAS_AUTHOR]-(d2:Dataset) WHERE d1.name = \"Bitcoin Dataset with Missing Values\" AND d2.name = \"Rideshare Dataset without Missing Values\" RETURN a.name AS authorName, a.authorId AS authorId",
    "MATCH (p:SoftwarePackage) WHERE NOT (p)-[:HAS_AUTHOR] ->(:Author) RETURN p.packageId AS packageId, p.name AS packageName",
];

const SHARED_AUTHORS: &str = "MATCH (p:SoftwarePackage)-[:HAS_AUTHOR]->(a:Author) WITH p, COLLECT(DISTINCT a.authorId) AS authorIds WITH p, apoc.coll.sort(authorIds) AS sortedAuthorIds WITH sortedAuthorIds, COLLECT(p) AS packages WHERE SIZE(packages) > 1 RETURN sortedAuthorIds AS authorGroup, packages";

#[test]
fn corpus_parses_and_round_trips() {
    for q in CORPUS {
        let ast = parse_query(q).unwrap_or_else(|e| panic!("{q}: {e}"));
        let printed = print_query(&ast);
        let again = parse_query(&printed).unwrap_or_else(|e| panic!("{printed}: {e}"));
        assert_eq!(ast, again, "{printed}");
        assert_eq!(print_query(&again), printed);
    }
}

#[test]
fn namespaced_procedure_is_unsupported() {
    assert!(matches!(
        parse_query(SHARED_AUTHORS),
        Err(ParseError::Unsupported { .. })
    ));
}

#[test]
fn write_clauses_are_unsupported() {
    for q in [
        "CREATE (n:Person) RETURN n",
        "MATCH (n) SET n.x = 1 RETURN n",
        "CALL db.labels()",
        "MATCH (n) DELETE n",
        "UNWIND [1, 2] AS x RETURN x",
        "MATCH (n) RETURN n UNION MATCH (m) RETURN m",
        "MATCH (n) RETURN size(n.name)",
        "MATCH (a)-[:R*1..3]->(b) RETURN b",
    ] {
        match parse_query(q) {
            Err(ParseError::Unsupported { .. }) => {}
            other => panic!("{q}: {other:?}"),
        }
    }
}

#[test]
fn graphclust_query_structure() {
    let ast = parse_query(CORPUS[0]).unwrap();
    assert_eq!(ast.clauses.len(), 2);
    let Clause::Match { patterns, optional } = &ast.clauses[0] else {
        panic!("expected MATCH")
    };
    assert!(!optional);
    assert_eq!(patterns[0].steps.len(), 1);
    assert_eq!(patterns[0].steps[0].0.direction, Direction::LeftToRight);
    assert_eq!(
        patterns[0].start.properties,
        vec![("name".to_string(), Literal::String("graphclust".into()))]
    );
    let ret = ast.return_clause().unwrap();
    assert_eq!(ret.projections[0].expr, ValueExpr::property("a", "name"));
    assert_eq!(
        print_query(&ast),
        r#"MATCH (p:Publication {name: "graphclust"})-[:HAS_AUTHOR]->(a:Author) RETURN a.name"#
    );
}

#[test]
fn minimal_query() {
    let ast = parse_query("MATCH (n) RETURN n").unwrap();
    let Clause::Match { patterns, .. } = &ast.clauses[0] else {
        panic!()
    };
    assert_eq!(patterns[0].start, NodePattern::new(Some("n"), None));
    assert_eq!(ast.return_clause().unwrap().projections[0].expr, ValueExpr::var("n"));
    assert_eq!(hop_count(&ast), 0);
}

#[test]
fn undirected_prints_symmetric() {
    let ast = parse_query("MATCH (a)-[:R]-(b) RETURN a").unwrap();
    assert!(print_query(&ast).contains("-[:R]-("));
}

#[test]
fn hop_counts() {
    assert_eq!(hop_count(&parse_query(CORPUS[3]).unwrap()), 1);
    assert_eq!(hop_count(&parse_query(CORPUS[4]).unwrap()), 2);
    // the pattern predicate is not part of a MATCH
    assert_eq!(hop_count(&parse_query(CORPUS[20]).unwrap()), 0);
    assert_eq!(hop_count(&parse_query(CORPUS[19]).unwrap()), 2);
}

#[test]
fn keywords_case_insensitive_identifiers_not() {
    let a = parse_query("match (n:Movie) where n.x = 1 return n").unwrap();
    let b = parse_query("MATCH (n:Movie) WHERE n.x = 1 RETURN n").unwrap();
    assert_eq!(a, b);
    let c = parse_query("MATCH (n:movie) WHERE n.x = 1 RETURN n").unwrap();
    assert_ne!(a, c);
}

#[test]
fn syntax_error_positions() {
    let e = parse_query("MATCH (n:Movie\nRETURN n").unwrap_err();
    let ParseError::Syntax(s) = e else { panic!() };
    assert_eq!((s.line, s.column), (2, 1));
    assert_eq!(s.found, "RETURN");

    let ParseError::Syntax(s) = parse_query("MATCH (n) RETURN n n").unwrap_err() else {
        panic!()
    };
    assert_eq!((s.line, s.column, s.offset), (1, 20, 19));
}

#[test]
fn case_without_else_defaults_to_null() {
    let ast = parse_query("MATCH (n) RETURN CASE WHEN n.x = 1 THEN 1 END").unwrap();
    assert!(print_query(&ast).ends_with("ELSE NULL END"));
}

#[test]
fn nested_aggregate_rejected() {
    assert!(parse_query("MATCH (n) RETURN COUNT(SUM(n.x))").is_err());
}

// ---- generated ASTs ----

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,5}".prop_filter("reserved", |s| !is_reserved(s))
}

fn label() -> impl Strategy<Value = String> {
    "[A-Z][a-zA-Z]{0,6}"
}

fn key() -> impl Strategy<Value = String> {
    "[a-z][a-zA-Z_]{0,6}"
}

fn literal() -> impl Strategy<Value = Literal> {
    prop_oneof![
        "[ -~\n\t]{0,8}".prop_map(Literal::String),
        (i64::MIN + 1..=i64::MAX).prop_map(Literal::Integer),
        proptest::num::f64::NORMAL.prop_map(Literal::Float),
        any::<bool>().prop_map(Literal::Boolean),
        Just(Literal::Null),
    ]
}

fn node() -> impl Strategy<Value = NodePattern> {
    (
        proptest::option::of(ident()),
        proptest::option::of(label()),
        proptest::collection::btree_map(key(), literal(), 0..3),
    )
        .prop_map(|(variable, label, props)| NodePattern {
            variable,
            label,
            properties: props.into_iter().collect(),
        })
}

fn rel() -> impl Strategy<Value = RelPattern> {
    (
        proptest::option::of(ident()),
        proptest::option::of("[A-Z_]{1,8}"),
        prop_oneof![
            Just(Direction::LeftToRight),
            Just(Direction::RightToLeft),
            Just(Direction::Undirected)
        ],
    )
        .prop_map(|(variable, rel_type, direction)| RelPattern {
            variable,
            rel_type,
            direction,
        })
}

fn pattern(min_steps: usize) -> impl Strategy<Value = Pattern> {
    (node(), proptest::collection::vec((rel(), node()), min_steps..3))
        .prop_map(|(start, steps)| Pattern { start, steps })
}

fn arith_op() -> impl Strategy<Value = ArithOp> {
    prop_oneof![
        Just(ArithOp::Add),
        Just(ArithOp::Sub),
        Just(ArithOp::Mul),
        Just(ArithOp::Div)
    ]
}

fn compare_op() -> impl Strategy<Value = CompareOp> {
    prop_oneof![
        Just(CompareOp::Eq),
        Just(CompareOp::Ne),
        Just(CompareOp::Lt),
        Just(CompareOp::Le),
        Just(CompareOp::Gt),
        Just(CompareOp::Ge)
    ]
}

fn value_leaf() -> impl Strategy<Value = ValueExpr> {
    prop_oneof![
        (ident(), key()).prop_map(|(v, k)| ValueExpr::Property { variable: v, key: k }),
        ident().prop_map(ValueExpr::Variable),
        literal().prop_map(ValueExpr::Literal),
    ]
}

fn value_expr() -> impl Strategy<Value = ValueExpr> {
    value_leaf().prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            (arith_op(), inner.clone(), inner.clone()).prop_map(|(op, l, r)| {
                ValueExpr::Arithmetic {
                    op,
                    lhs: Box::new(l),
                    rhs: Box::new(r),
                }
            }),
            inner.clone().prop_map(|a| ValueExpr::Function {
                name: "toFloat".into(),
                args: vec![a]
            }),
            (
                proptest::collection::vec((simple_bool(inner.clone()), inner.clone()), 1..3),
                inner
            )
                .prop_map(|(branches, otherwise)| ValueExpr::Case {
                    branches,
                    otherwise: Box::new(otherwise)
                }),
        ]
    })
}

fn simple_bool(v: BoxedStrategy<ValueExpr>) -> impl Strategy<Value = BoolExpr> {
    (compare_op(), v.clone(), v).prop_map(|(op, lhs, rhs)| BoolExpr::Compare { op, lhs, rhs })
}

fn bool_expr() -> impl Strategy<Value = BoolExpr> {
    let leaf = prop_oneof![
        (compare_op(), value_expr(), value_expr())
            .prop_map(|(op, lhs, rhs)| BoolExpr::Compare { op, lhs, rhs }),
        (value_expr(), value_expr()).prop_map(|(lhs, rhs)| BoolExpr::Contains { lhs, rhs }),
        value_expr().prop_map(BoolExpr::IsNull),
        value_expr().prop_map(BoolExpr::IsNotNull),
        pattern(1).prop_map(BoolExpr::Pattern),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| BoolExpr::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| BoolExpr::Or(Box::new(a), Box::new(b))),
            inner.prop_map(|a| BoolExpr::Not(Box::new(a))),
        ]
    })
}

fn projection() -> impl Strategy<Value = Projection> {
    let expr = prop_oneof![
        3 => value_expr(),
        1 => (
            prop_oneof![Just(AggregateKind::Count), Just(AggregateKind::Collect), Just(AggregateKind::Sum)],
            value_expr(),
            any::<bool>()
        )
            .prop_map(|(kind, e, distinct)| ValueExpr::Aggregate {
                kind,
                arg: AggregateArg::Expr(Box::new(e)),
                distinct
            }),
        1 => Just(ValueExpr::Aggregate {
            kind: AggregateKind::Count,
            arg: AggregateArg::Star,
            distinct: false
        }),
    ];
    (expr, proptest::option::of(ident())).prop_map(|(expr, alias)| Projection { expr, alias })
}

fn reading_clauses() -> impl Strategy<Value = Vec<Clause>> {
    let one = prop_oneof![
        (
            proptest::collection::vec(pattern(0), 1..3),
            any::<bool>(),
            proptest::option::of(bool_expr())
        )
            .prop_map(|(patterns, optional, filter)| {
                let mut out = vec![Clause::Match { patterns, optional }];
                if let Some(w) = filter {
                    out.push(Clause::Where(w));
                }
                out
            }),
        (
            proptest::collection::vec(projection(), 1..3),
            any::<bool>(),
            proptest::option::of(bool_expr())
        )
            .prop_map(|(projections, distinct, filter)| vec![Clause::With {
                projections,
                distinct,
                filter
            }]),
    ];
    proptest::collection::vec(one, 0..4).prop_map(|v| v.into_iter().flatten().collect())
}

fn query() -> impl Strategy<Value = QueryAst> {
    (
        reading_clauses(),
        proptest::collection::vec(projection(), 1..4),
        any::<bool>(),
        proptest::collection::vec((value_expr(), any::<bool>()), 0..3),
        proptest::option::of(0u64..1000),
    )
        .prop_map(|(mut clauses, projections, distinct, keys, limit)| {
            clauses.push(Clause::Return(ReturnClause {
                projections,
                distinct,
                order_by: keys
                    .into_iter()
                    .map(|(expr, descending)| SortKey { expr, descending })
                    .collect(),
                limit,
            }));
            QueryAst::new(clauses)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn print_then_parse_is_identity(ast in query()) {
        let text = print_query(&ast);
        let parsed = parse_query(&text);
        prop_assert!(parsed.is_ok(), "{text}: {:?}", parsed);
        let parsed = parsed.unwrap();
        prop_assert_eq!(&parsed, &ast, "{}", text);
        prop_assert_eq!(print_query(&parsed), text);
    }

    #[test]
    fn error_position_is_meaningful(
        idx in 0..CORPUS.len(),
        at in any::<prop::sample::Index>(),
        c in prop::sample::select(vec!['(', ')', '[', ']', '-', '>', '<', ':', ',', '.', '{', '}', '"', '\'', ' ', 'x', '1', '=']),
        op in 0..3u8,
    ) {
        let src = CORPUS[idx];
        let chars: Vec<char> = src.chars().collect();
        let i = at.index(chars.len());
        let mut mutated = chars.clone();
        match op {
            0 => { mutated.remove(i); }
            1 => { mutated.insert(i, c); }
            _ => { mutated[i] = c; }
        }
        let mutated: String = mutated.into_iter().collect();
        // Everything before the token touched by the edit is a valid prefix,
        // so the parser must not give up earlier than that token.
        let tokens = graphtalk::syntax::lexer::tokenize(src).unwrap();
        let floor = tokens.iter().filter(|t| t.start < i).map(|t| t.start).max().unwrap_or(0);
        if let Err(ParseError::Syntax(err)) = parse_query(&mutated) {
            prop_assert!(err.offset >= floor, "{} at {} before {}: {:?}", mutated, err.offset, floor, err);
            prop_assert!(err.offset <= mutated.len());
            let found = mutated.get(err.offset..).unwrap_or("");
            prop_assert!(err.found == "end of input" || found.starts_with(err.found.as_str()), "{}: {:?}", mutated, err);
        }
    }
}
