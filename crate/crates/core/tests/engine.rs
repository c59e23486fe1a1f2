#[path = "common/oracle.rs"]
mod oracle;

use graphtalk::benchmark::generate_benchmark;
use graphtalk::engine::*;
use graphtalk::schema::preset;
use graphtalk::syntax::parse_query;
use oracle::*;
use proptest::prelude::*;
use std::io::{Read, Write};
use std::net::TcpListener;
use std::time::{Duration, Instant};

#[test]
fn movie_fixture_sizes() {
    let g = fixture("movie").unwrap();
    assert!(g.count_label("Person") >= 20);
    assert!(g.count_label("Movie") >= 15);
    assert!(g.count_label("Critic") >= 3);
    assert!(g.count_label("City") >= 5);
    let alice = run("MATCH (p:Person {name: \"Alice\"}) RETURN p", &g);
    assert_eq!(alice.rows.len(), 1);
}

#[test]
fn every_clean_benchmark_case_returns_rows() {
    let schema = preset("movie").unwrap();
    let g = fixture("movie").unwrap();
    for seed in 0..10 {
        for case in generate_benchmark(&schema, seed).unwrap() {
            if case.injected_kind != graphtalk::validate::PerturbationKind::None {
                continue;
            }
            let t = run(&case.query_text, &g);
            assert!(!t.is_empty(), "seed {seed}: {} returned no rows", case.query_text);
        }
    }
}

#[test]
fn count_on_empty_graph_is_zero() {
    let g = PropertyGraph::new();
    let t = run("MATCH (n) RETURN COUNT(n)", &g);
    assert_eq!(t.rows, vec![vec![Value::Int(0)]]);
    let grouped = run("MATCH (n) RETURN n.name, COUNT(n)", &g);
    assert!(grouped.is_empty());
}

#[test]
fn empty_fixture_body_and_missing_endpoint() {
    assert!(parse_graph("schema: mardi\n").unwrap().nodes().is_empty());
    assert!(matches!(
        parse_graph("node a :Author {name: \"x\"}\nedge e1 a -[:HAS_AUTHOR]-> zz\n"),
        Err(FixtureError::Parse { .. })
    ));
}

#[test]
fn graphclust_publication_versus_package() {
    oracle::graphclust_publication_versus_package();
}

#[test]
fn packages_without_authors_match_brute_force() {
    oracle::packages_without_authors_match_brute_force();
}

#[test]
fn mardi_reference_queries() {
    oracle::mardi_reference_queries();
}

#[test]
fn hyena_proportion_queries() {
    oracle::hyena_proportion_queries();
}

#[test]
fn type_errors_and_unknown_properties() {
    let g = fixture("movie").unwrap();
    let ast = parse_query("MATCH (m:Movie) WHERE m.release_year CONTAINS \"19\" RETURN m").unwrap();
    assert!(matches!(execute(&ast, &g), Err(ExecError::TypeError(_))));
    let t = run("MATCH (m:Movie) RETURN m.budget LIMIT 1", &g);
    assert_eq!(t.rows, vec![vec![Value::Null]]);
    let t = run("MATCH (m:Movie) WHERE m.title > 2020 RETURN m", &g);
    assert!(t.is_empty());
}

#[test]
fn order_by_puts_nulls_last_both_directions() {
    let g = parse_graph("node a :X {k: 2}\nnode b :X\nnode c :X {k: 1}\n").unwrap();
    for dir in ["ASC", "DESC"] {
        let t = run(&format!("MATCH (n:X) RETURN n.k AS k ORDER BY k {dir}"), &g);
        assert_eq!(t.rows.last().unwrap()[0], Value::Null, "{dir}");
    }
    let t = run("MATCH (n:X) RETURN n.k AS k ORDER BY k DESC", &g);
    assert_eq!(t.rows[0][0], Value::Int(2));
}

#[test]
fn node_refs_render_with_label_and_properties() {
    let g = fixture("mardi").unwrap();
    let t = run("MATCH (sp:SoftwarePackage {name:\"graphclust\"})-[:HAS_AUTHOR]\n->(a:Author) RETURN a;", &g);
    let recs = t.to_records(&g);
    assert_eq!(
        recs[0]["a"],
        serde_json::json!("(:Author {authorId: \"Q7000\", name: \"Tabea Rebafka\"})")
    );
}

#[test]
fn undirected_self_loop_counts_once() {
    let g = parse_graph("node a :X\nnode b :X\nedge e1 a -[:R]-> a\nedge e2 a -[:R]-> b\n").unwrap();
    let t = run("MATCH (x)-[r:R]-(y) RETURN x, r, y", &g);
    // e1 once, e2 in both orientations.
    assert_eq!(t.rows.len(), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1200))]

    #[test]
    fn executor_matches_brute_force(g in graph_strategy(), q in query_strategy()) {
        let text = q.text();
        let ast = parse_query(&text).unwrap();
        let got = execute(&ast, &g.build()).unwrap();
        prop_assert_eq!(got.sorted_rows(), q.oracle(&g), "{}", text);
    }

    #[test]
    fn match_is_monotone_under_edge_insertion(
        g in graph_strategy(),
        q in query_strategy(),
        extra in (0usize..12, 0usize..12, 0u8..2),
    ) {
        prop_assume!(matches!(q.mode, Mode::Plain | Mode::Distinct));
        let n = g.labels.len();
        let mut bigger = g.clone();
        bigger.edges.push((extra.0 % n, extra.1 % n, extra.2));
        let ast = parse_query(&q.text()).unwrap();
        let small = execute(&ast, &g.build()).unwrap().sorted_rows();
        let mut large = execute(&ast, &bigger.build()).unwrap().sorted_rows();
        for row in small {
            let pos = large.iter().position(|r| *r == row);
            prop_assert!(pos.is_some(), "row {:?} vanished", row);
            large.remove(pos.unwrap());
        }
    }

    #[test]
    fn limit_is_prefix_of_ordered_result(g in graph_strategy(), k in 0u64..8, desc in any::<bool>()) {
        let dir = if desc { "DESC" } else { "ASC" };
        let base = format!("MATCH (a)-[r]-(b) RETURN a.k AS x, b.k AS y ORDER BY x {dir}, y");
        let graph = g.build();
        let full = execute(&parse_query(&base).unwrap(), &graph).unwrap();
        let limited = execute(&parse_query(&format!("{base} LIMIT {k}")).unwrap(), &graph).unwrap();
        let k = (k as usize).min(full.rows.len());
        prop_assert_eq!(&limited.rows[..], &full.rows[..k]);
    }

    #[test]
    fn count_star_counts_edges(g in graph_strategy()) {
        let t = execute(&parse_query("MATCH (a)-[r]->(b) RETURN COUNT(*)").unwrap(), &g.build()).unwrap();
        prop_assert_eq!(t.rows, vec![vec![Value::Int(g.edges.len() as i64)]]);
    }
}

// ---------------------------------------------------------------------------
// Remote adapter against a canned HTTP server.

fn serve_once(status: &str, body: &'static str) -> (String, std::thread::JoinHandle<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let status = status.to_string();
    let handle = std::thread::spawn(move || {
        let (mut sock, _) = listener.accept().unwrap();
        let mut buf = Vec::new();
        let mut chunk = [0u8; 4096];
        loop {
            let n = sock.read(&mut chunk).unwrap();
            buf.extend_from_slice(&chunk[..n]);
            let text = String::from_utf8_lossy(&buf);
            if let Some(split) = text.find("\r\n\r\n") {
                let len = text[..split]
                    .lines()
                    .find_map(|l| l.to_ascii_lowercase().strip_prefix("content-length:").map(|v| v.trim().parse::<usize>().unwrap()))
                    .unwrap_or(0);
                if buf.len() >= split + 4 + len {
                    break;
                }
            }
            if n == 0 {
                break;
            }
        }
        let resp = format!(
            "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        );
        sock.write_all(resp.as_bytes()).unwrap();
        String::from_utf8_lossy(&buf).into_owned()
    });
    (format!("http://{addr}"), handle)
}

#[test]
fn remote_success_returns_table() {
    let (url, handle) = serve_once(
        "200 OK",
        r#"{"results":[{"columns":["a.name"],"data":[{"row":["Tabea Rebafka"],"meta":[null]}]}],"errors":[]}"#,
    );
    let mut ep = ExternalEndpoint::new(&url);
    ep.user = Some("neo4j".into());
    ep.password = Some("secret".into());
    let t = execute_remote("MATCH (a:Author) RETURN a.name", &ep).unwrap();
    assert_eq!(t.columns, vec!["a.name"]);
    assert_eq!(t.rows, vec![vec![Value::Str("Tabea Rebafka".into())]]);
    let request = handle.join().unwrap();
    assert!(request.starts_with("POST /db/neo4j/tx/commit"));
    assert!(request.to_ascii_lowercase().contains("authorization: basic"));
    assert!(request.contains("MATCH (a:Author) RETURN a.name"));
}

#[test]
fn remote_syntax_error_carries_server_message() {
    let (url, handle) = serve_once(
        "200 OK",
        r#"{"results":[],"errors":[{"code":"Neo.ClientError.Statement.SyntaxError","message":"Invalid input 'MATC'"}]}"#,
    );
    let err = execute_remote("MATC (n) RETURN n", &ExternalEndpoint::new(&url)).unwrap_err();
    handle.join().unwrap();
    match err {
        RemoteError::RemoteQueryError { code, message } => {
            assert!(code.ends_with("SyntaxError"));
            assert_eq!(message, "Invalid input 'MATC'");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn remote_unreachable_is_connection_error_within_timeout() {
    // Bind then drop to obtain a port with nothing listening.
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut ep = ExternalEndpoint::new(&format!("http://127.0.0.1:{port}"));
    ep.timeout = Duration::from_secs(2);
    let start = Instant::now();
    let err = execute_remote("MATCH (n) RETURN n", &ep).unwrap_err();
    assert!(matches!(err, RemoteError::ConnectionError(_)));
    assert!(start.elapsed() < Duration::from_secs(3));
}
