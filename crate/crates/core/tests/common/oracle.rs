//! Shared checks for the executor: reference queries on the bundled
//! fixtures and a brute-force evaluator for random graphs and patterns.
#![allow(dead_code)]

use graphtalk::engine::*;
use graphtalk::syntax::parse_query;
use proptest::prelude::*;
use std::collections::BTreeMap;

pub fn run(q: &str, g: &PropertyGraph) -> ResultTable {
    let ast = parse_query(q).unwrap_or_else(|e| panic!("{q}: {e}"));
    execute(&ast, g).unwrap_or_else(|e| panic!("{q}: {e}"))
}

pub fn strings(t: &ResultTable, col: usize) -> Vec<String> {
    let mut v: Vec<String> = t.rows.iter().map(|r| r[col].to_string()).collect();
    v.sort();
    v
}

pub fn graphclust_publication_versus_package() {
    let g = fixture("mardi").unwrap();
    let t1 = run(
        "MATCH (p:Publication {name:\"graphclust\"})-[:HAS_AUTHOR]->(a:Author)\nRETURN a.name;",
        &g,
    );
    assert!(t1.is_empty());
    let t2 = run(
        "MATCH (s:SoftwarePackage {name:'graphclust'})-[:HAS_AUTHOR]->(a:Author)\nRETURN a.name;",
        &g,
    );
    assert_eq!(t2.columns, vec!["a.name"]);
    assert_eq!(t2.rows, vec![vec![Value::Str("Tabea Rebafka".into())]]);
}

pub fn has_edge(g: &PropertyGraph, from: usize, rel: &str, label: &str) -> bool {
    g.edges()
        .iter()
        .any(|e| e.from == from && e.rel_type == rel && g.node(e.to).labels.contains(label))
}

pub fn packages_without_authors_match_brute_force() {
    let g = fixture("mardi").unwrap();
    let t = run(
        "MATCH (p:SoftwarePackage) WHERE NOT (p)-[:HAS_AUTHOR] ->(:Author) RETURN p.packageId AS packageId, p.name AS packageName",
        &g,
    );
    let mut expected: Vec<String> = (0..g.nodes().len())
        .filter(|&i| g.node(i).labels.contains("SoftwarePackage"))
        .filter(|&i| !has_edge(&g, i, "HAS_AUTHOR", "Author"))
        .map(|i| g.node(i).properties["name"].to_string())
        .collect();
    expected.sort();
    assert!(!expected.is_empty());
    assert_eq!(strings(&t, 1), expected);
}

pub fn authored_by(g: &PropertyGraph, label: &str, author: &str) -> Vec<usize> {
    g.edges()
        .iter()
        .filter(|e| {
            e.rel_type == "HAS_AUTHOR"
                && g.node(e.from).labels.contains(label)
                && g.node(e.to).properties.get("name") == Some(&Value::Str(author.into()))
        })
        .map(|e| e.from)
        .collect()
}

pub fn mardi_reference_queries() {
    let g = fixture("mardi").unwrap();

    let t = run(
        "MATCH (a:Author { name: \"Rob Hyndman\" })<-[:HAS_AUTHOR]-(d:Dataset) RETURN count(d) AS numberOfDatasets",
        &g,
    );
    let n = authored_by(&g, "Dataset", "Rob Hyndman").len() as i64;
    assert!(n >= 5);
    assert_eq!(t.rows, vec![vec![Value::Int(n)]]);

    let t = run(
        "MATCH (p:Publication) WHERE p.title CONTAINS \"Pareto\" MATCH (p)-[:HAS_AUTHOR]->(a:Author) RETURN DISTINCT a.name AS authorName, a.authorId AS authorId",
        &g,
    );
    let mut expected: Vec<String> = g
        .edges()
        .iter()
        .filter(|e| {
            e.rel_type == "HAS_AUTHOR"
                && g.node(e.from).labels.contains("Publication")
                && g.node(e.from).properties["title"].as_str().unwrap().contains("Pareto")
        })
        .map(|e| g.node(e.to).properties["name"].to_string())
        .collect();
    expected.sort();
    expected.dedup();
    assert_eq!(strings(&t, 0), expected);

    let t = run(
        "MATCH (a:Author)<-[:HAS_AUTHOR]-(s:SoftwarePackage) RETURN a.name AS authorName, a.authorId AS authorId, COUNT(s) AS packageCount ORDER BY packageCount DESC LIMIT 10",
        &g,
    );
    assert_eq!(t.rows.len(), 10);
    let counts: Vec<i64> = t.rows.iter().map(|r| match r[2] { Value::Int(c) => c, _ => panic!() }).collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]));
    let top = t.rows[0][0].as_str().unwrap();
    assert_eq!(counts[0], authored_by(&g, "SoftwarePackage", top).len() as i64);

    let t = run(
        "MATCH (p:Author)<-[:HAS_AUTHOR]-(d:Dataset) WITH p, COUNT(d) AS numberOfDatasets WHERE numberOfDatasets >= 5 RETURN p.name AS authorName,  numberOfDatasets ORDER BY numberOfDatasets DESC",
        &g,
    );
    for row in &t.rows {
        let name = row[0].as_str().unwrap();
        assert_eq!(row[1], Value::Int(authored_by(&g, "Dataset", name).len() as i64));
    }
    assert!(t.rows.iter().any(|r| r[0] == Value::Str("Rob Hyndman".into())));

    let t = run(
        "MATCH (a:Author) OPTIONAL MATCH (a)<-[:HAS_AUTHOR]\n-(d:Dataset) RETURN a.name AS authorName, a.authorId AS authorId, COLLECT(d) AS datasets\t",
        &g,
    );
    assert_eq!(t.rows.len(), g.count_label("Author"));
    for row in &t.rows {
        let Value::List(ds) = &row[2] else { panic!() };
        assert_eq!(ds.len(), authored_by(&g, "Dataset", row[0].as_str().unwrap()).len());
    }

    let t = run(
        "MATCH (a:Author)<-[:HAS_AUTHOR]-(d1:Dataset), (a)<-[:HAS_AUTHOR]-(d2:Dataset) WHERE d1.name = \"Bitcoin Dataset with Missing Values\" AND d2.name = \"Rideshare Dataset without Missing Values\" RETURN a.name AS authorName, a.authorId AS authorId",
        &g,
    );
    let on = |d: &str| -> Vec<String> {
        g.edges()
            .iter()
            .filter(|e| g.node(e.from).properties.get("name") == Some(&Value::Str(d.into())))
            .map(|e| g.node(e.to).properties["name"].to_string())
            .collect()
    };
    let rideshare = on("Rideshare Dataset without Missing Values");
    let mut expected: Vec<String> = on("Bitcoin Dataset with Missing Values")
        .into_iter()
        .filter(|a| rideshare.contains(a))
        .collect();
    expected.sort();
    assert_eq!(strings(&t, 0), expected);
}

pub fn hyena_proportion_queries() {
    let g = fixture("hyena").unwrap();
    let first = run(
        "MATCH (cub:Hyena)-[:HAS_FATHER]->(dad:Hyena) \n        OPTIONAL MATCH (dad)-[:BIRTH_CLAN]->(bc:Clan) \n        OPTIONAL MATCH (dad)-[:CURRENT_CLAN]->(cc:Clan) \n        WITH COUNT(cub) AS totalCubs, \n        SUM(CASE WHEN dad.sex = 'male' AND bc = cc THEN 1 ELSE 0 END) AS philopatCubs \n        RETURN philopatCubs * 1.0 / totalCubs AS proportion",
        &g,
    );
    let amended = run(
        "MATCH (cub:Hyena)-[:HAS_FATHER]->(dad:Hyena) \n        OPTIONAL MATCH (dad)-[:BIRTH_CLAN]->(clan:Clan)<-[:CURRENT_CLAN]-(dad) \n        WITH COUNT(cub) AS totalCubs, \n        COUNT\n            (CASE WHEN dad.sex = 'male' AND clan IS NOT NULL  \n                AND NOT (dad)-[:CHANGED_CLAN]->() THEN 1 END) \n            AS philopatricCubs \n        RETURN toFloat(philopatricCubs) / totalCubs AS proportion",
        &g,
    );
    // Independent count: cubs whose father's birth clan equals his current clan.
    let clan_of = |h: usize, rel: &str| {
        g.edges().iter().find(|e| e.from == h && e.rel_type == rel).map(|e| e.to)
    };
    let fathers: Vec<usize> = g
        .edges()
        .iter()
        .filter(|e| e.rel_type == "HAS_FATHER")
        .map(|e| e.to)
        .collect();
    let philo = fathers
        .iter()
        .filter(|&&d| {
            g.node(d).properties["sex"] == Value::Str("male".into())
                && clan_of(d, "BIRTH_CLAN").is_some()
                && clan_of(d, "BIRTH_CLAN") == clan_of(d, "CURRENT_CLAN")
        })
        .count();
    let expected = Value::Float(philo as f64 / fathers.len() as f64);
    assert_eq!(first.rows, vec![vec![expected.clone()]]);
    assert_eq!(amended.rows, vec![vec![expected]]);
}

// ---------------------------------------------------------------------------
// Brute-force oracle: enumerate every assignment of pattern variables to
// nodes and edges, then check each constraint directly.

#[derive(Debug, Clone)]
pub struct RandGraph {
    pub labels: Vec<u8>,
    pub props: Vec<Option<i64>>,
    pub edges: Vec<(usize, usize, u8)>,
}

impl RandGraph {
    pub fn build(&self) -> PropertyGraph {
        let mut g = PropertyGraph::new();
        for (i, (l, k)) in self.labels.iter().zip(&self.props).enumerate() {
            let mut props = BTreeMap::new();
            if let Some(k) = k {
                props.insert("k".to_string(), Value::Int(*k));
            }
            let labels: Vec<&str> = match l {
                0 => vec!["A"],
                1 => vec!["B"],
                _ => vec!["A", "B"],
            };
            g.add_node(&format!("n{i}"), labels, props).unwrap();
        }
        for (i, (f, t, ty)) in self.edges.iter().enumerate() {
            let ty = if *ty == 0 { "R" } else { "S" };
            g.add_edge(&format!("e{i}"), &format!("n{f}"), ty, &format!("n{t}"), BTreeMap::new())
                .unwrap();
        }
        g
    }

    pub fn has_label(&self, n: usize, l: u8) -> bool {
        self.labels[n] == l || self.labels[n] == 2
    }
}

pub fn graph_strategy() -> impl Strategy<Value = RandGraph> {
    (1usize..=12).prop_flat_map(|n| {
        (
            prop::collection::vec(0u8..3, n),
            prop::collection::vec(prop::option::of(0i64..4), n),
            prop::collection::vec((0..n, 0..n, 0u8..2), 0..=20),
        )
            .prop_map(|(labels, props, edges)| RandGraph {
                labels,
                props,
                edges,
            })
    })
}

#[derive(Debug, Clone)]
pub struct NodeSpec {
    pub label: Option<u8>,
    pub prop: Option<i64>,
}

#[derive(Debug, Clone)]
pub struct RelSpec {
    pub ty: Option<u8>,
    /// 0: left to right, 1: right to left, 2: undirected.
    pub dir: u8,
}

#[derive(Debug, Clone, Copy)]
pub enum Mode {
    Plain,
    Distinct,
    CountBy(usize),
    Optional,
}

#[derive(Debug, Clone)]
pub struct QuerySpec {
    pub nodes: Vec<NodeSpec>,
    pub rels: Vec<RelSpec>,
    pub filter: Option<(usize, u8, i64)>,
    pub mode: Mode,
}

const OPS: [&str; 4] = ["=", "<", ">=", "<>"];

pub fn query_strategy() -> impl Strategy<Value = QuerySpec> {
    let node = (prop::option::of(0u8..2), prop::option::weighted(0.2, 0i64..4))
        .prop_map(|(label, prop)| NodeSpec { label, prop });
    let rel = (prop::option::of(0u8..2), 0u8..3).prop_map(|(ty, dir)| RelSpec { ty, dir });
    (0usize..=2).prop_flat_map(move |hops| {
        (
            prop::collection::vec(node.clone(), hops + 1),
            prop::collection::vec(rel.clone(), hops),
            prop::option::of((0..=hops, 0u8..4, 0i64..4)),
            0u8..4,
            0..=hops,
        )
            .prop_map(move |(nodes, rels, filter, m, key)| QuerySpec {
                nodes,
                rels,
                filter,
                mode: match m {
                    0 => Mode::Plain,
                    1 => Mode::Distinct,
                    2 => Mode::CountBy(key),
                    _ if hops > 0 => Mode::Optional,
                    _ => Mode::Plain,
                },
            })
    })
}

impl QuerySpec {
    pub fn text(&self) -> String {
        let node = |i: usize| {
            let n = &self.nodes[i];
            let mut s = format!("(n{i}");
            if let Some(l) = n.label {
                s.push_str(if l == 0 { ":A" } else { ":B" });
            }
            if let Some(k) = n.prop {
                s.push_str(&format!(" {{k: {k}}}"));
            }
            s.push(')');
            s
        };
        let rel = |i: usize| {
            let r = &self.rels[i];
            let ty = match r.ty {
                Some(0) => ":R",
                Some(_) => ":S",
                None => "",
            };
            match r.dir {
                0 => format!("-[r{i}{ty}]->"),
                1 => format!("<-[r{i}{ty}]-"),
                _ => format!("-[r{i}{ty}]-"),
            }
        };
        let mut path = node(0);
        for i in 0..self.rels.len() {
            path.push_str(&rel(i));
            path.push_str(&node(i + 1));
        }
        let filter = self
            .filter
            .map(|(v, op, c)| format!(" WHERE n{v}.k {} {c}", OPS[op as usize]))
            .unwrap_or_default();
        let all_vars: Vec<String> = (0..self.nodes.len())
            .map(|i| format!("n{i}"))
            .chain((0..self.rels.len()).map(|i| format!("r{i}")))
            .collect();
        match self.mode {
            Mode::Plain => format!("MATCH {path}{filter} RETURN {}", all_vars.join(", ")),
            Mode::Distinct => {
                let vars: Vec<String> = (0..self.nodes.len()).map(|i| format!("n{i}")).collect();
                format!("MATCH {path}{filter} RETURN DISTINCT {}", vars.join(", "))
            }
            Mode::CountBy(k) => format!("MATCH {path}{filter} RETURN n{k}, COUNT(*) AS c"),
            Mode::Optional => {
                // n0 is matched on its own; the rest of the path is optional.
                let head = node(0);
                format!(
                    "MATCH {head} OPTIONAL MATCH {}{filter} RETURN {}",
                    path.replacen(&head, "(n0)", 1),
                    all_vars.join(", ")
                )
            }
        }
    }

    fn node_ok(&self, g: &RandGraph, i: usize, n: usize) -> bool {
        let s = &self.nodes[i];
        s.label.is_none_or(|l| g.has_label(n, l)) && s.prop.is_none_or(|p| g.props[n] == Some(p))
    }

    fn filter_ok(&self, g: &RandGraph, assign: &[usize]) -> bool {
        let Some((v, op, c)) = self.filter else {
            return true;
        };
        match g.props[assign[v]] {
            None => false,
            Some(k) => match op {
                0 => k == c,
                1 => k < c,
                2 => k >= c,
                _ => k != c,
            },
        }
    }

    /// All (node assignment, edge assignment) pairs satisfying the pattern,
    /// optionally pinning n0.
    fn embeddings(&self, g: &RandGraph, pin: Option<usize>) -> Vec<(Vec<usize>, Vec<usize>)> {
        let n = g.labels.len();
        let k = self.nodes.len();
        let mut out = Vec::new();
        let total = n.pow(k as u32);
        for code in 0..total {
            let mut assign = Vec::with_capacity(k);
            let mut c = code;
            for _ in 0..k {
                assign.push(c % n);
                c /= n;
            }
            if pin.is_some_and(|p| assign[0] != p) {
                continue;
            }
            if !(0..k).all(|i| self.node_ok(g, i, assign[i])) {
                continue;
            }
            let choices: Vec<Vec<usize>> = self
                .rels
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let (a, b) = (assign[i], assign[i + 1]);
                    (0..g.edges.len())
                        .filter(|&e| {
                            let (f, t, ty) = g.edges[e];
                            r.ty.is_none_or(|x| x == ty)
                                && match r.dir {
                                    0 => f == a && t == b,
                                    1 => f == b && t == a,
                                    _ => (f == a && t == b) || (f == b && t == a),
                                }
                        })
                        .collect()
                })
                .collect();
            let mut stack = vec![Vec::new()];
            for opts in &choices {
                let mut next = Vec::new();
                for partial in &stack {
                    for &e in opts {
                        if !partial.contains(&e) {
                            let mut p2: Vec<usize> = partial.clone();
                            p2.push(e);
                            next.push(p2);
                        }
                    }
                }
                stack = next;
            }
            for edges in stack {
                if self.filter_ok(g, &assign) {
                    out.push((assign.clone(), edges));
                }
            }
        }
        out
    }

    pub fn oracle(&self, g: &RandGraph) -> Vec<Vec<Value>> {
        let row = |a: &[usize], e: &[usize]| -> Vec<Value> {
            a.iter()
                .map(|&x| Value::Node(x))
                .chain(e.iter().map(|&x| Value::Edge(x)))
                .collect()
        };
        let mut rows: Vec<Vec<Value>> = match self.mode {
            Mode::Plain => self.embeddings(g, None).iter().map(|(a, e)| row(a, e)).collect(),
            Mode::Distinct => {
                let mut r: Vec<Vec<Value>> = self
                    .embeddings(g, None)
                    .iter()
                    .map(|(a, _)| a.iter().map(|&x| Value::Node(x)).collect())
                    .collect();
                r.sort();
                r.dedup();
                r
            }
            Mode::CountBy(key) => {
                let mut counts: BTreeMap<usize, i64> = BTreeMap::new();
                for (a, _) in self.embeddings(g, None) {
                    *counts.entry(a[key]).or_default() += 1;
                }
                counts
                    .into_iter()
                    .map(|(n, c)| vec![Value::Node(n), Value::Int(c)])
                    .collect()
            }
            Mode::Optional => {
                let mut r = Vec::new();
                for n0 in 0..g.labels.len() {
                    if !self.node_ok(g, 0, n0) {
                        continue;
                    }
                    // Head constraints are applied by the outer MATCH only.
                    let mut inner = self.clone();
                    inner.nodes[0] = NodeSpec { label: None, prop: None };
                    let found = inner.embeddings(g, Some(n0));
                    if found.is_empty() {
                        let mut nulls = vec![Value::Node(n0)];
                        nulls.resize(self.nodes.len() + self.rels.len(), Value::Null);
                        r.push(nulls);
                    } else {
                        r.extend(found.iter().map(|(a, e)| row(a, e)));
                    }
                }
                r
            }
        };
        rows.sort();
        rows
    }
}
