//! Acceptance suite: one pass/fail line per criterion.
//! Set `UPDATE_GOLDENS=1` to rewrite the golden files instead of comparing.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::sync::{Arc, RwLock};
use std::time::Instant;

use common::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sparql_rest::engine::TripleStore;
use sparql_rest::query::CompileOptions;
use sparql_rest::shape::map_depth;
use sparql_rest::term::vocab;
use sparql_rest::{ApiPath, Literal, PrefixMap, Term, Triple};
use sparql_rest_gateway::batch::request;
use sparql_rest_gateway::{sparql_server, ApiResponse, EndpointConfig, Gateway, IdMinter, RemoteHttp};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn updating_goldens() -> bool {
    std::env::var_os("UPDATE_GOLDENS").is_some()
}

/// Compares `actual` with the golden file, or rewrites it.
fn golden(name: &str, actual: &str) -> Result<(), String> {
    let path = goldens_dir().join(name);
    if updating_goldens() {
        std::fs::write(&path, actual).map_err(|e| format!("{}: {e}", path.display()))?;
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected != actual {
        let line = expected.lines().zip(actual.lines()).position(|(a, b)| a != b).unwrap_or(0) + 1;
        return Err(format!("{name} differs from golden near line {line}"));
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).unwrap() + "\n"
}

async fn get(gw: &Gateway, target: &str) -> Result<Value, String> {
    let r = gw.handle("GET", target, None).await;
    ensure!(r.status == 200, "GET {target} -> {} {:?}", r.status, r.body);
    Ok(r.body.unwrap())
}

async fn path_walk() -> Outcome {
    let (gw, _) = embedded(store_from(DBPEDIA), 1);
    let walk = [
        "/api/class/dbo:Country",
        "/api/class/dbo:Country/dbr:Germany",
        "/api/class/dbo:Country/dbr:Germany/dbo:capital",
        "/api/class/dbo:Country/dbr:Germany/dbo:capital/dbr:Berlin",
    ];
    let mut bodies = serde_json::Map::new();
    for target in walk {
        bodies.insert(target.to_string(), get(&gw, target).await?);
    }
    let countries = &bodies[walk[0]]["ids"];
    ensure!(countries.as_array().is_some_and(|ids| ids.contains(&json!("dbr:Germany"))), "countries: {countries}");
    ensure!(bodies[walk[2]] == json!({"ids": ["dbr:Berlin"]}), "capital: {}", bodies[walk[2]]);
    let berlin = get(&gw, "/api/resource/dbr:Berlin").await?;
    ensure!(bodies[walk[3]] == berlin, "object views differ: {} vs {berlin}", bodies[walk[3]]);
    golden("path_walk.json", &pretty(&Value::Object(bodies)))?;
    Ok("4 GETs match the golden file; chained and direct Berlin views are identical".into())
}

async fn wildcard_nesting() -> Outcome {
    let (gw, _) = embedded(store_from(DBPEDIA), 1);
    let body = get(&gw, "/api/resource/*/dbo:capital/*/(rdfs:label|skos:prefLabel)").await?;
    ensure!(map_depth(&body) == 2, "depth {}", map_depth(&body));
    let outer = body["id-map"].as_object().ok_or("no outer id-map")?;
    ensure!(outer.len() == 3, "outer keys {:?}", outer.keys().collect::<Vec<_>>());
    for (country, inner) in outer {
        let inner = inner["id-map"].as_object().ok_or(format!("{country}: no inner id-map"))?;
        for (city, leaf) in inner {
            let leaf = leaf.as_object().unwrap();
            ensure!(leaf.keys().collect::<Vec<_>>() == ["values"], "{city}: leaf keys {:?}", leaf.keys().collect::<Vec<_>>());
            ensure!(!leaf["values"].as_array().unwrap().is_empty(), "{city}: no labels");
        }
    }
    let text = serde_json::to_string(&body).unwrap();
    ensure!(!text.contains("rdfs:label") && !text.contains("skos:prefLabel"), "property path leaked into keys");
    ensure!(body["id-map"]["dbr:Italy"]["id-map"]["dbr:Rome"]["values"][0]["value"] == "Roma", "Rome label via skos:prefLabel");
    golden("wildcard_nesting.json", &pretty(&body))?;
    Ok("two id-map levels, labels collapsed into values, golden file matches".into())
}

async fn nesting_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut checked, mut non_empty) = (0, 0);
    for _ in 0..20 {
        let graph = random_graph(&mut rng, 30);
        let (gw, _) = embedded(TripleStore::from_triples(graph.clone()), 0);
        for _ in 0..10 {
            let target = random_path(&mut rng, &graph);
            let path = ApiPath::parse(&target).map_err(|e| format!("{target}: {e}"))?;
            let body = get(&gw, &target).await?;
            checked += 1;
            let empty = body == json!({"ids": []}) || body == json!({"id-map": {}});
            if empty {
                continue;
            }
            non_empty += 1;
            let (depth, wildcards) = (nesting_depth(&body, &path), nonterminal_wildcards(&path));
            ensure!(depth == wildcards, "{target}: depth {depth}, non-terminal wildcards {wildcards}");
        }
    }
    ensure!(checked == 200, "checked {checked}");
    Ok(format!("{checked} random paths, {non_empty} non-empty, 0 mismatches"))
}

async fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let prefixes = PrefixMap::with_defaults();
    let corpus_gets: Vec<String> = corpus().into_iter().filter(|r| r.method == "GET").map(|r| r.target).collect();
    let mut graphs = vec![store_from(DBPEDIA).triples()];
    graphs.extend((0..25).map(|_| random_graph(&mut rng, 30)));
    let (mut compared, mut skipped) = (0, 0);
    for graph in &graphs {
        let (gw, _) = embedded(TripleStore::from_triples(graph.clone()), 0);
        let mut targets = corpus_gets.clone();
        targets.extend((0..8).map(|_| random_path(&mut rng, graph)));
        for target in targets {
            let Some(expected) = oracle_get(graph, &target, &prefixes) else {
                skipped += 1;
                continue;
            };
            let actual = get(&gw, &target).await?;
            ensure!(json_close(&actual, &expected), "{target}\n  gateway: {actual}\n  oracle:  {expected}");
            compared += 1;
        }
    }
    Ok(format!("{compared} (graph, path) pairs equal over {} graphs; {skipped} sort/limit/namespace/error requests out of oracle scope", graphs.len()))
}

/// Triples an ObjectView-shaped body describes about `subject`, read
/// directly from the JSON.
fn body_triples(subject: &Term, body: &Value) -> BTreeSet<Triple> {
    let prefixes = PrefixMap::with_defaults();
    let mut out = BTreeSet::new();
    for (prop, node) in body["id-map"].as_object().unwrap() {
        let p = prefixes.expand(prop).unwrap();
        for id in node["ids"].as_array().into_iter().flatten() {
            out.insert(Triple::new(subject.clone(), p.clone(), prefixes.expand(id.as_str().unwrap()).unwrap()));
        }
        for v in node["values"].as_array().into_iter().flatten() {
            let lexical = v["value"].as_str().unwrap();
            let literal = match (v.get("language"), v.get("datatype")) {
                (Some(lang), _) => Literal::lang(lexical, lang.as_str().unwrap()),
                (None, Some(dt)) => Literal::typed(lexical, prefixes.expand(dt.as_str().unwrap()).unwrap().str_value()),
                (None, None) => Literal::string(lexical),
            };
            out.insert(Triple::new(subject.clone(), p.clone(), Term::Literal(literal)));
        }
    }
    out
}

async fn crud_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let prefixes = PrefixMap::with_defaults();
    let rdf_type = Term::iri(vocab::RDF_TYPE);
    for case in 0..100 {
        let graph = random_graph(&mut rng, 30);
        let (gw, store) = embedded(TripleStore::from_triples(graph), case);
        let ctx = |what: &str| format!("case {case}: {what}");

        // POST
        let class = *CLASSES.choose(&mut rng).unwrap();
        let body = random_body(&mut rng, 0);
        let r = gw.handle("POST", &format!("/api/class/{class}"), Some(&body)).await;
        ensure!(r.status == 201, "{}", ctx(&format!("POST -> {} {:?}", r.status, r.body)));
        let id = r.body.unwrap()["ids"][0].as_str().unwrap().to_string();
        let minted = prefixes.expand(&id).unwrap();
        let mut expected = body_triples(&minted, &body);
        expected.insert(Triple::new(minted.clone(), rdf_type.clone(), expand(class)));
        let stored: BTreeSet<Triple> = snapshot(&store).into_iter().filter(|t| t.subject == minted).collect();
        ensure!(stored == expected, "{}", ctx("stored triples differ from body plus rdf:type"));
        let view = get(&gw, &format!("/api/resource/{}", path_id(&minted))).await?;
        let expected_view = oracle_get(&expected.iter().cloned().collect::<Vec<_>>(), &format!("/api/resource/{}", path_id(&minted)), &prefixes).unwrap();
        ensure!(view == expected_view, "{}", ctx(&format!("GET after POST: {view} vs {expected_view}")));

        // PUT replaces exactly the supplied properties
        let before: BTreeSet<Triple> = snapshot(&store).into_iter().collect();
        let target = expand(NODES.choose(&mut rng).unwrap());
        let put_body = random_body(&mut rng, 0);
        let replaced: BTreeSet<Term> = put_body["id-map"].as_object().unwrap().keys().map(|k| expand(k)).collect();
        let r = gw.handle("PUT", &format!("/api/resource/{}", path_id(&target)), Some(&put_body)).await;
        ensure!(r.status == 200, "{}", ctx(&format!("PUT -> {} {:?}", r.status, r.body)));
        let mut predicted: BTreeSet<Triple> =
            before.iter().filter(|t| !(t.subject == target && replaced.contains(&t.predicate))).cloned().collect();
        predicted.extend(body_triples(&target, &put_body));
        let after: BTreeSet<Triple> = snapshot(&store).into_iter().collect();
        ensure!(after == predicted, "{}", ctx("PUT store state"));
        let put_view = get(&gw, &format!("/api/resource/{}", path_id(&target))).await?;
        ensure!(r.body.as_ref() == Some(&put_view), "{}", ctx("PUT response is not the updated view"));

        // DELETE depth 3: exactly one triple
        let before = snapshot(&store);
        let edges: Vec<&Triple> = before.iter().filter(|t| !t.object.is_literal() && !t.subject.is_literal()).collect();
        if let Some(edge) = edges.choose(&mut rng) {
            let target = format!("/api/resource/{}/{}/{}", path_id(&edge.subject), path_id(&edge.predicate), path_id(&edge.object));
            let r = gw.handle("DELETE", &target, None).await;
            ensure!(r.status == 204, "{}", ctx(&format!("DELETE {target} -> {}", r.status)));
            let after = snapshot(&store);
            ensure!(before.len() - after.len() == 1 && !after.contains(edge), "{}", ctx("depth-3 delta"));
        }

        // DELETE depth 2: every value of one property
        let before = snapshot(&store);
        let (s, p) = (expand(NODES.choose(&mut rng).unwrap()), expand([LINKS, LABELS].concat().choose(&mut rng).unwrap()));
        let r = gw.handle("DELETE", &format!("/api/resource/{}/{}", path_id(&s), path_id(&p)), None).await;
        ensure!(r.status == 204, "{}", ctx("DELETE depth 2 status"));
        let predicted: Vec<Triple> = before.iter().filter(|t| !(t.subject == s && t.predicate == p)).cloned().collect();
        ensure!(snapshot(&store) == predicted, "{}", ctx("depth-2 delete set"));

        // DELETE depth 1: all in- and outgoing edges
        let before = snapshot(&store);
        let x = expand(NODES.choose(&mut rng).unwrap());
        let r = gw.handle("DELETE", &format!("/api/resource/{}", path_id(&x)), None).await;
        ensure!(r.status == 204, "{}", ctx("DELETE depth 1 status"));
        let predicted: Vec<Triple> = before.iter().filter(|t| t.subject != x && t.object != x).cloned().collect();
        ensure!(snapshot(&store) == predicted, "{}", ctx("depth-1 delete set"));
    }
    Ok("100 random POST/PUT/DELETE cases match the predicted triple sets".into())
}

async fn literal_step_over() -> Outcome {
    let (gw, _) = embedded(store_from(SHARED_LITERAL), 1);
    let body = get(&gw, "/api/resource/*/foaf:name/*/(^rdfs:label)").await?;
    let expected = json!({"id-map": {"ex:alice": {"value-map": [
        [{"value": "Alex", "datatype": "xsd:string"}, {"ids": ["ex:bob", "ex:carol"]}]
    ]}}});
    ensure!(body == expected, "{body}");
    Ok("\"Alex\" pairs with ex:bob and ex:carol; the language-tagged \"Dave\"@en does not match".into())
}

fn terminal_count(node: &Value) -> usize {
    node["ids"].as_array().map_or(0, Vec::len) + node["values"].as_array().map_or(0, Vec::len)
}

/// Position of a literal or id in the ascending order: numbers by value,
/// then everything else by string.
fn sort_key(item: &Value) -> (u8, f64, String) {
    match item {
        Value::String(id) => (0, 0.0, PrefixMap::with_defaults().expand(id).unwrap().str_value()),
        obj => {
            let lexical = obj["value"].as_str().unwrap().to_string();
            let numeric = matches!(obj["datatype"].as_str(), Some("xsd:integer" | "xsd:decimal"));
            match lexical.parse::<f64>() {
                Ok(n) if numeric => (1, n, String::new()),
                _ => (2, 0.0, lexical),
            }
        }
    }
}

async fn rql() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let prefixes = PrefixMap::with_defaults();
    let aggregates = [
        "/api/class/dbo:Country?count()",
        "/api/resource/*/dbo:populationTotal?count()",
        "/api/resource/*/dbo:populationTotal?sum()",
        "/api/resource/*/dbo:populationTotal?avg()",
        "/api/resource/*/dbo:capital/*/dbo:populationTotal?sum()",
        "/api/resource/*/dbo:capital/*/dbo:populationTotal?avg()",
        "/api/resource/*/dbo:capital?count()",
    ];
    let regexes = [
        "/api/resource/*/rdfs:label?regex(^B)",
        "/api/resource/*/rdfs:label?regex(land$)",
        "/api/class/dbo:Country?regex(an)",
        "/api/resource/*/(rdfs:label|skos:prefLabel)?regex(o)",
        "/api/resource/dbr:Germany?regex(Deutsch)",
    ];
    let (mut aggregate_checks, mut limit_checks, mut regex_checks, mut sort_checks) = (0, 0, 0, 0);
    for _ in 0..30 {
        let graph = random_graph(&mut rng, 30);
        let (gw, _) = embedded(TripleStore::from_triples(graph.clone()), 0);
        for target in aggregates {
            let expected = oracle_get(&graph, target, &prefixes).unwrap();
            let actual = get(&gw, target).await?;
            let ok = if target.contains("avg") { json_close(&actual, &expected) } else { actual == expected };
            ensure!(ok, "{target}: {actual} vs {expected}");
            aggregate_checks += 1;
        }
        for target in regexes {
            let expected = oracle_get(&graph, target, &prefixes).unwrap();
            let actual = get(&gw, target).await?;
            ensure!(actual == expected, "{target}: {actual} vs {expected}");
            regex_checks += 1;
        }
        for base in ["/api/resource/*/dbo:populationTotal", "/api/resource/*", "/api/class/dbo:City"] {
            let all = get(&gw, base).await?;
            let n: u64 = rng.random_range(0..6);
            let limited = get(&gw, &format!("{base}?limit({n})")).await?;
            ensure!(terminal_count(&limited) as u64 <= n, "{base}?limit({n}) returned {}", terminal_count(&limited));
            for key in ["ids", "values"] {
                for item in limited[key].as_array().into_iter().flatten() {
                    ensure!(all[key].as_array().unwrap().contains(item), "{base}?limit({n}) invented {item}");
                }
            }
            limit_checks += 1;
        }
        // shuffled insertion order must not change a sorted answer
        let mut shuffled = graph.clone();
        shuffled.shuffle(&mut rng);
        let (gw2, _) = embedded(TripleStore::from_triples(shuffled.into_iter().rev()), 0);
        for target in ["/api/resource/*/dbo:populationTotal", "/api/class/dbo:City", "/api/resource/*/rdfs:label"] {
            for (sign, descending) in [("+", false), ("-", true)] {
                let sorted_target = format!("{target}?sort({sign})");
                let sorted = get(&gw, &sorted_target).await?;
                ensure!(sorted == get(&gw2, &sorted_target).await?, "{sorted_target}: depends on insertion order");
                let items: Vec<Value> =
                    sorted["ids"].as_array().into_iter().chain(sorted["values"].as_array()).flatten().cloned().collect();
                for pair in items.windows(2) {
                    let (a, b) = (sort_key(&pair[0]), sort_key(&pair[1]));
                    let ordered = match a.partial_cmp(&b) {
                        Some(std::cmp::Ordering::Less) => !descending,
                        Some(std::cmp::Ordering::Greater) => descending,
                        _ => pair[0] != pair[1],
                    };
                    ensure!(ordered, "{sorted_target}: {} before {}", pair[0], pair[1]);
                }
                let unsorted: BTreeSet<String> = get(&gw, target).await?["ids"].as_array().into_iter().flatten().map(|v| v.to_string()).collect();
                let sorted_ids: BTreeSet<String> = sorted["ids"].as_array().into_iter().flatten().map(|v| v.to_string()).collect();
                ensure!(unsorted == sorted_ids, "{sorted_target}: sort changed the id set");
                sort_checks += 1;
            }
        }
    }
    Ok(format!(
        "{aggregate_checks} aggregate, {regex_checks} regex, {limit_checks} limit and {sort_checks} sort checks over 30 random graphs"
    ))
}

async fn batch_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut total = 0;
    for case in 0..50u64 {
        let graph = random_graph(&mut rng, 30);
        let count = rng.random_range(1..=10);
        let requests: Vec<Request> = (0..count).map(|_| random_request(&mut rng, &graph)).collect();
        let (standalone, standalone_store) = embedded(TripleStore::from_triples(graph.clone()), case);
        let (batched, batched_store) = embedded(TripleStore::from_triples(graph), case);
        let mut expected = Vec::new();
        for r in &requests {
            expected.push(standalone.handle(&r.method, &r.target, r.body.as_ref()).await);
        }
        let envelope: Vec<Value> =
            requests.iter().enumerate().map(|(i, r)| request(i, &r.method.to_lowercase(), &r.target, r.body.clone())).collect();
        let (status, doc) = batched.handle_batch(&serde_json::to_string(&envelope).unwrap()).await;
        ensure!(status == 200, "case {case}: batch status {status}");
        let responses = doc.as_array().ok_or("batch response is not an array")?;
        ensure!(responses.len() == requests.len(), "case {case}: {} responses", responses.len());
        for (i, (single, rpc)) in expected.iter().zip(responses).enumerate() {
            ensure!(rpc["id"] == json!(i), "case {case}: response {i} has id {}", rpc["id"]);
            let payload = if single.status >= 400 { &rpc["error"]["data"] } else { &rpc["result"] };
            let single_bytes = single.body.as_ref().map_or_else(|| "null".to_string(), |b| serde_json::to_string(b).unwrap());
            ensure!(
                serde_json::to_string(payload).unwrap() == single_bytes,
                "case {case}, {}: {payload} vs {single_bytes}",
                requests[i].line()
            );
        }
        ensure!(snapshot(&standalone_store) == snapshot(&batched_store), "case {case}: final stores differ");
        total += requests.len();
    }
    Ok(format!("50 random sequences ({total} requests): identical payloads and final stores"))
}

fn same_response(a: &ApiResponse, b: &ApiResponse) -> bool {
    a.status == b.status && a.body == b.body && a.location == b.location
}

async fn protocol_conformance() -> Outcome {
    let remote_store = Arc::new(RwLock::new(store_from(DBPEDIA)));
    let (url, server) = sparql_server::serve_local(Arc::clone(&remote_store)).await.map_err(|e| e.to_string())?;
    let remote = Gateway::new(
        PrefixMap::with_defaults(),
        Arc::new(RemoteHttp::new(EndpointConfig::new(url)).map_err(|e| e.to_string())?),
        IdMinter::seeded(BASE, 9),
        CompileOptions::default(),
    );
    let (direct, direct_store) = embedded(store_from(DBPEDIA), 9);
    let requests = corpus();
    for r in &requests {
        let via_http = remote.handle(&r.method, &r.target, r.body.as_ref()).await;
        let in_process = direct.handle(&r.method, &r.target, r.body.as_ref()).await;
        ensure!(same_response(&via_http, &in_process), "{}\n  http:   {} {:?}\n  direct: {} {:?}", r.line(), via_http.status, via_http.body, in_process.status, in_process.body);
    }
    ensure!(remote_store.read().unwrap().triples() == snapshot(&direct_store), "final stores differ");
    server.abort();
    Ok(format!("{} corpus requests identical over the SPARQL protocol and in process", requests.len()))
}

async fn corpus_trace(seed: u64) -> (String, String) {
    let (gw, _) = embedded(store_from(DBPEDIA), seed);
    let mut sparql = String::new();
    let mut responses = String::new();
    for r in corpus() {
        let response = gw.handle(&r.method, &r.target, r.body.as_ref()).await;
        sparql.push_str(&format!("### {}\n", r.line()));
        for text in &response.trace.sparql {
            sparql.push_str(text);
            sparql.push_str("---\n");
        }
        let body = response.body.as_ref().map_or_else(|| "-".to_string(), |b| serde_json::to_string(b).unwrap());
        responses.push_str(&format!("### {}\n{} {}\n", r.line(), response.status, body));
    }
    (sparql, responses)
}

async fn golden_sparql() -> Outcome {
    let (first, responses) = corpus_trace(42).await;
    let (second, _) = corpus_trace(42).await;
    ensure!(first == second, "two runs produced different SPARQL text");
    golden("corpus.sparql", &first)?;
    golden("corpus.responses", &responses)?;
    let operations = first.matches("---\n").count();
    Ok(format!("{} requests, {operations} SPARQL documents byte-identical to the golden file", corpus().len()))
}

fn main() -> ExitCode {
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap();
    let started = Instant::now();
    let mut results: BTreeMap<usize, (&str, Outcome)> = BTreeMap::new();
    runtime.block_on(async {
        results.insert(1, ("path walk", path_walk().await));
        results.insert(2, ("wildcard nesting", wildcard_nesting().await));
        results.insert(3, ("wildcard-nesting law", nesting_law().await));
        results.insert(4, ("small-instance oracle equivalence", oracle_equivalence().await));
        results.insert(5, ("CRUD round trip", crud_round_trip().await));
        results.insert(6, ("literal step-over", literal_step_over().await));
        results.insert(7, ("RQL", rql().await));
        results.insert(8, ("batch equivalence", batch_equivalence().await));
        results.insert(9, ("protocol conformance", protocol_conformance().await));
        results.insert(10, ("golden SPARQL", golden_sparql().await));
    });
    let mut failed = 0;
    for (n, (name, outcome)) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed in {:.1}s", results.len() - failed, started.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
