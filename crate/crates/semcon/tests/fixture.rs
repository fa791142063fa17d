//! Regression net over the checked-in fixture corpus: ingest accounting,
//! graph shape, planted scores, and the byte-frozen metric table. Any change
//! in tokenization, weighting, scoring, or rendering shows up here first.

mod common;

use semcon::contribution::{contribution, contribution_all, UndefinedReason};
use semcon::corpus::Doi;
use semcon::graph::build_graph;
use semcon::textmodel::{build_vectors, build_vocabulary};

use common::{fixture_path, load_fixture_corpus};

fn doi(s: &str) -> Doi {
    Doi::parse(s).unwrap()
}

#[test]
fn ingest_accounting_is_frozen() {
    let corpus = load_fixture_corpus();
    let report = corpus.ingest_report();
    assert_eq!(
        (
            report.papers.accepted,
            report.papers.duplicate,
            report.papers.malformed
        ),
        (200, 0, 0)
    );
    assert_eq!(
        (
            report.edges.accepted,
            report.edges.duplicate,
            report.edges.malformed
        ),
        (400, 20, 0)
    );
    assert_eq!(report.edges.self_citation, 0);
    assert_eq!(corpus.papers().len(), 200);
    assert_eq!(corpus.edges().len(), 400);
    assert_eq!(corpus.text_bearing_count(), 195);
}

#[test]
fn resolver_prefixes_in_the_fixture_normalize_away() {
    let corpus = load_fixture_corpus();
    // These three records carry resolver prefixes and mixed case in the raw
    // file; they must land under their bare lowercase DOIs.
    for bare in ["10.5555/p005", "10.5555/p041", "10.5555/p088"] {
        assert!(corpus.papers().contains_key(&doi(bare)), "{bare} missing");
    }
}

#[test]
fn graph_shape_is_frozen() {
    let corpus = load_fixture_corpus();
    let graph = build_graph(corpus.edges());
    assert_eq!(graph.edge_count(), 400);
    assert!(graph.is_mirror_consistent());
    // The hub collects the ring head plus 36 filler citers.
    assert_eq!(graph.citation_count(&doi("10.5555/p000")), 37);
    // External papers appear only as edge endpoints: no record, but the
    // graph knows them through exactly two edges each.
    for i in 0..10 {
        let external = doi(&format!("10.4444/x{i:02}"));
        assert!(!corpus.papers().contains_key(&external));
        assert!(graph.knows(&external));
        let touching = graph.cited_set(&external).len() + graph.citing_set(&external).len();
        assert_eq!(touching, 2, "{external} edge participation");
    }
}

#[test]
fn score_census_is_frozen() {
    let corpus = load_fixture_corpus();
    let graph = build_graph(corpus.edges());
    let (_, vectors) = build_vectors::<f64>(&corpus).unwrap();
    let (table, summary) = contribution_all(&graph, &vectors, &corpus);

    assert_eq!(summary.defined, 143);
    assert_eq!(summary.no_cited_texts, 35);
    assert_eq!(summary.no_citing_texts, 19);
    assert_eq!(summary.paper_unknown, 3);
    assert_eq!(summary.total(), 200);
    assert_eq!(table.len(), 200);
    assert_eq!(table.defined_count(), 143);

    // Every defined pairing stays small enough for the naive oracle.
    let mut max_pairs = 0;
    for record in corpus.papers().values() {
        if let Some(pairs) = contribution(&record.doi, &graph, &vectors).pair_count() {
            max_pairs = max_pairs.max(pairs);
        }
    }
    assert_eq!(max_pairs, 37);
}

#[test]
fn planted_papers_score_as_designed() {
    let corpus = load_fixture_corpus();
    let graph = build_graph(corpus.edges());
    let (_, vectors) = build_vectors::<f64>(&corpus).unwrap();

    // Identical single-term neighbors: distance collapses to exactly zero.
    let zero = contribution(&doi("10.5555/p070"), &graph, &vectors);
    assert_eq!(zero.value(), Some(0.0));

    // Disjoint single-term neighbors: exactly orthogonal.
    let one = contribution(&doi("10.5555/p100"), &graph, &vectors)
        .value()
        .unwrap();
    assert!((one - 1.0).abs() <= 1e-9);

    // The hub's score is pinned to 12 significant digits.
    let hub = contribution(&doi("10.5555/p000"), &graph, &vectors)
        .value()
        .unwrap();
    assert!((hub - 0.953665635397).abs() <= 5e-13, "hub scored {hub}");

    // Text-free papers with citing company fail on the cited side first.
    let text_free = contribution(&doi("10.5555/p191"), &graph, &vectors);
    assert_eq!(text_free.value(), None);

    // Text-free papers without a single edge are unknown to the pipeline.
    for name in ["10.5555/p193", "10.5555/p194", "10.5555/p195"] {
        let lonely = contribution(&doi(name), &graph, &vectors);
        assert!(
            matches!(
                lonely,
                semcon::contribution::ContributionScore::Undefined(UndefinedReason::PaperUnknown)
            ),
            "{name} should be unknown, got {lonely:?}"
        );
    }
}

#[test]
fn vocabulary_census_is_frozen() {
    let corpus = load_fixture_corpus();
    let stats = build_vocabulary(&corpus).unwrap();
    assert_eq!(stats.doc_count(), 195);
    assert_eq!(stats.term_count(), 115);
}

#[test]
fn zero_reader_papers_survive_ingest() {
    let corpus = load_fixture_corpus();
    for name in ["10.5555/p180", "10.5555/p181"] {
        assert_eq!(corpus.papers()[&doi(name)].reader_count, 0, "{name}");
    }
}

#[test]
fn metric_table_bytes_are_frozen() {
    let corpus = load_fixture_corpus();
    let graph = build_graph(corpus.edges());
    let (_, vectors) = build_vectors::<f64>(&corpus).unwrap();
    let (table, _) = contribution_all(&graph, &vectors, &corpus);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("metrics.csv");
    table.write_csv(&path).unwrap();
    let fresh = std::fs::read(&path).unwrap();
    let golden = std::fs::read(fixture_path("golden_metrics.csv")).unwrap();
    assert!(
        fresh == golden,
        "metric table deviates from the golden copy"
    );
}
