use std::path::PathBuf;

use idla_core::blocks::{check_validity, check_validity_lazy, cut_paste, pts, stp, Block, BlockDocument, BlockKind};
use idla_core::{generate, Graph, GraphSpec};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn load(name: &str) -> Block {
    BlockDocument::read(&data(name)).unwrap().into_parts().unwrap().0
}

fn worked_host() -> Graph {
    Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap()
}

#[test]
fn worked_example_cut_paste() {
    let worked = load("worked_example.json");
    assert_eq!(cut_paste(&worked, 3, 1).unwrap(), load("worked_example_cut_paste.json"));
    for (i, t) in [(0, 0), (1, 1), (2, 3), (3, 5)] {
        assert_eq!(cut_paste(&worked, i, t).unwrap(), worked, "cell ({i}, {t})");
    }
}

#[test]
fn worked_example_is_lazily_sequential() {
    let worked = load("worked_example.json");
    assert!(check_validity_lazy(&worked, &worked_host(), BlockKind::Sequential).is_valid());
    assert!(!check_validity(&worked, &worked_host(), BlockKind::Sequential).is_valid());
}

#[test]
fn star_blocks_correspond() {
    let star = generate(&GraphSpec::Star { n: 4 }).unwrap();
    let seq = load("star_sequential.json");
    let par = load("star_parallel.json");
    assert!(check_validity(&seq, &star, BlockKind::Sequential).is_valid());
    assert!(check_validity(&par, &star, BlockKind::Parallel).is_valid());
    assert_eq!(stp(&seq).unwrap(), par);
    assert_eq!(pts(&par, None).unwrap(), seq);
}

#[test]
fn documents_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["worked_example.json", "worked_example_cut_paste.json", "star_sequential.json", "star_parallel.json"] {
        let doc = BlockDocument::read(&data(name)).unwrap();
        let copy = dir.path().join(name);
        doc.write(&copy).unwrap();
        assert_eq!(BlockDocument::read(&copy).unwrap(), doc);
        assert_eq!(BlockDocument::from_json(&doc.to_json().unwrap()).unwrap(), doc);
    }
}
