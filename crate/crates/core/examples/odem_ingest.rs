//! Collapsing a type-level ODEM dependency model to a package graph.
//!
//! Run with `cargo run --example odem_ingest [path.odem]`.

use std::path::PathBuf;

use deplink::graph::{load_odem, to_edge_list};

fn main() -> deplink::Result<()> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| fixtures.join("sample.odem"));
    let xml = std::fs::read_to_string(&path).map_err(|e| deplink::Error::Io { path: path.clone(), source: e })?;

    let g = load_odem(&xml)?;
    println!("{}: {} packages, {} dependencies", path.display(), g.node_count(), g.edge_count());
    print!("{}", to_edge_list(&g));

    let broken = std::fs::read_to_string(fixtures.join("malformed.odem")).expect("fixture exists");
    match load_odem(&broken) {
        Ok(_) => println!("malformed fixture unexpectedly parsed"),
        Err(e) => println!("\nmalformed.odem: {e}"),
    }
    Ok(())
}
