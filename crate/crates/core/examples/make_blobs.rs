//! Generate a synthetic blob dataset on disk, in the directory format the
//! CLI and the loaders consume. Handy for trying the pipeline without a
//! citation network at hand:
//!
//! ```text
//! cargo run --release -p hdgcn --example make_blobs -- /tmp/blobs
//! hdgcn stats --dataset /tmp/blobs
//! ```

use std::path::PathBuf;
use std::process::exit;

use hdgcn::data::{make_synthetic_blobs, save_dataset};

fn main() {
    let mut args = std::env::args().skip(1);
    let Some(out) = args.next().map(PathBuf::from) else {
        eprintln!("usage: make_blobs <out-dir> [n-per-class=60] [classes=3] [seed=0]");
        exit(2);
    };
    let n_per_class: usize = args.next().map_or(60, |s| s.parse().expect("n-per-class"));
    let classes: usize = args.next().map_or(3, |s| s.parse().expect("classes"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));

    let dataset = make_synthetic_blobs(n_per_class, classes, 8, 4.0, 0.2, 0.01, seed)
        .expect("blob generation");
    save_dataset(&dataset, &out).expect("write dataset");
    println!(
        "wrote {} nodes / {} classes to {}",
        dataset.num_nodes(),
        dataset.num_classes,
        out.display()
    );
}
