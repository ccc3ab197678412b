//! Time the minimal resolution of F₂ over a chosen algebra.
//! Usage: cargo run --release --example resolve_timing -- <A0|G|classical> <smax> <pmax>
use std::sync::Arc;
use std::time::Instant;

use isoadams::homological::{AlgebraFlavor, FreeResolution, WindowedAlgebra};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let flavor = match args.get(1).map(String::as_str) {
        Some("G") => AlgebraFlavor::G,
        Some("classical") => AlgebraFlavor::Classical,
        _ => AlgebraFlavor::A0,
    };
    let smax: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(4);
    let pmax: i64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(20);
    let start = Instant::now();
    let res = FreeResolution::of_ground_field(Arc::new(WindowedAlgebra::new(flavor)), smax, pmax);
    let gens: Vec<usize> = (0..=smax).map(|s| res.generators(s).len()).collect();
    println!("{flavor} smax={smax} pmax={pmax}: generators per s {gens:?} in {:?}", start.elapsed());
}
