use std::sync::Arc;
use std::time::Instant;

use isoadams::homological::*;
use isoadams::isotropic::{solve_action_table, IsotropicWindow};

fn main() {
    let t0 = Instant::now();
    let window = IsotropicWindow::for_depth(44);
    let table = solve_action_table(&window).unwrap();
    let module = table.window_module(&window).unwrap();
    println!("module dim {} in {:?}", module.dimension(), t0.elapsed());
    let res = FreeResolution::of_ground_field(Arc::new(WindowedAlgebra::new(AlgebraFlavor::A0)), 9, 44);
    println!("resolution {:?}", t0.elapsed());
    let chart = ext_chart_with_coefficients(&res, &module, "H", 8, 44, exact_depth(&window));
    println!("chart {:?} cells {}", t0.elapsed(), chart.cells.len());
    let cl = FreeResolution::of_ground_field(Arc::new(WindowedAlgebra::new(AlgebraFlavor::Classical)), 8, 22);
    let clc = ext_chart(&cl, 8, 22, ChartOptions::default());
    let r = compare_doubling(&clc, &chart, 14);
    println!("compared {} mismatches {:?}", r.compared, r.mismatches);
    println!("vanishing {:?}", vanishing_check(&chart));
    println!("total {:?}", t0.elapsed());
}
