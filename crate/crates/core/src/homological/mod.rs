pub mod algebra;
pub mod cobar;
pub mod ext;
pub mod products;
pub mod resolution;

pub use algebra::{AlgebraFlavor, WindowedAlgebra};
pub use cobar::{BarComplex, CobarComplex};
pub use ext::{
    compare_charts, compare_doubling, exact_depth, ext_chart, ext_chart_with_coefficients, vanishing_check, CellKey,
    ChartCell, ChartOptions, ClassNames, ComparisonReport, ExtChart,
};
pub use products::{massey_triple, yoneda_product, ExtClass, MasseyProduct, ProductError};
pub use resolution::FreeResolution;
