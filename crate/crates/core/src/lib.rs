pub mod chart;
pub mod gf2;
pub mod milnor;
pub mod adem;
pub mod text;
pub mod module;
pub mod isotropic;
pub mod jobs;
pub mod homological;
