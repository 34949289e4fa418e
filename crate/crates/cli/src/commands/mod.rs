pub mod bench;
pub mod fit;
pub mod prefilter;
pub mod render;
pub mod toy;
