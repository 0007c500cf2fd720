pub mod conic;
pub mod formulation;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod region;
