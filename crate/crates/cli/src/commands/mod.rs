pub mod bifurcate;
pub mod compare;
pub mod enumerate;
pub mod graph_dump;
pub mod simulate;
pub mod sweep;
