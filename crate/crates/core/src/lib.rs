pub mod bench;
pub mod certificate;
pub mod conic;
pub mod hierarchies;
pub mod poly;
pub mod polya;
pub mod problem;
pub mod semialg;
mod serde_q;
pub mod verify;
