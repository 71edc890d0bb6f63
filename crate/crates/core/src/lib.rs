pub mod corpus;
pub mod graph;
pub mod linalg;
pub mod reduction;
pub mod solvers;
pub mod verify;
