pub mod asymcenter;
pub mod error;
pub mod harness;
pub mod iterate;
pub mod mapping;
pub mod order;
pub mod sample;
pub mod space;
pub mod tol;
pub mod vector;
