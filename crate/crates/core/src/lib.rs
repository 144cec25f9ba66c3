pub mod adaptor;
pub mod arith;
pub mod codec;
pub mod curve;
pub mod dlog;
pub mod exec;
pub mod field;
pub mod isogeny;
pub mod nizk;
pub mod orientation;
pub mod params;
pub mod relation;
pub mod sig;
pub mod size;
pub mod swap;
