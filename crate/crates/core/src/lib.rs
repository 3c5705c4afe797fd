pub mod error;
pub mod geometry;
pub mod image;
pub mod pairing;
pub mod pointcloud;
pub mod projection;
pub mod metrics;
pub mod augment;
pub mod rng;
pub mod synth;
