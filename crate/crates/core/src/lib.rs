pub mod bodies;
pub mod bounds;
pub mod distance;
pub mod experiments;
pub mod metrics;
pub mod num_kernels;
pub mod quadrature;
pub mod sampler;
