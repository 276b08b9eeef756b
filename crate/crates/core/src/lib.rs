pub mod agent;
pub mod behavior;
pub mod env;
pub mod render;
pub mod reward;
pub mod tasks;
pub mod voxel;
