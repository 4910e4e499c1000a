pub mod airl;
pub mod env;
pub mod harness;
pub mod model;
pub mod nn;
pub mod ppo;
