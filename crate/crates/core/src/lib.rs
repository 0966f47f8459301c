//! Learning, control, certification and safe tracking for rigid bodies on SE(3).

pub mod se3;
pub mod world;
pub mod plant;
pub mod controller;
pub mod certify;
pub mod governor;
pub mod autodiff;
pub mod learner;
