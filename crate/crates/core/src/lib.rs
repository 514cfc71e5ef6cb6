//! Simulator and algorithm library for a wearable navigation and
//! scene-understanding aid: mapping, boundary fitting, planning, belt
//! guidance and the per-task perception pipelines.

pub mod belt;
pub mod boundary;
pub mod colour;
pub mod geometry;
pub mod harness;
pub mod mapping;
pub mod planner;
pub mod seats;
pub mod seeding;
pub mod structuring;
pub mod touch;
pub mod world;
