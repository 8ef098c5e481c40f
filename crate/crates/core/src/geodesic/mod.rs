//! Horizontal geodesics (sections) of the glued sphere.
//!
//! [`trace_section`] follows the exact piecewise-radial itinerary through
//! both centers; [`integrate`] solves the geodesic equations of the glued
//! metric numerically so the itinerary can be cross-checked.

mod integrate;
mod trace;

pub use integrate::{
    integrate, numerical_return_length, Event, EventKind, GeodesicState, IntegratorSettings, Trajectory,
};
pub use trace::{
    compare_sections, section_verdict, trace_section, CenterPassage, Crossing, InjectivityWitness, Leg, LegKind,
    LegPoint, SectionComparison, SectionLength, SectionSummary, SectionTrace, SectionVerdict, TraceSettings,
};
