//! Default tolerances and sizes.
//!
//! | constant | value | used by |
//! |---|---|---|
//! | `QUAD_ABS_TOL` | 1e-10 | adaptive Gauss–Legendre (coarea, bands, probes) |
//! | `QUAD_REL_TOL` | 1e-12 | adaptive Gauss–Legendre |
//! | `PROFILE_RESIDUAL_TOL` | 1e-8 | validation of user-supplied profiles |
//! | `CATALOG_RESIDUAL_TOL` | 1e-10 | catalog profile self-check |
//! | `GRID_NODES` | 4096 | default radial grid |
//! | `MIN_GRID_NODES` | 16 | grid validation |
//! | `DERIVATIVE_SAMPLES` | 1000 | nonvanishing-derivative heuristic |
//! | `RAYLEIGH_STARTS` | 5 | multi-start minimization |
//! | `RAYLEIGH_REL_TOL` | 1e-8 | stopping rule: relative change over `RAYLEIGH_STALL_WINDOW` iterations |
//! | `RAYLEIGH_STALL_WINDOW` | 10 | |
//! | `RAYLEIGH_MAX_ITER` | 100000 | iteration cap |
//! | `RAYLEIGH_TIE_TOL` | 1e-10 | tie-breaking among starts |
//! | `SUBCRITICAL_MARGIN` | 0.1 | near-end quotient margin for "consistent with subcritical" |
//!
//! Every value can be overridden per run through the option structs that
//! carry it.

pub const QUAD_ABS_TOL: f64 = 1e-10;
pub const QUAD_REL_TOL: f64 = 1e-12;
pub const PROFILE_RESIDUAL_TOL: f64 = 1e-8;
pub const CATALOG_RESIDUAL_TOL: f64 = 1e-10;
pub const GRID_NODES: usize = 4096;
pub const MIN_GRID_NODES: usize = 16;
pub const DERIVATIVE_SAMPLES: usize = 1000;
pub const RAYLEIGH_STARTS: usize = 5;
pub const RAYLEIGH_REL_TOL: f64 = 1e-8;
pub const RAYLEIGH_STALL_WINDOW: usize = 10;
pub const RAYLEIGH_MAX_ITER: usize = 100_000;
pub const RAYLEIGH_TIE_TOL: f64 = 1e-10;
pub const SUBCRITICAL_MARGIN: f64 = 0.1;
