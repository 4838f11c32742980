//! Matrix-free time-reversal communication for 2D symmetric hyperbolic
//! systems (linear acoustics and TM Maxwell).
//!
//! The crate provides the forward solver `F`, its exact adjoint, the source and
//! measurement operators of antenna arrays, the communication operators
//! `A = M-hat F Q` and `B = M F Q-hat`, the mirror identity `A* = T B T-hat`,
//! and five iterative schemes that solve `A r = s~` using only `A` and `A*`.
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`.

pub mod antenna;
pub mod dense;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod medium;
pub mod ops;
pub mod physics;
pub mod propagator;
pub mod reversal;
pub mod scenario;
pub mod schemes;
pub mod scalar;
pub mod signal;
pub mod verify;

pub use antenna::{Antenna, AntennaArray, AntennaShape};
pub use diagnostics::{energy_density, energy_total, field_norm, flux, inner_product_fields};
pub use error::{Error, Result};
pub use field::{FieldMovie, FieldState, MovieKind};
pub use grid::Grid;
pub use medium::Medium;
pub use physics::{Physics, PhysicsKind, ReversalConvention, CHANNELS};
pub use propagator::{
    run_adjoint_direct, run_adjoint_via_tr, run_forward, Forcing, Propagator, Recorder, StepperConfig,
};
pub use reversal::{time_reverse_field, time_reverse_signals};
pub use scalar::Real;
pub use signal::{inner_product_signals, signal_norm, Side, SignalChannel, SignalSet};
pub use ops::{apply_m, apply_q, CommunicationChannel, GeneralizedMeasurement, MeasurementSpec, Scene};
pub use scenario::{build_scene, make_wavelet, BuiltScene, SceneSpec};
pub use schemes::{solve, BetaRule, SchemeConfig, SchemeKind, SchemeTrace};
pub use verify::{run_identity_suite, CheckResult, Tier, VerifyOptions};

pub type Grid64 = Grid<f64>;
pub type Medium64 = Medium<f64>;
pub type FieldState64 = FieldState<f64>;
pub type FieldMovie64 = FieldMovie<f64>;
pub type SignalSet64 = SignalSet<f64>;
pub type AntennaArray64 = AntennaArray<f64>;
pub type Scene64 = Scene<f64>;
pub type StepperConfig64 = StepperConfig<f64>;
pub type SchemeConfig64 = SchemeConfig<f64>;
pub type SchemeTrace64 = SchemeTrace<f64>;
pub type MeasurementSpec64 = MeasurementSpec<f64>;
