//! Multi-band RF energy harvesting for cognitive-radio secondary users.
//!
//! Secondary users (SUs) sense the bands of several primary users (PUs) with
//! energy detectors. Per band, an SU is either close enough to harvest the
//! PU's RF energy (harvesting region), able to detect the PU but not harvest
//! (inactive region), or unable to detect it at all and therefore free to use
//! the channel (communication region).
//!
//! The crate is layered bottom-up:
//!
//! * [`model`]: channel gains, detection statistics, energy accounting.
//! * [`gp`]: monomial/posynomial algebra, single condensation, a log-space
//!   barrier solver for geometric programs and the successive convex
//!   approximation loop.
//! * [`sensing`]: the per-slot sample-count / threshold minimisation.
//! * [`region`]: ground-truth region labels and the one-vs-one SVM.
//! * [`sim`]: the time-slotted simulator and training-fraction sweeps.
//! * [`io`]: scenario parsing and CSV / JSON emission.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gp;
pub mod io;
pub mod model;
pub mod region;
pub mod sensing;
pub mod sim;

pub use error::{Error, Result};
