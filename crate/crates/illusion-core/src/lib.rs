//! Majority illusion on labelled social networks: detection, exact search
//! for illusion-inducing labellings, budget-bounded illusion elimination,
//! and the SAT-gadget encodings behind the hardness of both problems,
//! together with a round-trip verification harness.
//!
//! Module map:
//! - [`network`]: graphs, binary labellings, winners, illusion reports,
//!   edge edit plans.
//! - [`fraction`]: exact rationals and the padding thresholds h*, h#, h+.
//! - [`cnf`]: DIMACS formulas, 3-CNF / 2P2N classifiers, brute-force SAT,
//!   seeded generators.
//! - [`verification`]: the 3-CNF-to-network encoding whose full illusion
//!   mirrors satisfiability.
//! - [`elimination`]: the 2P2N encodings whose bounded edit repair mirrors
//!   satisfiability, plus pump gadgets for arbitrary thresholds.
//! - [`solver`]: backtracking and brute-force illusion search, CNF export,
//!   elimination search and plan checking.
//! - [`plurality`]: the multi-colour generalisation and its separating
//!   example.
//! - [`harness`]: corpus enumeration and pass/fail/not-refuted verdicts.
//! - [`io`]: JSON and text formats.

pub mod cnf;
pub mod elimination;
pub mod fixtures;
pub mod fraction;
pub mod harness;
pub mod io;
pub mod network;
pub mod plurality;
pub mod solver;
pub mod verification;

pub use fraction::Fraction;
pub use network::{Colour, EditPlan, IllusionReport, Labelling, LabelledNetwork, SocialNetwork};
