//! Exact solutions, certification oracles and information-versus-strength
//! analysis for General Lotto games with scouts.
//!
//! * [`single_field`]: closed-form value and equilibrium strategies of the
//!   one-field game, with exact payoff and budget evaluation.
//! * [`verification`]: Monte Carlo play-outs and best-response oracles that
//!   check those strategies independently.
//! * [`multistage`]: upper and lower bounds for the two-stage game over
//!   several fields.
//! * [`analysis`]: value derivatives, influence ratio, required-resource
//!   contours and the budget split between resources and information.
//! * [`figures`]: tables behind the standard plots.

pub mod analysis;
pub mod error;
pub mod figures;
pub mod multistage;
pub mod numfmt;
pub mod single_field;
pub mod verification;

pub use error::{LottoError, Result};
