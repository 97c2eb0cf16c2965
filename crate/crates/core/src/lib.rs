//! Sign recovery from 1-bit measurements by linear programming.
//!
//! Given a sensing matrix `phi` and sign measurements `y = sign(phi x)` (standard
//! sign, zeros allowed), the decoder solves
//!
//! ```text
//! min ||x||_1  s.t.  phi_{J+} x >= 1,  phi_{J-} x <= -1,  phi_{J0} x = 0
//! ```
//!
//! whose optimal points are consistent with `y` by construction. The [`certify`]
//! module decides uniqueness of a decoded point (restricted range space property
//! plus a full-column-rank test) and the order-`k` recovery properties, and
//! [`oracle`] supplies exhaustive ground truth at desk scale.

pub mod certify;
pub mod decoders;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod oracle;
pub mod signmodel;
pub(crate) mod subsets;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, TolerancePolicy};
pub use signmodel::{SignMeasurement, SignMode};
