//! Normal-coordinate reduction: boundary data → p_{k,j} → model m_{k,0}.
//!
//! Boundary functions are stored as `SymExpr` over an auxiliary context whose
//! y-slots hold x₁..x_n followed by ξ₁..ξ_n (n = d − 1 tangential variables).
//! ϱ and the η-tail never occur in them.

mod data;
mod kappa;
mod transform;


pub use data::{compute_p, gauge_correction, BoundaryConfig, BoundaryData, GaugeCorrection, NormalFormCoeffs};
pub use kappa::{flat_kappa, FlatKappa, KappaPoint};
pub use transform::{manifold_dn_symbol, transform_m, TransformedModel};
