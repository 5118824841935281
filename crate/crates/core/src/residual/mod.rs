//! Full A_M assembly and the check that it lies in the ideal (t^M, h^{M+2}).

mod assemble;

pub use assemble::{
    assemble_am, assemble_am_with, compose_em, verify_am_structure, AssemblyPath, CompositionExpansion, ResidualReport,
};
