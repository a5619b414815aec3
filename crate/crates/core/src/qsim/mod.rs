//! Pure-state quantum engine: statevectors, gates, measurements in BB84
//! bases, density matrices and a handle-based register store.

mod density;
mod gate;
mod state;
mod store;

pub use density::DensityMatrix;
pub use gate::{basis_rotation, breidbart_rotation, cnot, phase, swap, Gate};
pub use state::{fidelity_up_to_global_phase, make_epr, BasisString, Statevector};
pub use store::{RegisterHandle, RegisterStore};
