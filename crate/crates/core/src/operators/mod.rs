//! The averaging operator `T`, the ultrahyperbolic operator `□` and the
//! exact couple they form.

mod checks;
mod couple;
mod float_rep;
mod reflection;
mod spectral;
mod symbolic;
mod zonal_kernel;

pub use checks::*;
pub use couple::*;
pub use float_rep::*;
pub use reflection::*;
pub use spectral::*;
pub use symbolic::*;
pub use zonal_kernel::*;
