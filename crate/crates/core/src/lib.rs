pub mod error;
pub mod geom;
pub mod io;
pub mod linalg;
pub mod mindex;
pub mod nodes;
pub mod poly;
pub mod sdfit;
pub mod surfaces;
pub mod variety;

pub use error::{GplsError, Result};
pub use mindex::{build_index_set, LpDegree, MultiIndexSet};
pub use nodes::{build_grid, GridScheme, UnisolventGrid};
pub use poly::{interpolate, Basis, Polynomial, PolynomialRecord};
pub use variety::{build_gpls, DomainTransform, FitMode, FitOptions, GplsSurface};
