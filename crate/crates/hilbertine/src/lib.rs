//! Hilbert geometry on properly convex open subsets of the real projective plane.
//!
//! Distances follow `d(x, y) = ln [p:x:y:q]` with no factor ½, and the
//! Busemann density is normalized so that every Finsler unit ball has measure π.

pub mod busemann;
pub mod domain;
pub mod dynamics;
pub mod error;
pub mod projective;
mod quadrature;
pub mod surface;
pub mod vinberg;

pub use busemann::{
    busemann_density, ideal_triangle_area, pic_volume_profile, region_volume, IdealTriangleArea, IdealTriangleOptions,
    ProfileOptions, Region, Verdict, VolumeProfile,
};
pub use domain::{BoundaryChords, ConvexDomain, Distance, DomainSpec, Membership, RegularityOptions, RegularityReport};
pub use dynamics::{classify, DynClass, Family, ProjTransform};
pub use error::{Error, Result};
pub use projective::{cross_ratio, join, line_conic_intersection, meet, AffineChart, Conic, ProjLine, ProjPoint, M3, V3};
pub use surface::{GroupPresentation, LimitSetCloud, VolumeVerdict};
pub use vinberg::{ConvexCone, PsiForm};
