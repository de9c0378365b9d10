//! Dense inverse-search (DIS) optical flow.
//!
//! Coarse-to-fine: at every pyramid level a grid of patches is aligned to the
//! next frame by inverse-compositional Gauss–Newton on a pure translation,
//! the patch translations are blended into a dense field, and the field is
//! optionally polished by variational refinement. Flow is expressed in the
//! coordinates of the first frame: `next(p + u(p)) ≈ prev(p)`.

mod dis;
mod field;
pub mod pyramid;
mod variational;

pub use dis::dis_flow;
pub use field::{endpoint_error, EndpointError, FlowField};
pub use pyramid::build_pyramid;
pub use variational::VariationalParams;

use crate::{Error, Result};

/// DIS configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct FlowParams {
    pub patch_size: usize,
    pub patch_stride: usize,
    pub pyramid_levels: usize,
    /// Finest level processed; coarser output is upsampled to full size.
    pub finest_level: usize,
    pub max_iterations_per_patch: usize,
    /// Blur the finest level twice with the 5-tap binomial kernel before matching.
    /// Band-limiting the random texture keeps bilinear interpolation close to
    /// exact and removes the bias toward integer displacements.
    pub presmooth: bool,
    pub variational_refinement: bool,
    /// Fixed-point iterations of the variational refinement.
    pub refinement_iterations: usize,
    pub variational: VariationalParams,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            patch_size: 8,
            patch_stride: 4,
            pyramid_levels: 4,
            finest_level: 0,
            max_iterations_per_patch: 12,
            presmooth: true,
            variational_refinement: true,
            refinement_iterations: 5,
            variational: VariationalParams::default(),
        }
    }
}

impl FlowParams {
    /// Copy with `pyramid_levels` lowered until the coarsest level of a
    /// `width`×`height` frame keeps the minimum side. `finest_level` is clamped too.
    pub fn fit_to(&self, width: usize, height: usize) -> FlowParams {
        let mut out = *self;
        while out.pyramid_levels > 1 && pyramid::check_levels(width, height, out.pyramid_levels).is_err() {
            out.pyramid_levels -= 1;
        }
        out.finest_level = out.finest_level.min(out.pyramid_levels.saturating_sub(1));
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_size < 2 {
            return Err(Error::InvalidParams("patch_size must be at least 2"));
        }
        if self.patch_stride == 0 || self.patch_stride > self.patch_size {
            return Err(Error::InvalidParams("patch_stride must lie in 1..=patch_size"));
        }
        if self.pyramid_levels == 0 {
            return Err(Error::InvalidParams("pyramid_levels must be at least 1"));
        }
        if self.finest_level >= self.pyramid_levels {
            return Err(Error::InvalidParams("finest_level must be below pyramid_levels"));
        }
        Ok(())
    }
}
