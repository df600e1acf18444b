//! Kernels that induce a prescribed Hölder regularity in their RKHS, each
//! returned together with a full-rate certificate.
//!
//! Every construction here is an explicit finite feature expansion
//! `k(x,x') = ⟨Ψ(x'), Ψ(x)⟩`, so the resulting kernels are exactly PSD and
//! expose their feature map through [`KernelHandle::features`].

mod d2ke;
mod mixture;
mod primitives;
mod series;

pub use d2ke::{distance_substitution_kernel, OuterFunction, OuterSpec};
pub use mixture::{
    cosine_feature, feature_mixture_kernel, gaussian_random_features, random_feature_kernel,
    truncated_gaussian_sampler, FeatureFn, FeatureMixtureSpec, OmegaSampler, SeedRng,
};
pub use primitives::Primitive;
pub use series::{series_kernel, FunctionFamily, MemberFn};

use crate::certificate::HolderCertificate;
use crate::kernel::KernelHandle;

/// Upper bound on family sizes and Monte Carlo draw counts.
pub const MAX_FAMILY_SIZE: usize = 1 << 16;

/// A constructed kernel with the certificate it carries.
#[derive(Debug, Clone)]
pub struct Construction {
    pub kernel: KernelHandle,
    pub certificate: HolderCertificate,
}
