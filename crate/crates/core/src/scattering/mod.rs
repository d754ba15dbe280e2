//! Momentum-exchange entanglement.
//!
//! An instantaneous scattering at position `x` transfers momentum `δp` with
//! amplitude `C(δp)` and leaves the scatterer in a tag state `|x⟩_s`. The tag
//! overlaps are `⟨x'|x⟩_s = D(x - x') = ∫ |C(δp)|² e^{iδp(x-x')} dδp`, so the
//! reduced particle state is `ρ(x,x') = ψ(x) ψ*(x') D(x - x')`: position
//! density untouched, momentum density convolved with `|C|²`.
//!
//! The same `D` describes a recoiling diaphragm and a scattered photon: the
//! tag's own later evolution is unitary and cancels in the overlaps.

mod joint;
mod kernel;
mod reduced;

pub use joint::{build_joint_state, build_joint_state_with_photon, JointState};
pub use kernel::{
    decoherence_kernel, gaussian_width_for_overlap, kernel_preset, lens_window_width,
    DecoherenceKernel, KernelSpec, ScatteringKernel,
};
pub use reduced::{
    entangle_at_slits, lag_profile, scatter, scatter_reduced, scatter_reduced_with_photon,
    ScatteredState,
};
