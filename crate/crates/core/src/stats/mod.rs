//! Distribution functions used by beam alignment and authentication.

pub mod alignment;
pub mod ncx2;
pub mod quadform;

pub use alignment::{
    grad_log_pa, misalignment_terms, pa_closed_form, pa_derivative, pa_general, pa_grouped, pa_lower_bound, PaModel,
    SidelobeLambdas,
};
pub use ncx2::{ncx2_pdf, ncx2_q, ncx2_q_inv, Ncx2};
pub use quadform::{quadform_approx, weighted_sum_tail, QuadFormApprox};
