//! Special functions and quadrature shared by every analytic formula.

pub mod quadrature;
pub mod special;

pub use quadrature::{
    geometric_breakpoints, integrate_adaptive, integrate_piecewise, integrate_semi_infinite,
    Integral, QuadratureRule, RuleKind, DEFAULT_LAGUERRE_ORDER, DEFAULT_TOL,
};
pub use special::{
    chiani_q_approx, erf, erfc, exp_integral_e1, normal_pdf, q_function, scaled_exp_integral_e1,
    std_normal_cdf, std_normal_pdf,
};
