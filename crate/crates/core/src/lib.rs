//! Truncated-series computations for Löwner-Kufarev shape evolution and the
//! integrable structures attached to it: conserved generating functions,
//! Kirillov vector fields, Grassmannian graphs, τ-functions and the KP
//! equation.
//!
//! Conventions used throughout:
//!
//! * `f(z) = z(1 + Σ_{n≥1} c_n z^n)`, stored as a [`series::TruncatedSeries`]
//!   with coefficients `0, 1, c_1, c_2, ...`.
//! * `ψ̄(z) = Σ_m ψ̄_m z^{1-m}`, so the generating function `f'ψ̄` has
//!   coefficients `Ḡ_k` of `z^{1-k}`.
//! * Bars on `c` in graph and KP formulas are literal complex conjugates.

pub mod driver;
pub mod evolution;
pub mod grassmannian;
pub mod kp;
pub mod observables;
pub mod series;
pub mod virasoro;

pub use num_complex::Complex64;
