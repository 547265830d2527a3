//! Carathéodory drivers `p(z, t)` from discrete Herglotz measures.
//!
//! Each piece of a driver holds a probability measure on the circle made of
//! finitely many atoms plus an optional multiple of normalized Lebesgue
//! measure, and is in force from its `t_start` until the next piece begins.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::TruncatedSeries;

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriverError {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("driver evaluated at negative time {0}")]
    NegativeTime(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub theta: f64,
    pub mu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub t_start: f64,
    #[serde(default)]
    pub atoms: Vec<Atom>,
    /// Mass of normalized Lebesgue measure; contributes only to `p_0`.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub uniform: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// JSON form of a driver: `{"pieces": [{"t_start", "atoms": [{"theta", "mu"}]}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriverSpec {
    pub pieces: Vec<Piece>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<String>,
    /// Minimum of `Re p` on 1024 points of `|z| = 0.99`, over all pieces.
    pub min_re_p: f64,
}

/// A validated driver.
#[derive(Clone, Debug, PartialEq)]
pub struct HerglotzDriver {
    spec: DriverSpec,
}

fn measure_issues(spec: &DriverSpec) -> Vec<String> {
    let mut issues = Vec::new();
    if spec.pieces.is_empty() {
        issues.push("driver has no pieces".into());
    }
    if let Some(p) = spec.pieces.first() {
        if p.t_start != 0.0 {
            issues.push(format!("first piece starts at {} instead of 0", p.t_start));
        }
    }
    for w in spec.pieces.windows(2) {
        if w[1].t_start.partial_cmp(&w[0].t_start) != Some(std::cmp::Ordering::Greater) {
            issues.push(format!(
                "t_start not strictly increasing: {} then {}",
                w[0].t_start, w[1].t_start
            ));
        }
    }
    for (i, p) in spec.pieces.iter().enumerate() {
        if !p.t_start.is_finite() {
            issues.push(format!("piece {i}: non-finite t_start"));
        }
        if p.uniform < 0.0 || !p.uniform.is_finite() {
            issues.push(format!("piece {i}: uniform weight {} is not a nonnegative number", p.uniform));
        }
        for a in &p.atoms {
            if a.mu < 0.0 || !a.mu.is_finite() {
                issues.push(format!("piece {i}: weight {} at theta={} is not nonnegative", a.mu, a.theta));
            }
            if !a.theta.is_finite() {
                issues.push(format!("piece {i}: non-finite theta"));
            }
        }
        let total: f64 = p.uniform + p.atoms.iter().map(|a| a.mu).sum::<f64>();
        if (total - 1.0).abs() > WEIGHT_TOL {
            issues.push(format!("piece {i}: weights sum to {total}, expected 1"));
        }
    }
    issues
}

/// Checks the measure invariants and probes `Re p > 0` near the boundary.
pub fn validate(spec: &DriverSpec) -> ValidationReport {
    let mut issues = measure_issues(spec);
    let mut min_re_p = f64::INFINITY;
    for p in &spec.pieces {
        for j in 0..1024 {
            let z = Complex64::from_polar(0.99, 2.0 * PI * j as f64 / 1024.0);
            min_re_p = min_re_p.min(eval_piece(p, z).re);
        }
    }
    if (min_re_p.is_nan() || min_re_p <= 0.0) && !spec.pieces.is_empty() {
        issues.push(format!("Re p reaches {min_re_p} on |z| = 0.99"));
    }
    ValidationReport {
        ok: issues.is_empty(),
        issues,
        min_re_p,
    }
}

fn eval_piece(p: &Piece, z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(p.uniform, 0.0);
    for a in &p.atoms {
        let e = Complex64::from_polar(1.0, a.theta);
        acc += a.mu * (e + z) / (e - z);
    }
    acc
}

impl HerglotzDriver {
    pub fn new(spec: DriverSpec) -> Result<Self, DriverError> {
        let issues = measure_issues(&spec);
        if issues.is_empty() {
            Ok(Self { spec })
        } else {
            Err(DriverError::InvalidMeasure(issues.join("; ")))
        }
    }

    /// `p ≡ 1`: normalized Lebesgue measure for all time.
    pub fn identity() -> Self {
        Self {
            spec: DriverSpec {
                pieces: vec![Piece {
                    t_start: 0.0,
                    atoms: Vec::new(),
                    uniform: 1.0,
                }],
            },
        }
    }

    /// Autonomous driver with the given atoms.
    pub fn atoms(atoms: Vec<Atom>) -> Result<Self, DriverError> {
        Self::new(DriverSpec {
            pieces: vec![Piece {
                t_start: 0.0,
                atoms,
                uniform: 0.0,
            }],
        })
    }

    /// `p = (e^{iθ} + z)/(e^{iθ} - z)` for all time.
    pub fn single_atom(theta: f64) -> Self {
        Self::atoms(vec![Atom { theta, mu: 1.0 }]).expect("unit atom is a valid measure")
    }

    pub fn spec(&self) -> &DriverSpec {
        &self.spec
    }

    pub fn is_autonomous(&self) -> bool {
        self.spec.pieces.len() == 1
    }

    /// True for the autonomous single atom at `θ = 0`, whose trajectory
    /// has a closed implicit form.
    pub fn is_atom_at_zero(&self) -> bool {
        match self.spec.pieces.as_slice() {
            [p] => {
                p.uniform == 0.0
                    && matches!(p.atoms.as_slice(), [a] if a.theta.rem_euclid(2.0 * PI) == 0.0)
            }
            _ => false,
        }
    }

    fn piece_at(&self, t: f64) -> &Piece {
        let idx = self.spec.pieces.partition_point(|p| p.t_start <= t);
        &self.spec.pieces[idx.saturating_sub(1)]
    }

    /// Taylor coefficients `1, p_1, ..., p_N` with `p_k = 2 Σ μ_j e^{-ikθ_j}`.
    pub fn p_series(&self, t: f64, order: usize) -> Result<TruncatedSeries, DriverError> {
        if t < 0.0 {
            return Err(DriverError::NegativeTime(t));
        }
        let piece = self.piece_at(t);
        Ok(TruncatedSeries::from_fn(order, |k| {
            if k == 0 {
                return Complex64::new(1.0, 0.0);
            }
            piece
                .atoms
                .iter()
                .map(|a| 2.0 * a.mu * Complex64::from_polar(1.0, -(k as f64) * a.theta))
                .sum()
        }))
    }

    /// Direct evaluation of `p(z, t)` for `|z| < 1`.
    pub fn eval(&self, z: Complex64, t: f64) -> Complex64 {
        eval_piece(self.piece_at(t.max(0.0)), z)
    }
}
