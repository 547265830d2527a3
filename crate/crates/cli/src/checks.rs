//! Reference identity checks behind `check` and `--dump-paper-examples`.

use std::f64::consts::PI;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use shapeflow::grassmannian::basis_vector_symbolic;
use shapeflow::kp::schur_polynomials;
use shapeflow::observables::{gbar_coefficient, poisson_bracket, BracketWindow, PhasePoly, QComplex};
use shapeflow::series::TruncatedSeries;
use shapeflow::virasoro::{closed_form_series, commutator, kirillov_l, schaeffer_spencer_values};
use shapeflow::Complex64;

macro_rules! here {
    () => {
        concat!(file!(), ":", line!())
    };
}

const WINDOW: u32 = 12;
const QUADRATURE_POINTS: usize = 2048;
const QUADRATURE_TOL: f64 = 1e-10;
const QUADRATURE_SEED: u64 = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Witt,
    Bracket,
    Basis,
    Quadrature,
    Schur,
}

#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub location: &'static str,
}

pub fn run(suite: Suite) -> Vec<Record> {
    match suite {
        Suite::Witt => witt(),
        Suite::Bracket => bracket(),
        Suite::Basis => basis(),
        Suite::Quadrature => quadrature(),
        Suite::Schur => schur(),
    }
}

fn pairs(lo: i32, hi: i32) -> Vec<(i32, i32)> {
    (lo..=hi).flat_map(|k| (lo..=hi).map(move |n| (k, n))).collect()
}

fn witt() -> Vec<Record> {
    let location = here!();
    pairs(-2, 5)
        .into_par_iter()
        .map(|(k, n)| {
            let w = WINDOW as usize;
            let lhs = commutator(&kirillov_l(k, w + 2).unwrap(), &kirillov_l(n, w + 2).unwrap());
            let rhs = kirillov_l(k + n, w).unwrap().scale(&QComplex::int((n - k) as i64));
            let passed = lhs.window() >= w && lhs.agrees_with(&rhs, w);
            Record {
                suite: Suite::Witt,
                name: format!("[L_{k}, L_{n}] = {}·L_{}", n - k, k + n),
                passed,
                detail: format!("components 1..={w}"),
                location,
            }
        })
        .collect()
}

fn bracket() -> Vec<Record> {
    let location = here!();
    let w = BracketWindow::new(WINDOW, 0, WINDOW as i32).unwrap();
    pairs(1, 5)
        .into_par_iter()
        .map(|(m, n)| {
            let lhs = poisson_bracket(&gbar_coefficient(m, &w).unwrap(), &gbar_coefficient(n, &w).unwrap());
            let rhs = gbar_coefficient(m + n, &w).unwrap().scale_int((n - m) as i64);
            Record {
                suite: Suite::Bracket,
                name: format!("{{G_{m}, G_{n}}} = {}·G_{}", n - m, m + n),
                passed: lhs.eq_within(&rhs, &w),
                detail: format!("window N = {WINDOW}"),
                location,
            }
        })
        .collect()
}

fn poly(terms: &[(i64, &[u32])]) -> PhasePoly {
    terms.iter().fold(PhasePoly::zero(), |acc, (k, idx)| {
        acc.add(&idx.iter().fold(PhasePoly::int(*k), |m, &i| m.mul(&PhasePoly::c(i))))
    })
}

/// Coefficients of `e_0, e_1, e_2` through `z^{-3}`, with `c_n` standing for `c̄_n`.
fn displayed_basis() -> Vec<Vec<(i64, PhasePoly)>> {
    vec![
        vec![
            (0, poly(&[(1, &[])])),
            (-1, poly(&[(1, &[1])])),
            (-2, poly(&[(3, &[2]), (-2, &[1, 1])])),
            (-3, poly(&[(5, &[3]), (2, &[1, 1, 1]), (-6, &[1, 2])])),
        ],
        vec![
            (1, poly(&[(1, &[])])),
            (0, poly(&[(2, &[1])])),
            (-1, poly(&[(2, &[2])])),
            (-2, poly(&[(4, &[3]), (-2, &[1, 2])])),
            (-3, poly(&[(6, &[4]), (-5, &[2, 2]), (-2, &[1, 3]), (4, &[1, 1, 2]), (-1, &[1, 1, 1, 1])])),
        ],
        vec![
            (2, poly(&[(1, &[])])),
            (1, poly(&[(2, &[1])])),
            (0, poly(&[(3, &[2])])),
            (-1, poly(&[(3, &[3])])),
            (-2, poly(&[(5, &[4]), (-2, &[1, 3])])),
            (
                -3,
                poly(&[
                    (7, &[5]),
                    (-6, &[2, 3]),
                    (3, &[1, 2, 2]),
                    (-2, &[1, 4]),
                    (4, &[1, 1, 3]),
                    (-4, &[1, 1, 1, 2]),
                    (1, &[1, 1, 1, 1, 1]),
                ]),
            ),
        ],
    ]
}

fn basis() -> Vec<Record> {
    let location = here!();
    displayed_basis()
        .into_iter()
        .enumerate()
        .flat_map(|(k, expect)| {
            let got = basis_vector_symbolic(k, 3);
            expect.into_iter().map(move |(power, p)| {
                let found = got.iter().find(|(q, _)| *q == power).map(|(_, v)| v.clone());
                Record {
                    suite: Suite::Basis,
                    name: format!("e_{k} coefficient of z^{power}"),
                    passed: found.as_ref() == Some(&p),
                    detail: format!("expected {p}"),
                    location,
                }
            })
        })
        .collect()
}

fn quadrature() -> Vec<Record> {
    let location = here!();
    let mut rng = ChaCha8Rng::seed_from_u64(QUADRATURE_SEED);
    let mut coeffs = vec![0.0, 1.0];
    coeffs.extend((1..=8).map(|n| rng.gen_range(-0.2..0.2) * 0.4f64.powi(n - 1)));
    let f = TruncatedSeries::from_real(&coeffs);
    let zs: Vec<Complex64> = (0..64)
        .map(|j| Complex64::from_polar(0.5, 2.0 * PI * j as f64 / 64.0))
        .collect();
    vec![-1, 0, 1, 2, 3]
        .into_par_iter()
        .map(|k| {
            let (passed, detail) = match (
                schaeffer_spencer_values(&f, k, QUADRATURE_POINTS, &zs),
                closed_form_series(k, &f),
            ) {
                (Ok(q), Ok(c)) => {
                    let err = zs
                        .iter()
                        .zip(&q)
                        .map(|(z, v)| (v - c.eval(*z)).norm())
                        .fold(0.0, f64::max);
                    (err < QUADRATURE_TOL, format!("sup error {err:e} on |z| = 0.5"))
                }
                (Err(e), _) | (_, Err(e)) => (false, e.to_string()),
            };
            Record {
                suite: Suite::Quadrature,
                name: format!("L_{k} quadrature, Q = {QUADRATURE_POINTS}"),
                passed,
                detail,
                location,
            }
        })
        .collect()
}

fn schur() -> Vec<Record> {
    let location = here!();
    let t = PhasePoly::c;
    let q = QComplex::ratio;
    let expect = [
        t(1),
        t(1).mul(&t(1)).scale(&q(1, 2)).add(&t(2)),
        t(1).mul(&t(1)).mul(&t(1)).scale(&q(1, 6)).add(&t(1).mul(&t(2))).add(&t(3)),
        t(1).mul(&t(1))
            .mul(&t(1))
            .mul(&t(1))
            .scale(&q(1, 24))
            .add(&t(2).mul(&t(2)).scale(&q(1, 2)))
            .add(&t(1).mul(&t(1)).mul(&t(2)).scale(&q(1, 2)))
            .add(&t(1).mul(&t(3)))
            .add(&t(4)),
    ];
    let got = schur_polynomials(4);
    expect
        .iter()
        .enumerate()
        .map(|(i, p)| Record {
            suite: Suite::Schur,
            name: format!("S_{}", i + 1),
            passed: got[i + 1] == *p,
            detail: format!("expected {p} with c_k standing for t_k"),
            location,
        })
        .collect()
}
