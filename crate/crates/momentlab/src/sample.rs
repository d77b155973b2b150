//! Seeded band-limited random data for identity checks.
//!
//! Fields are short sums of cosine modes with frequencies capped at
//! `max_freq` per axis, so products stay alias-free on the grids used by
//! the verification suites (max_freq ≤ N/4).

use rand::Rng;

use crate::connection::{curvature, is_symplectic, BundleSetup, RelativeConnection};
use crate::forms::{index_sets, DifferentialForm, VectorField};
use crate::grid::{Field, Grid};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const MODES: usize = 4;

/// Random mean-zero scalar field with |k_j| ≤ max_freq.
pub fn scalar(grid: Grid, max_freq: i64, amplitude: f64, rng: &mut impl Rng) -> Field {
    let d = grid.dims();
    let mut modes = Vec::with_capacity(MODES);
    for _ in 0..MODES {
        let mut k = vec![0i64; d];
        while k.iter().all(|&kj| kj == 0) {
            for kj in &mut k {
                *kj = rng.gen_range(-max_freq..=max_freq);
            }
        }
        let amp = rng.gen_range(-1.0..1.0) * amplitude / MODES as f64;
        let phase = rng.gen_range(0.0..TWO_PI);
        modes.push((k, amp, phase));
    }
    Field::from_fn(grid, |x| {
        modes
            .iter()
            .map(|(k, amp, phase)| {
                let arg: f64 = x
                    .iter()
                    .zip(k)
                    .map(|(xi, &ki)| TWO_PI * ki as f64 * xi)
                    .sum();
                amp * (arg + phase).cos()
            })
            .sum()
    })
}

/// Random degree-k form with band-limited mean-zero components.
pub fn form(
    grid: Grid,
    degree: usize,
    max_freq: i64,
    amplitude: f64,
    rng: &mut impl Rng,
) -> DifferentialForm {
    let comps = index_sets(grid.dims(), degree)
        .iter()
        .map(|_| scalar(grid, max_freq, amplitude, rng))
        .collect();
    DifferentialForm::from_components(grid, degree, comps).expect("component count by index sets")
}

/// Random band-limited vector field.
pub fn vector_field(grid: Grid, max_freq: i64, amplitude: f64, rng: &mut impl Rng) -> VectorField {
    let comps = (0..grid.dims())
        .map(|_| scalar(grid, max_freq, amplitude, rng))
        .collect();
    VectorField::from_components(grid, comps).expect("one component per axis")
}

/// Random periodic (mean-zero) scalar, alias for readability at call sites.
pub fn periodic_function(grid: Grid, max_freq: i64, amplitude: f64, rng: &mut impl Rng) -> Field {
    scalar(grid, max_freq, amplitude, rng)
}

/// Random connection with a guaranteed symplectic-positivity margin:
/// the drawn offset is halved until the curvature clears `target_margin`.
pub fn symplectic_connection(
    grid: Grid,
    max_freq: i64,
    amplitude: f64,
    target_margin: f64,
    rng: &mut impl Rng,
) -> RelativeConnection {
    let mut a = form(grid, 1, max_freq, amplitude, rng);
    loop {
        let conn = RelativeConnection::new(BundleSetup::standard(grid), a.clone())
            .expect("offset is a 1-form on the bundle grid");
        let omega = curvature(&conn);
        let check = is_symplectic(&omega).expect("curvature is closed by construction");
        if check.margin >= target_margin {
            return conn;
        }
        a = a.scaled(0.5);
    }
}
