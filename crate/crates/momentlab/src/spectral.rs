//! FFT plumbing: exact differentiation of trigonometric interpolants.
//!
//! Fields are real; transforms are internal. Frequencies per axis run over
//! k ∈ {−N/2+1, …, N/2}. Odd symbols (first derivatives) are zeroed on the
//! Nyquist mode k = N/2, even symbols (Laplacian and its inverse) keep it.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::{Field, Grid};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
    // reusable transform workspace; flows call in here hundreds of
    // thousands of times per run
    static WORKSPACE: RefCell<Workspace> = RefCell::new(Workspace::default());
}

#[derive(Default)]
struct Workspace {
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
    lines: Vec<Complex64>,
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry((n, forward))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if forward {
                    planner.plan_fft_forward(n)
                } else {
                    planner.plan_fft_inverse(n)
                }
            })
            .clone()
    })
}

/// In-place FFT along every axis of a row-major buffer. Strided axes are
/// repacked line-contiguous so rustfft transforms all lines in one call.
fn fft_all_axes_with(
    buf: &mut [Complex64],
    grid: &Grid,
    forward: bool,
    scratch: &mut Vec<Complex64>,
    lines: &mut Vec<Complex64>,
) {
    let n = grid.resolution();
    let d = grid.dims();
    let fft = plan(n, forward);
    scratch.clear();
    scratch.resize(fft.get_inplace_scratch_len(), Complex64::default());
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        if stride == 1 {
            fft.process_with_scratch(buf, scratch);
        } else {
            lines.clear();
            lines.resize(buf.len(), Complex64::default());
            let block = stride * n;
            let mut at = 0;
            for base_block in (0..buf.len()).step_by(block) {
                for offset in 0..stride {
                    let base = base_block + offset;
                    for t in 0..n {
                        lines[at + t] = buf[base + t * stride];
                    }
                    at += n;
                }
            }
            fft.process_with_scratch(lines, scratch);
            let mut at = 0;
            for base_block in (0..buf.len()).step_by(block) {
                for offset in 0..stride {
                    let base = base_block + offset;
                    for t in 0..n {
                        buf[base + t * stride] = lines[at + t];
                    }
                    at += n;
                }
            }
        }
    }
}

fn fft_all_axes(buf: &mut [Complex64], grid: &Grid, forward: bool) {
    WORKSPACE.with(|ws| {
        let ws = &mut *ws.borrow_mut();
        fft_all_axes_with(buf, grid, forward, &mut ws.scratch, &mut ws.lines);
    });
}

/// Walk all modes in storage order, passing the signed frequency vector.
fn for_each_mode(grid: &Grid, mut visit: impl FnMut(usize, &[i64])) {
    let n = grid.resolution();
    let d = grid.dims();
    let half = (n / 2) as i64;
    let signed = |m: usize| -> i64 {
        let m = m as i64;
        if m <= half {
            m
        } else {
            m - n as i64
        }
    };
    let mut coord = vec![0usize; d];
    let mut k = vec![0i64; d];
    for idx in 0..grid.points() {
        visit(idx, &k);
        let mut axis = d;
        while axis > 0 {
            axis -= 1;
            coord[axis] += 1;
            if coord[axis] < n {
                k[axis] = signed(coord[axis]);
                break;
            }
            coord[axis] = 0;
            k[axis] = 0;
        }
    }
}

fn to_complex(f: &Field) -> Vec<Complex64> {
    f.data().iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

fn to_real(buf: &[Complex64], grid: Grid) -> Field {
    let scale = 1.0 / grid.points() as f64;
    Field::from_data(grid, buf.iter().map(|c| c.re * scale).collect())
        .expect("buffer sized by grid")
}

/// Multiply every Fourier coefficient by `symbol(k)` and return the real part.
pub(crate) fn apply_symbol(f: &Field, mut symbol: impl FnMut(&[i64]) -> Complex64) -> Field {
    let grid = f.grid();
    WORKSPACE.with(|ws| {
        let ws = &mut *ws.borrow_mut();
        ws.buf.clear();
        ws.buf
            .extend(f.data().iter().map(|&v| Complex64::new(v, 0.0)));
        fft_all_axes_with(&mut ws.buf, &grid, true, &mut ws.scratch, &mut ws.lines);
        for_each_mode(&grid, |idx, k| {
            ws.buf[idx] *= symbol(k);
        });
        fft_all_axes_with(&mut ws.buf, &grid, false, &mut ws.scratch, &mut ws.lines);
        to_real(&ws.buf, grid)
    })
}

/// One forward transform, several symbol multiplications and inverses.
pub(crate) fn apply_symbols(
    f: &Field,
    symbols: &[&dyn Fn(&[i64]) -> Complex64],
) -> Vec<Field> {
    let grid = f.grid();
    let mut spectrum = to_complex(f);
    fft_all_axes(&mut spectrum, &grid, true);
    symbols
        .iter()
        .map(|symbol| {
            let mut buf = spectrum.clone();
            for_each_mode(&grid, |idx, k| {
                buf[idx] *= symbol(k);
            });
            fft_all_axes(&mut buf, &grid, false);
            to_real(&buf, grid)
        })
        .collect()
}

fn derivative_symbol(axis: usize, nyquist: i64) -> impl Fn(&[i64]) -> Complex64 {
    move |k: &[i64]| {
        let kj = k[axis];
        if kj == nyquist {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, TWO_PI * kj as f64)
        }
    }
}

/// Spectral partial derivative ∂/∂x_axis.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn derivative(f: &Field, axis: usize) -> Field {
    let nyquist = (f.grid().resolution() / 2) as i64;
    apply_symbol(f, derivative_symbol(axis, nyquist))
}

/// All 2n partial derivatives from a single forward transform.
pub(crate) fn gradient(f: &Field) -> Vec<Field> {
    let nyquist = (f.grid().resolution() / 2) as i64;
    let d = f.grid().dims();
    let syms: Vec<Box<dyn Fn(&[i64]) -> Complex64>> = (0..d)
        .map(|axis| Box::new(derivative_symbol(axis, nyquist)) as Box<dyn Fn(&[i64]) -> Complex64>)
        .collect();
    let refs: Vec<&dyn Fn(&[i64]) -> Complex64> = syms.iter().map(|b| b.as_ref()).collect();
    apply_symbols(f, &refs)
}

fn ksq(k: &[i64]) -> f64 {
    k.iter().map(|&kj| (kj * kj) as f64).sum()
}

/// (2πk)² per storage index along one axis.
fn axis_ksq(n: usize) -> Vec<f64> {
    (0..n)
        .map(|m| {
            let k = if m <= n / 2 { m as i64 } else { m as i64 - n as i64 };
            (TWO_PI * k as f64).powi(2)
        })
        .collect()
}

/// Scalar Laplacian Δ = Σ ∂²_i, symbol −4π²|k|².
/// The flow integrator calls this in its innermost loop, so the symbol
/// pass is unrolled per dimension instead of going through the generic
/// mode walker.
pub(crate) fn laplacian(f: &Field) -> Field {
    let grid = f.grid();
    let n = grid.resolution();
    let kk = axis_ksq(n);
    WORKSPACE.with(|ws| {
        let ws = &mut *ws.borrow_mut();
        ws.buf.clear();
        ws.buf
            .extend(f.data().iter().map(|&v| Complex64::new(v, 0.0)));
        fft_all_axes_with(&mut ws.buf, &grid, true, &mut ws.scratch, &mut ws.lines);
        match grid.dims() {
            2 => {
                for (r, row) in ws.buf.chunks_exact_mut(n).enumerate() {
                    let kr = kk[r];
                    for (c, v) in row.iter_mut().enumerate() {
                        *v *= -(kr + kk[c]);
                    }
                }
            }
            _ => {
                let mut idx = 0;
                for k0 in &kk {
                    for k1 in &kk {
                        for k2 in &kk {
                            let base = k0 + k1 + k2;
                            for k3 in &kk {
                                ws.buf[idx] *= -(base + k3);
                                idx += 1;
                            }
                        }
                    }
                }
            }
        }
        fft_all_axes_with(&mut ws.buf, &grid, false, &mut ws.scratch, &mut ws.lines);
        to_real(&ws.buf, grid)
    })
}

/// Green's operator of the flat Laplacian: zero on constants, Δ⁻¹ elsewhere.
pub(crate) fn inverse_laplacian(f: &Field) -> Field {
    apply_symbol(f, |k| {
        let s = ksq(k);
        if s == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-1.0 / (TWO_PI * TWO_PI * s), 0.0)
        }
    })
}

/// Sample the trigonometric interpolant at x + v: exact translation
/// of band-limited data. Backs the finite-action oracle in the tests.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn translate(f: &Field, v: &[f64]) -> Field {
    apply_symbol(f, |k| {
        let phase: f64 = k
            .iter()
            .zip(v)
            .map(|(&kj, &vj)| TWO_PI * kj as f64 * vj)
            .sum();
        Complex64::new(phase.cos(), phase.sin())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(grid: Grid, k: &[i64], amp: f64, phase: f64) -> Field {
        let k = k.to_vec();
        Field::from_fn(grid, move |x| {
            let arg: f64 = x
                .iter()
                .zip(&k)
                .map(|(xi, &ki)| TWO_PI * ki as f64 * xi)
                .sum();
            amp * (arg + phase).cos()
        })
    }

    #[test]
    fn derivative_of_single_mode_is_exact() {
        let g = Grid::torus2();
        let f = wave(g, &[1, 0], 1.0, -std::f64::consts::FRAC_PI_2); // sin 2πx₁
        let df = derivative(&f, 0);
        let expected = wave(g, &[1, 0], TWO_PI, 0.0); // 2π cos 2πx₁
        let err = df.sub(&expected).unwrap().linf();
        assert!(err < 1e-12, "err = {err:.3e}");
    }

    #[test]
    fn derivative_along_flat_axis_vanishes() {
        let g = Grid::torus2();
        let f = wave(g, &[3, 0], 0.7, 0.4);
        assert!(derivative(&f, 1).linf() < 1e-13);
    }

    #[test]
    fn laplacian_matches_two_first_derivatives_below_nyquist() {
        let g = Grid::new(1, 16).unwrap();
        let f = wave(g, &[2, 3], 0.9, 0.1);
        let lap = laplacian(&f);
        let via_first = derivative(&derivative(&f, 0), 0)
            .add(&derivative(&derivative(&f, 1), 1))
            .unwrap();
        assert!(lap.sub(&via_first).unwrap().linf() < 1e-10);
    }

    #[test]
    fn green_function_inverts_laplacian_on_mean_zero_data() {
        let g = Grid::torus4();
        let f = wave(g, &[1, 0, 2, 1], 0.5, 1.2);
        let back = laplacian(&inverse_laplacian(&f));
        assert!(back.sub(&f).unwrap().linf() < 1e-11);
    }

    #[test]
    fn translate_shifts_band_limited_data_exactly() {
        let g = Grid::torus2();
        let f = wave(g, &[2, 1], 1.3, 0.3);
        let v = [0.271828, -0.141421];
        let shifted = translate(&f, &v);
        let expected = Field::from_fn(g, |x| {
            let arg = TWO_PI * (2.0 * (x[0] + v[0]) + (x[1] + v[1]));
            1.3 * (arg + 0.3).cos()
        });
        assert!(shifted.sub(&expected).unwrap().linf() < 1e-12);
    }

    #[test]
    fn gradient_batch_agrees_with_single_derivatives() {
        let g = Grid::torus4();
        let f = wave(g, &[1, 2, 0, 3], 0.4, 0.9);
        let grads = gradient(&f);
        for (axis, gf) in grads.iter().enumerate() {
            let single = derivative(&f, axis);
            assert!(gf.sub(&single).unwrap().linf() < 1e-13);
        }
    }
}
