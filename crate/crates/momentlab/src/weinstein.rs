//! The circle-valued holonomy of Hamiltonian loops on S², computed by
//! integrating prequantum lifts on the Hopf bundle S³ ⊂ ℂ².
//!
//! Conventions, fixed once and verified numerically by the plaquette
//! oracle in the tests:
//!   * connection A(w) = Im⟨z, w⟩ / 2π, so the period-1 vertical
//!     generator V(z) = 2πi·z has A(V) = 1;
//!   * base area form ω = σ/4π with σ the outward round area form, so
//!     ∫ω = 1 and dA = p*ω;
//!   * rotations about a unit axis have Hamiltonian h(x) = (axis·x)/2,
//!     mean-zero, with ι_v ω = dh for v(x) = 2π·(axis × x).
//!
//! The lift of a loop generator is η = v♭ − h·V with v♭ the A-horizontal
//! lift; its time-1 map is multiplication by the holonomy phase λ.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Point of the total space: a unit vector in ℂ².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrequantumPoint {
    pub z: [Complex64; 2],
}

impl PrequantumPoint {
    pub fn new(z1: Complex64, z2: Complex64) -> Result<Self> {
        let norm = (z1.norm_sqr() + z2.norm_sqr()).sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidConfig("zero vector is not on S³".into()));
        }
        Ok(PrequantumPoint {
            z: [z1 / norm, z2 / norm],
        })
    }

    fn norm(&self) -> f64 {
        (self.z[0].norm_sqr() + self.z[1].norm_sqr()).sqrt()
    }

    /// Random uniform point of S³.
    pub fn random(rng: &mut impl Rng) -> Self {
        loop {
            let g = [
                Complex64::new(gaussian(rng), gaussian(rng)),
                Complex64::new(gaussian(rng), gaussian(rng)),
            ];
            if let Ok(p) = PrequantumPoint::new(g[0], g[1]) {
                return p;
            }
        }
    }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box–Muller
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen_range(0.0..TWO_PI);
    (-2.0 * u.ln()).sqrt() * v.cos()
}

fn inner(a: &[Complex64; 2], b: &[Complex64; 2]) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// Hopf projection p(z) = (2Re(z̄₁z₂), 2Im(z̄₁z₂), |z₁|² − |z₂|²).
pub fn hopf_projection(z: &PrequantumPoint) -> [f64; 3] {
    let cross = z.z[0].conj() * z.z[1];
    [
        2.0 * cross.re,
        2.0 * cross.im,
        z.z[0].norm_sqr() - z.z[1].norm_sqr(),
    ]
}

const TANGENT_TOL: f64 = 1e-8;

/// Connection 1-form A(w) = Im⟨z, w⟩ / 2π on tangent vectors of S³.
pub fn hopf_connection(z: &PrequantumPoint, w: &[Complex64; 2]) -> Result<f64> {
    let radial = inner(&z.z, w).re;
    let scale = 1.0 + (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    if radial.abs() > TANGENT_TOL * scale {
        return Err(Error::NotTangentSphere { residual: radial });
    }
    Ok(inner(&z.z, w).im / TWO_PI)
}

/// Generator of the rotation by 2π per unit time about a fixed axis:
/// Hamiltonian h(x) = (axis·x)/2 and field v(x) = 2π·(axis × x).
#[derive(Debug, Clone, Copy)]
pub struct RotationGenerator {
    pub axis: [f64; 3],
}

impl RotationGenerator {
    pub fn new(axis: [f64; 3]) -> Result<Self> {
        let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidConfig("rotation axis must be nonzero".into()));
        }
        Ok(RotationGenerator {
            axis: [axis[0] / norm, axis[1] / norm, axis[2] / norm],
        })
    }

    pub fn hamiltonian(&self, x: &[f64; 3]) -> f64 {
        0.5 * (self.axis[0] * x[0] + self.axis[1] * x[1] + self.axis[2] * x[2])
    }

    pub fn velocity(&self, x: &[f64; 3]) -> [f64; 3] {
        let a = &self.axis;
        [
            TWO_PI * (a[1] * x[2] - a[2] * x[1]),
            TWO_PI * (a[2] * x[0] - a[0] * x[2]),
            TWO_PI * (a[0] * x[1] - a[1] * x[0]),
        ]
    }
}

/// Convenience pair (h, v) for a unit axis.
pub fn rotation_hamiltonian(axis: [f64; 3]) -> Result<RotationGenerator> {
    RotationGenerator::new(axis)
}

/// Differential of the Hopf projection at z applied to u ∈ T_zℂ².
fn push_forward(z: &[Complex64; 2], u: &[Complex64; 2]) -> [f64; 3] {
    let cross = u[0].conj() * z[1] + z[0].conj() * u[1];
    [
        2.0 * cross.re,
        2.0 * cross.im,
        2.0 * (z[0].conj() * u[0]).re - 2.0 * (z[1].conj() * u[1]).re,
    ]
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// The prequantum lift η = v♭ − h·V evaluated at z: the A-horizontal lift
/// of v(p(z)) minus h(p(z)) times the period-1 vertical generator 2πi·z.
pub fn lift_generator(
    h: f64,
    v: &[f64; 3],
    z: &PrequantumPoint,
) -> [Complex64; 2] {
    // complex-orthogonal horizontal frame u₁ = z⊥, u₂ = i·z⊥
    let u1 = [-z.z[1].conj(), z.z[0].conj()];
    let u2 = [u1[0] * Complex64::i(), u1[1] * Complex64::i()];
    // p maps the horizontal plane conformally with factor 2
    let e1 = push_forward(&z.z, &u1);
    let e2 = push_forward(&z.z, &u2);
    let a = dot3(v, &e1) / 4.0;
    let b = dot3(v, &e2) / 4.0;
    let vert = Complex64::new(0.0, -TWO_PI * h);
    [
        a * u1[0] + b * u2[0] + vert * z.z[0],
        a * u1[1] + b * u2[1] + vert * z.z[1],
    ]
}

/// A Hamiltonian loop: rotation by 2π·turns·t about `axis`, t ∈ [0, 1].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LoopSpec {
    pub axis: [f64; 3],
    pub turns: i64,
    pub substeps: usize,
}

impl LoopSpec {
    pub fn new(axis: [f64; 3], turns: i64, substeps: usize) -> Result<Self> {
        let gen = RotationGenerator::new(axis)?;
        Ok(LoopSpec {
            axis: gen.axis,
            turns,
            substeps,
        })
    }
}

/// Holonomy phase with its acceptance diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HolonomyResult {
    pub lambda_re: f64,
    pub lambda_im: f64,
    /// Cross-sample variance of the per-sample phases plus the mean
    /// non-scalarity ‖z(1) − λ_s·z(0)‖².
    pub sample_variance: f64,
    pub step_count: usize,
}

impl HolonomyResult {
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.lambda_re, self.lambda_im)
    }
}

fn integrate_sample(
    start: &PrequantumPoint,
    gen: &RotationGenerator,
    turns: f64,
    unit_h_shift: f64,
    substeps: usize,
) -> Complex64 {
    if turns == 0.0 {
        // zero generator: the time-1 map is the identity
        return Complex64::new(1.0, 0.0);
    }
    let dt = 1.0 / substeps as f64;
    let field = |z: &PrequantumPoint| -> [Complex64; 2] {
        let x = hopf_projection(z);
        let v1 = gen.velocity(&x);
        let v = [turns * v1[0], turns * v1[1], turns * v1[2]];
        let h = turns * (gen.hamiltonian(&x) + unit_h_shift);
        lift_generator(h, &v, z)
    };
    let mut z = *start;
    for _ in 0..substeps {
        let k1 = field(&z);
        let z2 = advance(&z, &k1, 0.5 * dt);
        let k2 = field(&z2);
        let z3 = advance(&z, &k2, 0.5 * dt);
        let k3 = field(&z3);
        let z4 = advance(&z, &k3, dt);
        let k4 = field(&z4);
        let sixth = dt / 6.0;
        z.z[0] += sixth * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0]);
        z.z[1] += sixth * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1]);
        let norm = z.norm();
        z.z[0] /= norm;
        z.z[1] /= norm;
    }
    inner(&start.z, &z.z)
}

fn advance(z: &PrequantumPoint, k: &[Complex64; 2], s: f64) -> PrequantumPoint {
    PrequantumPoint {
        z: [z.z[0] + s * k[0], z.z[1] + s * k[1]],
    }
}

const VARIANCE_TOL: f64 = 1e-8;

/// Parallel transport of `samples` random starts around the loop; the
/// time-1 map must be scalar multiplication by a single unit λ.
pub fn loop_holonomy(spec: &LoopSpec, samples: usize, seed: u64) -> Result<HolonomyResult> {
    loop_holonomy_shifted(spec, samples, seed, 0.0)
}

/// Same, with the per-turn Hamiltonian shifted by a constant: the phase
/// picks up e^{−2πi·shift·turns}, which is how the mean-zero
/// normalization is pinned in the tests.
pub fn loop_holonomy_shifted(
    spec: &LoopSpec,
    samples: usize,
    seed: u64,
    unit_h_shift: f64,
) -> Result<HolonomyResult> {
    let floor = 1000 * spec.turns.unsigned_abs() as usize;
    if spec.substeps < floor {
        return Err(Error::TooFewSubsteps {
            substeps: spec.substeps,
            floor,
            turns: spec.turns,
        });
    }
    let substeps = spec.substeps.max(1);
    let samples = samples.max(1);
    let gen = RotationGenerator::new(spec.axis)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<PrequantumPoint> = (0..samples).map(|_| PrequantumPoint::random(&mut rng)).collect();

    let lambdas = run_samples(&starts, &gen, spec.turns as f64, unit_h_shift, substeps);

    let mean = lambdas.iter().sum::<Complex64>() / samples as f64;
    let spread: f64 = lambdas.iter().map(|l| (l - mean).norm_sqr()).sum::<f64>() / samples as f64;
    let non_scalar: f64 = lambdas
        .iter()
        .map(|l| (1.0 - l.norm_sqr()).max(0.0))
        .sum::<f64>()
        / samples as f64;
    let variance = spread + non_scalar;
    if variance > VARIANCE_TOL {
        return Err(Error::NonScalarHolonomy { variance });
    }
    let lambda = mean / mean.norm();
    Ok(HolonomyResult {
        lambda_re: lambda.re,
        lambda_im: lambda.im,
        sample_variance: variance,
        step_count: substeps,
    })
}

/// Trajectories are independent; MOMENTLAB_THREADS > 1 spreads them over
/// a scoped pool. Results are collected by sample index, so the output
/// does not depend on the thread count.
fn run_samples(
    starts: &[PrequantumPoint],
    gen: &RotationGenerator,
    turns: f64,
    unit_h_shift: f64,
    substeps: usize,
) -> Vec<Complex64> {
    let threads = crate::configured_threads().min(starts.len().max(1));
    if threads <= 1 {
        return starts
            .iter()
            .map(|s| integrate_sample(s, gen, turns, unit_h_shift, substeps))
            .collect();
    }
    let mut out = vec![Complex64::default(); starts.len()];
    let chunk = starts.len().div_ceil(threads);
    std::thread::scope(|scope| {
        for (starts_chunk, out_chunk) in starts.chunks(chunk).zip(out.chunks_mut(chunk)) {
            scope.spawn(move || {
                for (s, o) in starts_chunk.iter().zip(out_chunk.iter_mut()) {
                    *o = integrate_sample(s, gen, turns, unit_h_shift, substeps);
                }
            });
        }
    });
    out
}

const STABILIZATION_TOL: f64 = 1e-6;
const MAX_DOUBLINGS: usize = 6;
const DEFAULT_SAMPLES: usize = 16;

/// Holonomy with convergence escalation: substeps double until the phase
/// stabilizes to 1e−6 between refinements.
pub fn weinstein_hom(spec: &LoopSpec) -> Result<HolonomyResult> {
    weinstein_hom_seeded(spec, DEFAULT_SAMPLES, 0)
}

pub fn weinstein_hom_seeded(
    spec: &LoopSpec,
    samples: usize,
    seed: u64,
) -> Result<HolonomyResult> {
    let floor = (1000 * spec.turns.unsigned_abs() as usize).max(1);
    let mut substeps = spec.substeps.max(floor);
    let mut current = loop_holonomy(
        &LoopSpec {
            substeps,
            ..*spec
        },
        samples,
        seed,
    )?;
    let mut trace = vec![(substeps, current.lambda_re, current.lambda_im)];
    for _ in 0..MAX_DOUBLINGS {
        substeps *= 2;
        let refined = loop_holonomy(
            &LoopSpec {
                substeps,
                ..*spec
            },
            samples,
            seed,
        )?;
        trace.push((substeps, refined.lambda_re, refined.lambda_im));
        if (refined.lambda() - current.lambda()).norm() < STABILIZATION_TOL {
            return Ok(refined);
        }
        current = refined;
    }
    Err(Error::NoStabilization {
        doublings: MAX_DOUBLINGS,
        trace,
    })
}
