//! The Kähler picture: complexified gauge action, potentials, Monge–Ampère
//! densities, the Kempf–Ness energy and its downward gradient flow, which
//! solves the prescribed-volume problem on the standard bundle.
//!
//! Conventions. The flat complex structure pairs axes (x₁,x₂) and (x₃,x₄).
//! In the real normalization the radial action of f = e^φ is
//! a ↦ a − (1/4π)·J dφ, and the curvature moves by −(1/4π)·d(J dφ); on T²
//! this is the density shift −Δφ/4π. Both routes are spectrally exact on
//! band-limited data, and their agreement is asserted by the test suite.

use std::time::Instant;

use crate::connection::{pointwise_density, BundleSetup, RelativeConnection};
use crate::error::{Error, Result};
use crate::forms::{exterior_derivative, DifferentialForm};
use crate::grid::{Field, Grid};
use crate::spectral;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// The flat complex structure acting on 1-form components:
/// dx₁ ↦ dx₂, dx₂ ↦ −dx₁ (and dx₃ ↦ dx₄, dx₄ ↦ −dx₃ on T⁴).
pub fn standard_complex_structure(a: &DifferentialForm) -> Result<DifferentialForm> {
    if a.degree() != 1 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            got: a.degree(),
        });
    }
    let c = a.components();
    let comps = match a.grid().half_dim() {
        1 => vec![c[1].scaled(-1.0), c[0].clone()],
        _ => vec![
            c[1].scaled(-1.0),
            c[0].clone(),
            c[3].scaled(-1.0),
            c[2].clone(),
        ],
    };
    DifferentialForm::from_components(a.grid(), 1, comps)
}

/// J dφ as a 1-form, from a single forward transform.
fn j_d(phi: &Field) -> Result<DifferentialForm> {
    let grads = spectral::gradient(phi);
    let dphi = DifferentialForm::from_components(phi.grid(), 1, grads)?;
    standard_complex_structure(&dphi)
}

/// Radial complexified gauge action: a ↦ a − (1/4π)·J dφ.
/// The result may leave the symplectic cone; membership is checked by
/// whichever operation consumes it.
pub fn complex_gauge_act(phi: &Field, conn: &RelativeConnection) -> Result<RelativeConnection> {
    conn.grid().check_same(&phi.grid())?;
    let shift = j_d(phi)?.scaled(-1.0 / FOUR_PI);
    RelativeConnection::new(conn.bundle.clone(), conn.a.add(&shift)?)
}

/// Deformation of a 2-form by a potential: ω − (1/4π)·d(J dφ);
/// on T² the single coefficient moves by −Δφ/4π.
pub fn kahler_form(phi: &Field, omega: &DifferentialForm) -> Result<DifferentialForm> {
    omega.grid().check_same(&phi.grid())?;
    if omega.degree() != 2 {
        return Err(Error::DegreeMismatch {
            expected: 2,
            got: omega.degree(),
        });
    }
    match omega.grid().half_dim() {
        1 => {
            let correction = spectral::laplacian(phi).scaled(-1.0 / FOUR_PI);
            let comps = vec![omega.component(0).add(&correction)?];
            DifferentialForm::from_components(omega.grid(), 2, comps)
        }
        _ => {
            let correction = exterior_derivative(&j_d(phi)?)?.scaled(-1.0 / FOUR_PI);
            omega.add(&correction)
        }
    }
}

/// Density of ω_φⁿ/n! against dV over the standard bundle.
fn density_of(phi: &Field) -> Result<Field> {
    let grid = phi.grid();
    match grid.half_dim() {
        1 => Ok(spectral::laplacian(phi)
            .scaled(-1.0 / FOUR_PI)
            .add_scalar(1.0)),
        _ => {
            let omega_ref = BundleSetup::standard(grid).reference_curvature();
            Ok(pointwise_density(&kahler_form(phi, &omega_ref)?))
        }
    }
}

/// A Kähler potential: mean-zero φ with positive Monge–Ampère density.
#[derive(Debug, Clone)]
pub struct KahlerPotential {
    phi: Field,
    margin: f64,
}

impl KahlerPotential {
    /// Projects φ to zero mean and verifies the density margin.
    pub fn new(phi: Field) -> Result<Self> {
        let mut phi = phi;
        phi.project_mean_zero();
        let margin = density_of(&phi)?.min();
        if margin <= 0.0 {
            return Err(Error::LeftKahlerCone {
                margin,
                during_step: false,
            });
        }
        Ok(KahlerPotential { phi, margin })
    }

    pub fn flat(grid: Grid) -> Self {
        KahlerPotential {
            phi: Field::zeros(grid),
            margin: 1.0,
        }
    }

    pub fn phi(&self) -> &Field {
        &self.phi
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn grid(&self) -> Grid {
        self.phi.grid()
    }
}

/// A prescribed positive volume density with unit total mass.
#[derive(Debug, Clone)]
pub struct VolumeSpec {
    density: Field,
}

impl VolumeSpec {
    pub fn new(density: Field) -> Result<Self> {
        if density.min() <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "volume density must be positive (min {:.3e})",
                density.min()
            )));
        }
        let mass = density.mean();
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidConfig(format!(
                "volume density must integrate to 1, got {mass}"
            )));
        }
        Ok(VolumeSpec { density })
    }

    /// Rescale a positive field to unit total mass.
    pub fn normalized(density: Field) -> Result<Self> {
        if density.min() <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "volume density must be positive (min {:.3e})",
                density.min()
            )));
        }
        let mass = density.mean();
        VolumeSpec::new(density.scaled(1.0 / mass))
    }

    /// θ = 1 + Σ amplitude·cos(2π·freq·x_axis), the cosine-mode preset.
    pub fn cosine_modes(grid: Grid, modes: &[(usize, i64, f64)]) -> Result<Self> {
        let modes = modes.to_vec();
        for &(axis, _, _) in &modes {
            if axis == 0 || axis > grid.dims() {
                return Err(Error::InvalidConfig(format!(
                    "cosine mode axis {axis} out of range 1..={}",
                    grid.dims()
                )));
            }
        }
        let density = Field::from_fn(grid, |x| {
            1.0 + modes
                .iter()
                .map(|&(axis, freq, amp)| {
                    amp * (2.0 * std::f64::consts::PI * freq as f64 * x[axis - 1]).cos()
                })
                .sum::<f64>()
        });
        VolumeSpec::new(density)
    }

    pub fn flat(grid: Grid) -> Self {
        VolumeSpec {
            density: Field::constant(grid, 1.0),
        }
    }

    pub fn density(&self) -> &Field {
        &self.density
    }

    pub fn grid(&self) -> Grid {
        self.density.grid()
    }
}

/// Monge–Ampère density ρ(φ): the coefficient of ω_φⁿ/n! against dV.
pub fn ma_density(potential: &KahlerPotential) -> Result<Field> {
    let density = density_of(potential.phi())?;
    let margin = density.min();
    if margin <= 0.0 {
        return Err(Error::LeftKahlerCone {
            margin,
            during_step: false,
        });
    }
    Ok(density)
}

/// Kempf–Ness energy F(φ) = ∫₀¹ ∫ φ·(ρ(tφ) − θ) dV dt along the affine
/// path t ↦ tφ. The t-integrand is polynomial of degree n, so the
/// trapezoid rule (n = 1) and Simpson's rule (n = 2) are exact.
pub fn kempf_ness(potential: &KahlerPotential, theta: &VolumeSpec) -> Result<f64> {
    let density = density_of(potential.phi())?;
    kempf_ness_with_density(potential.phi(), &density, theta)
}

fn kempf_ness_with_density(phi: &Field, density: &Field, theta: &VolumeSpec) -> Result<f64> {
    phi.grid().check_same(&theta.grid())?;
    let slope = |rho: &Field| -> Result<f64> {
        phi.mul(&rho.sub(theta.density())?).map(|f| f.mean())
    };
    match phi.grid().half_dim() {
        1 => {
            let at0 = slope(&Field::constant(phi.grid(), 1.0))?;
            let at1 = slope(density)?;
            Ok(0.5 * (at0 + at1))
        }
        _ => {
            let half = phi.scaled(0.5);
            let rho_half = density_of(&half)?;
            let m = rho_half.min();
            if m <= 0.0 {
                return Err(Error::PathLeftCone { t: 0.5, margin: m });
            }
            if density.min() <= 0.0 {
                return Err(Error::PathLeftCone {
                    t: 1.0,
                    margin: density.min(),
                });
            }
            let at0 = slope(&Field::constant(phi.grid(), 1.0))?;
            let at_half = slope(&rho_half)?;
            let at1 = slope(density)?;
            Ok((at0 + 4.0 * at_half + at1) / 6.0)
        }
    }
}

/// L²(θ)-gradient of F at φ: ρ(φ)/θ − 1, with zero θ-weighted mean.
pub fn kn_gradient(potential: &KahlerPotential, theta: &VolumeSpec) -> Result<Field> {
    let rho = ma_density(potential)?;
    rho.div(theta.density()).map(|f| f.add_scalar(-1.0))
}

/// The flat symmetric-space metric ⟨f, g⟩ = ∫ f·g·θ dV.
pub fn potential_inner_product(f: &Field, g: &Field, theta: &VolumeSpec) -> Result<f64> {
    Ok(f.mul(g)?.mul(theta.density())?.mean())
}

/// One point on a flow trajectory.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub potential: KahlerPotential,
    pub t: f64,
    pub energy: f64,
    pub residual: f64,
    density: Field,
}

impl FlowState {
    pub fn initial(potential: KahlerPotential, theta: &VolumeSpec) -> Result<Self> {
        let density = density_of(potential.phi())?;
        let energy = kempf_ness_with_density(potential.phi(), &density, theta)?;
        let residual = residual_of(&density, theta)?;
        Ok(FlowState {
            potential,
            t: 0.0,
            energy,
            residual,
            density,
        })
    }

    /// Monge–Ampère density at the current potential.
    pub fn density(&self) -> &Field {
        &self.density
    }
}

fn residual_of(density: &Field, theta: &VolumeSpec) -> Result<f64> {
    Ok(density.div(theta.density())?.add_scalar(-1.0).linf())
}

fn velocity(phi: &Field, theta: &VolumeSpec) -> Result<Field> {
    match phi.grid().half_dim() {
        1 => {
            // −(ρ/θ − 1) with ρ = 1 − Δφ/4π, in one pass
            let lap = spectral::laplacian(phi);
            let data = lap
                .data()
                .iter()
                .zip(theta.density().data())
                .map(|(&l, &t)| (l / FOUR_PI - (1.0 - t)) / t)
                .collect();
            Field::from_data(phi.grid(), data)
        }
        _ => {
            let rho = density_of(phi)?;
            Ok(rho.div(theta.density())?.add_scalar(-1.0).scaled(-1.0))
        }
    }
}

/// Explicit-step stability bound 0.8·4π / (λ_max·max(1/θ)) with
/// λ_max = (2π·N/2)² the largest grid Laplacian eigenvalue.
pub fn stability_dt(grid: Grid, theta: &VolumeSpec) -> f64 {
    let lambda_max = (std::f64::consts::PI * grid.resolution() as f64).powi(2);
    0.8 * FOUR_PI * theta.density().min() / lambda_max
}

/// φ + s·k in one pass.
fn offset(phi: &Field, s: f64, k: &Field) -> Field {
    let data = phi
        .data()
        .iter()
        .zip(k.data())
        .map(|(&p, &v)| p + s * v)
        .collect();
    Field::from_data(phi.grid(), data).expect("same grid")
}

fn velocity_from_density(density: &Field, theta: &VolumeSpec) -> Field {
    let data = density
        .data()
        .iter()
        .zip(theta.density().data())
        .map(|(&rho, &t)| -(rho / t - 1.0))
        .collect();
    Field::from_data(density.grid(), data).expect("same grid")
}

/// Classical four-stage Runge–Kutta step of φ̇ = −(ρ(φ)/θ − 1),
/// re-projected to zero mean, with energy and residual refreshed.
pub fn flow_step(state: &FlowState, theta: &VolumeSpec, dt: f64) -> Result<FlowState> {
    let phi = state.potential.phi();
    let k1 = velocity_from_density(&state.density, theta);
    let k2 = velocity(&offset(phi, 0.5 * dt, &k1), theta)?;
    let k3 = velocity(&offset(phi, 0.5 * dt, &k2), theta)?;
    let k4 = velocity(&offset(phi, dt, &k3), theta)?;

    let mut next = phi.clone();
    next.axpy(dt / 6.0, &k1)?;
    next.axpy(dt / 3.0, &k2)?;
    next.axpy(dt / 3.0, &k3)?;
    next.axpy(dt / 6.0, &k4)?;
    next.project_mean_zero();

    let density = density_of(&next)?;
    let margin = density.min();
    if margin <= 0.0 {
        return Err(Error::LeftKahlerCone {
            margin,
            during_step: true,
        });
    }
    let (energy, residual) = if next.grid().half_dim() == 1 {
        step_diagnostics(&next, &density, theta)
    } else {
        (
            kempf_ness_with_density(&next, &density, theta)?,
            residual_of(&density, theta)?,
        )
    };
    Ok(FlowState {
        potential: KahlerPotential { phi: next, margin },
        t: state.t + dt,
        energy,
        residual,
        density,
    })
}

/// Trapezoid energy and sup-norm residual in a single compensated pass.
fn step_diagnostics(phi: &Field, density: &Field, theta: &VolumeSpec) -> (f64, f64) {
    let th = theta.density().data();
    let mut s0 = 0.0;
    let mut c0 = 0.0;
    let mut s1 = 0.0;
    let mut c1 = 0.0;
    let mut residual = 0.0f64;
    for ((&p, &rho), &t) in phi.data().iter().zip(density.data()).zip(th) {
        let y0 = p * (1.0 - t) - c0;
        let t0 = s0 + y0;
        c0 = (t0 - s0) - y0;
        s0 = t0;
        let y1 = p * (rho - t) - c1;
        let t1 = s1 + y1;
        c1 = (t1 - s1) - y1;
        s1 = t1;
        residual = residual.max((rho / t - 1.0).abs());
    }
    let len = phi.data().len() as f64;
    (0.5 * (s0 + s1) / len, residual)
}

/// One row of a flow trace.
#[derive(Debug, Clone, Copy)]
pub struct FlowSample {
    pub t: f64,
    pub energy: f64,
    pub residual: f64,
    pub margin: f64,
    pub wall_ms: f64,
}

/// Run the downward gradient flow until ‖ρ/θ − 1‖∞ < tol or t exceeds
/// max_t, recording one trace row per step.
pub fn run_flow(
    theta: &VolumeSpec,
    phi0: &KahlerPotential,
    tol: f64,
    max_t: f64,
) -> Result<(Vec<FlowSample>, KahlerPotential)> {
    run_flow_with_dt(theta, phi0, tol, max_t, stability_dt(phi0.grid(), theta))
}

pub fn run_flow_with_dt(
    theta: &VolumeSpec,
    phi0: &KahlerPotential,
    tol: f64,
    max_t: f64,
    dt: f64,
) -> Result<(Vec<FlowSample>, KahlerPotential)> {
    let started = Instant::now();
    let mut state = FlowState::initial(phi0.clone(), theta)?;
    let mut trace = vec![FlowSample {
        t: state.t,
        energy: state.energy,
        residual: state.residual,
        margin: state.potential.margin(),
        wall_ms: 0.0,
    }];
    while state.residual >= tol {
        if state.t >= max_t {
            return Err(Error::NonConvergence {
                tol,
                max_t,
                last_residual: state.residual,
                steps: trace.len() - 1,
                trace: trace.iter().map(|s| (s.t, s.energy, s.residual)).collect(),
            });
        }
        state = flow_step(&state, theta, dt)?;
        trace.push(FlowSample {
            t: state.t,
            energy: state.energy,
            residual: state.residual,
            margin: state.potential.margin(),
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok((trace, state.potential))
}

/// Exact solver for the n = 1 prescribed-volume equation, where
/// ρ(φ) = θ is the linear problem Δφ = 4π(1 − θ); the unique mean-zero
/// spectral solution is the flow limit.
pub fn linear_oracle(theta: &VolumeSpec) -> Result<KahlerPotential> {
    let grid = theta.grid();
    if grid.half_dim() != 1 {
        return Err(Error::InvalidConfig(
            "linear_oracle applies to T² (n = 1) only".into(),
        ));
    }
    let rhs = theta.density().scaled(-FOUR_PI).add_scalar(FOUR_PI);
    let phi = spectral::inverse_laplacian(&rhs);
    KahlerPotential::new(phi).map_err(|e| match e {
        Error::LeftKahlerCone { margin, .. } => Error::OracleOutOfCone { margin },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::curvature;
    use crate::forms::integrate;
    use crate::gauge::{gauge_act, GaugeTransformation};
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn grad_norm_sq(psi: &Field) -> f64 {
        spectral::gradient(psi)
            .iter()
            .map(|g| g.mul(g).unwrap().mean())
            .sum()
    }

    fn safe_potential(grid: Grid, kmax: i64, amplitude: f64, rng: &mut impl rand::Rng) -> Field {
        let mut phi = sample::periodic_function(grid, kmax, amplitude, rng);
        while KahlerPotential::new(phi.clone())
            .map(|p| p.margin() < 0.3)
            .unwrap_or(true)
        {
            phi = phi.scaled(0.5);
        }
        phi
    }

    #[test]
    fn constant_potentials_act_trivially() {
        let g = Grid::torus2();
        let conn = RelativeConnection::reference(g);
        let moved = complex_gauge_act(&Field::constant(g, 2.7), &conn).unwrap();
        assert!(moved.a.linf() < 1e-12);

        let omega = BundleSetup::standard(g).reference_curvature();
        let same = kahler_form(&Field::zeros(g), &omega).unwrap();
        assert!(same.sub(&omega).unwrap().linf() < 1e-15);
    }

    #[test]
    fn curvature_of_the_complex_action_is_the_kahler_form() {
        for grid in [Grid::torus2(), Grid::torus4()] {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let conn = sample::symplectic_connection(grid, 3, 0.02, 0.3, &mut rng);
            let phi = sample::periodic_function(grid, 3, 0.5, &mut rng);
            let lhs = curvature(&complex_gauge_act(&phi, &conn).unwrap());
            let rhs = kahler_form(&phi, &curvature(&conn)).unwrap();
            let err = lhs.sub(&rhs).unwrap().linf();
            assert!(err < 1e-10, "residual {err:.3e} on {grid:?}");
        }
    }

    #[test]
    fn unitary_branch_reduces_to_the_gauge_action() {
        let g = Grid::torus2();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let conn = sample::symplectic_connection(g, 3, 0.02, 0.3, &mut rng);
        let chi = sample::periodic_function(g, 4, 0.6, &mut rng);
        // |f| = 1 branch of the complexified action: a ↦ a + dχ
        let dchi = exterior_derivative(&DifferentialForm::scalar(chi.clone())).unwrap();
        let unitary =
            RelativeConnection::new(conn.bundle.clone(), conn.a.add(&dchi).unwrap()).unwrap();
        let gauge = gauge_act(&GaugeTransformation::periodic(chi), &conn).unwrap();
        assert!(unitary.a.sub(&gauge.a).unwrap().linf() < 1e-12);
    }

    #[test]
    fn kahler_form_single_mode_and_mass_preservation() {
        let g = Grid::torus2();
        let eps = 0.1;
        let phi = Field::from_fn(g, |x| eps * (TWO_PI * x[0]).cos());
        let omega = DifferentialForm::volume(g);
        let moved = kahler_form(&phi, &omega).unwrap();
        // −Δφ/4π = ε π cos 2πx₁
        let expected = Field::from_fn(g, |x| {
            1.0 + eps * std::f64::consts::PI * (TWO_PI * x[0]).cos()
        });
        assert!(moved.component(0).sub(&expected).unwrap().linf() < 1e-12);
        assert!((integrate(&moved).unwrap() - 1.0).abs() < 1e-13);

        let g4 = Grid::torus4();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let phi4 = sample::periodic_function(g4, 3, 0.4, &mut rng);
        let omega4 = BundleSetup::standard(g4).reference_curvature();
        let moved4 = kahler_form(&phi4, &omega4).unwrap();
        for (a, b) in moved4.components().iter().zip(omega4.components()) {
            assert!((a.mean() - b.mean()).abs() < 1e-13);
        }
    }

    #[test]
    fn ma_density_examples() {
        let g = Grid::torus2();
        let flat = KahlerPotential::flat(g);
        assert_eq!(
            ma_density(&flat)
                .unwrap()
                .sub(&Field::constant(g, 1.0))
                .unwrap()
                .linf(),
            0.0
        );

        let eps = 0.1;
        let phi =
            KahlerPotential::new(Field::from_fn(g, |x| eps * (TWO_PI * x[0]).cos())).unwrap();
        let rho = ma_density(&phi).unwrap();
        let expected = Field::from_fn(g, |x| {
            1.0 + eps * std::f64::consts::PI * (TWO_PI * x[0]).cos()
        });
        assert!(rho.sub(&expected).unwrap().linf() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for grid in [Grid::torus2(), Grid::torus4()] {
            let phi = KahlerPotential::new(safe_potential(grid, 3, 0.1, &mut rng)).unwrap();
            let rho = ma_density(&phi).unwrap();
            assert!((rho.mean() - 1.0).abs() < 1e-12, "mass on {grid:?}");
        }
    }

    #[test]
    fn kempf_ness_matches_the_n1_closed_form() {
        let g = Grid::torus2();
        let theta = VolumeSpec::cosine_modes(g, &[(1, 1, 0.3)]).unwrap();
        assert_eq!(kempf_ness(&KahlerPotential::flat(g), &theta).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let phi = safe_potential(g, 4, 0.1, &mut rng);
            let pot = KahlerPotential::new(phi.clone()).unwrap();
            let f = kempf_ness(&pot, &theta).unwrap();
            let closed = pot
                .phi()
                .mul(&Field::constant(g, 1.0).sub(theta.density()).unwrap())
                .unwrap()
                .mean()
                + grad_norm_sq(pot.phi()) / (8.0 * std::f64::consts::PI);
            assert!((f - closed).abs() < 1e-10, "F = {f}, closed form = {closed}");
        }
    }

    #[test]
    fn kempf_ness_ignores_constant_shifts_of_the_integrand() {
        // dF(const) = ∫ c (ρ − θ) = 0: the unnormalized extension of F is
        // flat along the constants.
        let g = Grid::torus2();
        let theta = VolumeSpec::cosine_modes(g, &[(1, 1, 0.2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let phi = safe_potential(g, 4, 0.1, &mut rng);
        let pot = KahlerPotential::new(phi.clone()).unwrap();
        let rho = ma_density(&pot).unwrap();
        let c = 0.37;
        let diff = rho.sub(theta.density()).unwrap().mean() * c;
        assert!(diff.abs() < 1e-13);
    }

    #[test]
    fn kn_gradient_is_theta_orthogonal_to_constants_and_matches_fd() {
        let g = Grid::torus2();
        let theta = VolumeSpec::cosine_modes(g, &[(1, 1, 0.25), (2, 1, 0.1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let pot = KahlerPotential::new(safe_potential(g, 4, 0.1, &mut rng)).unwrap();
        let grad = kn_gradient(&pot, &theta).unwrap();
        let weighted_mean = grad.mul(theta.density()).unwrap().mean();
        assert!(weighted_mean.abs() < 1e-12);

        // critical point
        let oracle = linear_oracle(&theta).unwrap();
        assert!(kn_gradient(&oracle, &theta).unwrap().linf() < 1e-12);

        // directional derivative against a central difference
        let psi = {
            let mut p = safe_potential(g, 3, 0.05, &mut rng);
            p.project_mean_zero();
            p
        };
        let eps = 1e-4;
        let f = |s: f64| {
            let p = KahlerPotential::new(pot.phi().add(&psi.scaled(s)).unwrap()).unwrap();
            kempf_ness(&p, &theta).unwrap()
        };
        let fd = (f(eps) - f(-eps)) / (2.0 * eps);
        let pairing = potential_inner_product(&grad, &psi, &theta).unwrap();
        assert!(
            (fd - pairing).abs() < 1e-8,
            "fd = {fd:.6e}, ⟨grad, ψ⟩ = {pairing:.6e}"
        );
    }

    #[test]
    fn flow_is_stationary_at_the_critical_point() {
        let g = Grid::torus2();
        let theta = VolumeSpec::flat(g);
        let state = FlowState::initial(KahlerPotential::flat(g), &theta).unwrap();
        let dt = stability_dt(g, &theta);
        let next = flow_step(&state, &theta, dt).unwrap();
        assert!(next.potential.phi().linf() < 1e-14);
        assert!(next.residual < 1e-14);
    }

    #[test]
    fn energy_decreases_along_accepted_steps() {
        let g = Grid::torus2();
        let theta = VolumeSpec::cosine_modes(g, &[(1, 1, 0.3)]).unwrap();
        let mut state = FlowState::initial(KahlerPotential::flat(g), &theta).unwrap();
        let dt = stability_dt(g, &theta);
        for _ in 0..50 {
            let next = flow_step(&state, &theta, dt).unwrap();
            assert!(
                next.energy <= state.energy + 1e-12,
                "F rose from {} to {}",
                state.energy,
                next.energy
            );
            state = next;
        }
    }

    #[test]
    fn step_doubling_shows_fifth_order_local_error() {
        let g = Grid::new(1, 16).unwrap();
        let theta = VolumeSpec::cosine_modes(g, &[(1, 1, 0.2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pot = KahlerPotential::new(safe_potential(g, 4, 0.2, &mut rng)).unwrap();
        let state = FlowState::initial(pot, &theta).unwrap();
        let dt0 = stability_dt(g, &theta);

        let gap = |dt: f64| -> f64 {
            let one = flow_step(&state, &theta, dt).unwrap();
            let half = flow_step(
                &flow_step(&state, &theta, dt / 2.0).unwrap(),
                &theta,
                dt / 2.0,
            )
            .unwrap();
            one.potential
                .phi()
                .sub(half.potential.phi())
                .unwrap()
                .linf()
        };
        let e1 = gap(dt0);
        let e2 = gap(dt0 / 2.0);
        let order = (e1 / e2).log2();
        assert!((order - 5.0).abs() < 0.5, "local order = {order:.3}");
    }

    #[test]
    fn flow_reaches_the_linear_oracle_solution() {
        let g = Grid::torus2();
        let theta = VolumeSpec::cosine_modes(g, &[(1, 1, 0.3)]).unwrap();
        let (trace, phi_star) = run_flow(&theta, &KahlerPotential::flat(g), 1e-8, 20.0).unwrap();
        assert!(trace.last().unwrap().residual < 1e-8);
        let oracle = linear_oracle(&theta).unwrap();
        let gap = phi_star.phi().sub(oracle.phi()).unwrap().linf();
        assert!(gap < 1e-6, "‖φ* − oracle‖∞ = {gap:.3e}");
    }

    #[test]
    fn flat_problem_converges_immediately() {
        let g = Grid::torus2();
        let theta = VolumeSpec::flat(g);
        let (trace, phi_star) = run_flow(&theta, &KahlerPotential::flat(g), 1e-8, 1.0).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(phi_star.phi().linf(), 0.0);
    }

    #[test]
    fn non_convergence_carries_the_trace() {
        let g = Grid::torus2();
        let theta = VolumeSpec::cosine_modes(g, &[(1, 1, 0.3)]).unwrap();
        match run_flow(&theta, &KahlerPotential::flat(g), 1e-8, 1e-3) {
            Err(Error::NonConvergence { trace, .. }) => assert!(!trace.is_empty()),
            other => panic!("expected NonConvergence, got {other:?}"),
        }
    }

    #[test]
    fn linear_oracle_examples() {
        let g = Grid::torus2();
        assert_eq!(
            linear_oracle(&VolumeSpec::flat(g)).unwrap().phi().linf(),
            0.0
        );

        let theta = VolumeSpec::cosine_modes(g, &[(1, 1, 0.3)]).unwrap();
        let oracle = linear_oracle(&theta).unwrap();
        let expected =
            Field::from_fn(g, |x| 0.3 / std::f64::consts::PI * (TWO_PI * x[0]).cos());
        assert!(oracle.phi().sub(&expected).unwrap().linf() < 1e-13);

        let rho = ma_density(&oracle).unwrap();
        assert!(rho.sub(theta.density()).unwrap().linf() < 1e-12);
    }

    #[test]
    fn inner_product_examples() {
        let g = Grid::torus2();
        let theta = VolumeSpec::cosine_modes(g, &[(1, 2, 0.2)]).unwrap();
        let one = Field::constant(g, 1.0);
        assert!((potential_inner_product(&one, &one, &theta).unwrap() - 1.0).abs() < 1e-14);

        let f = Field::from_fn(g, |x| (TWO_PI * x[0]).cos());
        let h = Field::from_fn(g, |x| (TWO_PI * x[1]).sin());
        let fg = potential_inner_product(&f, &h, &theta).unwrap();
        let gf = potential_inner_product(&h, &f, &theta).unwrap();
        assert_eq!(fg, gf);

        let flat = VolumeSpec::flat(g);
        assert!((potential_inner_product(&f, &f, &flat).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn convexity_along_affine_lines() {
        // n = 1: F is exactly quadratic and the second difference equals
        // (1/4π)‖dψ‖²; n = 2: non-negative second difference.
        let g = Grid::torus2();
        let theta = VolumeSpec::cosine_modes(g, &[(1, 1, 0.3)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let phi = KahlerPotential::new(safe_potential(g, 4, 0.08, &mut rng)).unwrap();
            let psi = safe_potential(g, 4, 0.08, &mut rng);
            let delta = 0.5;
            let at = |s: f64| {
                let p = KahlerPotential::new(phi.phi().add(&psi.scaled(s)).unwrap()).unwrap();
                kempf_ness(&p, &theta).unwrap()
            };
            let second = (at(delta) + at(-delta) - 2.0 * at(0.0)) / (delta * delta);
            let expected = grad_norm_sq(&psi) / FOUR_PI;
            let rel = (second - expected).abs() / expected;
            assert!(rel < 1e-8, "relative error {rel:.3e}");
        }

        let g4 = Grid::torus4();
        let theta4 = VolumeSpec::cosine_modes(g4, &[(1, 1, 0.2)]).unwrap();
        let mut rng4 = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..5 {
            let phi = KahlerPotential::new(safe_potential(g4, 2, 0.05, &mut rng4)).unwrap();
            let psi = safe_potential(g4, 2, 0.05, &mut rng4);
            let delta = 0.25;
            let at = |s: f64| {
                let p = KahlerPotential::new(phi.phi().add(&psi.scaled(s)).unwrap()).unwrap();
                kempf_ness(&p, &theta4).unwrap()
            };
            let second = (at(delta) + at(-delta) - 2.0 * at(0.0)) / (delta * delta);
            assert!(second >= -1e-10, "second difference {second:.3e}");
        }
    }

    #[test]
    fn two_initial_conditions_converge_to_one_potential() {
        let g = Grid::torus2();
        let theta = VolumeSpec::cosine_modes(g, &[(1, 1, 0.3)]).unwrap();
        let (_, from_zero) = run_flow(&theta, &KahlerPotential::flat(g), 1e-9, 20.0).unwrap();
        let start = KahlerPotential::new(Field::from_fn(g, |x| {
            0.05 * (TWO_PI * x[1]).cos() - 0.03 * (TWO_PI * 2.0 * x[0]).sin()
        }))
        .unwrap();
        let (_, from_bump) = run_flow(&theta, &start, 1e-9, 20.0).unwrap();
        let gap = from_zero.phi().sub(from_bump.phi()).unwrap().linf();
        assert!(gap < 1e-5, "limits differ by {gap:.3e}");
    }
}
