//! The space 𝒮 of unitary connections with symplectic curvature.
//!
//! Connections are stored as a real 1-form offset `a` from the reference
//! connection of the bundle; after the −2πi normalization the curvature
//! is ω_A = ω_ref + da. The pairing on tangent 1-forms is
//!
//!   Ω_A(a, b) = 1/(n−1)! ∫ a ∧ b ∧ ω_A^{n−1}.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{
    self, exterior_derivative, index_sets, integrate, wedge, DifferentialForm, VectorField,
};
use crate::grid::{Field, Grid};

/// Hermitian line bundle data: the grid and the reference curvature,
/// a constant-coefficient 2-form with integer periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleSetup {
    grid: Grid,
    /// Integer coefficients of ω_ref per increasing 2-index.
    chern_data: Vec<i64>,
}

impl BundleSetup {
    /// The standard bundle: ω_ref = dx₁∧dx₂ on T², dx₁∧dx₂ + dx₃∧dx₄ on T⁴.
    pub fn standard(grid: Grid) -> Self {
        let chern_data = match grid.half_dim() {
            1 => vec![1],
            _ => vec![1, 0, 0, 0, 0, 1],
        };
        BundleSetup { grid, chern_data }
    }

    pub fn new(grid: Grid, chern_data: Vec<i64>) -> Result<Self> {
        let expected = index_sets(grid.dims(), 2).len();
        if chern_data.len() != expected {
            return Err(Error::InvalidConfig(format!(
                "chern_data needs {expected} coefficients, got {}",
                chern_data.len()
            )));
        }
        let setup = BundleSetup { grid, chern_data };
        let check = is_symplectic(&setup.reference_curvature())?;
        if !check.positive {
            return Err(Error::NotSymplectic {
                margin: check.margin,
            });
        }
        Ok(setup)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn chern_data(&self) -> &[i64] {
        &self.chern_data
    }

    pub fn reference_curvature(&self) -> DifferentialForm {
        let coeffs: Vec<f64> = self.chern_data.iter().map(|&c| c as f64).collect();
        DifferentialForm::constant_form(self.grid, 2, &coeffs)
            .expect("chern_data validated at construction")
    }
}

/// A unitary connection as a real 1-form offset from the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeConnection {
    pub bundle: BundleSetup,
    pub a: DifferentialForm,
}

impl RelativeConnection {
    pub fn new(bundle: BundleSetup, a: DifferentialForm) -> Result<Self> {
        bundle.grid().check_same(&a.grid())?;
        if a.degree() != 1 {
            return Err(Error::DegreeMismatch {
                expected: 1,
                got: a.degree(),
            });
        }
        Ok(RelativeConnection { bundle, a })
    }

    /// The reference connection of the standard bundle (a = 0).
    pub fn reference(grid: Grid) -> Self {
        RelativeConnection {
            bundle: BundleSetup::standard(grid),
            a: DifferentialForm::zero(grid, 1).expect("degree 1 fits any torus"),
        }
    }

    pub fn grid(&self) -> Grid {
        self.bundle.grid()
    }

    /// Connection with the same bundle and offset a + s·b.
    pub fn offset_by(&self, b: &DifferentialForm, s: f64) -> Result<Self> {
        Ok(RelativeConnection {
            bundle: self.bundle.clone(),
            a: self.a.add(&b.scaled(s))?,
        })
    }

    /// Membership check for 𝒮 with margin reporting.
    pub fn require_symplectic(&self) -> Result<DifferentialForm> {
        let omega = curvature(self);
        let check = is_symplectic(&omega)?;
        if !check.positive {
            return Err(Error::NotSymplectic {
                margin: check.margin,
            });
        }
        Ok(omega)
    }
}

/// ω_A = ω_ref + da; closed by construction.
pub fn curvature(conn: &RelativeConnection) -> DifferentialForm {
    let da = exterior_derivative(&conn.a).expect("offsets are 1-forms");
    conn.bundle
        .reference_curvature()
        .add(&da)
        .expect("same grid and degree")
}

#[derive(Debug, Clone, Copy)]
pub struct SymplecticCheck {
    pub positive: bool,
    /// min over the grid of the area density (n = 1) or the Pfaffian (n = 2).
    pub margin: f64,
}

/// Pointwise positivity of a closed 2-form against the fixed orientation.
pub fn is_symplectic(omega: &DifferentialForm) -> Result<SymplecticCheck> {
    if omega.degree() != 2 {
        return Err(Error::DegreeMismatch {
            expected: 2,
            got: omega.degree(),
        });
    }
    if omega.grid().dims() > 2 {
        let residual = exterior_derivative(omega)?.linf();
        if residual > 1e-8 {
            return Err(Error::NotClosed { residual });
        }
    }
    let margin = pointwise_density(omega).min();
    Ok(SymplecticCheck {
        positive: margin > 0.0,
        margin,
    })
}

/// Coefficient of ωⁿ/n! against dV: the dx₁∧dx₂ coefficient on T²,
/// the Pfaffian of the coefficient matrix on T⁴.
pub fn pointwise_density(omega: &DifferentialForm) -> Field {
    let c = omega.components();
    match omega.grid().half_dim() {
        1 => c[0].clone(),
        _ => {
            // components ordered (12, 13, 14, 23, 24, 34)
            let mut data = Vec::with_capacity(omega.grid().points());
            let (c01, c02, c03) = (c[0].data(), c[1].data(), c[2].data());
            let (c12, c13, c23) = (c[3].data(), c[4].data(), c[5].data());
            for i in 0..c01.len() {
                data.push(c01[i] * c23[i] - c02[i] * c13[i] + c03[i] * c12[i]);
            }
            Field::from_data(omega.grid(), data).expect("sized by grid")
        }
    }
}

/// Ω_A(a, b) = 1/(n−1)! ∫ a ∧ b ∧ ω_A^{n−1}.
pub fn omega_pairing(
    conn: &RelativeConnection,
    a: &DifferentialForm,
    b: &DifferentialForm,
) -> Result<f64> {
    let omega = conn.require_symplectic()?;
    omega_pairing_at(&omega, a, b)
}

/// The same pairing evaluated at an explicit symplectic form.
pub fn omega_pairing_at(
    omega: &DifferentialForm,
    a: &DifferentialForm,
    b: &DifferentialForm,
) -> Result<f64> {
    let ab = wedge(a, b)?;
    let top = match omega.grid().half_dim() {
        1 => ab,
        _ => wedge(&ab, omega)?,
    };
    integrate(&top)
}

/// Pointwise ω-compatible almost complex structure acting on 1-forms.
///
/// On T² every positive area form is compatible with the standard rotation
/// J dx₁ = dx₂. On T⁴ the structure comes from the polar decomposition of
/// the coefficient matrix of ω_A against the flat metric; the matrix square
/// roots are evaluated from the two Pfaffian-type invariants, so the
/// operation stays pointwise and allocation-free per site.
pub fn apply_compatible_j(
    conn: &RelativeConnection,
    a: &DifferentialForm,
) -> Result<DifferentialForm> {
    let omega = conn.require_symplectic()?;
    apply_compatible_j_at(&omega, a)
}

pub(crate) fn apply_compatible_j_at(
    omega: &DifferentialForm,
    a: &DifferentialForm,
) -> Result<DifferentialForm> {
    omega.grid().check_same(&a.grid())?;
    if a.degree() != 1 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            got: a.degree(),
        });
    }
    match omega.grid().half_dim() {
        1 => {
            let comps = vec![a.component(1).scaled(-1.0), a.component(0).clone()];
            DifferentialForm::from_components(a.grid(), 1, comps)
        }
        _ => {
            let n_points = omega.grid().points();
            let mut out = vec![vec![0.0; n_points]; 4];
            let w: Vec<&[f64]> = omega.components().iter().map(|c| c.data()).collect();
            let ax: Vec<&[f64]> = a.components().iter().map(|c| c.data()).collect();
            for i in 0..n_points {
                let m = CoefficientMatrix::at(&w, i);
                let ja = m.j_apply([ax[0][i], ax[1][i], ax[2][i], ax[3][i]]);
                for (c, v) in out.iter_mut().zip(ja) {
                    c[i] = v;
                }
            }
            let comps = out
                .into_iter()
                .map(|d| Field::from_data(a.grid(), d).expect("sized by grid"))
                .collect();
            DifferentialForm::from_components(a.grid(), 1, comps)
        }
    }
}

/// |a|²_g ω_Aⁿ/n! for the Riemannian metric g determined by (ω_A, J_A);
/// the top-degree density whose integral Ω_A(a, J_A a) reproduces.
pub fn compatible_norm_density(
    conn: &RelativeConnection,
    a: &DifferentialForm,
) -> Result<DifferentialForm> {
    let omega = conn.require_symplectic()?;
    if a.degree() != 1 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            got: a.degree(),
        });
    }
    let grid = omega.grid();
    let n_points = grid.points();
    let mut data = Vec::with_capacity(n_points);
    match grid.half_dim() {
        1 => {
            // g = f·(flat) with f the area density, so |a|²_g ω_A = |a|²_flat dV.
            let a0 = a.component(0).data();
            let a1 = a.component(1).data();
            for i in 0..n_points {
                data.push(a0[i] * a0[i] + a1[i] * a1[i]);
            }
        }
        _ => {
            let w: Vec<&[f64]> = omega.components().iter().map(|c| c.data()).collect();
            let ax: Vec<&[f64]> = a.components().iter().map(|c| c.data()).collect();
            for i in 0..n_points {
                let m = CoefficientMatrix::at(&w, i);
                let av = [ax[0][i], ax[1][i], ax[2][i], ax[3][i]];
                data.push(m.inverse_metric_norm_sq(av) * m.pfaffian());
            }
        }
    }
    let field = Field::from_data(grid, data)?;
    DifferentialForm::from_components(grid, grid.dims(), vec![field])
}

/// Antisymmetric coefficient matrix of a 2-form at one grid point,
/// with the polar-decomposition pieces J = Ŵ⁻¹(−Ŵ²)^{1/2} and
/// P = (−Ŵ²)^{1/2} expressed through s = Σ w_{ij}² and p = Pf(Ŵ).
struct CoefficientMatrix {
    w: [f64; 6], // (w01, w02, w03, w12, w13, w23)
}

impl CoefficientMatrix {
    fn at(comps: &[&[f64]], i: usize) -> Self {
        CoefficientMatrix {
            w: [
                comps[0][i],
                comps[1][i],
                comps[2][i],
                comps[3][i],
                comps[4][i],
                comps[5][i],
            ],
        }
    }

    fn pfaffian(&self) -> f64 {
        let [w01, w02, w03, w12, w13, w23] = self.w;
        w01 * w23 - w02 * w13 + w03 * w12
    }

    fn full(&self) -> [[f64; 4]; 4] {
        let [w01, w02, w03, w12, w13, w23] = self.w;
        [
            [0.0, w01, w02, w03],
            [-w01, 0.0, w12, w13],
            [-w02, -w12, 0.0, w23],
            [-w03, -w13, -w23, 0.0],
        ]
    }

    fn invariants(&self) -> (f64, f64, f64) {
        let s: f64 = self.w.iter().map(|v| v * v).sum();
        let p = self.pfaffian();
        let t = (s + 2.0 * p).sqrt();
        (s, p, t)
    }

    /// P⁻¹ = ((s+p)·I + Ŵ²) / (p·t) with t = √(s+2p): the inverse metric.
    fn inverse_metric(&self) -> [[f64; 4]; 4] {
        let (s, p, t) = self.invariants();
        let m = self.full();
        let mut sq = [[0.0; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                sq[r][c] = (0..4).map(|k| m[r][k] * m[k][c]).sum();
            }
        }
        let denom = p * t;
        let mut out = [[0.0; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                let id = if r == c { s + p } else { 0.0 };
                out[r][c] = (id + sq[r][c]) / denom;
            }
        }
        out
    }

    fn inverse_metric_norm_sq(&self, a: [f64; 4]) -> f64 {
        let pinv = self.inverse_metric();
        let mut acc = 0.0;
        for r in 0..4 {
            for c in 0..4 {
                acc += a[r] * pinv[r][c] * a[c];
            }
        }
        acc
    }

    /// Component action of J on a 1-form: J_mat·a with J_mat = −Ŵ·P⁻¹.
    fn j_apply(&self, a: [f64; 4]) -> [f64; 4] {
        let pinv = self.inverse_metric();
        let m = self.full();
        let mut ja = [0.0; 4];
        for r in 0..4 {
            let mut acc = 0.0;
            for c in 0..4 {
                let wp: f64 = (0..4).map(|k| m[r][k] * pinv[k][c]).sum();
                acc += -wp * a[c];
            }
            ja[r] = acc;
        }
        ja
    }
}

/// Cyclic integral 1/(n−2)! ∫ (da∧b∧c + db∧c∧a + dc∧a∧b) ∧ ω_A^{n−2}:
/// the exterior derivative of Ω evaluated on constant vector fields.
/// Identically zero for n = 1, where Ω does not depend on A.
pub fn d_omega_residual(
    conn: &RelativeConnection,
    a: &DifferentialForm,
    b: &DifferentialForm,
    c: &DifferentialForm,
) -> Result<f64> {
    if conn.grid().half_dim() == 1 {
        return Ok(0.0);
    }
    conn.require_symplectic()?;
    let term = |x: &DifferentialForm, y: &DifferentialForm, z: &DifferentialForm| -> Result<f64> {
        let dx = exterior_derivative(x)?;
        integrate(&wedge(&wedge(&dx, y)?, z)?)
    };
    Ok(term(a, b, c)? + term(b, c, a)? + term(c, a, b)?)
}

/// Sup-norm of the pointwise difference α(v)·βⁿ − n·α∧ι_vβ∧β^{n−1};
/// vanishes identically for any 1-form α, 2-form β and vector field v.
pub fn contraction_identity_residual(
    alpha: &DifferentialForm,
    beta: &DifferentialForm,
    v: &VectorField,
) -> Result<f64> {
    let grid = alpha.grid();
    grid.check_same(&beta.grid())?;
    let n = grid.half_dim();
    let beta_n = match n {
        1 => beta.clone(),
        _ => wedge(beta, beta)?,
    };
    let lhs = {
        let av = forms::pair(alpha, v)?;
        let mut out = beta_n.clone();
        for comp in out.components_mut() {
            *comp = comp.mul(&av)?;
        }
        out
    };
    let rhs = {
        let ivb = forms::contract(v, beta)?;
        let mut w = wedge(alpha, &ivb)?;
        if n == 2 {
            w = wedge(&w, beta)?;
        }
        w.scaled(n as f64)
    };
    Ok(lhs.sub(&rhs)?.linf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn small_connection(grid: Grid, seed: u64, amplitude: f64) -> RelativeConnection {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample::symplectic_connection(grid, 3, amplitude, 0.3, &mut rng)
    }

    #[test]
    fn curvature_of_reference_is_reference_form() {
        let conn = RelativeConnection::reference(Grid::torus2());
        let omega = curvature(&conn);
        assert!(omega.sub(&conn.bundle.reference_curvature()).unwrap().linf() < 1e-14);
    }

    #[test]
    fn curvature_of_single_mode_offset() {
        let g = Grid::torus2();
        let eps = 0.05;
        let a = DifferentialForm::from_components(
            g,
            1,
            vec![
                Field::zeros(g),
                Field::from_fn(g, |x| eps * (TWO_PI * x[0]).sin()),
            ],
        )
        .unwrap();
        let conn = RelativeConnection::new(BundleSetup::standard(g), a).unwrap();
        let omega = curvature(&conn);
        let expected = Field::from_fn(g, |x| 1.0 + TWO_PI * eps * (TWO_PI * x[0]).cos());
        assert!(omega.component(0).sub(&expected).unwrap().linf() < 1e-11);
    }

    #[test]
    fn curvature_ignores_exact_gauge_shifts() {
        let g = Grid::torus2();
        let conn = small_connection(g, 2, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let chi = sample::periodic_function(g, 5, 0.3, &mut rng);
        let dchi = exterior_derivative(&DifferentialForm::scalar(chi)).unwrap();
        let shifted = conn.offset_by(&dchi, 1.0).unwrap();
        let diff = curvature(&conn).sub(&curvature(&shifted)).unwrap().linf();
        assert!(diff < 1e-12, "diff = {diff:.3e}");
    }

    #[test]
    fn symplectic_margins_on_both_tori() {
        let g2 = Grid::torus2();
        let check = is_symplectic(&BundleSetup::standard(g2).reference_curvature()).unwrap();
        assert!(check.positive && (check.margin - 1.0).abs() < 1e-15);

        let not_pos = DifferentialForm::from_components(
            g2,
            2,
            vec![Field::from_fn(g2, |x| 1.0 - 2.0 * (TWO_PI * x[0]).cos())],
        )
        .unwrap();
        let check = is_symplectic(&not_pos).unwrap();
        assert!(!check.positive && (check.margin + 1.0).abs() < 1e-13);

        let g4 = Grid::torus4();
        let check = is_symplectic(&BundleSetup::standard(g4).reference_curvature()).unwrap();
        assert!(check.positive && (check.margin - 1.0).abs() < 1e-15);
    }

    #[test]
    fn is_symplectic_rejects_non_closed_input() {
        let g = Grid::torus4();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // a random 2-form is generically not closed on T⁴
        let omega = sample::form(g, 2, 3, 1.0, &mut rng);
        assert!(matches!(
            is_symplectic(&omega),
            Err(Error::NotClosed { .. })
        ));
    }

    #[test]
    fn pairing_of_basis_one_forms() {
        let g = Grid::torus2();
        let conn = RelativeConnection::reference(g);
        let dx1 = DifferentialForm::constant_form(g, 1, &[1.0, 0.0]).unwrap();
        let dx2 = DifferentialForm::constant_form(g, 1, &[0.0, 1.0]).unwrap();
        assert_eq!(omega_pairing(&conn, &dx1, &dx2).unwrap(), 1.0);

        let g4 = Grid::torus4();
        let conn4 = RelativeConnection::reference(g4);
        let e1 = DifferentialForm::constant_form(g4, 1, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let e2 = DifferentialForm::constant_form(g4, 1, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((omega_pairing(&conn4, &e1, &e2).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pairing_is_antisymmetric_and_bilinear() {
        for grid in [Grid::torus2(), Grid::torus4()] {
            let conn = small_connection(grid, 5, 0.05);
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            let a = sample::form(grid, 1, 3, 1.0, &mut rng);
            let b = sample::form(grid, 1, 3, 1.0, &mut rng);
            let c = sample::form(grid, 1, 3, 1.0, &mut rng);
            let ab = omega_pairing(&conn, &a, &b).unwrap();
            let ba = omega_pairing(&conn, &b, &a).unwrap();
            assert!((ab + ba).abs() < 1e-13);
            let lin = omega_pairing(&conn, &a.scaled(2.0).add(&c).unwrap(), &b).unwrap();
            let parts = 2.0 * ab + omega_pairing(&conn, &c, &b).unwrap();
            assert!((lin - parts).abs() < 1e-12);
        }
    }

    #[test]
    fn standard_rotation_on_t2() {
        let g = Grid::torus2();
        let conn = RelativeConnection::reference(g);
        let dx1 = DifferentialForm::constant_form(g, 1, &[1.0, 0.0]).unwrap();
        let j_dx1 = apply_compatible_j(&conn, &dx1).unwrap();
        let dx2 = DifferentialForm::constant_form(g, 1, &[0.0, 1.0]).unwrap();
        assert!(j_dx1.sub(&dx2).unwrap().linf() < 1e-15);
    }

    #[test]
    fn j_squares_to_minus_one() {
        for grid in [Grid::torus2(), Grid::torus4()] {
            let conn = small_connection(grid, 8, 0.05);
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let a = sample::form(grid, 1, 3, 1.0, &mut rng);
            let jja = apply_compatible_j(&conn, &apply_compatible_j(&conn, &a).unwrap()).unwrap();
            let err = jja.add(&a).unwrap().linf();
            assert!(err < 1e-10, "J² + 1 = {err:.3e} on {grid:?}");
        }
    }

    #[test]
    fn pairing_with_j_is_positive_and_matches_the_metric_norm() {
        for grid in [Grid::torus2(), Grid::torus4()] {
            let conn = small_connection(grid, 12, 0.05);
            let mut rng = ChaCha8Rng::seed_from_u64(13);
            for _ in 0..10 {
                let a = sample::form(grid, 1, 3, 1.0, &mut rng);
                let ja = apply_compatible_j(&conn, &a).unwrap();
                let lhs = omega_pairing(&conn, &a, &ja).unwrap();
                assert!(lhs > 0.0);
                let rhs = integrate(&compatible_norm_density(&conn, &a).unwrap()).unwrap();
                let rel = (lhs - rhs).abs() / rhs.abs();
                assert!(rel < 1e-10, "relative gap {rel:.3e} on {grid:?}");
            }
        }
    }

    #[test]
    fn d_omega_vanishes_on_t4_and_is_zero_on_t2() {
        let g4 = Grid::torus4();
        let conn = small_connection(g4, 17, 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..5 {
            let a = sample::form(g4, 1, 4, 1.0, &mut rng);
            let b = sample::form(g4, 1, 4, 1.0, &mut rng);
            let c = sample::form(g4, 1, 4, 1.0, &mut rng);
            let r = d_omega_residual(&conn, &a, &b, &c).unwrap();
            assert!(r.abs() < 1e-10, "residual {r:.3e}");
            // linearity in the first slot
            let r2 = d_omega_residual(&conn, &a.scaled(2.0), &b, &c).unwrap();
            assert!((r2 - 2.0 * r).abs() < 1e-12 + 1e-10 * r.abs());
        }
        let g2 = Grid::torus2();
        let conn2 = small_connection(g2, 19, 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let a = sample::form(g2, 1, 8, 1.0, &mut rng);
        let b = sample::form(g2, 1, 8, 1.0, &mut rng);
        let c = sample::form(g2, 1, 8, 1.0, &mut rng);
        assert_eq!(d_omega_residual(&conn2, &a, &b, &c).unwrap(), 0.0);
    }

    #[test]
    fn contraction_identity_pointwise() {
        let g = Grid::torus4();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let alpha = sample::form(g, 1, 4, 1.0, &mut rng);
        let beta = sample::form(g, 2, 4, 1.0, &mut rng);
        let v = sample::vector_field(g, 4, 1.0, &mut rng);
        let r = contraction_identity_residual(&alpha, &beta, &v).unwrap();
        assert!(r < 1e-12, "residual {r:.3e}");

        let zero_v = VectorField::zero(g);
        assert_eq!(
            contraction_identity_residual(&alpha, &beta, &zero_v).unwrap(),
            0.0
        );
    }

    #[test]
    fn contraction_identity_hand_expanded_case() {
        // α = dx₁, β = ω_ref, v = ∂x₁ on T⁴:
        // α(v)·β² = 2·dV and 2·α∧ι_vβ∧β = 2·dx₁∧dx₂∧ω_ref = 2·dV.
        let g = Grid::torus4();
        let alpha = DifferentialForm::constant_form(g, 1, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let beta = BundleSetup::standard(g).reference_curvature();
        let v = VectorField::constant(g, &[1.0, 0.0, 0.0, 0.0]).unwrap();

        let beta_sq = wedge(&beta, &beta).unwrap();
        assert_eq!(beta_sq.component(0).data()[0], 2.0);
        let ivb = forms::contract(&v, &beta).unwrap();
        let rhs = wedge(&wedge(&alpha, &ivb).unwrap(), &beta).unwrap().scaled(2.0);
        assert_eq!(rhs.component(0).data()[0], 2.0);

        assert_eq!(
            contraction_identity_residual(&alpha, &beta, &v).unwrap(),
            0.0
        );
    }
}
