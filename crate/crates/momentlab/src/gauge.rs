//! Bundle-isometry Lie algebra elements, the infinitesimal action on
//! connections, the moment maps μ and ν, the gauge group, and the
//! fixed-volume fibre structure.
//!
//! An element of Lie(𝒢) is stored bundle-globally as a base vector field v
//! together with the pairing g = A_ref(η) against the reference connection,
//! so that any connection A = A_ref + a pairs as A(η) = g + a(v).

use crate::connection::{curvature, pointwise_density, RelativeConnection};
use crate::error::{Error, Result};
use crate::forms::{
    contract, exterior_derivative, harmonic_part, hodge_primitive, integrate, metric_dual, pair,
    wedge, DifferentialForm, VectorField,
};
use crate::grid::Field;

/// η ∈ Lie(𝒢): base vector field plus reference-connection pairing.
#[derive(Debug, Clone)]
pub struct InvariantField {
    pub v: VectorField,
    pub g: Field,
}

impl InvariantField {
    pub fn new(v: VectorField, g: Field) -> Result<Self> {
        v.grid().check_same(&g.grid())?;
        Ok(InvariantField { v, g })
    }

    /// Vertical element (0, g): an infinitesimal gauge transformation.
    pub fn vertical(g: Field) -> Self {
        InvariantField {
            v: VectorField::zero(g.grid()),
            g,
        }
    }
}

/// f = e^{2πi(χ + winding·x)} ∈ Map(M, S¹): periodic part plus winding.
#[derive(Debug, Clone)]
pub struct GaugeTransformation {
    pub chi: Field,
    pub winding: Vec<i64>,
}

impl GaugeTransformation {
    pub fn new(chi: Field, winding: Vec<i64>) -> Result<Self> {
        if winding.len() != chi.grid().dims() {
            return Err(Error::InvalidConfig(format!(
                "winding needs {} entries, got {}",
                chi.grid().dims(),
                winding.len()
            )));
        }
        Ok(GaugeTransformation { chi, winding })
    }

    pub fn periodic(chi: Field) -> Self {
        let winding = vec![0; chi.grid().dims()];
        GaugeTransformation { chi, winding }
    }

    /// Composition in the abelian group: χ and winding add.
    pub fn compose(&self, other: &GaugeTransformation) -> Result<GaugeTransformation> {
        Ok(GaugeTransformation {
            chi: self.chi.add(&other.chi)?,
            winding: self
                .winding
                .iter()
                .zip(&other.winding)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}

/// Element of H¹(M,ℝ)/H¹(M,ℤ), stored through a representative.
#[derive(Debug, Clone, PartialEq)]
pub struct FibreClass {
    pub coefficients: Vec<f64>,
}

impl FibreClass {
    /// Representative reduced to [0,1)^{2n}.
    pub fn reduced(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.rem_euclid(1.0)).collect()
    }

    /// Equality as classes modulo ℤ^{2n}.
    pub fn is_equivalent(&self, other: &FibreClass, tol: f64) -> bool {
        self.coefficients
            .iter()
            .zip(&other.coefficients)
            .all(|(a, b)| {
                let d = a - b;
                (d - d.round()).abs() <= tol
            })
    }
}

/// The function A(η) = g + a(v) on the base.
pub fn pair_connection(conn: &RelativeConnection, eta: &InvariantField) -> Result<Field> {
    conn.grid().check_same(&eta.g.grid())?;
    eta.g.add(&pair(&conn.a, &eta.v)?)
}

/// Infinitesimal action ρ_A(η) = d(A(η)) + ι_{p∗η} ω_A ∈ T_A𝒮.
pub fn infinitesimal_action(
    conn: &RelativeConnection,
    eta: &InvariantField,
) -> Result<DifferentialForm> {
    let omega = conn.require_symplectic()?;
    let a_eta = pair_connection(conn, eta)?;
    let d_part = exterior_derivative(&DifferentialForm::scalar(a_eta))?;
    d_part.add(&contract(&eta.v, &omega)?)
}

/// ω_Aⁿ/n!: the moment map for the gauge subgroup, a positive volume form
/// integrating to 1 for unit Chern data.
pub fn volume_density(conn: &RelativeConnection) -> Result<DifferentialForm> {
    let omega = curvature(conn);
    match conn.grid().half_dim() {
        1 => Ok(omega),
        _ => Ok(wedge(&omega, &omega)?.scaled(0.5)),
    }
}

/// ⟨μ(A), η⟩ = 1/n! ∫ A(η) ω_Aⁿ.
pub fn moment_pairing(conn: &RelativeConnection, eta: &InvariantField) -> Result<f64> {
    conn.require_symplectic()?;
    let a_eta = pair_connection(conn, eta)?;
    let mut density = volume_density(conn)?;
    for comp in density.components_mut() {
        *comp = comp.mul(&a_eta)?;
    }
    integrate(&density)
}

/// Probe of the moment-map identity b·⟨μ, η⟩ = Ω(b, ρ_A(η)).
#[derive(Debug, Clone, Copy)]
pub struct MomentProbe {
    /// |central difference of ⟨μ(A±εb), η⟩ − Ω_A(b, ρ_A(η))| at ε.
    pub residual: f64,
    /// Richardson exponent measured from ε and ε/2. Probes that are exact
    /// to roundoff (both residuals below [`ORDER_NOISE_FLOOR`]) report 2.0:
    /// no exponent is measurable below the floor.
    pub order: f64,
}

/// Residuals smaller than this carry no convergence-order information.
pub const ORDER_NOISE_FLOOR: f64 = 1e-11;

/// Central-difference check of the moment-map identity at ε and ε/2.
pub fn moment_identity_residual(
    conn: &RelativeConnection,
    b: &DifferentialForm,
    eta: &InvariantField,
    eps: f64,
) -> Result<MomentProbe> {
    let rhs = {
        let rho = infinitesimal_action(conn, eta)?;
        crate::connection::omega_pairing(conn, b, &rho)?
    };
    let residual_at = |e: f64| -> Result<f64> {
        let plus = conn.offset_by(b, e)?;
        plus.require_symplectic()?;
        let minus = conn.offset_by(b, -e)?;
        minus.require_symplectic()?;
        let diff = (moment_pairing(&plus, eta)? - moment_pairing(&minus, eta)?) / (2.0 * e);
        Ok((diff - rhs).abs())
    };
    let r_full = residual_at(eps)?;
    let r_half = residual_at(eps / 2.0)?;
    let order = if r_full < ORDER_NOISE_FLOOR && r_half < ORDER_NOISE_FLOOR {
        2.0
    } else {
        (r_full / r_half).log2()
    };
    Ok(MomentProbe {
        residual: r_full,
        order,
    })
}

/// Pull-back action of f ∈ Map(M, S¹): a ↦ a + dχ + winding·dx.
/// Curvature is unchanged; the harmonic class shifts by the winding.
pub fn gauge_act(f: &GaugeTransformation, conn: &RelativeConnection) -> Result<RelativeConnection> {
    conn.grid().check_same(&f.chi.grid())?;
    let dchi = exterior_derivative(&DifferentialForm::scalar(f.chi.clone()))?;
    let winding: Vec<f64> = f.winding.iter().map(|&m| m as f64).collect();
    let winding_form = DifferentialForm::constant_form(conn.grid(), 1, &winding)?;
    let a = conn.a.add(&dchi)?.add(&winding_form)?;
    RelativeConnection::new(conn.bundle.clone(), a)
}

const FIBRE_CURVATURE_TOL: f64 = 1e-10;

/// Class of A − A₀ in H¹(M,ℝ)/H¹(M,ℤ), defined on a fixed curvature fibre.
pub fn fibre_class(conn: &RelativeConnection, base: &RelativeConnection) -> Result<FibreClass> {
    let residual = curvature(conn).sub(&curvature(base))?.linf();
    if residual > FIBRE_CURVATURE_TOL {
        return Err(Error::CurvatureMismatch { residual });
    }
    let coefficients = harmonic_part(&conn.a.sub(&base.a)?)?;
    Ok(FibreClass { coefficients })
}

/// (α, β) ↦ 1/(n−1)! ∫ α ∧ β ∧ ω_ref^{n−1} on harmonic representatives;
/// the intersection form on T² with unit Chern data.
pub fn fibre_pairing(
    alpha: &[f64],
    beta: &[f64],
    bundle: &crate::connection::BundleSetup,
) -> Result<f64> {
    let grid = bundle.grid();
    let a = DifferentialForm::constant_form(grid, 1, alpha)?;
    let b = DifferentialForm::constant_form(grid, 1, beta)?;
    let ab = wedge(&a, &b)?;
    let top = match grid.half_dim() {
        1 => ab,
        _ => wedge(&ab, &bundle.reference_curvature())?,
    };
    integrate(&top)
}

const TANGENCY_TOL: f64 = 1e-8;

/// Θ(γ, γ′) = 1/(n−1)! ∫ a ∧ a′ ∧ ω^{n−1} with a, a′ the minimal-norm
/// primitives; defined on exact 2-forms tangent to the fixed-volume locus
/// (γ ∧ ω = 0) on T⁴.
pub fn theta_pairing(
    omega: &DifferentialForm,
    gamma: &DifferentialForm,
    gamma_prime: &DifferentialForm,
) -> Result<f64> {
    if omega.grid().half_dim() != 2 {
        return Err(Error::InvalidConfig(
            "theta_pairing is defined on T⁴ (n = 2)".into(),
        ));
    }
    for g in [gamma, gamma_prime] {
        let trace = wedge(g, omega)?.linf();
        if trace > TANGENCY_TOL {
            return Err(Error::NotTangent { residual: trace });
        }
    }
    let a = hodge_primitive(gamma)?;
    let a_prime = hodge_primitive(gamma_prime)?;
    integrate(&wedge(&wedge(&a, &a_prime)?, omega)?)
}

/// The A-horizontal preimage of a tangent vector: η = (v, −a(v)) with
/// ι_v ω_A = a solved pointwise, so that A(η) = 0 and ρ_A(η) = a.
pub fn horizontal_preimage(
    conn: &RelativeConnection,
    a: &DifferentialForm,
) -> Result<InvariantField> {
    let omega = conn.require_symplectic()?;
    if a.degree() != 1 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            got: a.degree(),
        });
    }
    let grid = conn.grid();
    let v = match grid.half_dim() {
        1 => {
            let f = pointwise_density(&omega);
            let v1 = a.component(1).div(&f)?;
            let v2 = a.component(0).div(&f)?.scaled(-1.0);
            VectorField::from_components(grid, vec![v1, v2])?
        }
        _ => {
            // v = −Ŵ⁻¹a with Ŵ⁻¹ the Pfaffian-adjugate inverse of the
            // antisymmetric coefficient matrix of ω_A.
            let w: Vec<&[f64]> = omega.components().iter().map(|c| c.data()).collect();
            let ax: Vec<&[f64]> = a.components().iter().map(|c| c.data()).collect();
            let n_points = grid.points();
            let mut out = vec![vec![0.0; n_points]; 4];
            for i in 0..n_points {
                let (w01, w02, w03) = (w[0][i], w[1][i], w[2][i]);
                let (w12, w13, w23) = (w[3][i], w[4][i], w[5][i]);
                let pf = w01 * w23 - w02 * w13 + w03 * w12;
                let (a0, a1, a2, a3) = (ax[0][i], ax[1][i], ax[2][i], ax[3][i]);
                out[0][i] = -(-w23 * a1 + w13 * a2 - w12 * a3) / pf;
                out[1][i] = -(w23 * a0 - w03 * a2 + w02 * a3) / pf;
                out[2][i] = -(-w13 * a0 + w03 * a1 - w01 * a3) / pf;
                out[3][i] = -(w12 * a0 - w02 * a1 + w01 * a2) / pf;
            }
            let comps = out
                .into_iter()
                .map(|d| Field::from_data(grid, d).expect("sized by grid"))
                .collect();
            VectorField::from_components(grid, comps)?
        }
    };
    let g = pair(&conn.a, &v)?.scaled(-1.0);
    InvariantField::new(v, g)
}

const SEPARATION_TOL: f64 = 1e-8;

/// Injectivity witness for μ: for A ≠ A′, the A′-horizontal lift η of the
/// metric dual of δ = a − a′ has ⟨μ(A′), η⟩ = 0 while
/// ⟨μ(A), η⟩ = 1/n! ∫ |δ|² ω_Aⁿ > 0.
pub fn separation_witness(
    conn: &RelativeConnection,
    other: &RelativeConnection,
) -> Result<(InvariantField, f64)> {
    let delta = conn.a.sub(&other.a)?;
    if delta.linf() <= SEPARATION_TOL {
        return Err(Error::IdenticalConnections);
    }
    let v = metric_dual(&delta)?;
    let g = pair(&other.a, &v)?.scaled(-1.0);
    let eta = InvariantField::new(v, g)?;
    let gap = moment_pairing(conn, &eta)?;
    Ok((eta, gap))
}
