//! Differential forms on flat tori and the spectral exterior calculus:
//! d, wedge, interior product, integration, Green-operator primitives and
//! harmonic parts.
//!
//! A degree-k form stores one scalar field per increasing multi-index
//! i₁ < … < i_k, ordered lexicographically. Multi-indices are encoded as
//! axis bitmasks.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::spectral;

/// Increasing multi-indices of length `k` over `dims` axes, lexicographic.
pub fn index_sets(dims: usize, k: usize) -> Vec<u8> {
    fn rec(dims: usize, k: usize, start: usize, mask: u8, out: &mut Vec<u8>) {
        if k == 0 {
            out.push(mask);
            return;
        }
        for axis in start..=dims - k {
            rec(dims, k - 1, axis + 1, mask | (1 << axis), out);
        }
    }
    let mut out = Vec::new();
    if k <= dims {
        rec(dims, k, 0, 0, &mut out);
    }
    out
}

/// Axes of a multi-index mask in increasing order, 0-based.
pub fn axes_of(mask: u8) -> Vec<usize> {
    (0..8).filter(|i| mask & (1 << i) != 0).collect()
}

/// Sign of sorting the concatenation (a…, b…) into increasing order;
/// `None` when the index sets overlap.
fn merge_sign(a: u8, b: u8) -> Option<f64> {
    if a & b != 0 {
        return None;
    }
    let mut inversions = 0u32;
    for j in 0..8 {
        if b & (1 << j) != 0 {
            inversions += (a >> (j + 1)).count_ones();
        }
    }
    Some(if inversions % 2 == 0 { 1.0 } else { -1.0 })
}

fn component_position(sets: &[u8], mask: u8) -> usize {
    sets.iter()
        .position(|&m| m == mask)
        .expect("mask drawn from the same index family")
}

/// Differential form of fixed degree on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialForm {
    grid: Grid,
    degree: usize,
    comps: Vec<Field>,
}

impl DifferentialForm {
    pub fn zero(grid: Grid, degree: usize) -> Result<Self> {
        if degree > grid.dims() {
            return Err(Error::DegreeMismatch {
                expected: grid.dims(),
                got: degree,
            });
        }
        let count = index_sets(grid.dims(), degree).len();
        Ok(DifferentialForm {
            grid,
            degree,
            comps: vec![Field::zeros(grid); count],
        })
    }

    pub fn from_components(grid: Grid, degree: usize, comps: Vec<Field>) -> Result<Self> {
        let expected = index_sets(grid.dims(), degree).len();
        if comps.len() != expected {
            return Err(Error::InvalidConfig(format!(
                "degree-{degree} form on T^{} needs {expected} components, got {}",
                grid.dims(),
                comps.len()
            )));
        }
        for c in &comps {
            grid.check_same(&c.grid())?;
        }
        Ok(DifferentialForm { grid, degree, comps })
    }

    /// Form with constant coefficients, one per increasing multi-index.
    pub fn constant_form(grid: Grid, degree: usize, coeffs: &[f64]) -> Result<Self> {
        let comps = coeffs
            .iter()
            .map(|&c| Field::constant(grid, c))
            .collect::<Vec<_>>();
        DifferentialForm::from_components(grid, degree, comps)
    }

    pub fn scalar(field: Field) -> Self {
        DifferentialForm {
            grid: field.grid(),
            degree: 0,
            comps: vec![field],
        }
    }

    /// The standard volume form dx₁∧…∧dx_{2n}.
    pub fn volume(grid: Grid) -> Self {
        DifferentialForm {
            grid,
            degree: grid.dims(),
            comps: vec![Field::constant(grid, 1.0)],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &[Field] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [Field] {
        &mut self.comps
    }

    pub fn component(&self, i: usize) -> &Field {
        &self.comps[i]
    }

    /// Component order as 1-based axis tuples (dx₁ = axis 1).
    pub fn component_order(&self) -> Vec<Vec<usize>> {
        index_sets(self.grid.dims(), self.degree)
            .iter()
            .map(|&m| axes_of(m).into_iter().map(|a| a + 1).collect())
            .collect()
    }

    pub fn linf(&self) -> f64 {
        self.comps.iter().fold(0.0f64, |m, c| m.max(c.linf()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        DifferentialForm {
            grid: self.grid,
            degree: self.degree,
            comps: self.comps.iter().map(|c| c.scaled(s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(DifferentialForm {
            grid: self.grid,
            degree: self.degree,
            comps,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(DifferentialForm {
            grid: self.grid,
            degree: self.degree,
            comps,
        })
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        Ok(())
    }
}

/// Vector field on the torus, 2n scalar components.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    comps: Vec<Field>,
}

impl VectorField {
    pub fn zero(grid: Grid) -> Self {
        VectorField {
            grid,
            comps: vec![Field::zeros(grid); grid.dims()],
        }
    }

    pub fn from_components(grid: Grid, comps: Vec<Field>) -> Result<Self> {
        if comps.len() != grid.dims() {
            return Err(Error::InvalidConfig(format!(
                "vector field on T^{} needs {} components, got {}",
                grid.dims(),
                grid.dims(),
                comps.len()
            )));
        }
        for c in &comps {
            grid.check_same(&c.grid())?;
        }
        Ok(VectorField { grid, comps })
    }

    pub fn constant(grid: Grid, coeffs: &[f64]) -> Result<Self> {
        let comps = coeffs.iter().map(|&c| Field::constant(grid, c)).collect();
        VectorField::from_components(grid, comps)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn components(&self) -> &[Field] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &Field {
        &self.comps[i]
    }
}

/// Exterior derivative by exact spectral differentiation.
pub fn exterior_derivative(form: &DifferentialForm) -> Result<DifferentialForm> {
    let grid = form.grid();
    let d = grid.dims();
    if form.degree() == d {
        return Err(Error::TopDegree {
            degree: form.degree(),
            dims: d,
        });
    }
    let in_sets = index_sets(d, form.degree());
    let out_sets = index_sets(d, form.degree() + 1);
    let mut out = DifferentialForm::zero(grid, form.degree() + 1)?;
    for (ci, &mask) in in_sets.iter().enumerate() {
        let partials = spectral::gradient(form.component(ci));
        for (axis, df) in partials.iter().enumerate() {
            let bit = 1u8 << axis;
            if mask & bit != 0 {
                continue;
            }
            let sign = merge_sign(bit, mask).expect("disjoint by construction");
            let pos = component_position(&out_sets, mask | bit);
            out.comps[pos].axpy(sign, df)?;
        }
    }
    Ok(out)
}

/// Codifferential d* = −Σ_j ∂_j ι_{∂_j} for the flat metric.
pub fn codifferential(form: &DifferentialForm) -> Result<DifferentialForm> {
    let grid = form.grid();
    let d = grid.dims();
    if form.degree() == 0 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            got: 0,
        });
    }
    let in_sets = index_sets(d, form.degree());
    let out_sets = index_sets(d, form.degree() - 1);
    let mut out = DifferentialForm::zero(grid, form.degree() - 1)?;
    for (ci, &mask) in in_sets.iter().enumerate() {
        let partials = spectral::gradient(form.component(ci));
        for (m, axis) in axes_of(mask).into_iter().enumerate() {
            let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
            let pos = component_position(&out_sets, mask & !(1 << axis));
            out.comps[pos].axpy(sign, &partials[axis])?;
        }
    }
    Ok(out)
}

/// Pointwise alternating product with the standard sign rules.
pub fn wedge(f: &DifferentialForm, g: &DifferentialForm) -> Result<DifferentialForm> {
    f.grid().check_same(&g.grid())?;
    let d = f.grid().dims();
    let degree = f.degree() + g.degree();
    if degree > d {
        return Err(Error::DegreeOverflow {
            lhs: f.degree(),
            rhs: g.degree(),
            dims: d,
        });
    }
    let f_sets = index_sets(d, f.degree());
    let g_sets = index_sets(d, g.degree());
    let out_sets = index_sets(d, degree);
    let mut out = DifferentialForm::zero(f.grid(), degree)?;
    for (fi, &fm) in f_sets.iter().enumerate() {
        for (gi, &gm) in g_sets.iter().enumerate() {
            if let Some(sign) = merge_sign(fm, gm) {
                let prod = f.component(fi).mul(g.component(gi))?;
                let pos = component_position(&out_sets, fm | gm);
                out.comps[pos].axpy(sign, &prod)?;
            }
        }
    }
    Ok(out)
}

/// ∫_M of a top-degree form against the orientation dx₁∧…∧dx_{2n};
/// the trapezoid rule on a periodic grid, exact for band-limited data.
pub fn integrate(form: &DifferentialForm) -> Result<f64> {
    let d = form.grid().dims();
    if form.degree() != d {
        return Err(Error::DegreeMismatch {
            expected: d,
            got: form.degree(),
        });
    }
    Ok(form.component(0).mean())
}

/// Interior product ι_v.
pub fn contract(v: &VectorField, form: &DifferentialForm) -> Result<DifferentialForm> {
    form.grid().check_same(&v.grid())?;
    if form.degree() == 0 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            got: 0,
        });
    }
    let d = form.grid().dims();
    let in_sets = index_sets(d, form.degree());
    let out_sets = index_sets(d, form.degree() - 1);
    let mut out = DifferentialForm::zero(form.grid(), form.degree() - 1)?;
    for (ci, &mask) in in_sets.iter().enumerate() {
        for (m, axis) in axes_of(mask).into_iter().enumerate() {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let prod = v.component(axis).mul(form.component(ci))?;
            let pos = component_position(&out_sets, mask & !(1 << axis));
            out.comps[pos].axpy(sign, &prod)?;
        }
    }
    Ok(out)
}

/// Pointwise pairing a(v) of a 1-form with a vector field.
pub fn pair(a: &DifferentialForm, v: &VectorField) -> Result<Field> {
    if a.degree() != 1 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            got: a.degree(),
        });
    }
    a.grid().check_same(&v.grid())?;
    let mut out = Field::zeros(a.grid());
    for (ai, vi) in a.components().iter().zip(v.components()) {
        out.axpy(1.0, &ai.mul(vi)?)?;
    }
    Ok(out)
}

/// Constant Fourier coefficients of a 1-form: its class in H¹(M,ℝ) ≅ ℝ^{2n}.
pub fn harmonic_part(a: &DifferentialForm) -> Result<Vec<f64>> {
    if a.degree() != 1 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            got: a.degree(),
        });
    }
    Ok(a.components().iter().map(|c| c.mean()).collect())
}

const HARMONIC_TOL: f64 = 1e-10;
const CLOSEDNESS_TOL: f64 = 1e-8;

/// Minimal-L²-norm primitive a with da = G and d*a = 0, via the Green's
/// operator of the flat Laplacian. The input must be exact: closed with
/// vanishing constant Fourier coefficients.
pub fn hodge_primitive(g: &DifferentialForm) -> Result<DifferentialForm> {
    if g.degree() == 0 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            got: 0,
        });
    }
    let sets = index_sets(g.grid().dims(), g.degree());
    let mut harmonic = Vec::new();
    for (ci, &mask) in sets.iter().enumerate() {
        let m = g.component(ci).mean();
        if m.abs() > HARMONIC_TOL {
            harmonic.push((
                axes_of(mask).into_iter().map(|a| a + 1).collect::<Vec<_>>(),
                m,
            ));
        }
    }
    let closedness = if g.degree() < g.grid().dims() {
        exterior_derivative(g)?.linf()
    } else {
        0.0
    };
    if !harmonic.is_empty() || closedness > CLOSEDNESS_TOL {
        return Err(Error::NotExact {
            closedness,
            harmonic,
        });
    }
    // Hodge Laplacian dd* + d*d = −Σ∂²ᵢ on the flat torus, hence the sign.
    let green_comps = g
        .components()
        .iter()
        .map(|c| spectral::inverse_laplacian(c).scaled(-1.0))
        .collect::<Vec<_>>();
    let green = DifferentialForm::from_components(g.grid(), g.degree(), green_comps)?;
    codifferential(&green)
}

/// Musical isomorphism for the flat metric: componentwise.
pub fn metric_dual(a: &DifferentialForm) -> Result<VectorField> {
    if a.degree() != 1 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            got: a.degree(),
        });
    }
    VectorField::from_components(a.grid(), a.components().to_vec())
}

/// The 1-form with the same components as `v` under the flat metric.
pub fn one_form_of(v: &VectorField) -> DifferentialForm {
    DifferentialForm::from_components(v.grid(), 1, v.components().to_vec())
        .expect("vector field is componentwise a 1-form")
}
