//! File formats: binary field files with JSON sidecars, CSV export,
//! connection bundles and flow traces.
//!
//! A field file holds all components of one form, concatenated in
//! component order, as little-endian 64-bit floats, row-major with the
//! last axis fastest. The sidecar at `<path>.json` records
//! {half_dim, resolution, degree, component_order} with 1-based axis
//! indices; connections add a `<path>.bundle.json` header.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calabi::FlowSample;
use crate::connection::{BundleSetup, RelativeConnection};
use crate::error::{Error, Result};
use crate::forms::DifferentialForm;
use crate::grid::{Field, Grid};

#[derive(Debug, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub half_dim: usize,
    pub resolution: usize,
    pub degree: usize,
    pub component_order: Vec<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BundleHeader {
    pub half_dim: usize,
    pub resolution: usize,
    pub chern_data: Vec<i64>,
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".json");
    path.with_file_name(name)
}

fn bundle_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".bundle.json");
    path.with_file_name(name)
}

/// Write the binary field file and its sidecar.
pub fn write_form(path: impl AsRef<Path>, form: &DifferentialForm) -> Result<()> {
    let path = path.as_ref();
    let grid = form.grid();
    let mut bytes = Vec::with_capacity(form.components().len() * grid.points() * 8);
    for comp in form.components() {
        for v in comp.data() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, bytes)?;
    let sidecar = FieldSidecar {
        half_dim: grid.half_dim(),
        resolution: grid.resolution(),
        degree: form.degree(),
        component_order: form.component_order(),
    };
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(&sidecar)?)?;
    Ok(())
}

/// Read a field file through its sidecar.
pub fn read_form(path: impl AsRef<Path>) -> Result<DifferentialForm> {
    let path = path.as_ref();
    let sidecar: FieldSidecar = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    let grid = Grid::new(sidecar.half_dim, sidecar.resolution)?;
    let bytes = fs::read(path)?;
    let expected_comps = crate::forms::index_sets(grid.dims(), sidecar.degree).len();
    let expected = expected_comps * grid.points() * 8;
    if bytes.len() != expected {
        return Err(Error::InvalidConfig(format!(
            "field file has {} bytes, sidecar implies {expected}",
            bytes.len()
        )));
    }
    let mut comps = Vec::with_capacity(expected_comps);
    for chunk in bytes.chunks_exact(grid.points() * 8) {
        let data: Vec<f64> = chunk
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("chunked by 8")))
            .collect();
        comps.push(Field::from_data(grid, data)?);
    }
    DifferentialForm::from_components(grid, sidecar.degree, comps)
}

/// One row per grid point: coordinates x₁..x_{2n}, then the components.
pub fn write_form_csv(path: impl AsRef<Path>, form: &DifferentialForm) -> Result<()> {
    let grid = form.grid();
    let mut out = fs::File::create(path.as_ref())?;
    let mut header: Vec<String> = (1..=grid.dims()).map(|i| format!("x{i}")).collect();
    for idx in form.component_order() {
        if idx.is_empty() {
            header.push("value".into());
        } else {
            let tag: Vec<String> = idx.iter().map(|a| a.to_string()).collect();
            header.push(format!("c_{}", tag.join("_")));
        }
    }
    writeln!(out, "{}", header.join(","))?;
    for p in 0..grid.points() {
        let mut row: Vec<String> = grid.point_of(p).iter().map(|x| format!("{x}")).collect();
        for comp in form.components() {
            row.push(format!("{}", comp.data()[p]));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Connection = 1-form field file plus a bundle header.
pub fn write_connection(path: impl AsRef<Path>, conn: &RelativeConnection) -> Result<()> {
    let path = path.as_ref();
    write_form(path, &conn.a)?;
    let grid = conn.grid();
    let header = BundleHeader {
        half_dim: grid.half_dim(),
        resolution: grid.resolution(),
        chern_data: conn.bundle.chern_data().to_vec(),
    };
    fs::write(bundle_path(path), serde_json::to_vec_pretty(&header)?)?;
    Ok(())
}

pub fn read_connection(path: impl AsRef<Path>) -> Result<RelativeConnection> {
    let path = path.as_ref();
    let header: BundleHeader = serde_json::from_slice(&fs::read(bundle_path(path))?)?;
    let grid = Grid::new(header.half_dim, header.resolution)?;
    let bundle = BundleSetup::new(grid, header.chern_data)?;
    let a = read_form(path)?;
    RelativeConnection::new(bundle, a)
}

/// Flow trace CSV: t, F, residual_linf, margin, wall_ms.
pub fn write_flow_trace(path: impl AsRef<Path>, trace: &[FlowSample]) -> Result<()> {
    let mut out = fs::File::create(path.as_ref())?;
    writeln!(out, "t,F,residual_linf,margin,wall_ms")?;
    for s in trace {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.t, s.energy, s.residual, s.margin, s.wall_ms
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn form_files_roundtrip() {
        let dir = std::env::temp_dir().join("momentlab-io-test");
        fs::create_dir_all(&dir).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = Grid::new(2, 8).unwrap();
        let form = sample::form(g, 2, 2, 1.0, &mut rng);
        let path = dir.join("two_form.field");
        write_form(&path, &form).unwrap();
        let back = read_form(&path).unwrap();
        assert_eq!(form, back);

        let sidecar: FieldSidecar =
            serde_json::from_slice(&fs::read(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(sidecar.degree, 2);
        assert_eq!(sidecar.component_order[0], vec![1, 2]);
        assert_eq!(sidecar.component_order[5], vec![3, 4]);
    }

    #[test]
    fn connection_files_roundtrip() {
        let dir = std::env::temp_dir().join("momentlab-io-test");
        fs::create_dir_all(&dir).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let conn = sample::symplectic_connection(Grid::new(1, 16).unwrap(), 3, 0.01, 0.3, &mut rng);
        let path = dir.join("conn.field");
        write_connection(&path, &conn).unwrap();
        let back = read_connection(&path).unwrap();
        assert_eq!(conn.a, back.a);
        assert_eq!(conn.bundle.chern_data(), back.bundle.chern_data());
    }

    #[test]
    fn csv_export_shape() {
        let dir = std::env::temp_dir().join("momentlab-io-test");
        fs::create_dir_all(&dir).unwrap();
        let g = Grid::new(1, 8).unwrap();
        let f = Field::from_fn(g, |x| x[0] + 10.0 * x[1]);
        let form = DifferentialForm::scalar(f);
        let path = dir.join("scalar.csv");
        write_form_csv(&path, &form).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x1,x2,value");
        assert_eq!(lines.len(), 1 + 64);
        assert_eq!(lines[1], "0,0,0");
        // second row advances the last axis
        assert_eq!(lines[2], "0,0.125,1.25");
    }
}
