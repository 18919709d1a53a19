//! JSON file formats for points, dual points and reports, with atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mqv_core::linalg::c;
use mqv_core::quiver::derive_params;
use mqv_core::reduction::{DualPoint, DUAL_NOTICE};
use mqv_core::rep_space::LocalCoordinates;
use mqv_core::{CMat, ModelSpec, ParameterSet, RepPoint, C64};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::CliError;

pub const POINT_FORMAT: &str = "mqv-point/1";
pub const DUAL_FORMAT: &str = "mqv-dual/1";

/// A complex number as `[re, im]`.
pub type ComplexData = [f64; 2];

pub fn complex_data(z: C64) -> ComplexData {
    [z.re, z.im]
}

pub fn complex_from(d: ComplexData) -> C64 {
    c(d[0], d[1])
}

/// A dense matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<ComplexData>,
}

impl MatrixData {
    pub fn from_matrix(m: &CMat) -> Self {
        let entries = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| complex_data(m[(i, j)]))).collect();
        Self { rows: m.nrows(), cols: m.ncols(), entries }
    }

    pub fn to_matrix(&self) -> Result<CMat, CliError> {
        if self.entries.len() != self.rows * self.cols {
            return Err(CliError::Usage(format!("matrix of shape {}x{} has {} entries", self.rows, self.cols, self.entries.len())));
        }
        Ok(CMat::from_fn(self.rows, self.cols, |i, j| complex_from(self.entries[i * self.cols + j])))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecData {
    pub m: usize,
    pub d: usize,
    pub n: usize,
}

impl SpecData {
    pub fn to_spec(self) -> Result<ModelSpec, CliError> {
        ModelSpec::new(self.m, self.d, self.n).map_err(|e| CliError::Usage(e.to_string()))
    }
}

impl From<ModelSpec> for SpecData {
    fn from(s: ModelSpec) -> Self {
        Self { m: s.m, d: s.d, n: s.n }
    }
}

/// Chart coordinates `(x, a, c)` of a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinatesData {
    pub x: Vec<ComplexData>,
    pub a: MatrixData,
    pub c: MatrixData,
}

/// A point of the representation space together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFile {
    pub format: String,
    pub spec: SpecData,
    pub q: Vec<ComplexData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub x: Vec<MatrixData>,
    pub y: Vec<MatrixData>,
    pub v: Vec<MatrixData>,
    pub w: Vec<MatrixData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<CoordinatesData>,
    /// Largest moment-map residual when the file was written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_residual: Option<f64>,
}

/// A point file read back into model types.
#[derive(Debug, Clone)]
pub struct LoadedPoint {
    pub spec: ModelSpec,
    pub q: Vec<C64>,
    pub params: ParameterSet,
    pub point: RepPoint,
    pub coordinates: Option<LocalCoordinates>,
}

fn matrices(ms: &[CMat]) -> Vec<MatrixData> {
    ms.iter().map(MatrixData::from_matrix).collect()
}

fn to_matrices(ds: &[MatrixData]) -> Result<Vec<CMat>, CliError> {
    ds.iter().map(MatrixData::to_matrix).collect()
}

impl PointFile {
    pub fn new(point: &RepPoint, q: &[C64], seed: Option<u64>, coordinates: Option<&LocalCoordinates>, moment_residual: Option<f64>) -> Self {
        Self {
            format: POINT_FORMAT.into(),
            spec: point.spec().into(),
            q: q.iter().copied().map(complex_data).collect(),
            seed,
            x: matrices(point.xs()),
            y: matrices(point.ys()),
            v: matrices(point.vs()),
            w: matrices(point.ws()),
            coordinates: coordinates.map(|cd| CoordinatesData {
                x: cd.x().iter().copied().map(complex_data).collect(),
                a: MatrixData::from_matrix(cd.a()),
                c: MatrixData::from_matrix(cd.c()),
            }),
            moment_residual,
        }
    }

    pub fn load(&self) -> Result<LoadedPoint, CliError> {
        if self.format != POINT_FORMAT {
            return Err(CliError::Usage(format!("expected format {POINT_FORMAT}, found '{}'", self.format)));
        }
        let spec = self.spec.to_spec()?;
        let q: Vec<C64> = self.q.iter().copied().map(complex_from).collect();
        if q.len() != spec.m {
            return Err(CliError::Usage(format!("{} parameters for m = {}", q.len(), spec.m)));
        }
        let params = derive_params(&q, spec.n).map_err(|e| CliError::Usage(e.to_string()))?;
        let point = RepPoint::new(spec, to_matrices(&self.x)?, to_matrices(&self.y)?, to_matrices(&self.v)?, to_matrices(&self.w)?)
            .map_err(|e| CliError::Usage(format!("invalid point: {e}")))?;
        let coordinates = match &self.coordinates {
            Some(cd) => Some(
                LocalCoordinates::new(cd.x.iter().copied().map(complex_from).collect(), cd.a.to_matrix()?, cd.c.to_matrix()?)
                    .map_err(|e| CliError::Usage(format!("invalid coordinates: {e}")))?,
            ),
            None => None,
        };
        Ok(LoadedPoint { spec, q, params, point, coordinates })
    }
}

/// Unframed dual data; the framing is dropped and `notice` says so.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualFile {
    pub format: String,
    pub notice: String,
    pub spec: SpecData,
    pub q: Vec<ComplexData>,
    pub x: Vec<MatrixData>,
    pub z: Vec<MatrixData>,
}

impl DualFile {
    pub fn new(dual: &DualPoint) -> Self {
        Self {
            format: DUAL_FORMAT.into(),
            notice: DUAL_NOTICE.into(),
            spec: dual.spec.into(),
            q: dual.params.q().iter().copied().map(complex_data).collect(),
            x: matrices(&dual.x),
            z: matrices(&dual.z),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn read_point(path: &Path) -> Result<LoadedPoint, CliError> {
    read_json::<PointFile>(path)?.load()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file types serialize");
    s.push('\n');
    s
}

/// Writes `contents` next to `path` under a temporary name and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| CliError::Usage(format!("'{}' is not a file path", path.display())))?;
    let mut tmp = PathBuf::from(dir);
    tmp.push(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_atomic(path, &to_json(value))
}
