//! Python bindings. Arrays cross the boundary as plain lists.

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use skinseg::{
    Connectivity, CropBox, IsovalueStrategy, MeshFormat, SeedPolicy, VolumeFormat, VoxelCoord,
};

create_exception!(skinseg_py, SkinsegError, PyValueError);

fn err(e: skinseg::Error) -> PyErr {
    match e {
        skinseg::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => SkinsegError::new_err(other.to_string()),
    }
}

fn format_of(path: &str, format: Option<&str>) -> PyResult<VolumeFormat> {
    match format {
        Some(f) => f.parse().map_err(err),
        None if path.ends_with(".nii") || path.ends_with(".nii.gz") => Ok(VolumeFormat::Nifti1),
        None => Ok(VolumeFormat::Rawvol),
    }
}

#[pyclass(name = "Volume", module = "skinseg_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyVolume {
    inner: skinseg::Volume,
}

#[pymethods]
impl PyVolume {
    /// `data` is x-fastest: index = x + nx*(y + ny*z).
    #[new]
    #[pyo3(signature = (dims, data, spacing=[1.0; 3], origin=[0.0; 3]))]
    fn new(dims: [usize; 3], data: Vec<f32>, spacing: [f64; 3], origin: [f64; 3]) -> PyResult<Self> {
        let inner = skinseg::Volume::new(dims, spacing, origin, data).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, format=None))]
    fn load(path: &str, format: Option<&str>) -> PyResult<Self> {
        let inner = skinseg::load_volume(path, format_of(path, format)?).map_err(err)?;
        Ok(Self { inner })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        skinseg::save_volume(&self.inner, path, VolumeFormat::Rawvol).map_err(err)
    }

    #[getter]
    fn dims(&self) -> [usize; 3] {
        self.inner.dims()
    }

    #[getter]
    fn spacing(&self) -> [f64; 3] {
        self.inner.spacing()
    }

    #[getter]
    fn origin(&self) -> [f64; 3] {
        self.inner.origin()
    }

    fn data(&self) -> Vec<f32> {
        self.inner.data().to_vec()
    }

    fn get(&self, x: usize, y: usize, z: usize) -> PyResult<f32> {
        if !self.inner.contains(VoxelCoord::new(x, y, z)) {
            return Err(pyo3::exceptions::PyIndexError::new_err(format!("({x}, {y}, {z}) outside volume")));
        }
        Ok(self.inner.get(x, y, z))
    }

    fn min_max(&self) -> (f32, f32) {
        self.inner.min_max()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Volume(dims={:?}, spacing={:?})", self.inner.dims(), self.inner.spacing())
    }
}

#[pyfunction]
fn normalize_intensities(volume: &PyVolume) -> PyResult<PyVolume> {
    let inner = skinseg::normalize_intensities(&volume.inner).map_err(err)?;
    Ok(PyVolume { inner })
}

#[pyfunction]
fn gradient_magnitude(volume: &PyVolume) -> PyResult<PyVolume> {
    let inner = skinseg::gradient_magnitude(&volume.inner).map_err(err)?;
    Ok(PyVolume { inner })
}

#[pyfunction]
#[pyo3(signature = (volume, width, fill=None))]
fn pad_volume(volume: &PyVolume, width: usize, fill: Option<f32>) -> PyResult<PyVolume> {
    let inner = skinseg::pad_volume(&volume.inner, width, fill).map_err(err)?;
    Ok(PyVolume { inner })
}

#[pyfunction]
fn subsample(volume: &PyVolume, factor: [usize; 3]) -> PyResult<PyVolume> {
    let inner = skinseg::subsample(&volume.inner, factor).map_err(err)?;
    Ok(PyVolume { inner })
}

#[pyclass(name = "SegmentationConfig", module = "skinseg_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyConfig {
    inner: skinseg::SegmentationConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (strategy="fixed", isovalue=None, connectivity=4, pad_width=1, subsample=[1, 1, 1], seed_voxel=None))]
    fn new(
        strategy: &str,
        isovalue: Option<f64>,
        connectivity: u8,
        pad_width: usize,
        subsample: [usize; 3],
        seed_voxel: Option<[usize; 3]>,
    ) -> PyResult<Self> {
        let isovalue_strategy = match (strategy, isovalue) {
            ("fixed", None) => IsovalueStrategy::fixed(),
            ("fixed", Some(v)) => IsovalueStrategy::Fixed(v),
            ("gradient", None) => IsovalueStrategy::gradient(),
            ("gradient", Some(v)) => IsovalueStrategy::Gradient(v),
            (other, _) => return Err(SkinsegError::new_err(format!("unknown strategy '{other}'"))),
        };
        let inner = skinseg::SegmentationConfig {
            isovalue_strategy,
            connectivity: Connectivity::try_from(connectivity).map_err(err)?,
            pad_width,
            seed_policy: match seed_voxel {
                Some([x, y, z]) => SeedPolicy::Explicit(VoxelCoord::new(x, y, z)),
                None => SeedPolicy::CornerScan,
            },
            subsample_factor: subsample,
        };
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn strategy(&self) -> &'static str {
        self.inner.isovalue_strategy.name()
    }

    #[getter]
    fn isovalue(&self) -> f64 {
        self.inner.isovalue_strategy.value()
    }

    #[getter]
    fn pad_width(&self) -> usize {
        self.inner.pad_width
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(name = "LabelGrid", module = "skinseg_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyLabelGrid {
    inner: skinseg::LabelGrid,
}

#[pymethods]
impl PyLabelGrid {
    #[getter]
    fn dims(&self) -> [usize; 3] {
        self.inner.dims()
    }

    #[getter]
    fn spacing(&self) -> [f64; 3] {
        self.inner.spacing()
    }

    #[getter]
    fn origin(&self) -> [f64; 3] {
        self.inner.origin()
    }

    /// 0 background, 1 boundary, 2 interior.
    fn labels(&self) -> Vec<u8> {
        self.inner.to_bytes()
    }

    fn get(&self, x: usize, y: usize, z: usize) -> PyResult<u8> {
        let [nx, ny, nz] = self.inner.dims();
        if x >= nx || y >= ny || z >= nz {
            return Err(pyo3::exceptions::PyIndexError::new_err(format!("({x}, {y}, {z}) outside grid")));
        }
        Ok(self.inner.get(x, y, z) as u8)
    }

    fn count(&self, label: u8) -> PyResult<usize> {
        let l = skinseg::Label::from_u8(label)
            .ok_or_else(|| SkinsegError::new_err(format!("no label {label}")))?;
        Ok(self.inner.count(l))
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(err)
    }
}

#[pyclass(name = "Segmentation", module = "skinseg_py", get_all)]
pub struct PySegmentation {
    grid: PyLabelGrid,
    strategy: String,
    isovalue: f64,
    gradient_preprocessed: bool,
    /// `(slice, message)` pairs.
    warnings: Vec<(usize, String)>,
}

#[pyfunction]
#[pyo3(signature = (volume, config=None))]
fn segment_volume(py: Python<'_>, volume: &PyVolume, config: Option<&PyConfig>) -> PyResult<PySegmentation> {
    let cfg = config.map(|c| c.inner.clone()).unwrap_or_default();
    let seg = py
        .detach(|| skinseg::segment_volume(&volume.inner, &cfg))
        .map_err(err)?;
    Ok(PySegmentation {
        grid: PyLabelGrid { inner: seg.grid },
        strategy: seg.isovalue.strategy,
        isovalue: seg.isovalue.isovalue,
        gradient_preprocessed: seg.isovalue.gradient_preprocessed,
        warnings: seg.warnings.into_iter().map(|w| (w.slice, w.message)).collect(),
    })
}

#[pyclass(name = "TriangleMesh", module = "skinseg_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyMesh {
    inner: skinseg::TriangleMesh,
}

fn mesh_format(path: &str) -> PyResult<MeshFormat> {
    MeshFormat::from_path(std::path::Path::new(path)).map_err(err)
}

#[pymethods]
impl PyMesh {
    #[new]
    fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[u32; 3]>) -> PyResult<Self> {
        let inner = skinseg::TriangleMesh::new(vertices, triangles).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inner = skinseg::import_mesh(path, mesh_format(path)?).map_err(err)?;
        Ok(Self { inner })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        skinseg::export_mesh(&self.inner, path, mesh_format(path)?).map_err(err)
    }

    #[getter]
    fn vertices(&self) -> Vec<[f64; 3]> {
        self.inner.vertices.clone()
    }

    #[getter]
    fn triangles(&self) -> Vec<[u32; 3]> {
        self.inner.triangles.clone()
    }

    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    fn triangle_count(&self) -> usize {
        self.inner.triangle_count()
    }

    fn is_watertight(&self) -> bool {
        self.inner.is_watertight()
    }

    fn signed_volume(&self) -> f64 {
        self.inner.signed_volume()
    }

    fn bounding_box(&self) -> Option<([f64; 3], [f64; 3])> {
        self.inner.bounding_box()
    }

    /// Keeps vertices inside the box (mm, inclusive) and the triangles among them.
    fn crop(&self, min: [f64; 3], max: [f64; 3]) -> PyResult<Self> {
        let b = CropBox::new(min, max).map_err(err)?;
        Ok(Self { inner: self.inner.crop(&b) })
    }

    fn __repr__(&self) -> String {
        format!(
            "TriangleMesh(vertices={}, triangles={})",
            self.inner.vertex_count(),
            self.inner.triangle_count()
        )
    }
}

#[pyfunction]
fn extract_surface(py: Python<'_>, grid: &PyLabelGrid) -> PyResult<PyMesh> {
    let inner = py.detach(|| skinseg::extract_surface(&grid.inner)).map_err(err)?;
    Ok(PyMesh { inner })
}

#[pyfunction]
fn is_watertight(mesh: &PyMesh) -> bool {
    skinseg::is_watertight(&mesh.inner)
}

#[pyclass(name = "DistanceReport", module = "skinseg_py")]
pub struct PyDistanceReport {
    inner: skinseg::DistanceReport,
}

#[pymethods]
impl PyDistanceReport {
    #[getter]
    fn direction(&self) -> String {
        self.inner.direction.clone()
    }

    #[getter]
    fn per_vertex(&self) -> Vec<f64> {
        self.inner.per_vertex.clone()
    }

    #[getter]
    fn hausdorff(&self) -> f64 {
        self.inner.hausdorff
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.inner.mean
    }

    #[getter]
    fn p50(&self) -> f64 {
        self.inner.p50
    }

    #[getter]
    fn p95(&self) -> f64 {
        self.inner.p95
    }

    #[getter]
    fn p99(&self) -> f64 {
        self.inner.p99
    }

    /// Per-vertex CSV plus a JSON summary beside it.
    fn export(&self, csv_path: &str) -> PyResult<()> {
        skinseg::export_per_vertex_scalars(&self.inner, csv_path).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "DistanceReport({}, hausdorff={}, mean={})",
            self.inner.direction, self.inner.hausdorff, self.inner.mean
        )
    }
}

#[pyfunction]
fn directed_hausdorff(py: Python<'_>, x1: &PyMesh, x2: &PyMesh) -> PyResult<PyDistanceReport> {
    let inner = py
        .detach(|| skinseg::directed_hausdorff(&x1.inner, &x2.inner))
        .map_err(err)?;
    Ok(PyDistanceReport { inner })
}

#[pyfunction]
fn symmetric_hausdorff(py: Python<'_>, x1: &PyMesh, x2: &PyMesh) -> PyResult<f64> {
    py.detach(|| skinseg::symmetric_hausdorff(&x1.inner, &x2.inner))
        .map_err(err)
}

/// Generates a phantom from its JSON description. Returns the volume and
/// the ground-truth surface as JSON.
#[pyfunction]
#[pyo3(signature = (spec_json, seed=0))]
fn generate_phantom(spec_json: &str, seed: u64) -> PyResult<(PyVolume, String)> {
    let spec: skinseg::PhantomSpec = serde_json::from_str(spec_json)
        .map_err(|e| SkinsegError::new_err(format!("invalid phantom spec: {e}")))?;
    let p = skinseg::generate(&spec, seed).map_err(err)?;
    let truth = serde_json::to_string(&p.truth).expect("truth serializes");
    Ok((PyVolume { inner: p.volume }, truth))
}

/// Noise-free sphere centered in a cube of `size` voxels.
#[pyfunction]
#[pyo3(signature = (size, radius, spacing=1.0))]
fn sphere_phantom(size: usize, radius: f64, spacing: f64) -> PyResult<PyVolume> {
    let spec = skinseg::PhantomSpec::centered_sphere(size, spacing, radius);
    let p = skinseg::generate(&spec, 0).map_err(err)?;
    Ok(PyVolume { inner: p.volume })
}

#[pymodule]
fn skinseg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SkinsegError", m.py().get_type::<SkinsegError>())?;
    m.add_class::<PyVolume>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyLabelGrid>()?;
    m.add_class::<PySegmentation>()?;
    m.add_class::<PyMesh>()?;
    m.add_class::<PyDistanceReport>()?;
    m.add_function(wrap_pyfunction!(normalize_intensities, m)?)?;
    m.add_function(wrap_pyfunction!(gradient_magnitude, m)?)?;
    m.add_function(wrap_pyfunction!(pad_volume, m)?)?;
    m.add_function(wrap_pyfunction!(subsample, m)?)?;
    m.add_function(wrap_pyfunction!(segment_volume, m)?)?;
    m.add_function(wrap_pyfunction!(extract_surface, m)?)?;
    m.add_function(wrap_pyfunction!(is_watertight, m)?)?;
    m.add_function(wrap_pyfunction!(directed_hausdorff, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_hausdorff, m)?)?;
    m.add_function(wrap_pyfunction!(generate_phantom, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_phantom, m)?)?;
    Ok(())
}
