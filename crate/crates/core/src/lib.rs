//! Skin surface extraction from volumetric scans.
//!
//! The pipeline normalizes a [`Volume`], flood fills every axial slice from a
//! background corner against a skin isovalue ([`segment_volume`]), extracts
//! the labeled body surface with marching cubes ([`extract_surface`]) and
//! compares surfaces with vertex-to-vertex Hausdorff distances
//! ([`directed_hausdorff`]). Synthetic [`phantom`]s with analytic ground
//! truth exercise each stage.

pub mod error;
pub mod metrics;
pub mod phantom;
pub mod preprocess;
pub mod segmentation;
pub mod surface;
pub mod volume;

pub use error::{Error, Result};
pub use metrics::{
    directed_hausdorff, export_per_vertex_scalars, symmetric_hausdorff, DistanceReport,
    DistanceSummary,
};
pub use phantom::{generate, GroundTruth, Phantom, PhantomKind, PhantomSpec};
pub use preprocess::{gradient_magnitude, normalize_intensities, pad_volume, subsample};
pub use segmentation::{
    resolve_isovalue, segment_slice, segment_volume, select_seed, Connectivity, IsovalueReport,
    IsovalueStrategy, Label, LabelGrid, LabelSlice, SeedPolicy, Segmentation, SegmentationConfig,
};
pub use surface::{
    export_mesh, extract_surface, import_mesh, is_watertight, CropBox, MeshFormat, TriangleMesh,
};
pub use volume::{load_volume, save_volume, Slice, Volume, VolumeFormat, VoxelCoord};
