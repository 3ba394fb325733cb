//! Triangle meshes of the segmented skin: extraction, checks and file I/O.

mod io;
mod marching_cubes;
mod tables;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{export_mesh, import_mesh, MeshFormat};
pub use marching_cubes::extract_surface;

/// Indexed triangle mesh in millimeter world coordinates.
///
/// Triangles wind counter-clockwise seen from outside the body.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let mesh = Self {
            vertices,
            triangles,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Checks index ranges, degenerate triangles and finiteness.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v as usize >= n) {
                return Err(Error::InvalidArgument(format!(
                    "triangle {i} {t:?} references a vertex >= {n}"
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidArgument(format!(
                    "triangle {i} {t:?} is degenerate"
                )));
            }
        }
        if let Some(i) = self
            .vertices
            .iter()
            .position(|v| v.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::InvalidArgument(format!("vertex {i} is not finite")));
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// True when every undirected edge is shared by exactly two triangles.
    pub fn is_watertight(&self) -> bool {
        is_watertight(self)
    }

    /// Signed enclosed volume (mm^3); positive for outward-facing triangles.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                    + a[2] * (b[0] * c[1] - b[1] * c[0])
            })
            .sum::<f64>()
            / 6.0
    }

    /// Axis-aligned bounds of the vertices, `None` when empty.
    pub fn bounding_box(&self) -> Option<([f64; 3], [f64; 3])> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), v| {
            (
                [lo[0].min(v[0]), lo[1].min(v[1]), lo[2].min(v[2])],
                [hi[0].max(v[0]), hi[1].max(v[1]), hi[2].max(v[2])],
            )
        }))
    }

    /// Keeps the vertices inside `bounds` and the triangles using only them.
    pub fn crop(&self, bounds: &CropBox) -> TriangleMesh {
        let mut remap = vec![u32::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if bounds.contains(*v) {
                remap[i] = vertices.len() as u32;
                vertices.push(*v);
            }
        }
        let triangles = self
            .triangles
            .iter()
            .filter_map(|t| {
                let m = t.map(|i| remap[i as usize]);
                m.iter().all(|&i| i != u32::MAX).then_some(m)
            })
            .collect();
        TriangleMesh {
            vertices,
            triangles,
        }
    }

    pub fn translated(&self, by: [f64; 3]) -> TriangleMesh {
        TriangleMesh {
            vertices: self
                .vertices
                .iter()
                .map(|v| [v[0] + by[0], v[1] + by[1], v[2] + by[2]])
                .collect(),
            triangles: self.triangles.clone(),
        }
    }
}

/// Every undirected edge must be used by exactly two triangles. Vacuously
/// true for an empty mesh.
pub fn is_watertight(mesh: &TriangleMesh) -> bool {
    let mut uses: HashMap<(u32, u32), u32> = HashMap::with_capacity(mesh.triangles.len() * 3 / 2);
    for t in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *uses.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    uses.values().all(|&n| n == 2)
}

/// Axis-aligned box in millimeters, bounds inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CropBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl CropBox {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Result<Self> {
        if (0..3).any(|k| !(min[k] <= max[k])) {
            return Err(Error::InvalidArgument(format!(
                "crop box min {min:?} exceeds max {max:?}"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }
}

impl std::str::FromStr for CropBox {
    type Err = Error;

    /// Parses `x0,y0,z0,x1,y1,z1`.
    fn from_str(s: &str) -> Result<Self> {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidArgument(format!("crop box '{s}': {e}")))?;
        if v.len() != 6 {
            return Err(Error::InvalidArgument(format!(
                "crop box '{s}' needs 6 values, got {}",
                v.len()
            )));
        }
        Self::new([v[0], v[1], v[2]], [v[3], v[4], v[5]])
    }
}

impl From<[f64; 6]> for CropBox {
    fn from(v: [f64; 6]) -> Self {
        Self {
            min: [v[0], v[1], v[2]],
            max: [v[3], v[4], v[5]],
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Unit octahedron with outward winding.
    pub(crate) fn octahedron() -> TriangleMesh {
        let vertices = vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let triangles = vec![
            [0, 2, 4],
            [2, 1, 4],
            [1, 3, 4],
            [3, 0, 4],
            [2, 0, 5],
            [1, 2, 5],
            [3, 1, 5],
            [0, 3, 5],
        ];
        TriangleMesh::new(vertices, triangles).unwrap()
    }

    #[test]
    fn octahedron_is_watertight_and_outward() {
        let m = octahedron();
        assert!(m.is_watertight());
        assert!((m.signed_volume() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn removing_a_face_opens_it() {
        let mut m = octahedron();
        m.triangles.pop();
        assert!(!is_watertight(&m));
    }

    #[test]
    fn empty_mesh_is_watertight() {
        assert!(is_watertight(&TriangleMesh::default()));
    }

    #[test]
    fn validate_catches_bad_triangles() {
        assert!(TriangleMesh::new(vec![[0.0; 3]; 3], vec![[0, 1, 3]]).is_err());
        assert!(TriangleMesh::new(vec![[0.0; 3]; 3], vec![[0, 1, 1]]).is_err());
        assert!(TriangleMesh::new(vec![[f64::NAN, 0.0, 0.0]], vec![]).is_err());
    }

    #[test]
    fn crop_drops_outside_vertices_and_their_triangles() {
        let m = octahedron();
        let upper = CropBox::new([-2.0, -2.0, -0.5], [2.0, 2.0, 2.0]).unwrap();
        let c = m.crop(&upper);
        assert_eq!(c.vertex_count(), 5);
        assert_eq!(c.triangle_count(), 4);
        c.validate().unwrap();
        let none = CropBox::new([5.0; 3], [6.0; 3]).unwrap();
        assert!(m.crop(&none).is_empty());
    }

    #[test]
    fn crop_box_parsing() {
        let b: CropBox = "0,1,2,3,4,5".parse().unwrap();
        assert_eq!(b.min, [0.0, 1.0, 2.0]);
        assert_eq!(b.max, [3.0, 4.0, 5.0]);
        assert!("1,2,3".parse::<CropBox>().is_err());
        assert!("5,0,0,0,1,1".parse::<CropBox>().is_err());
    }

    #[test]
    fn bounding_box_of_octahedron() {
        assert_eq!(
            octahedron().bounding_box(),
            Some(([-1.0; 3], [1.0; 3]))
        );
        assert_eq!(TriangleMesh::default().bounding_box(), None);
    }
}
