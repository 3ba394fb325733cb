//! Synthetic volumes with analytic ground truth.
//!
//! Volumes have a zero origin, so voxel `(i, j, k)` sits at
//! `(i * sx, j * sy, k * sz)` mm. A voxel belongs to the shape when its
//! center lies strictly inside it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::Volume;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhantomKind {
    Sphere {
        center: [f64; 3],
        radius: f64,
    },
    Box {
        min: [f64; 3],
        max: [f64; 3],
    },
    /// Ellipsoidal body plus a separate rectangular slab (the bed).
    BodyWithBed {
        body_center: [f64; 3],
        body_radii: [f64; 3],
        bed_min: [f64; 3],
        bed_max: [f64; 3],
    },
    /// Sphere allowed to extend past the volume faces.
    BorderTouchingSphere {
        center: [f64; 3],
        radius: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    #[serde(flatten)]
    pub kind: PhantomKind,
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub body_intensity: f32,
    pub background_intensity: f32,
    /// Half-width of uniform additive noise; 0 disables it.
    #[serde(default)]
    pub noise_amplitude: f32,
}

impl PhantomSpec {
    /// Sphere centered in a cubic volume with unit intensities and no noise.
    pub fn centered_sphere(size: usize, spacing: f64, radius: f64) -> Self {
        let c = (size - 1) as f64 * spacing / 2.0;
        Self {
            kind: PhantomKind::Sphere {
                center: [c; 3],
                radius,
            },
            dims: [size; 3],
            spacing: [spacing; 3],
            body_intensity: 1.0,
            background_intensity: 0.0,
            noise_amplitude: 0.0,
        }
    }

    fn extent(&self) -> [f64; 3] {
        [
            (self.dims[0] - 1) as f64 * self.spacing[0],
            (self.dims[1] - 1) as f64 * self.spacing[1],
            (self.dims[2] - 1) as f64 * self.spacing[2],
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPhantom(msg));
        if self.dims.iter().any(|&n| n == 0) {
            return bad(format!("dims must be >= 1, got {:?}", self.dims));
        }
        if self.spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return bad(format!("spacing must be > 0, got {:?}", self.spacing));
        }
        if !(self.body_intensity > self.background_intensity) {
            return bad("body intensity must exceed background intensity".into());
        }
        let gap = self.body_intensity - self.background_intensity;
        if !(self.noise_amplitude >= 0.0 && self.noise_amplitude < gap / 4.0) {
            return bad(format!(
                "noise amplitude {} must be in [0, {})",
                self.noise_amplitude,
                gap / 4.0
            ));
        }
        let extent = self.extent();
        let fits = |lo: [f64; 3], hi: [f64; 3]| (0..3).all(|k| lo[k] >= 0.0 && hi[k] <= extent[k]);
        match &self.kind {
            PhantomKind::Sphere { center, radius } => {
                if !(*radius >= 0.0) {
                    return bad(format!("radius must be >= 0, got {radius}"));
                }
                if !fits(center.map(|c| c - radius), center.map(|c| c + radius)) {
                    return bad("sphere exceeds the volume".into());
                }
            }
            PhantomKind::BorderTouchingSphere { radius, .. } => {
                if !(*radius >= 0.0) {
                    return bad(format!("radius must be >= 0, got {radius}"));
                }
            }
            PhantomKind::Box { min, max } => {
                if (0..3).any(|k| !(min[k] <= max[k])) {
                    return bad("box min must not exceed max".into());
                }
                if !fits(*min, *max) {
                    return bad("box exceeds the volume".into());
                }
            }
            PhantomKind::BodyWithBed {
                body_center,
                body_radii,
                bed_min,
                bed_max,
            } => {
                if body_radii.iter().any(|&r| !(r > 0.0)) {
                    return bad("body radii must be > 0".into());
                }
                let lo = [0, 1, 2].map(|k| body_center[k] - body_radii[k]);
                let hi = [0, 1, 2].map(|k| body_center[k] + body_radii[k]);
                if !fits(lo, hi) {
                    return bad("body exceeds the volume".into());
                }
                if (0..3).any(|k| !(bed_min[k] <= bed_max[k])) || !fits(*bed_min, *bed_max) {
                    return bad("bed slab is inverted or exceeds the volume".into());
                }
            }
        }
        Ok(())
    }

    pub fn ground_truth(&self) -> GroundTruth {
        match &self.kind {
            PhantomKind::Sphere { center, radius }
            | PhantomKind::BorderTouchingSphere { center, radius } => GroundTruth::Sphere {
                center: *center,
                radius: *radius,
            },
            PhantomKind::Box { min, max } => GroundTruth::Box {
                min: *min,
                max: *max,
            },
            PhantomKind::BodyWithBed {
                body_center,
                body_radii,
                bed_min,
                bed_max,
            } => GroundTruth::Union {
                parts: vec![
                    GroundTruth::Ellipsoid {
                        center: *body_center,
                        radii: *body_radii,
                    },
                    GroundTruth::Box {
                        min: *bed_min,
                        max: *bed_max,
                    },
                ],
            },
        }
    }
}

/// Analytic description of a phantom's surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroundTruth {
    Sphere { center: [f64; 3], radius: f64 },
    Box { min: [f64; 3], max: [f64; 3] },
    Ellipsoid { center: [f64; 3], radii: [f64; 3] },
    Union { parts: Vec<GroundTruth> },
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

impl GroundTruth {
    /// Strict interior test.
    pub fn contains(&self, p: [f64; 3]) -> bool {
        match self {
            GroundTruth::Sphere { center, radius } => norm(sub(p, *center)) < *radius,
            GroundTruth::Box { min, max } => (0..3).all(|k| p[k] > min[k] && p[k] < max[k]),
            GroundTruth::Ellipsoid { center, radii } => {
                let d = sub(p, *center);
                (0..3).map(|k| (d[k] / radii[k]).powi(2)).sum::<f64>() < 1.0
            }
            GroundTruth::Union { parts } => parts.iter().any(|g| g.contains(p)),
        }
    }

    /// Unsigned distance (mm) from `p` to the surface.
    ///
    /// For a union this is the minimum over parts, which is exact for points
    /// outside every part.
    pub fn distance(&self, p: [f64; 3]) -> f64 {
        match self {
            GroundTruth::Sphere { center, radius } => (norm(sub(p, *center)) - radius).abs(),
            GroundTruth::Box { min, max } => {
                let mut outside = [0.0; 3];
                let mut inner = f64::NEG_INFINITY;
                for k in 0..3 {
                    let half = 0.5 * (max[k] - min[k]);
                    let q = (p[k] - 0.5 * (min[k] + max[k])).abs() - half;
                    outside[k] = q.max(0.0);
                    inner = inner.max(q);
                }
                (norm(outside) + inner.min(0.0)).abs()
            }
            GroundTruth::Ellipsoid { center, radii } => {
                ellipsoid_closest(*radii, sub(p, *center)).1
            }
            GroundTruth::Union { parts } => parts
                .iter()
                .map(|g| g.distance(p))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Closest surface point to `p`.
    pub fn closest_point(&self, p: [f64; 3]) -> [f64; 3] {
        match self {
            GroundTruth::Sphere { center, radius } => {
                let d = sub(p, *center);
                let n = norm(d);
                if n == 0.0 {
                    return [center[0] + radius, center[1], center[2]];
                }
                [0, 1, 2].map(|k| center[k] + d[k] * radius / n)
            }
            GroundTruth::Box { min, max } => {
                let inside = (0..3).all(|k| p[k] >= min[k] && p[k] <= max[k]);
                if !inside {
                    return [0, 1, 2].map(|k| p[k].clamp(min[k], max[k]));
                }
                let mut best = (f64::INFINITY, 0, 0.0);
                for k in 0..3 {
                    for face in [min[k], max[k]] {
                        let d = (p[k] - face).abs();
                        if d < best.0 {
                            best = (d, k, face);
                        }
                    }
                }
                let mut q = p;
                q[best.1] = best.2;
                q
            }
            GroundTruth::Ellipsoid { center, radii } => {
                let local = ellipsoid_closest(*radii, sub(p, *center)).0;
                [0, 1, 2].map(|k| center[k] + local[k])
            }
            GroundTruth::Union { parts } => parts
                .iter()
                .map(|g| g.closest_point(p))
                .min_by(|a, b| norm(sub(*a, p)).total_cmp(&norm(sub(*b, p))))
                .unwrap_or(p),
        }
    }
}

// Closest point on an axis-aligned ellipsoid centered at the origin, by
// bisection on the Lagrange multiplier (Eberly's robust formulation).
fn ellipsoid_closest(radii: [f64; 3], p: [f64; 3]) -> ([f64; 3], f64) {
    // Sort axes by decreasing radius and fold the point into the first octant.
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| radii[b].total_cmp(&radii[a]));
    let e = order.map(|k| radii[k]);
    let y = order.map(|k| p[k].abs());
    let x = closest_sorted_3d(e, y);

    let mut out = [0.0; 3];
    for (i, &k) in order.iter().enumerate() {
        out[k] = x[i].copysign(p[k]);
    }
    let dist = norm(sub(out, p));
    (out, dist)
}

fn robust_length(v: &[f64]) -> f64 {
    let m = v.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * v.iter().map(|&c| (c / m).powi(2)).sum::<f64>().sqrt()
}

fn bisect_root(ratios: &[f64], z: &[f64], g: f64) -> f64 {
    let n: Vec<f64> = ratios.iter().zip(z).map(|(r, z)| r * z).collect();
    let last = z.len() - 1;
    let mut s0 = z[last] - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { robust_length(&n) - 1.0 };
    let mut s = 0.0;
    for _ in 0..2200 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let gs: f64 = n
            .iter()
            .zip(ratios)
            .map(|(n, r)| (n / (s + r)).powi(2))
            .sum::<f64>()
            - 1.0;
        if gs > 0.0 {
            s0 = s;
        } else if gs < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

fn closest_sorted_2d(e: [f64; 2], y: [f64; 2]) -> [f64; 2] {
    if y[1] > 0.0 {
        if y[0] > 0.0 {
            let z = [y[0] / e[0], y[1] / e[1]];
            let g = z[0] * z[0] + z[1] * z[1] - 1.0;
            if g != 0.0 {
                let r0 = (e[0] / e[1]).powi(2);
                let s = bisect_root(&[r0, 1.0], &z, g);
                [r0 * y[0] / (s + r0), y[1] / (s + 1.0)]
            } else {
                y
            }
        } else {
            [0.0, e[1]]
        }
    } else {
        let numer = e[0] * y[0];
        let denom = e[0] * e[0] - e[1] * e[1];
        if numer < denom {
            let xde = numer / denom;
            [e[0] * xde, e[1] * (1.0 - xde * xde).max(0.0).sqrt()]
        } else {
            [e[0], 0.0]
        }
    }
}

fn closest_sorted_3d(e: [f64; 3], y: [f64; 3]) -> [f64; 3] {
    if y[2] > 0.0 {
        if y[1] > 0.0 {
            if y[0] > 0.0 {
                let z = [y[0] / e[0], y[1] / e[1], y[2] / e[2]];
                let g = z.iter().map(|v| v * v).sum::<f64>() - 1.0;
                if g != 0.0 {
                    let r0 = (e[0] / e[2]).powi(2);
                    let r1 = (e[1] / e[2]).powi(2);
                    let s = bisect_root(&[r0, r1, 1.0], &z, g);
                    [r0 * y[0] / (s + r0), r1 * y[1] / (s + r1), y[2] / (s + 1.0)]
                } else {
                    y
                }
            } else {
                let [a, b] = closest_sorted_2d([e[1], e[2]], [y[1], y[2]]);
                [0.0, a, b]
            }
        } else if y[0] > 0.0 {
            let [a, b] = closest_sorted_2d([e[0], e[2]], [y[0], y[2]]);
            [a, 0.0, b]
        } else {
            [0.0, 0.0, e[2]]
        }
    } else {
        let denom = [e[0] * e[0] - e[2] * e[2], e[1] * e[1] - e[2] * e[2]];
        let numer = [e[0] * y[0], e[1] * y[1]];
        if numer[0] < denom[0] && numer[1] < denom[1] {
            let xde = [numer[0] / denom[0], numer[1] / denom[1]];
            let discr = 1.0 - xde[0] * xde[0] - xde[1] * xde[1];
            if discr > 0.0 {
                return [e[0] * xde[0], e[1] * xde[1], e[2] * discr.sqrt()];
            }
        }
        let [a, b] = closest_sorted_2d([e[0], e[1]], [y[0], y[1]]);
        [a, b, 0.0]
    }
}

/// Generated phantom volume and its analytic surface.
#[derive(Debug, Clone)]
pub struct Phantom {
    pub volume: Volume,
    pub truth: GroundTruth,
}

/// Rasterizes `spec`; noise is drawn from a ChaCha8 stream seeded by `seed`.
pub fn generate(spec: &PhantomSpec, seed: u64) -> Result<Phantom> {
    spec.validate()?;
    let truth = spec.ground_truth();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = spec.noise_amplitude;
    let s = spec.spacing;
    let volume = Volume::from_fn(spec.dims, spec.spacing, [0.0; 3], |x, y, z| {
        let p = [x as f64 * s[0], y as f64 * s[1], z as f64 * s[2]];
        let base = if truth.contains(p) {
            spec.body_intensity
        } else {
            spec.background_intensity
        };
        if amp > 0.0 {
            base + rng.random_range(-amp..=amp)
        } else {
            base
        }
    })?;
    Ok(Phantom { volume, truth })
}
