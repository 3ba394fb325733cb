//! Volume transforms applied before segmentation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::volume::Volume;

/// Affinely maps intensities onto `[0, 1]`.
pub fn normalize_intensities(volume: &Volume) -> Result<Volume> {
    if volume.is_empty() {
        return Err(Error::InvalidArgument("empty volume".into()));
    }
    let (lo, hi) = volume.min_max();
    if lo >= hi {
        return Err(Error::DegenerateRange(lo));
    }
    let (lo, range) = (lo as f64, hi as f64 - lo as f64);
    let data = volume
        .data()
        .iter()
        .map(|&v| ((v as f64 - lo) / range) as f32)
        .collect();
    volume.with_data(data)
}

/// Spacing-aware gradient magnitude before renormalization.
///
/// Central differences in the interior, one-sided differences on the faces.
pub fn gradient_magnitude_raw(volume: &Volume) -> Result<Volume> {
    let [nx, ny, nz] = volume.dims();
    if nx < 2 || ny < 2 || nz < 2 {
        return Err(Error::InvalidArgument(format!(
            "gradient needs every dim >= 2, got {:?}",
            volume.dims()
        )));
    }
    let spacing = volume.spacing();

    let derivative = |a: usize, n: usize, s: f64, at: &dyn Fn(usize) -> f32| -> f64 {
        let (lo, hi) = if a == 0 {
            (0, 1)
        } else if a == n - 1 {
            (n - 2, n - 1)
        } else {
            (a - 1, a + 1)
        };
        (at(hi) as f64 - at(lo) as f64) / ((hi - lo) as f64 * s)
    };

    let mut out = vec![0.0f32; volume.len()];
    out.par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(z, plane)| {
            for y in 0..ny {
                for x in 0..nx {
                    let gx = derivative(x, nx, spacing[0], &|i| volume.get(i, y, z));
                    let gy = derivative(y, ny, spacing[1], &|j| volume.get(x, j, z));
                    let gz = derivative(z, nz, spacing[2], &|k| volume.get(x, y, k));
                    plane[x + nx * y] = (gx * gx + gy * gy + gz * gz).sqrt() as f32;
                }
            }
        });
    volume.with_data(out)
}

/// Gradient magnitude renormalized to `[0, 1]`.
pub fn gradient_magnitude(volume: &Volume) -> Result<Volume> {
    normalize_intensities(&gradient_magnitude_raw(volume)?)
}

/// Surrounds the volume with `width` voxels of `fill` on every face.
///
/// `fill` defaults to the volume minimum. The origin moves so original voxel
/// centers keep their world coordinates.
pub fn pad_volume(volume: &Volume, width: usize, fill: Option<f32>) -> Result<Volume> {
    if width == 0 {
        return Ok(volume.clone());
    }
    let fill = fill.unwrap_or_else(|| volume.min_max().0);
    let [nx, ny, nz] = volume.dims();
    let dims = [nx + 2 * width, ny + 2 * width, nz + 2 * width];
    let spacing = volume.spacing();
    let origin = volume.origin();
    let origin = [
        origin[0] - width as f64 * spacing[0],
        origin[1] - width as f64 * spacing[1],
        origin[2] - width as f64 * spacing[2],
    ];
    let mut data = vec![fill; dims[0] * dims[1] * dims[2]];
    for z in 0..nz {
        for y in 0..ny {
            let src = volume.index(0, y, z);
            let dst = width + dims[0] * ((y + width) + dims[1] * (z + width));
            data[dst..dst + nx].copy_from_slice(&volume.data()[src..src + nx]);
        }
    }
    Volume::new(dims, spacing, origin, data)
}

/// Keeps voxels whose indices are multiples of `factor` on each axis.
pub fn subsample(volume: &Volume, factor: [usize; 3]) -> Result<Volume> {
    if factor.iter().any(|&f| f < 1) {
        return Err(Error::InvalidArgument(format!(
            "subsample factor must be >= 1, got {factor:?}"
        )));
    }
    if factor == [1, 1, 1] {
        return Ok(volume.clone());
    }
    let dims = volume.dims();
    let new_dims = [
        dims[0].div_ceil(factor[0]),
        dims[1].div_ceil(factor[1]),
        dims[2].div_ceil(factor[2]),
    ];
    let spacing = volume.spacing();
    let new_spacing = [
        spacing[0] * factor[0] as f64,
        spacing[1] * factor[1] as f64,
        spacing[2] * factor[2] as f64,
    ];
    Volume::from_fn(new_dims, new_spacing, volume.origin(), |x, y, z| {
        volume.get(x * factor[0], y * factor[1], z * factor[2])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vol(dims: [usize; 3], data: Vec<f32>) -> Volume {
        Volume::new(dims, [1.0; 3], [0.0; 3], data).unwrap()
    }

    #[test]
    fn normalize_maps_onto_unit_interval() {
        let v = normalize_intensities(&vol([3, 1, 1], vec![0.0, 5.0, 10.0])).unwrap();
        assert_eq!(v.data(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn normalize_constant_volume_fails() {
        let v = Volume::filled([2, 2, 2], [1.0; 3], [0.0; 3], 7.0).unwrap();
        assert!(matches!(
            normalize_intensities(&v),
            Err(Error::DegenerateRange(_))
        ));
    }

    #[test]
    fn normalize_keeps_metadata() {
        let v = Volume::new([2, 1, 1], [0.5, 2.0, 3.0], [1.0, -2.0, 4.0], vec![3.0, 9.0]).unwrap();
        let n = normalize_intensities(&v).unwrap();
        assert_eq!(n.spacing(), v.spacing());
        assert_eq!(n.origin(), v.origin());
    }

    #[test]
    fn ramp_gradient_is_one_inside() {
        let v = Volume::from_fn([6, 5, 4], [1.0; 3], [0.0; 3], |x, _, _| x as f32).unwrap();
        let g = gradient_magnitude_raw(&v).unwrap();
        for z in 0..4 {
            for y in 0..5 {
                for x in 0..6 {
                    assert_eq!(g.get(x, y, z), 1.0);
                }
            }
        }
    }

    #[test]
    fn gradient_respects_spacing() {
        let v = Volume::from_fn([4, 3, 3], [2.0, 1.0, 1.0], [0.0; 3], |x, _, _| x as f32).unwrap();
        let g = gradient_magnitude_raw(&v).unwrap();
        assert!(g.data().iter().all(|&m| m == 0.5));
    }

    #[test]
    fn gradient_of_constant_is_zero_then_degenerate() {
        let v = Volume::filled([3, 3, 3], [1.0; 3], [0.0; 3], 4.0).unwrap();
        assert!(gradient_magnitude_raw(&v).unwrap().data().iter().all(|&m| m == 0.0));
        assert!(matches!(
            gradient_magnitude(&v),
            Err(Error::DegenerateRange(_))
        ));
    }

    #[test]
    fn gradient_needs_two_samples_per_axis() {
        let v = vol([1, 3, 3], vec![0.0; 9]);
        assert!(matches!(
            gradient_magnitude_raw(&v),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn pad_zero_is_identity() {
        let v = vol([2, 2, 2], (0..8).map(|i| i as f32).collect());
        assert_eq!(pad_volume(&v, 0, None).unwrap(), v);
    }

    #[test]
    fn pad_one_counts_fill_voxels() {
        let v = vol([2, 2, 2], vec![5.0; 8]);
        let p = pad_volume(&v, 1, Some(-1.0)).unwrap();
        assert_eq!(p.dims(), [4, 4, 4]);
        assert_eq!(p.data().iter().filter(|&&s| s == -1.0).count(), 56);
        assert_eq!(p.origin(), [-1.0, -1.0, -1.0]);
    }

    #[test]
    fn pad_default_fill_is_minimum() {
        let v = vol([2, 1, 1], vec![3.0, 8.0]);
        let p = pad_volume(&v, 2, None).unwrap();
        assert_eq!(p.get(0, 0, 0), 3.0);
        assert_eq!(p.data().iter().filter(|&&s| s == 8.0).count(), 1);
    }

    #[test]
    fn subsample_identity_and_halving() {
        let v = Volume::from_fn([8, 8, 8], [1.0, 1.5, 2.0], [3.0; 3], |x, y, z| {
            (x + 8 * y + 64 * z) as f32
        })
        .unwrap();
        assert_eq!(subsample(&v, [1, 1, 1]).unwrap(), v);
        let s = subsample(&v, [2, 2, 2]).unwrap();
        assert_eq!(s.dims(), [4, 4, 4]);
        assert_eq!(s.spacing(), [2.0, 3.0, 4.0]);
        assert_eq!(s.origin(), v.origin());
        assert_eq!(s.get(1, 2, 3), v.get(2, 4, 6));
    }

    #[test]
    fn subsample_rejects_zero_factor() {
        let v = vol([2, 2, 2], vec![0.0; 8]);
        assert!(subsample(&v, [1, 0, 1]).is_err());
    }

    fn arb_volume() -> impl Strategy<Value = Volume> {
        (1usize..7, 1usize..7, 1usize..7).prop_flat_map(|(nx, ny, nz)| {
            (
                prop::collection::vec(-100.0f32..100.0, nx * ny * nz),
                prop::array::uniform3(0.1f64..3.0),
                prop::array::uniform3(-50.0f64..50.0),
            )
                .prop_map(move |(data, spacing, origin)| {
                    Volume::new([nx, ny, nz], spacing, origin, data).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn normalize_idempotent_and_order_preserving(v in arb_volume()) {
            let (lo, hi) = v.min_max();
            prop_assume!(lo < hi);
            let n = normalize_intensities(&v).unwrap();
            prop_assert_eq!(normalize_intensities(&n).unwrap(), n.clone());
            for (i, j) in (0..v.len()).zip(1..v.len()) {
                let (a, b) = (v.data()[i], v.data()[j]);
                let (na, nb) = (n.data()[i], n.data()[j]);
                if a < b { prop_assert!(na <= nb); }
                if a > b { prop_assert!(na >= nb); }
            }
        }

        #[test]
        fn pad_preserves_world_coordinates(v in arb_volume(), width in 0usize..4) {
            let p = pad_volume(&v, width, None).unwrap();
            let [nx, ny, nz] = v.dims();
            for z in 0..nz {
                for y in 0..ny {
                    for x in 0..nx {
                        let a = v.world(x, y, z);
                        let b = p.world(x + width, y + width, z + width);
                        for k in 0..3 {
                            prop_assert!((a[k] - b[k]).abs() <= 1e-9 * (1.0 + a[k].abs()));
                        }
                        prop_assert_eq!(v.get(x, y, z), p.get(x + width, y + width, z + width));
                    }
                }
            }
        }

        #[test]
        fn subsample_composes(
            v in arb_volume(),
            f1 in prop::array::uniform3(1usize..4),
            f2 in prop::array::uniform3(1usize..4),
        ) {
            let twice = subsample(&subsample(&v, f1).unwrap(), f2).unwrap();
            let once = subsample(&v, [f1[0] * f2[0], f1[1] * f2[1], f1[2] * f2[2]]).unwrap();
            prop_assert_eq!(twice.dims(), once.dims());
            prop_assert_eq!(twice.data(), once.data());
        }
    }
}
