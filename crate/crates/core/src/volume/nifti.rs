//! Minimal read-only NIfTI-1 support.
//!
//! Honored header fields: `dim[1..3]`, `pixdim[1..3]`, `datatype`,
//! `scl_slope`, `scl_inter`, `vox_offset`. qform/sform are ignored; the
//! loaded volume has a zero origin.

use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::MultiGzDecoder;

use super::Volume;
use crate::error::{Error, Result};

const HEADER_SIZE: usize = 348;

const DT_UINT8: i16 = 2;
const DT_INT16: i16 = 4;
const DT_FLOAT32: i16 = 16;
const DT_FLOAT64: i16 = 64;
const DT_UINT16: i16 = 512;

#[derive(Clone, Copy)]
enum Endian {
    Little,
    Big,
}

struct Reader<'a> {
    bytes: &'a [u8],
    endian: Endian,
}

impl Reader<'_> {
    fn array<const N: usize>(&self, offset: usize) -> [u8; N] {
        let mut out = [0u8; N];
        out.copy_from_slice(&self.bytes[offset..offset + N]);
        if let Endian::Big = self.endian {
            out.reverse();
        }
        out
    }

    fn i16(&self, offset: usize) -> i16 {
        i16::from_le_bytes(self.array(offset))
    }

    fn u16(&self, offset: usize) -> u16 {
        u16::from_le_bytes(self.array(offset))
    }

    fn f32(&self, offset: usize) -> f32 {
        f32::from_le_bytes(self.array(offset))
    }

    fn f64(&self, offset: usize) -> f64 {
        f64::from_le_bytes(self.array(offset))
    }
}

fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        MultiGzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Loads a single-file (`n+1`) NIfTI-1 volume, optionally gzip-compressed.
pub fn load_nifti(path: &Path) -> Result<Volume> {
    let bytes = read_maybe_gz(path)?;
    parse_nifti(&bytes)
}

pub(crate) fn parse_nifti(bytes: &[u8]) -> Result<Volume> {
    if bytes.len() < HEADER_SIZE {
        return Err(Error::InvalidHeader(format!(
            "file is {} bytes, shorter than the 348-byte header",
            bytes.len()
        )));
    }
    let endian = match bytes[0..4].try_into().map(i32::from_le_bytes) {
        Ok(348) => Endian::Little,
        _ if i32::from_be_bytes(bytes[0..4].try_into().unwrap()) == 348 => Endian::Big,
        _ => return Err(Error::InvalidHeader("sizeof_hdr is not 348".into())),
    };
    let r = Reader { bytes, endian };

    match &bytes[344..348] {
        b"n+1\0" => {}
        b"ni1\0" => {
            return Err(Error::InvalidHeader(
                "two-file NIfTI (.hdr/.img) is not supported".into(),
            ))
        }
        other => {
            return Err(Error::InvalidHeader(format!(
                "bad magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    }

    let ndim = r.i16(40);
    if !(1..=7).contains(&ndim) {
        return Err(Error::InvalidHeader(format!("dim[0] = {ndim}")));
    }
    let mut dims = [1usize; 3];
    for (axis, d) in dims.iter_mut().enumerate() {
        if (axis as i16) < ndim {
            let n = r.i16(42 + 2 * axis);
            if n < 1 {
                return Err(Error::InvalidHeader(format!("dim[{}] = {n}", axis + 1)));
            }
            *d = n as usize;
        }
    }
    for axis in 3..ndim as usize {
        let n = r.i16(42 + 2 * axis);
        if n > 1 {
            return Err(Error::InvalidHeader(format!(
                "dim[{}] = {n}; only 3D volumes are supported",
                axis + 1
            )));
        }
    }

    let mut spacing = [1.0f64; 3];
    for (axis, s) in spacing.iter_mut().enumerate() {
        if (axis as i16) < ndim {
            let p = r.f32(80 + 4 * axis);
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidHeader(format!("pixdim[{}] = {p}", axis + 1)));
            }
            *s = p as f64;
        }
    }

    let datatype = r.i16(70);
    let width = match datatype {
        DT_UINT8 => 1,
        DT_INT16 | DT_UINT16 => 2,
        DT_FLOAT32 => 4,
        DT_FLOAT64 => 8,
        other => return Err(Error::UnsupportedDatatype(other)),
    };

    let vox_offset = r.f32(108);
    if !(vox_offset.is_finite() && vox_offset >= 0.0) {
        return Err(Error::InvalidHeader(format!("vox_offset = {vox_offset}")));
    }
    let offset = (vox_offset as usize).max(HEADER_SIZE);
    let count = dims[0] * dims[1] * dims[2];
    let available = bytes.len().saturating_sub(offset);
    if available != count * width {
        return Err(Error::SizeMismatch {
            expected: count,
            found: available / width,
        });
    }

    let slope = r.f32(112);
    let inter = r.f32(116);
    let scale = |v: f64| -> f32 {
        if slope != 0.0 && slope.is_finite() {
            (v * slope as f64 + inter as f64) as f32
        } else {
            v as f32
        }
    };

    let payload = Reader {
        bytes: &bytes[offset..],
        endian,
    };
    let data: Vec<f32> = (0..count)
        .map(|i| {
            let at = i * width;
            let v = match datatype {
                DT_UINT8 => payload.bytes[at] as f64,
                DT_INT16 => payload.i16(at) as f64,
                DT_UINT16 => payload.u16(at) as f64,
                DT_FLOAT32 => payload.f32(at) as f64,
                _ => payload.f64(at),
            };
            scale(v)
        })
        .collect();

    Volume::new(dims, spacing, [0.0; 3], data)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use std::io::Write;

    /// Builds a little-endian single-file NIfTI-1 image.
    pub(crate) fn build(
        dims: [i16; 3],
        pixdim: [f32; 3],
        datatype: i16,
        slope: f32,
        inter: f32,
        payload: &[u8],
    ) -> Vec<u8> {
        let mut h = vec![0u8; 352];
        h[0..4].copy_from_slice(&348i32.to_le_bytes());
        h[40..42].copy_from_slice(&3i16.to_le_bytes());
        for (i, d) in dims.iter().enumerate() {
            h[42 + 2 * i..44 + 2 * i].copy_from_slice(&d.to_le_bytes());
        }
        h[70..72].copy_from_slice(&datatype.to_le_bytes());
        h[76..80].copy_from_slice(&1.0f32.to_le_bytes());
        for (i, p) in pixdim.iter().enumerate() {
            h[80 + 4 * i..84 + 4 * i].copy_from_slice(&p.to_le_bytes());
        }
        h[108..112].copy_from_slice(&352.0f32.to_le_bytes());
        h[112..116].copy_from_slice(&slope.to_le_bytes());
        h[116..120].copy_from_slice(&inter.to_le_bytes());
        h[344..348].copy_from_slice(b"n+1\0");
        h.extend_from_slice(payload);
        h
    }

    #[test]
    fn int16_with_scaling() {
        let bytes = build([1, 1, 1], [1.0; 3], DT_INT16, 2.0, 1.0, &5i16.to_le_bytes());
        let v = parse_nifti(&bytes).unwrap();
        assert_eq!(v.data(), &[11.0]);
    }

    #[test]
    fn zero_slope_means_unscaled() {
        let bytes = build([1, 1, 1], [1.0; 3], DT_INT16, 0.0, 100.0, &5i16.to_le_bytes());
        assert_eq!(parse_nifti(&bytes).unwrap().data(), &[5.0]);
    }

    #[test]
    fn all_supported_datatypes() {
        let cases: Vec<(i16, Vec<u8>)> = vec![
            (DT_UINT8, vec![200]),
            (DT_UINT16, 60000u16.to_le_bytes().to_vec()),
            (DT_INT16, (-7i16).to_le_bytes().to_vec()),
            (DT_FLOAT32, 1.5f32.to_le_bytes().to_vec()),
            (DT_FLOAT64, (-2.25f64).to_le_bytes().to_vec()),
        ];
        let expected = [200.0, 60000.0, -7.0, 1.5, -2.25];
        for ((dt, payload), want) in cases.into_iter().zip(expected) {
            let v = parse_nifti(&build([1, 1, 1], [1.0; 3], dt, 0.0, 0.0, &payload)).unwrap();
            assert_eq!(v.data(), &[want], "datatype {dt}");
        }
    }

    #[test]
    fn unsupported_datatype_names_code() {
        let bytes = build([1, 1, 1], [1.0; 3], 8, 0.0, 0.0, &[0; 4]);
        let err = parse_nifti(&bytes).unwrap_err();
        assert!(matches!(err, Error::UnsupportedDatatype(8)));
        assert!(err.to_string().contains('8'));
    }

    #[test]
    fn truncated_payload_is_mismatch() {
        let bytes = build([2, 2, 2], [1.0; 3], DT_UINT8, 0.0, 0.0, &[0; 7]);
        assert!(matches!(
            parse_nifti(&bytes),
            Err(Error::SizeMismatch { expected: 8, found: 7 })
        ));
    }

    #[test]
    fn non_finite_values_are_counted() {
        let payload: Vec<u8> = [f32::NAN, 1.0, f32::INFINITY]
            .iter()
            .flat_map(|v| v.to_le_bytes())
            .collect();
        let bytes = build([3, 1, 1], [1.0; 3], DT_FLOAT32, 0.0, 0.0, &payload);
        assert!(matches!(parse_nifti(&bytes), Err(Error::NonFinite { count: 2 })));
    }

    #[test]
    fn spacing_and_layout() {
        let payload: Vec<u8> = (0u8..24).collect();
        let v = parse_nifti(&build([2, 3, 4], [0.5, 0.75, 2.0], DT_UINT8, 0.0, 0.0, &payload))
            .unwrap();
        assert_eq!(v.dims(), [2, 3, 4]);
        assert_eq!(v.spacing(), [0.5, 0.75, 2.0]);
        assert_eq!(v.get(1, 2, 3), 23.0);
    }

    #[test]
    fn big_endian_header() {
        let mut h = vec![0u8; 352];
        h[0..4].copy_from_slice(&348i32.to_be_bytes());
        h[40..42].copy_from_slice(&3i16.to_be_bytes());
        for i in 0..3 {
            h[42 + 2 * i..44 + 2 * i].copy_from_slice(&1i16.to_be_bytes());
            h[80 + 4 * i..84 + 4 * i].copy_from_slice(&1.0f32.to_be_bytes());
        }
        h[70..72].copy_from_slice(&DT_INT16.to_be_bytes());
        h[108..112].copy_from_slice(&352.0f32.to_be_bytes());
        h[344..348].copy_from_slice(b"n+1\0");
        h.extend_from_slice(&300i16.to_be_bytes());
        assert_eq!(parse_nifti(&h).unwrap().data(), &[300.0]);
    }

    #[test]
    fn gzip_file_is_accepted() {
        let bytes = build([2, 1, 1], [1.0; 3], DT_UINT8, 0.0, 0.0, &[3, 4]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.nii.gz");
        let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        enc.write_all(&bytes).unwrap();
        fs::write(&path, enc.finish().unwrap()).unwrap();
        assert_eq!(load_nifti(&path).unwrap().data(), &[3.0, 4.0]);
    }

    #[test]
    fn rejects_bad_magic_and_short_files() {
        assert!(matches!(parse_nifti(&[0; 100]), Err(Error::InvalidHeader(_))));
        let mut bytes = build([1, 1, 1], [1.0; 3], DT_UINT8, 0.0, 0.0, &[1]);
        bytes[344..348].copy_from_slice(b"ni1\0");
        assert!(matches!(parse_nifti(&bytes), Err(Error::InvalidHeader(_))));
    }
}
