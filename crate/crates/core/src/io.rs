//! File formats.
//!
//! * `rawf64`: little-endian IEEE-754 doubles, row-major, no header. Shape and
//!   geometry live in a JSON sidecar next to the data file (same stem,
//!   `.json` extension), see [`RawHeader`].
//! * PGM: binary `P5` with maxval 65535. Values are rescaled affinely so the
//!   minimum maps to 0 and the maximum to 65535, rounding half up; a constant
//!   payload maps to 0. Samples are written most significant byte first as
//!   required by the Netpbm format.
//! * CSV: one header row, comma separated.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ImageGrid, Sinogram, SinogramSpec};

/// JSON sidecar describing a `rawf64` payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RawHeader {
    Image {
        nx: usize,
        ny: usize,
        extent: f64,
    },
    Sinogram {
        n_phi: usize,
        n_s: usize,
        phi_range: [f64; 2],
        s_max: f64,
    },
}

impl RawHeader {
    pub fn len(&self) -> usize {
        match *self {
            RawHeader::Image { nx, ny, .. } => nx * ny,
            RawHeader::Sinogram { n_phi, n_s, .. } => n_phi * n_s,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl From<GridSpec> for RawHeader {
    fn from(s: GridSpec) -> Self {
        RawHeader::Image {
            nx: s.nx,
            ny: s.ny,
            extent: s.extent,
        }
    }
}

impl From<SinogramSpec> for RawHeader {
    fn from(s: SinogramSpec) -> Self {
        RawHeader::Sinogram {
            n_phi: s.n_phi,
            n_s: s.n_s,
            phi_range: s.phi_range,
            s_max: s.s_max,
        }
    }
}

/// Path of the JSON sidecar belonging to a data file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn check_finite(values: &[f64], path: &Path) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "refusing to write non-finite values to {}",
            path.display()
        )))
    }
}

/// Writes `values` as raw little-endian doubles plus the JSON sidecar.
pub fn write_rawf64(path: &Path, header: &RawHeader, values: &[f64]) -> Result<()> {
    if header.len() != values.len() {
        return Err(Error::InvalidArgument(format!(
            "header describes {} values, payload has {}",
            header.len(),
            values.len()
        )));
    }
    check_finite(values, path)?;
    let mut w = create(path)?;
    for v in values {
        w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;

    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(header).expect("header serializes");
    std::fs::write(&side, json).map_err(|e| Error::io(&side, e))
}

/// Reads a `rawf64` file and its sidecar.
pub fn read_rawf64(path: &Path) -> Result<(RawHeader, Vec<f64>)> {
    let side = sidecar_path(path);
    let json = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let header: RawHeader =
        serde_json::from_str(&json).map_err(|e| Error::format(&side, e.to_string()))?;

    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() != header.len() * 8 {
        return Err(Error::format(
            path,
            format!(
                "expected {} bytes from sidecar, found {}",
                header.len() * 8,
                bytes.len()
            ),
        ));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((header, values))
}

pub fn write_image_rawf64(path: &Path, image: &ImageGrid) -> Result<()> {
    write_rawf64(path, &image.spec().into(), image.values())
}

pub fn write_sinogram_rawf64(path: &Path, sino: &Sinogram) -> Result<()> {
    write_rawf64(path, &sino.spec().into(), sino.values())
}

pub fn read_image_rawf64(path: &Path) -> Result<ImageGrid> {
    match read_rawf64(path)? {
        (RawHeader::Image { nx, ny, extent }, values) => {
            ImageGrid::from_values(GridSpec::new(nx, ny, extent)?, values)
        }
        _ => Err(Error::format(path, "sidecar does not describe an image")),
    }
}

pub fn read_sinogram_rawf64(path: &Path) -> Result<Sinogram> {
    match read_rawf64(path)? {
        (
            RawHeader::Sinogram {
                n_phi,
                n_s,
                phi_range,
                s_max,
            },
            values,
        ) => Sinogram::from_values(SinogramSpec::new(n_phi, n_s, phi_range, s_max)?, values),
        _ => Err(Error::format(path, "sidecar does not describe a sinogram")),
    }
}

/// Affine rescale to 16 bits: min → 0, max → 65535, half-up rounding.
pub fn rescale_u16(values: &[f64]) -> Vec<u16> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if values.is_empty() || !(hi > lo) {
        return vec![0; values.len()];
    }
    let k = 65535.0 / (hi - lo);
    values
        .iter()
        .map(|&v| ((v - lo) * k + 0.5).floor().clamp(0.0, 65535.0) as u16)
        .collect()
}

/// Writes 16-bit pixels, `pixels[row * width + col]`, row 0 at the top.
pub fn write_pgm16_pixels(path: &Path, width: usize, height: usize, pixels: &[u16]) -> Result<()> {
    if width * height != pixels.len() {
        return Err(Error::InvalidArgument(format!(
            "{}x{} image needs {} pixels, got {}",
            width,
            height,
            width * height,
            pixels.len()
        )));
    }
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    write!(w, "P5\n{width} {height}\n65535\n").map_err(io)?;
    for p in pixels {
        w.write_all(&p.to_be_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Rescales `values` (row 0 at the top) and writes them as a PGM.
pub fn write_pgm16(path: &Path, width: usize, height: usize, values: &[f64]) -> Result<()> {
    check_finite(values, path)?;
    write_pgm16_pixels(path, width, height, &rescale_u16(values))
}

/// Image rows in display order: largest `y` first.
pub fn image_display_rows(image: &ImageGrid) -> Vec<f64> {
    let nx = image.nx();
    image
        .values()
        .chunks(nx)
        .rev()
        .flat_map(|r| r.iter().copied())
        .collect()
}

/// Writes an image with `+y` pointing up.
pub fn write_image_pgm(path: &Path, image: &ImageGrid) -> Result<()> {
    write_pgm16(path, image.nx(), image.ny(), &image_display_rows(image))
}

/// Writes a sinogram with one angle per row, `φ_min` at the top.
pub fn write_sinogram_pgm(path: &Path, sino: &Sinogram) -> Result<()> {
    write_pgm16(path, sino.n_s(), sino.n_phi(), sino.values())
}

/// Reads a binary 16-bit PGM written by [`write_pgm16_pixels`].
pub fn read_pgm16(path: &Path) -> Result<(usize, usize, Vec<u16>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(path, "truncated PGM header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    if fields[0] != "P5" || fields[3] != "65535" {
        return Err(Error::format(path, "expected a 16-bit P5 PGM"));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::format(path, format!("bad PGM dimension `{s}`")))
    };
    let (w, h) = (parse(&fields[1])?, parse(&fields[2])?);
    let raster = bytes.get(pos..).unwrap_or_default();
    if raster.len() != w * h * 2 {
        return Err(Error::format(path, "PGM raster size does not match header"));
    }
    let pixels = raster
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    Ok((w, h, pixels))
}

/// Writes a CSV file with a header row.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let csv_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes any serializable value as pretty JSON.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| Error::format(path, e.to_string()))?;
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_degenerate_range_maps_to_zero() {
        assert_eq!(rescale_u16(&[5.0]), vec![0]);
        assert_eq!(rescale_u16(&[2.0, 2.0, 2.0]), vec![0, 0, 0]);
    }

    #[test]
    fn pgm_endpoints() {
        assert_eq!(rescale_u16(&[0.0, 1.0]), vec![0, 65535]);
        // half-up rounding: 0.5 / 65535 of the range lands on 1
        let v = rescale_u16(&[0.0, 0.5 / 65535.0, 1.0]);
        assert_eq!(v, vec![0, 1, 65535]);
    }

    #[test]
    fn pgm_file_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.pgm");
        write_pgm16(&p, 2, 1, &[0.0, 1.0]).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[..], b"P5\n2 1\n65535\n\x00\x00\xff\xff");
        let (w, h, px) = read_pgm16(&p).unwrap();
        assert_eq!((w, h, px), (2, 1, vec![0, 65535]));

        let q = dir.path().join("b.pgm");
        write_pgm16(&q, 1, 1, &[5.0]).unwrap();
        assert_eq!(read_pgm16(&q).unwrap().2, vec![0]);
    }

    #[test]
    fn rawf64_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("img.rawf64");
        let spec = GridSpec::new(3, 2, 1.5).unwrap();
        let vals = vec![0.1, -2.5e-300, 1.0 / 3.0, 7.0, f64::MIN_POSITIVE, -0.0];
        let img = ImageGrid::from_values(spec, vals.clone()).unwrap();
        write_image_rawf64(&p, &img).unwrap();
        let back = read_image_rawf64(&p).unwrap();
        assert_eq!(back.spec(), spec);
        for (a, b) in back.values().iter().zip(&vals) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let side: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("img.json")).unwrap())
                .unwrap();
        assert_eq!(side["type"], "image");
        assert_eq!(side["nx"], 3);
    }

    #[test]
    fn rawf64_rejects_wrong_kind_and_size() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.rawf64");
        let spec = SinogramSpec::new(2, 2, [0.0, 1.0], 1.0).unwrap();
        let s = Sinogram::from_values(spec, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        write_sinogram_rawf64(&p, &s).unwrap();
        assert!(read_image_rawf64(&p).is_err());
        assert_eq!(read_sinogram_rawf64(&p).unwrap(), s);
        std::fs::write(&p, [0u8; 9]).unwrap();
        assert!(matches!(read_sinogram_rawf64(&p), Err(Error::Format { .. })));
    }

    #[test]
    fn io_errors_carry_path() {
        let p = Path::new("/nonexistent-dir/x.rawf64");
        let err = write_rawf64(p, &RawHeader::Image { nx: 1, ny: 1, extent: 1.0 }, &[0.0])
            .unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.rawf64"));
    }

    #[test]
    fn csv_has_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&p, &["a", "b"], vec![vec!["1", "2"], vec!["3", "4"]]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "a,b\n1,2\n3,4\n");
    }
}
