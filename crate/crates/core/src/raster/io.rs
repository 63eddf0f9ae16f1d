//! NEXR1 raster cache and PGM export.
//!
//! NEXR1 layout, all integers and floats little-endian:
//!
//! | offset | size | field |
//! |-------:|-----:|-------|
//! | 0  | 5 | magic `NEXR1` |
//! | 5  | 32 | window `re_min, re_max, im_min, im_max` as f64 |
//! | 37 | 4 | width u32 |
//! | 41 | 4 | height u32 |
//! | 45 | 4 | max_iter u32 |
//! | 49 | 8 | escape_radius f64 |
//! | 57 | ⌈w·h/8⌉ | inside mask, row-major, bit `k` of the stream at byte `k/8`, bit `k%8` (LSB first) |

use std::io::Write;
use std::path::Path;

use super::kraster::{Grid, KRaster, Window};
use crate::error::{Error, Result};

pub const NEXR_MAGIC: &[u8; 5] = b"NEXR1";
const HEADER_LEN: usize = 57;

pub fn write_nexr(raster: &KRaster, out: &mut impl Write) -> Result<()> {
    let w = raster.window();
    let mut buf = Vec::with_capacity(HEADER_LEN + raster.mask().len() / 8 + 1);
    buf.extend_from_slice(NEXR_MAGIC);
    for v in [w.re_min, w.re_max, w.im_min, w.im_max] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(&(raster.width() as u32).to_le_bytes());
    buf.extend_from_slice(&(raster.height() as u32).to_le_bytes());
    buf.extend_from_slice(&raster.max_iter().to_le_bytes());
    buf.extend_from_slice(&raster.escape_radius().to_le_bytes());
    let mut packed = vec![0u8; raster.mask().len().div_ceil(8)];
    for (k, _) in raster.mask().iter().enumerate().filter(|(_, &b)| b) {
        packed[k / 8] |= 1 << (k % 8);
    }
    buf.extend_from_slice(&packed);
    out.write_all(&buf)?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Format {
                offset: self.bytes.len() as u64,
                reason: format!(
                    "truncated while reading {what} (need {n} bytes at {})",
                    self.pos
                ),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

pub fn read_nexr(bytes: &[u8]) -> Result<KRaster> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(NEXR_MAGIC.len(), "magic")?;
    if magic != NEXR_MAGIC {
        let offset = magic
            .iter()
            .zip(NEXR_MAGIC)
            .position(|(a, b)| a != b)
            .unwrap_or(0);
        return Err(Error::Format {
            offset: offset as u64,
            reason: "bad magic".into(),
        });
    }
    let re_min = r.f64("window")?;
    let re_max = r.f64("window")?;
    let im_min = r.f64("window")?;
    let im_max = r.f64("window")?;
    let window = Window::new(re_min, re_max, im_min, im_max).map_err(|e| Error::Format {
        offset: 5,
        reason: e.to_string(),
    })?;
    let width = r.u32("width")? as usize;
    let height = r.u32("height")? as usize;
    let max_iter = r.u32("max_iter")?;
    let escape_radius = r.f64("escape_radius")?;
    let grid = Grid::new(window, width, height).map_err(|e| Error::Format {
        offset: 37,
        reason: e.to_string(),
    })?;
    let n = width * height;
    let packed = r.take(n.div_ceil(8), "mask")?;
    if r.pos != bytes.len() {
        return Err(Error::Format {
            offset: r.pos as u64,
            reason: "trailing bytes".into(),
        });
    }
    let inside = (0..n).map(|k| packed[k / 8] >> (k % 8) & 1 == 1).collect();
    KRaster::from_mask(grid, inside, max_iter, escape_radius)
}

pub fn write_nexr_file(raster: &KRaster, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_nexr(raster, &mut f)?;
    f.flush()?;
    Ok(())
}

pub fn read_nexr_file(path: &Path) -> Result<KRaster> {
    read_nexr(&std::fs::read(path)?)
}

/// Binary PGM (P5): inside cells black, outside white. `comment` lines are
/// written into the header.
pub fn write_pgm(raster: &KRaster, out: &mut impl Write, comment: Option<&str>) -> Result<()> {
    let mut head = String::from("P5\n");
    if let Some(c) = comment {
        for line in c.lines() {
            head.push_str("# ");
            head.push_str(line);
            head.push('\n');
        }
    }
    head.push_str(&format!("{} {}\n255\n", raster.width(), raster.height()));
    out.write_all(head.as_bytes())?;
    let pixels: Vec<u8> = raster
        .mask()
        .iter()
        .map(|&b| if b { 0 } else { 255 })
        .collect();
    out.write_all(&pixels)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::QuadraticMap;
    use crate::exec::Exec;
    use crate::raster::fill_raster;
    use proptest::prelude::*;

    fn disk_raster() -> KRaster {
        let f = QuadraticMap::centered_real(0.0);
        let w = Window::new(-2.0, 2.0, -2.0, 2.0).unwrap();
        fill_raster(&f, w, 64, 64, 100, 1e3, Exec::default()).unwrap()
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let k = disk_raster();
        let mut buf = Vec::new();
        write_nexr(&k, &mut buf).unwrap();
        assert_eq!(&buf[..5], b"NEXR1");
        assert_eq!(buf.len(), HEADER_LEN + 64 * 64 / 8);
        let back = read_nexr(&buf).unwrap();
        assert_eq!(back, k);
    }

    #[test]
    fn empty_raster_roundtrip() {
        let g = Grid::new(Window::new(0.0, 1.0, 0.0, 1.0).unwrap(), 13, 7).unwrap();
        let k = KRaster::from_mask(g, vec![false; 91], 5, 4.0).unwrap();
        let mut buf = Vec::new();
        write_nexr(&k, &mut buf).unwrap();
        assert_eq!(read_nexr(&buf).unwrap(), k);
    }

    #[test]
    fn truncated_file_reports_offset() {
        let mut buf = Vec::new();
        write_nexr(&disk_raster(), &mut buf).unwrap();
        buf.truncate(100);
        match read_nexr(&buf) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 100),
            other => panic!("{other:?}"),
        }
        match read_nexr(&buf[..20]) {
            Err(Error::Format { offset, reason }) => {
                assert_eq!(offset, 20);
                assert!(reason.contains("window"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn corrupt_magic() {
        let mut buf = Vec::new();
        write_nexr(&disk_raster(), &mut buf).unwrap();
        buf[3] = b'X';
        match read_nexr(&buf) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pgm_header() {
        let k = disk_raster();
        let mut buf = Vec::new();
        write_pgm(&k, &mut buf, Some("seed=1")).unwrap();
        assert!(buf.starts_with(b"P5\n# seed=1\n64 64\n255\n"));
        assert_eq!(buf.len(), "P5\n# seed=1\n64 64\n255\n".len() + 64 * 64);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn roundtrip_random_masks(w in 1usize..40, h in 1usize..40, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = Grid::new(Window::new(-1.0, 2.0, -0.5, 0.25).unwrap(), w, h).unwrap();
            let k = KRaster::from_mask(g, (0..w * h).map(|_| rng.gen()).collect(), 77, 12.5).unwrap();
            let mut buf = Vec::new();
            write_nexr(&k, &mut buf).unwrap();
            prop_assert_eq!(read_nexr(&buf).unwrap(), k);
        }
    }
}
