//! Corpus ingestion and synthetic corpora.

pub mod pgm;
pub mod synth;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageReader};
use rayon::prelude::*;

use crate::descriptor::{DescriptorConfig, FeatureMatrix, FeatureRow, Layout};
use crate::error::{Error, Result};
use crate::fsutil;
use crate::pixel_map::Raster;

pub use pgm::PgmFormat;
pub use synth::{synth_texture, synthetic_corpus, Family, SynthSpec};

/// File extensions picked up when scanning a corpus directory.
pub const IMAGE_EXTENSIONS: &[&str] = &[
    "pgm", "pnm", "ppm", "png", "bmp", "tif", "tiff", "jpg", "jpeg",
];

/// Integer luma, rounded half up.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

/// Reads an 8-bit grayscale raster. PGM is decoded natively; other formats
/// go through `image`, with color converted by [`luma`] and alpha dropped.
pub fn load_grayscale(path: &Path) -> Result<Raster> {
    let ingest = |reason: String| Error::Ingestion {
        path: path.to_path_buf(),
        reason,
    };
    let bytes = fs::read(path).map_err(|e| ingest(e.to_string()))?;
    if pgm::is_pgm(&bytes) {
        return pgm::decode(&bytes).map_err(|e| match e {
            pgm::PgmError::Depth(_) => Error::UnsupportedDepth {
                path: path.to_path_buf(),
                bits: 16,
            },
            pgm::PgmError::Truncated => ingest("file is truncated".into()),
            pgm::PgmError::Malformed(m) => ingest(m),
            pgm::PgmError::NotPgm => ingest("not a PGM file".into()),
        });
    }
    let img = ImageReader::new(std::io::Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| ingest(e.to_string()))?
        .decode()
        .map_err(|e| ingest(e.to_string()))?;
    from_dynamic(img).map_err(|bits| Error::UnsupportedDepth {
        path: path.to_path_buf(),
        bits,
    })
}

fn from_dynamic(img: DynamicImage) -> std::result::Result<Raster, u32> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageRgb8(buf) => {
            buf.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect()
        }
        DynamicImage::ImageRgba8(buf) => {
            buf.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect()
        }
        other => {
            return Err(other.color().bits_per_pixel() as u32 / other.color().channel_count() as u32)
        }
    };
    Ok(Raster::new(w, h, data).expect("decoded image dimensions are consistent"))
}

pub fn save_pgm(raster: &Raster, path: &Path, format: PgmFormat) -> Result<()> {
    fsutil::write_atomic(path, |w| pgm::encode(raster, format, w))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: String,
}

/// Labeled image list. Entries are sorted by path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusManifest {
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    /// One class per immediate subdirectory of `root`, named after it. Only
    /// files directly inside a class directory with an image extension are
    /// taken; deeper nesting and loose files in `root` are ignored.
    pub fn scan(root: &Path) -> Result<Self> {
        let read = |dir: &Path| {
            fs::read_dir(dir).map_err(|e| Error::Ingestion {
                path: dir.to_path_buf(),
                reason: e.to_string(),
            })
        };
        let mut entries = Vec::new();
        for class_dir in read(root)? {
            let class_dir = class_dir?;
            if !class_dir.file_type()?.is_dir() {
                continue;
            }
            let label = class_dir.file_name().to_string_lossy().into_owned();
            for file in read(&class_dir.path())? {
                let file = file?;
                let path = file.path();
                if file.file_type()?.is_file() && has_image_extension(&path) {
                    entries.push(ManifestEntry {
                        path,
                        label: label.clone(),
                    });
                }
            }
        }
        if entries.is_empty() {
            return Err(Error::EmptyCorpus(root.to_path_buf()));
        }
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(CorpusManifest {
            root: root.to_path_buf(),
            entries,
        })
    }

    /// Reads a `path,label` CSV. Relative paths resolve against the CSV's
    /// directory.
    pub fn load(csv_path: &Path) -> Result<Self> {
        let root = csv_path.parent().unwrap_or(Path::new("")).to_path_buf();
        let mut rdr = csv::Reader::from_path(csv_path).map_err(|e| Error::Ingestion {
            path: csv_path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let mut entries = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            if rec.len() != 2 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected path,label, found {} fields", rec.len()),
                });
            }
            entries.push(ManifestEntry {
                path: root.join(&rec[0]),
                label: rec[1].to_string(),
            });
        }
        if entries.is_empty() {
            return Err(Error::EmptyCorpus(csv_path.to_path_buf()));
        }
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(CorpusManifest { root, entries })
    }

    /// Manifest from a directory (scanned) or a CSV file (loaded).
    pub fn open(input: &Path) -> Result<Self> {
        if input.is_dir() {
            Self::scan(input)
        } else {
            Self::load(input)
        }
    }

    pub fn classes(&self) -> Vec<&str> {
        let mut c: Vec<&str> = self.entries.iter().map(|e| e.label.as_str()).collect();
        c.sort();
        c.dedup();
        c
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Path of an entry relative to the manifest root, `/`-separated.
    pub fn relative(&self, entry: &ManifestEntry) -> String {
        let rel = entry.path.strip_prefix(&self.root).unwrap_or(&entry.path);
        rel.components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let io_err = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
        w.write_record(["path", "label"]).map_err(io_err)?;
        for e in &self.entries {
            w.write_record([self.relative(e).as_str(), e.label.as_str()])
                .map_err(io_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::new();
        self.write_csv(&mut bytes)?;
        fsutil::write_atomic(path, |w| w.write_all(&bytes))?;
        Ok(())
    }
}

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Extracts features for every manifest entry. The first image that fails
/// to load aborts the run.
pub fn extract_corpus(
    manifest: &CorpusManifest,
    config: &DescriptorConfig,
) -> Result<FeatureMatrix> {
    let rows = manifest
        .entries
        .par_iter()
        .map(|e| {
            let raster = load_grayscale(&e.path)?;
            Ok(FeatureRow {
                label: e.label.clone(),
                path: manifest.relative(e),
                values: config.extract(&raster).values,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureMatrix::new(Layout::from_config(config), rows)
}

/// Features for in-memory `(label, raster)` pairs; rows are named
/// `label/index`.
pub fn extract_rasters(
    items: &[(String, Raster)],
    config: &DescriptorConfig,
) -> Result<FeatureMatrix> {
    let rows = items
        .par_iter()
        .enumerate()
        .map(|(i, (label, raster))| FeatureRow {
            label: label.clone(),
            path: format!("{label}/{i:04}"),
            values: config.extract(raster).values,
        })
        .collect();
    FeatureMatrix::new(Layout::from_config(config), rows)
}

/// Writes the synthetic corpus for `seed` under `root` as
/// `<class>/<class>-<nn>.pgm` and returns its manifest.
pub fn write_synthetic_corpus(root: &Path, seed: u64) -> Result<CorpusManifest> {
    let corpus = synthetic_corpus(seed);
    let mut counter = std::collections::HashMap::<&str, usize>::new();
    for (label, raster) in &corpus {
        let dir = root.join(label);
        fs::create_dir_all(&dir)?;
        let n = counter.entry(label.as_str()).or_insert(0);
        save_pgm(
            raster,
            &dir.join(format!("{label}-{n:02}.pgm")),
            PgmFormat::Raw,
        )?;
        *n += 1;
    }
    CorpusManifest::scan(root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{GrayImage, Luma, Rgb, RgbImage};

    #[test]
    fn luma_rounds_half_up() {
        assert_eq!(luma(0, 0, 0), 0);
        assert_eq!(luma(255, 255, 255), 255);
        for v in 0..=255u8 {
            assert_eq!(luma(v, v, v), v);
        }
        assert_eq!(luma(1, 0, 0), 0); // 0.299
        assert_eq!(luma(0, 1, 1), 1); // 0.701
        assert_eq!(luma(0, 0, 5), 1); // 0.570
        assert_eq!(luma(0, 0, 4), 0); // 0.456
        assert_eq!(luma(0, 0, 250), 29); // 28.5
    }

    #[test]
    fn loads_pgm_losslessly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pgm");
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend([0, 255, 128, 7]);
        fs::write(&path, &bytes).unwrap();
        assert_eq!(load_grayscale(&path).unwrap().as_slice(), &[0, 255, 128, 7]);

        let r = Raster::from_fn(9, 4, |x, y| (x * 29 + y * 61) as u8).unwrap();
        for fmt in [PgmFormat::Raw, PgmFormat::Plain] {
            save_pgm(&r, &path, fmt).unwrap();
            assert_eq!(load_grayscale(&path).unwrap(), r);
        }
    }

    #[test]
    fn gray_rgb_png_keeps_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        let img = RgbImage::from_fn(3, 2, |x, y| {
            let v = (x * 50 + y * 90) as u8;
            Rgb([v, v, v])
        });
        img.save(&path).unwrap();
        let r = load_grayscale(&path).unwrap();
        assert_eq!(r.as_slice(), &[0, 50, 100, 90, 140, 190]);

        let color = dir.path().join("c.png");
        RgbImage::from_pixel(1, 1, Rgb([200, 10, 60]))
            .save(&color)
            .unwrap();
        assert_eq!(
            load_grayscale(&color).unwrap().as_slice(),
            &[luma(200, 10, 60)]
        );

        let gray = dir.path().join("l.png");
        GrayImage::from_pixel(2, 1, Luma([33])).save(&gray).unwrap();
        assert_eq!(load_grayscale(&gray).unwrap().as_slice(), &[33, 33]);
    }

    #[test]
    fn sixteen_bit_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep.png");
        image::ImageBuffer::<Luma<u16>, Vec<u16>>::from_pixel(2, 2, Luma([40000]))
            .save(&path)
            .unwrap();
        assert!(matches!(
            load_grayscale(&path),
            Err(Error::UnsupportedDepth { bits: 16, .. })
        ));

        let pgm16 = dir.path().join("deep.pgm");
        fs::write(&pgm16, b"P5\n1 1\n65535\n\x01\x02").unwrap();
        assert!(matches!(
            load_grayscale(&pgm16),
            Err(Error::UnsupportedDepth { .. })
        ));
    }

    #[test]
    fn truncated_and_missing_files_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cut.pgm");
        fs::write(&path, b"P5\n4 4\n255\n\x01\x02").unwrap();
        match load_grayscale(&path) {
            Err(Error::Ingestion { path: p, .. }) => assert_eq!(p, path),
            other => panic!("unexpected {other:?}"),
        }
        let junk = dir.path().join("junk.png");
        fs::write(&junk, b"definitely not an image").unwrap();
        assert!(matches!(
            load_grayscale(&junk),
            Err(Error::Ingestion { .. })
        ));
        let err = load_grayscale(&dir.path().join("nope.pgm")).unwrap_err();
        assert!(err.to_string().contains("nope.pgm"));
    }

    fn touch_pgm(path: &Path) {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        save_pgm(&Raster::filled(2, 2, 1).unwrap(), path, PgmFormat::Raw).unwrap();
    }

    #[test]
    fn manifest_from_directories() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        touch_pgm(&root.join("b/3.pgm"));
        touch_pgm(&root.join("a/2.pgm"));
        touch_pgm(&root.join("a/1.pgm"));
        touch_pgm(&root.join("b/1.pgm"));
        touch_pgm(&root.join("b/2.pgm"));
        touch_pgm(&root.join("b/deeper/9.pgm"));
        touch_pgm(&root.join("loose.pgm"));
        fs::write(root.join("a/notes.txt"), "hi").unwrap();

        let m = CorpusManifest::scan(root).unwrap();
        assert_eq!(m.len(), 5);
        assert_eq!(m.classes(), vec!["a", "b"]);
        let rel: Vec<String> = m.entries.iter().map(|e| m.relative(e)).collect();
        assert_eq!(rel, ["a/1.pgm", "a/2.pgm", "b/1.pgm", "b/2.pgm", "b/3.pgm"]);
        assert_eq!(m, CorpusManifest::scan(root).unwrap());

        let csv_path = root.join("manifest.csv");
        m.save(&csv_path).unwrap();
        let text = fs::read_to_string(&csv_path).unwrap();
        assert!(text.starts_with("path,label\na/1.pgm,a\n"));
        let back = CorpusManifest::load(&csv_path).unwrap();
        assert_eq!(back.entries, m.entries);
    }

    #[test]
    fn empty_root_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            CorpusManifest::scan(dir.path()),
            Err(Error::EmptyCorpus(_))
        ));
        fs::create_dir(dir.path().join("empty")).unwrap();
        assert!(matches!(
            CorpusManifest::scan(dir.path()),
            Err(Error::EmptyCorpus(_))
        ));
    }

    #[test]
    fn extraction_aborts_on_a_bad_file() {
        let dir = tempfile::tempdir().unwrap();
        touch_pgm(&dir.path().join("a/ok.pgm"));
        fs::write(dir.path().join("a/bad.pgm"), b"P5\n9 9\n255\n").unwrap();
        let m = CorpusManifest::scan(dir.path()).unwrap();
        let config = DescriptorConfig::new([crate::Rule::Min], [0], [0]).unwrap();
        let err = extract_corpus(&m, &config).unwrap_err();
        assert!(err.to_string().contains("bad.pgm"), "{err}");
    }
}
