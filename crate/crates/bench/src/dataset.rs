//! Dataset loaders and the synthetic ground-truth generator.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nmf_core::{DenseMatrix, Rank};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{BenchError, Result};

/// A non-negative data matrix whose columns are samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub matrix: DenseMatrix,
    /// `(rows, cols)` of the images when columns are vectorized images.
    pub image_shape: Option<(usize, usize)>,
    /// `(W*, H*)` for synthetic data.
    pub ground_truth: Option<(DenseMatrix, DenseMatrix)>,
}

impl Dataset {
    /// Keeps the first `count` columns. Ground truth is cut down to match.
    pub fn leading_columns(&self, count: usize) -> Result<Dataset> {
        let n = self.matrix.cols();
        if count == 0 || count > n {
            return Err(BenchError::Usage(format!(
                "train count {count} must lie in 1..={n}"
            )));
        }
        Ok(Dataset {
            name: self.name.clone(),
            matrix: self.matrix.leading_columns(count),
            image_shape: self.image_shape,
            ground_truth: self
                .ground_truth
                .as_ref()
                .map(|(w, h)| (w.clone(), h.leading_columns(count))),
        })
    }
}

/// Parses a headerless, comma-separated numeric matrix.
pub fn parse_csv_matrix(text: &str) -> Result<DenseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(r + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(record.len());
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| BenchError::Parse {
                line,
                col: c + 1,
                msg: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(BenchError::Parse {
                    line,
                    col: c + 1,
                    msg: "value is not finite".into(),
                });
            }
            if v < 0.0 {
                return Err(BenchError::NegativeEntry { row: rows.len(), col: c });
            }
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(BenchError::Parse {
                    line,
                    col: row.len().min(first.len()) + 1,
                    msg: format!("expected {} fields, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(BenchError::Parse {
            line: 1,
            col: 1,
            msg: "no data".into(),
        });
    }
    Ok(DenseMatrix::from_rows(&rows)?)
}

pub fn load_csv_matrix(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    Ok(Dataset {
        name: file_stem(path),
        matrix: parse_csv_matrix(&text)?,
        image_shape: None,
        ground_truth: None,
    })
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .or_else(|| path.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data".into())
}

/// A decoded greyscale image, pixels row-major and scaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<f64>,
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn token(&mut self) -> Option<&[u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self) -> Option<usize> {
        std::str::from_utf8(self.token()?).ok()?.parse().ok()
    }
}

/// Decodes a P2 (ASCII) or P5 (binary, 8- or 16-bit) PGM image.
pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<Image> {
    let unsupported = |reason: &str| BenchError::UnsupportedFormat {
        path: path.to_path_buf(),
        reason: reason.into(),
    };
    let mut header = HeaderReader { bytes, pos: 0 };
    let magic = header.token().ok_or_else(|| unsupported("empty file"))?;
    let binary = match magic {
        b"P2" => false,
        b"P5" => true,
        _ => return Err(unsupported("only P2 and P5 greymaps are supported")),
    };
    let cols = header.number().ok_or_else(|| unsupported("bad width"))?;
    let rows = header.number().ok_or_else(|| unsupported("bad height"))?;
    let maxval = header.number().ok_or_else(|| unsupported("bad maxval"))?;
    if cols == 0 || rows == 0 || maxval == 0 || maxval > 65535 {
        return Err(unsupported("dimensions and maxval must be positive, maxval ≤ 65535"));
    }
    let count = rows * cols;
    let scale = maxval as f64;
    let raw: Vec<usize> = if binary {
        // Exactly one whitespace byte separates maxval from the raster.
        let start = header.pos + 1;
        let width = if maxval > 255 { 2 } else { 1 };
        let data = bytes
            .get(start..start + count * width)
            .ok_or_else(|| unsupported("truncated raster"))?;
        if width == 1 {
            data.iter().map(|&b| b as usize).collect()
        } else {
            data.chunks_exact(2)
                .map(|p| ((p[0] as usize) << 8) | p[1] as usize)
                .collect()
        }
    } else {
        (0..count)
            .map(|_| header.number().ok_or_else(|| unsupported("truncated raster")))
            .collect::<Result<_>>()?
    };
    if raw.iter().any(|&v| v > maxval) {
        return Err(unsupported("pixel exceeds maxval"));
    }
    Ok(Image {
        rows,
        cols,
        pixels: raw.into_iter().map(|v| v as f64 / scale).collect(),
    })
}

/// Loads every `.pgm` file in `dir`, in lexicographic order, as one column
/// each (vectorized column-major).
pub fn load_pgm_dir(dir: &Path) -> Result<Dataset> {
    let entries = fs::read_dir(dir).map_err(|e| BenchError::io(dir, e))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| BenchError::io(dir, e))?.path();
        let is_pgm = path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("pgm"));
        if is_pgm && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(BenchError::Usage(format!("{}: no .pgm files", dir.display())));
    }
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(paths.len());
    let mut shape = None;
    for path in &paths {
        let bytes = fs::read(path).map_err(|e| BenchError::io(path, e))?;
        let img = decode_pgm(&bytes, path)?;
        let found = (img.rows, img.cols);
        match shape {
            None => shape = Some(found),
            Some(expected) if expected != found => {
                return Err(BenchError::MixedDimensions {
                    path: path.clone(),
                    expected,
                    found,
                })
            }
            Some(_) => {}
        }
        let column = (0..img.cols)
            .flat_map(|c| (0..img.rows).map(move |r| (r, c)))
            .map(|(r, c)| img.pixels[r * img.cols + c])
            .collect();
        columns.push(column);
    }
    Ok(Dataset {
        name: file_stem(dir),
        matrix: DenseMatrix::from_columns(&columns)?,
        image_shape: shape,
        ground_truth: None,
    })
}

/// `X = W*H* + noise·|g|` with uniform factors on `(0, 1]`, each factor entry
/// kept with probability `density`.
pub fn synth_dataset(
    m: usize,
    n: usize,
    r: usize,
    density: f64,
    noise: f64,
    seed: u64,
) -> Result<Dataset> {
    Rank::for_shape(r, m, n)?;
    if !(density > 0.0 && density <= 1.0) {
        return Err(BenchError::Usage(format!("density must lie in (0, 1], got {density}")));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(BenchError::Usage(format!("noise must be non-negative, got {noise}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factor = |rows: usize, cols: usize, rng: &mut ChaCha8Rng| {
        DenseMatrix::from_fn(rows, cols, |_, _| {
            let v = 1.0 - rng.random::<f64>();
            if density < 1.0 && rng.random::<f64>() >= density {
                0.0
            } else {
                v
            }
        })
    };
    let w = factor(m, r, &mut rng);
    let h = factor(r, n, &mut rng);
    let mut x = w.matmul(&h)?;
    if noise > 0.0 {
        for v in x.data_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *v += noise * g.abs();
        }
    }
    Ok(Dataset {
        name: format!("synth-{m}x{n}-r{r}"),
        matrix: x,
        image_shape: None,
        ground_truth: Some((w, h)),
    })
}

/// Where a dataset comes from, as written on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Csv(PathBuf),
    Pgm(PathBuf),
    Synth {
        m: usize,
        n: usize,
        r: usize,
        density: f64,
        noise: f64,
    },
}

impl DataSource {
    /// Loads or generates the data; `seed` only affects synthetic sources.
    pub fn load(&self, seed: u64) -> Result<Dataset> {
        match self {
            DataSource::Csv(path) => load_csv_matrix(path),
            DataSource::Pgm(dir) => load_pgm_dir(dir),
            &DataSource::Synth {
                m,
                n,
                r,
                density,
                noise,
            } => synth_dataset(m, n, r, density, noise, seed),
        }
    }
}

impl FromStr for DataSource {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || BenchError::Usage(format!("bad data source `{s}`; expected csv:PATH, pgm:DIR or synth:m,n,r,density,noise"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "csv" if !rest.is_empty() => Ok(DataSource::Csv(rest.into())),
            "pgm" if !rest.is_empty() => Ok(DataSource::Pgm(rest.into())),
            "synth" => {
                let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
                if parts.len() != 5 {
                    return Err(bad());
                }
                let int = |p: &str| p.parse::<usize>().map_err(|_| bad());
                let float = |p: &str| p.parse::<f64>().map_err(|_| bad());
                Ok(DataSource::Synth {
                    m: int(parts[0])?,
                    n: int(parts[1])?,
                    r: int(parts[2])?,
                    density: float(parts[3])?,
                    noise: float(parts[4])?,
                })
            }
            _ => Err(bad()),
        }
    }
}
