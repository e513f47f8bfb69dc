//! Dataset ingestion, synthetic data, and the on-disk text formats.
//!
//! Matrix files are UTF-8 text: a `rows cols` header line followed by one
//! line per row of space-separated values printed with 17 significant
//! digits. Manifests list one image set per line as `path<TAB>id[<TAB>label]`;
//! blank lines and lines starting with `#` are ignored. An optional
//! `# frame <m> <n>` comment records the frame shape.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grassmann::{exp_map, GrassmannPoint, TangentVector};
use crate::numerics::Matrix;

/// A set of same-sized grayscale frames (an image set or video clip).
#[derive(Debug, Clone)]
pub struct ImageSet {
    pub frames: Vec<Matrix>,
    pub id: String,
    pub label: Option<usize>,
}

impl ImageSet {
    pub fn new(frames: Vec<Matrix>, id: impl Into<String>, label: Option<usize>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::invalid("image set has no frames"))?;
        let shape = first.shape();
        if let Some(bad) = frames.iter().position(|f| f.shape() != shape) {
            return Err(Error::invalid(format!(
                "frame {bad} has shape {:?}, expected {shape:?}",
                frames[bad].shape()
            )));
        }
        Ok(Self {
            frames,
            id: id.into(),
            label,
        })
    }

    /// Split the columns of a stacked matrix `[vec(Y_1), ..., vec(Y_M)]` into
    /// single-column frames.
    pub fn from_stacked(gamma: &Matrix, id: impl Into<String>, label: Option<usize>) -> Result<Self> {
        let frames = gamma
            .column_iter()
            .map(|c| Matrix::from_column_slice(c.len(), 1, c.as_slice()))
            .collect();
        Self::new(frames, id, label)
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// The `mn x M` matrix whose columns are the vectorized frames.
    pub fn stacked(&self, normalize: bool) -> Matrix {
        let len = self.frames[0].len();
        let mut gamma = Matrix::zeros(len, self.frames.len());
        for (c, frame) in self.frames.iter().enumerate() {
            let mut col = gamma.column_mut(c);
            col.copy_from_slice(frame.as_slice());
            if normalize {
                let mean = col.mean();
                col.add_scalar_mut(-mean);
                let var = col.norm_squared() / len as f64;
                if var > 0.0 {
                    col /= var.sqrt();
                }
            }
        }
        gamma
    }
}

/// Span of the leading `p` left singular vectors of the stacked frames.
pub fn image_set_to_point(set: &ImageSet, p: usize, normalize: bool) -> Result<GrassmannPoint> {
    GrassmannPoint::from_basis(&set.stacked(normalize), p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub clusters: usize,
    pub per_cluster: usize,
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    /// Scale of the tangent-space perturbation around each center.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 || self.per_cluster == 0 {
            return Err(Error::invalid("synthetic spec: need at least one cluster and one member"));
        }
        if self.subspace_dim == 0 || self.subspace_dim > self.ambient_dim {
            return Err(Error::invalid(format!(
                "synthetic spec: need 1 <= p <= d, got p={} d={}",
                self.subspace_dim, self.ambient_dim
            )));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::invalid("synthetic spec: noise_sigma must be >= 0"));
        }
        Ok(())
    }
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Uniformly oriented horizontal direction of unit Frobenius norm at `x`.
fn random_direction<'a>(x: &'a GrassmannPoint, rng: &mut ChaCha8Rng) -> Result<TangentVector<'a>> {
    loop {
        let g = gaussian_matrix(x.ambient_dim(), x.subspace_dim(), rng);
        let h = TangentVector::project(x, &g)?;
        let norm = h.norm_sq().sqrt();
        if norm > 1e-12 {
            return Ok(h.scaled(1.0 / norm));
        }
    }
}

/// Clustered points: random centers, each member pushed along a random
/// geodesic from its center by a length drawn from `|N(0, sigma^2)|`.
/// Points are ordered cluster by cluster.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<(Vec<GrassmannPoint>, Vec<usize>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (d, p) = (spec.ambient_dim, spec.subspace_dim);

    let mut points = Vec::with_capacity(spec.clusters * spec.per_cluster);
    let mut labels = Vec::with_capacity(points.capacity());
    for cluster in 0..spec.clusters {
        let center = GrassmannPoint::from_basis(&gaussian_matrix(d, p, &mut rng), p)?;
        for _ in 0..spec.per_cluster {
            let dir = random_direction(&center, &mut rng)?;
            let z: f64 = StandardNormal.sample(&mut rng);
            let length = (spec.noise_sigma * z).abs();
            let member = if length == 0.0 {
                center.clone()
            } else {
                exp_map(&center, &dir.scaled(length))?
            };
            points.push(member);
            labels.push(cluster);
        }
    }
    Ok((points, labels))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn format_matrix(m: &Matrix) -> String {
    let mut s = format!("{} {}\n", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

pub fn parse_matrix(text: &str, path: &Path) -> Result<Matrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (header_no, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, "empty file, expected \"rows cols\" header"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let (rows, cols) = match dims.as_slice() {
        [r, c] => (
            r.parse::<usize>()
                .map_err(|_| parse_error(path, header_no, format!("bad row count {r:?}")))?,
            c.parse::<usize>()
                .map_err(|_| parse_error(path, header_no, format!("bad column count {c:?}")))?,
        ),
        _ => return Err(parse_error(path, header_no, "expected header \"rows cols\"")),
    };
    if rows == 0 || cols == 0 {
        return Err(parse_error(path, header_no, "matrix dimensions must be positive"));
    }

    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if seen == rows {
            return Err(parse_error(path, no, format!("more than {rows} rows")));
        }
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_error(path, no, format!("bad number {tok:?}")))?;
            if !v.is_finite() {
                return Err(parse_error(path, no, format!("non-finite value {tok:?}")));
            }
            data.push(v);
        }
        let got = data.len() - before;
        if got != cols {
            return Err(parse_error(path, no, format!("expected {cols} values, found {got}")));
        }
        seen += 1;
    }
    if seen != rows {
        let last = text.lines().count();
        return Err(parse_error(path, last, format!("expected {rows} rows, found {seen}")));
    }
    Ok(Matrix::from_row_slice(rows, cols, &data))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, path)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(format_matrix(m).as_bytes())
        .map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub id: String,
    pub label: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub frame_shape: Option<(usize, usize)>,
    /// Directory relative entry paths are resolved against.
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        let mut paths = HashSet::new();
        for e in &self.entries {
            if !paths.insert(&e.path) {
                return Err(Error::Validation(format!("duplicate path {}", e.path.display())));
            }
        }
        let labeled = self.entries.iter().filter(|e| e.label.is_some()).count();
        if labeled != 0 && labeled != self.entries.len() {
            return Err(Error::Validation("labels must be given for all entries or none".into()));
        }
        if labeled > 0 {
            let used: HashSet<usize> = self.entries.iter().filter_map(|e| e.label).collect();
            let max = used.iter().copied().max().unwrap_or(0);
            if used.len() != max + 1 {
                return Err(Error::Validation(format!(
                    "labels must form a contiguous range from 0 (found {} distinct, max {max})",
                    used.len()
                )));
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> Option<Vec<usize>> {
        self.entries.iter().map(|e| e.label).collect()
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        if entry.path.is_absolute() {
            entry.path.clone()
        } else {
            self.base_dir.join(&entry.path)
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some((m, n)) = self.frame_shape {
            s.push_str(&format!("# frame {m} {n}\n"));
        }
        for e in &self.entries {
            s.push_str(&format!("{}\t{}", e.path.display(), e.id));
            if let Some(l) = e.label {
                s.push_str(&format!("\t{l}"));
            }
            s.push('\n');
        }
        s
    }
}

pub fn parse_manifest(text: &str, path: &Path) -> Result<DatasetManifest> {
    let mut manifest = DatasetManifest {
        base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        ..Default::default()
    };
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let words: Vec<&str> = comment.split_whitespace().collect();
            if let ["frame", m, n] = words.as_slice() {
                let m = m.parse().map_err(|_| parse_error(path, no, "bad frame height"))?;
                let n = n.parse().map_err(|_| parse_error(path, no, "bad frame width"))?;
                manifest.frame_shape = Some((m, n));
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let (p, id, label) = match fields.as_slice() {
            [p, id] => (*p, *id, None),
            [p, id, l] if l.trim().is_empty() => (*p, *id, None),
            [p, id, l] => {
                let label = l
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| parse_error(path, no, format!("bad label {l:?}")))?;
                (*p, *id, Some(label))
            }
            _ => return Err(parse_error(path, no, "expected path<TAB>id[<TAB>label]")),
        };
        if p.is_empty() || id.is_empty() {
            return Err(parse_error(path, no, "empty path or id"));
        }
        manifest.entries.push(ManifestEntry {
            path: PathBuf::from(p),
            id: id.to_string(),
            label,
        });
    }
    manifest.validate()?;
    Ok(manifest)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text, path)
}

/// Read every set listed in the manifest (each file holds the stacked frames
/// as columns) and map it to a Grassmann point.
pub fn load_points(manifest: &DatasetManifest, p: usize, normalize: bool) -> Result<Vec<GrassmannPoint>> {
    manifest
        .entries
        .iter()
        .map(|e| {
            let gamma = read_matrix(manifest.resolve(e))?;
            let set = ImageSet::from_stacked(&gamma, e.id.clone(), e.label)?;
            image_set_to_point(&set, p, normalize)
        })
        .collect()
}
