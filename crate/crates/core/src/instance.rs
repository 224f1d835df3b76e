//! Problem instances: a machine graph (node distances) and a program graph
//! (exchange intensities between processes), both dense `n x n` integer
//! matrices in the Taillard/QAPLIB text layout.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::Cost;

/// Largest order accepted by [`generate_random_instance`].
pub const MAX_GENERATED_ORDER: usize = 12;

/// Best known objective values for the `taiXXe01` benchmark set.
const BUILTIN_OPTIMA: &[(&str, Cost)] = &[
    ("tai27e01", 2558),
    ("tai45e01", 6412),
    ("tai75e01", 14488),
    ("tai125e01", 35426),
    ("tai175e01", 57540),
    ("tai343e01", 145862),
    ("tai729e01", 469650),
];

/// A pair of square weight matrices sharing one order `n`.
///
/// Both matrices are stored row-major. `distances[a][b]` is the weight of the
/// channel between machine nodes `a` and `b`; `flows[k][p]` is the exchange
/// intensity between processes `k` and `p`. Instances are immutable once
/// built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    name: String,
    n: usize,
    distances: Vec<Cost>,
    flows: Vec<Cost>,
    known_optimum: Option<Cost>,
}

impl Instance {
    /// Builds an instance from row-major matrices, checking shape, sign and
    /// zero diagonals.
    pub fn new(name: impl Into<String>, n: usize, distances: Vec<Cost>, flows: Vec<Cost>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("instance order must be positive".into()));
        }
        check_matrix("distance", n, &distances)?;
        check_matrix("flow", n, &flows)?;
        Ok(Self {
            name: name.into(),
            n,
            distances,
            flows,
            known_optimum: None,
        })
    }

    /// Attaches a known optimum `F0`.
    pub fn with_known_optimum(mut self, optimum: Option<Cost>) -> Result<Self> {
        if let Some(value) = optimum {
            if value <= 0 {
                return Err(Error::NonPositiveOptimum(value));
            }
        }
        self.known_optimum = optimum;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Order of both graphs.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn known_optimum(&self) -> Option<Cost> {
        self.known_optimum
    }

    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> Cost {
        self.distances[a * self.n + b]
    }

    #[inline]
    pub fn flow(&self, k: usize, p: usize) -> Cost {
        self.flows[k * self.n + p]
    }

    pub fn distances(&self) -> &[Cost] {
        &self.distances
    }

    pub fn flows(&self) -> &[Cost] {
        &self.flows
    }

    #[inline]
    pub(crate) fn distance_row(&self, a: usize) -> &[Cost] {
        &self.distances[a * self.n..(a + 1) * self.n]
    }

    #[inline]
    pub(crate) fn flow_row(&self, k: usize) -> &[Cost] {
        &self.flows[k * self.n..(k + 1) * self.n]
    }

    /// The same instance with the two matrices exchanged.
    pub fn with_roles_swapped(&self) -> Self {
        Self {
            name: self.name.clone(),
            n: self.n,
            distances: self.flows.clone(),
            flows: self.distances.clone(),
            known_optimum: self.known_optimum,
        }
    }

    /// Whether both matrices equal their transposes.
    pub fn is_symmetric(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| {
            (i + 1..n).all(|j| self.distance(i, j) == self.distance(j, i) && self.flow(i, j) == self.flow(j, i))
        })
    }

    /// Serializes to the text layout accepted by [`parse_instance`].
    pub fn to_qaplib_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n);
        for matrix in [&self.distances, &self.flows] {
            out.push('\n');
            for row in matrix.chunks(self.n) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        }
        out
    }

    /// Summary statistics used by `info`.
    pub fn stats(&self) -> InstanceStats {
        let summarize = |m: &[Cost]| MatrixStats {
            max: m.iter().copied().max().unwrap_or(0),
            sum: m.iter().sum(),
            nonzero: m.iter().filter(|&&v| v != 0).count(),
        };
        InstanceStats {
            n: self.n,
            symmetric: self.is_symmetric(),
            distances: summarize(&self.distances),
            flows: summarize(&self.flows),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixStats {
    pub max: Cost,
    pub sum: Cost,
    pub nonzero: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceStats {
    pub n: usize,
    pub symmetric: bool,
    pub distances: MatrixStats,
    pub flows: MatrixStats,
}

fn check_matrix(matrix: &'static str, n: usize, values: &[Cost]) -> Result<()> {
    if values.len() != n * n {
        return Err(Error::MatrixShape {
            matrix,
            n,
            expected: n * n,
            found: values.len(),
        });
    }
    if let Some(idx) = values.iter().position(|&v| v < 0) {
        return Err(Error::NegativeMatrixEntry {
            matrix,
            row: idx / n,
            col: idx % n,
        });
    }
    if let Some(i) = (0..n).find(|&i| values[i * n + i] != 0) {
        return Err(Error::NonZeroDiagonal { matrix, index: i });
    }
    Ok(())
}

/// Registry of known optimal objective values keyed by instance name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimaRegistry {
    entries: BTreeMap<String, Cost>,
}

impl Default for OptimaRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl OptimaRegistry {
    /// The compiled-in `taiXXe01` optima.
    pub fn builtin() -> Self {
        Self {
            entries: BUILTIN_OPTIMA
                .iter()
                .map(|&(name, value)| (name.to_string(), value))
                .collect(),
        }
    }

    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn get(&self, name: &str) -> Option<Cost> {
        self.entries.get(name).copied()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Cost) -> Result<()> {
        if value <= 0 {
            return Err(Error::NonPositiveOptimum(value));
        }
        self.entries.insert(name.into(), value);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Cost)> {
        self.entries.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Merges a sidecar file body: one `name value` pair per line, `#` starts
    /// a comment. Later entries override earlier ones.
    pub fn merge_sidecar(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::OptimaFile {
                    line: idx + 1,
                    message: format!("expected `name value`, found `{line}`"),
                });
            };
            let value: Cost = value.parse().map_err(|_| Error::OptimaFile {
                line: idx + 1,
                message: format!("`{value}` is not an integer"),
            })?;
            self.insert(name, value).map_err(|e| Error::OptimaFile {
                line: idx + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// Builtin registry plus `optima.txt` from `dir`, when present.
    pub fn with_sidecar_in(dir: &Path) -> Result<Self> {
        let mut registry = Self::builtin();
        let path = dir.join("optima.txt");
        if path.is_file() {
            let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            registry.merge_sidecar(&text)?;
        }
        Ok(registry)
    }
}

/// Known optimum for a builtin instance name.
pub fn known_optimum(name: &str) -> Option<Cost> {
    BUILTIN_OPTIMA
        .iter()
        .find(|(entry, _)| *entry == name)
        .map(|&(_, value)| value)
}

/// Parses the Taillard/QAPLIB layout: the order `n`, then `n*n` distances,
/// then `n*n` flows, separated by any whitespace. Token positions in errors
/// are 1-based.
pub fn parse_instance(text: &str, name: &str) -> Result<Instance> {
    parse_instance_with(text, name, &OptimaRegistry::builtin())
}

pub fn parse_instance_with(text: &str, name: &str, registry: &OptimaRegistry) -> Result<Instance> {
    let mut values = Vec::new();
    for (idx, token) in text.split_whitespace().enumerate() {
        let value: i64 = token.parse().map_err(|_| Error::MalformedToken {
            position: idx + 1,
            token: token.to_string(),
        })?;
        if idx == 0 {
            if value <= 1 {
                return Err(Error::OrderTooSmall { position: 1, n: value });
            }
        } else if value < 0 {
            return Err(Error::NegativeEntry {
                position: idx + 1,
                value,
            });
        }
        values.push(value);
    }
    let Some((&order, body)) = values.split_first() else {
        return Err(Error::WrongTokenCount { expected: 1, found: 0 });
    };
    let n = usize::try_from(order).map_err(|_| Error::OrderTooSmall { position: 1, n: order })?;
    let expected = n
        .checked_mul(n)
        .and_then(|sq| sq.checked_mul(2))
        .ok_or(Error::OrderTooSmall { position: 1, n: order })?;
    if body.len() != expected {
        return Err(Error::WrongTokenCount {
            expected,
            found: body.len(),
        });
    }
    let (distances, flows) = body.split_at(n * n);
    Instance::new(name, n, distances.to_vec(), flows.to_vec())?.with_known_optimum(registry.get(name))
}

/// Reads and parses an instance file. The instance name is the file stem and
/// an `optima.txt` next to the file extends the registry.
pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let registry = match path.parent() {
        Some(dir) => OptimaRegistry::with_sidecar_in(dir)?,
        None => OptimaRegistry::builtin(),
    };
    parse_instance_with(&text, &name, &registry)
}

/// Environment variable naming an extra directory of instance files.
pub const INSTANCE_DIR_ENV: &str = "NODEMAP_INSTANCE_DIR";

/// Resolves `query` to an instance file: `query` itself when it names a file,
/// otherwise `<dir>/<query>`, `<dir>/<query>.dat` or `<dir>/<query>.txt` for the
/// first directory in `dirs` that has one.
pub fn find_instance(query: &str, dirs: &[PathBuf]) -> Option<PathBuf> {
    let direct = PathBuf::from(query);
    if direct.is_file() {
        return Some(direct);
    }
    dirs.iter()
        .flat_map(|dir| ["", ".dat", ".txt"].map(|ext| dir.join(format!("{query}{ext}"))))
        .find(|candidate| candidate.is_file())
}

/// Symmetric random instance with zero diagonals and entries drawn uniformly
/// from `0..=max_weight`. Small orders only; used for exhaustive checks.
pub fn generate_random_instance(n: usize, max_weight: Cost, seed: u64) -> Result<Instance> {
    if !(2..=MAX_GENERATED_ORDER).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "generated instance order must be in 2..={MAX_GENERATED_ORDER}, found {n}"
        )));
    }
    if max_weight < 1 {
        return Err(Error::InvalidParameter(format!(
            "max_weight must be at least 1, found {max_weight}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symmetric = |rng: &mut ChaCha8Rng| {
        let mut m = vec![0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = rng.gen_range(0..=max_weight);
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        m
    };
    let distances = symmetric(&mut rng);
    let flows = symmetric(&mut rng);
    Instance::new(format!("rand{n}s{seed}"), n, distances, flows)
}
