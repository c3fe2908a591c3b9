//! The VOCM model container.
//!
//! Layout: magic `VOCM`, `u16` version, `u8` classifier tag, then a fixed
//! sequence of blocks, all little-endian. A text block is a `u64` byte
//! length and UTF-8 bytes. A vector block is a `u64` count and that many
//! `f64`. A matrix block is `u64` rows, `u64` cols and row-major `f64`.
//! Integers stored inside vectors are exact (below 2^53).
//!
//! Blocks in order: classifier spec (`key = value` lines), preprocess
//! config, axes, standardizer, PCA, selection mask, then the kind-specific
//! model blocks.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::features::{PcaModel, SelectionMask, Standardizer};
use crate::models::{
    ClassifierKind, ClassifierModel, ClassifierSpec, ForestModel, LogisticModel, Node, PlsModel,
    SvmFit, SvmModel, Tree, TreeModel,
};
use crate::pipeline::{FeatureChain, TrainedPipeline};
use crate::spectrum::{Axis, AxisKind};

pub const VOCM_MAGIC: [u8; 4] = *b"VOCM";
pub const VOCM_VERSION: u16 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn text(&mut self, s: &str) {
        self.u64(s.len() as u64);
        self.0.extend_from_slice(s.as_bytes());
    }

    fn vector(&mut self, v: &[f64]) {
        self.u64(v.len() as u64);
        for x in v {
            self.0.extend_from_slice(&x.to_le_bytes());
        }
    }

    fn matrix(&mut self, m: &Array2<f64>) {
        self.u64(m.nrows() as u64);
        self.u64(m.ncols() as u64);
        for x in m.iter() {
            self.0.extend_from_slice(&x.to_le_bytes());
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let left = self.bytes.len() - self.pos;
        if n > left {
            return Err(Error::TruncatedPayload {
                offset: self.pos,
                expected: n,
                found: left,
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn malformed(&self, message: impl Into<String>) -> Error {
        Error::MalformedHeader {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    /// A length that must fit in the remaining bytes at `unit` bytes each.
    fn len(&mut self, unit: usize) -> Result<usize> {
        let at = self.pos;
        let n = self.u64()?;
        let left = (self.bytes.len() - self.pos) as u64;
        match n.checked_mul(unit as u64) {
            Some(b) if b <= left => Ok(n as usize),
            _ => Err(Error::TruncatedPayload {
                offset: at,
                expected: n.saturating_mul(unit as u64).min(usize::MAX as u64) as usize,
                found: left as usize,
            }),
        }
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        Ok(self
            .take(n * 8)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn text(&mut self) -> Result<String> {
        let n = self.len(1)?;
        let at = self.pos;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::MalformedHeader {
            offset: at,
            message: "text block is not UTF-8".into(),
        })
    }

    fn vector(&mut self) -> Result<Vec<f64>> {
        let n = self.len(8)?;
        self.f64s(n)
    }

    fn matrix(&mut self) -> Result<Array2<f64>> {
        let rows = self.u64()? as usize;
        let cols = self.len(8)?;
        let need = rows
            .checked_mul(cols)
            .ok_or_else(|| self.malformed("matrix size overflows"))?;
        let data = self.f64s(need)?;
        Ok(Array2::from_shape_vec((rows, cols), data).expect("size checked"))
    }

    fn index(&mut self, v: f64, bound: usize) -> Result<usize> {
        if v >= 0.0 && v.fract() == 0.0 && (v as usize) < bound {
            Ok(v as usize)
        } else {
            Err(self.malformed(format!("index {v} out of range 0..{bound}")))
        }
    }

    fn count(&mut self, v: f64) -> Result<u64> {
        if v >= 0.0 && v.fract() == 0.0 && v < 9.0e15 {
            Ok(v as u64)
        } else {
            Err(self.malformed(format!("bad count {v}")))
        }
    }
}

fn write_tree(w: &mut Writer, t: &Tree) {
    w.u64(t.n_features as u64);
    w.vector(&t.impurity_decrease);
    let mut m = Array2::zeros((t.nodes.len(), 7));
    for (i, node) in t.nodes.iter().enumerate() {
        let row = match *node {
            Node::Leaf { counts } => [0.0, counts[0] as f64, counts[1] as f64, 0.0, 0.0, 0.0, 0.0],
            Node::Split {
                feature,
                threshold,
                left,
                right,
                counts,
            } => [
                1.0,
                counts[0] as f64,
                counts[1] as f64,
                feature as f64,
                threshold,
                left as f64,
                right as f64,
            ],
        };
        m.row_mut(i).assign(&Array1::from(row.to_vec()));
    }
    w.matrix(&m);
}

fn read_tree(r: &mut Reader) -> Result<Tree> {
    let n_features = r.u64()? as usize;
    let impurity_decrease = r.vector()?;
    let m = r.matrix()?;
    if m.ncols() != 7 || m.nrows() == 0 || impurity_decrease.len() != n_features {
        return Err(r.malformed("bad tree block"));
    }
    let n = m.nrows();
    let mut nodes = Vec::with_capacity(n);
    for row in m.rows() {
        let counts = [r.count(row[1])?, r.count(row[2])?];
        nodes.push(if row[0] == 0.0 {
            Node::Leaf { counts }
        } else if row[0] == 1.0 {
            Node::Split {
                feature: r.index(row[3], n_features)?,
                threshold: row[4],
                left: r.index(row[5], n)?,
                right: r.index(row[6], n)?,
                counts,
            }
        } else {
            return Err(r.malformed(format!("node tag {}", row[0])));
        });
    }
    // preorder: children always come after their parent, so no cycles
    for (i, node) in nodes.iter().enumerate() {
        if let Node::Split { left, right, .. } = node {
            if *left <= i || *right <= i {
                return Err(r.malformed("tree child precedes its parent"));
            }
        }
    }
    Ok(Tree {
        nodes,
        n_features,
        impurity_decrease,
    })
}

fn write_classifier(w: &mut Writer, model: &ClassifierModel) {
    match model {
        ClassifierModel::DecisionTree(m) => write_tree(w, &m.tree),
        ClassifierModel::LogisticRegression(m) => {
            w.vector(m.weights.as_slice().expect("contiguous"));
            w.vector(&[m.intercept, m.iterations as f64]);
        }
        ClassifierModel::RandomForest(m) => {
            w.u64(m.n_features as u64);
            w.vector(&m.importances);
            w.u64(m.trees.len() as u64);
            for t in &m.trees {
                write_tree(w, t);
            }
        }
        ClassifierModel::Svm(m) => {
            w.vector(&[m.gamma, m.n_features as f64, m.iterations as f64]);
            match &m.fit {
                SvmFit::Linear { weights, intercept } => {
                    w.u64(0);
                    w.vector(weights.as_slice().expect("contiguous"));
                    w.vector(&[*intercept]);
                }
                SvmFit::Poly {
                    support_vectors,
                    dual_coef,
                    intercept,
                } => {
                    w.u64(1);
                    w.matrix(support_vectors);
                    w.vector(dual_coef);
                    w.vector(&[*intercept]);
                }
            }
        }
        ClassifierModel::PlsDa(m) => {
            w.vector(m.x_mean.as_slice().expect("contiguous"));
            w.vector(&[m.y_mean]);
            w.matrix(&m.weights);
            w.matrix(&m.loadings);
            w.vector(&m.y_loadings);
        }
    }
}

fn scalar(r: &mut Reader, n: usize) -> Result<Vec<f64>> {
    let v = r.vector()?;
    if v.len() != n {
        return Err(r.malformed(format!("expected {n} scalars, found {}", v.len())));
    }
    Ok(v)
}

fn read_classifier(r: &mut Reader, spec: ClassifierSpec) -> Result<ClassifierModel> {
    Ok(match spec {
        ClassifierSpec::DecisionTree(params) => ClassifierModel::DecisionTree(TreeModel {
            params,
            tree: read_tree(r)?,
        }),
        ClassifierSpec::LogisticRegression(params) => {
            let weights = Array1::from(r.vector()?);
            let s = scalar(r, 2)?;
            ClassifierModel::LogisticRegression(LogisticModel {
                params,
                weights,
                intercept: s[0],
                iterations: r.count(s[1])? as usize,
            })
        }
        ClassifierSpec::RandomForest(params) => {
            let n_features = r.u64()? as usize;
            let importances = r.vector()?;
            let n_trees = r.len(8)?;
            let trees = (0..n_trees).map(|_| read_tree(r)).collect::<Result<Vec<_>>>()?;
            if trees.is_empty() || trees.iter().any(|t| t.n_features != n_features) {
                return Err(r.malformed("forest trees disagree on feature count"));
            }
            ClassifierModel::RandomForest(ForestModel {
                params,
                trees,
                importances,
                n_features,
            })
        }
        ClassifierSpec::Svm(params) => {
            let s = scalar(r, 3)?;
            let n_features = r.count(s[1])? as usize;
            let fit = match r.u64()? {
                0 => {
                    let weights = Array1::from(r.vector()?);
                    if weights.len() != n_features {
                        return Err(r.malformed("SVM weight length"));
                    }
                    SvmFit::Linear {
                        weights,
                        intercept: scalar(r, 1)?[0],
                    }
                }
                1 => {
                    let support_vectors = r.matrix()?;
                    let dual_coef = r.vector()?;
                    if support_vectors.ncols() != n_features || dual_coef.len() != support_vectors.nrows() {
                        return Err(r.malformed("SVM support vector shape"));
                    }
                    SvmFit::Poly {
                        support_vectors,
                        dual_coef,
                        intercept: scalar(r, 1)?[0],
                    }
                }
                t => return Err(r.malformed(format!("SVM fit tag {t}"))),
            };
            ClassifierModel::Svm(SvmModel {
                params,
                gamma: s[0],
                n_features,
                fit,
                iterations: r.count(s[2])? as usize,
            })
        }
        ClassifierSpec::PlsDa(params) => {
            let x_mean = Array1::from(r.vector()?);
            let y_mean = scalar(r, 1)?[0];
            let weights = r.matrix()?;
            let loadings = r.matrix()?;
            let y_loadings = r.vector()?;
            let d = x_mean.len();
            let a = y_loadings.len();
            if weights.dim() != (a, d) || loadings.dim() != (a, d) {
                return Err(r.malformed("PLS block shapes"));
            }
            ClassifierModel::PlsDa(PlsModel {
                params,
                x_mean,
                y_mean,
                weights,
                loadings,
                y_loadings,
            })
        }
    })
}

fn axis_values(a: &Axis) -> [f64; 3] {
    [a.start, a.step, a.count as f64]
}

fn read_axis(r: &mut Reader, name: AxisKind, v: &[f64]) -> Result<Axis> {
    let count = r.count(v[2])? as usize;
    Axis::new(name, v[0], v[1], count).map_err(|e| r.malformed(e.to_string()))
}

pub fn encode_model(p: &TrainedPipeline) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(&VOCM_MAGIC);
    w.0.extend_from_slice(&VOCM_VERSION.to_le_bytes());
    w.0.push(p.model.kind().tag());
    let spec: String = p
        .model
        .spec()
        .to_pairs()
        .into_iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect();
    w.text(&spec);
    w.text(&p.preprocess.to_string());
    let mut axes = axis_values(&p.drift_axis).to_vec();
    axes.extend(axis_values(&p.retention_axis));
    w.vector(&axes);

    let s = &p.chain.standardizer;
    w.vector(s.means.as_slice().expect("contiguous"));
    w.vector(s.stds.as_slice().expect("contiguous"));

    let pca = &p.chain.pca;
    w.u64(pca.requested_components as u64);
    w.vector(pca.mean.as_slice().expect("contiguous"));
    w.matrix(&pca.components);
    w.vector(pca.explained_variance.as_slice().expect("contiguous"));
    w.vector(pca.explained_variance_ratio.as_slice().expect("contiguous"));

    let m = &p.mask;
    w.vector(&[m.n_source_features as f64, m.clamped as u8 as f64]);
    w.vector(&m.kept_indices.iter().map(|&i| i as f64).collect::<Vec<_>>());
    w.vector(&m.scores);

    write_classifier(&mut w, &p.model);
    w.0
}

pub fn decode_model(bytes: &[u8]) -> Result<TrainedPipeline> {
    if bytes.len() < 4 || bytes[..4] != VOCM_MAGIC {
        return Err(Error::BadMagic {
            expected: VOCM_MAGIC,
            found: bytes[..bytes.len().min(4)].to_vec(),
        });
    }
    let mut r = Reader { bytes, pos: 4 };
    let version = u16::from_le_bytes(r.take(2)?.try_into().expect("2 bytes"));
    if version != VOCM_VERSION {
        return Err(Error::UnsupportedVersion { version, offset: 4 });
    }
    let tag = r.take(1)?[0];
    let kind = ClassifierKind::from_tag(tag).ok_or_else(|| Error::MalformedHeader {
        offset: 6,
        message: format!("unknown classifier tag {tag}"),
    })?;

    let spec_at = r.pos;
    let pairs: BTreeMap<String, String> = r
        .text()?
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect();
    let bad = |offset: usize| move |e: Error| Error::MalformedHeader {
        offset,
        message: e.to_string(),
    };
    let spec = ClassifierSpec::from_pairs(kind, &pairs).map_err(bad(spec_at))?;
    let pre_at = r.pos;
    let preprocess = r.text()?.parse().map_err(bad(pre_at))?;

    let axes = scalar(&mut r, 6)?;
    let drift_axis = read_axis(&mut r, AxisKind::DriftTime, &axes[..3])?;
    let retention_axis = read_axis(&mut r, AxisKind::RetentionTime, &axes[3..])?;

    let means = Array1::from(r.vector()?);
    let stds = Array1::from(r.vector()?);
    if stds.len() != means.len() {
        return Err(r.malformed("standardizer lengths differ"));
    }

    let requested_components = r.u64()? as usize;
    let mean = Array1::from(r.vector()?);
    let components = r.matrix()?;
    let explained_variance = Array1::from(r.vector()?);
    let explained_variance_ratio = Array1::from(r.vector()?);
    let k = components.nrows();
    if mean.len() != means.len()
        || components.ncols() != mean.len()
        || explained_variance.len() != k
        || explained_variance_ratio.len() != k
    {
        return Err(r.malformed("PCA block shapes"));
    }

    let head = scalar(&mut r, 2)?;
    let n_source_features = r.count(head[0])? as usize;
    if n_source_features != k {
        return Err(r.malformed("selection mask does not match PCA output"));
    }
    let kept = r.vector()?;
    let kept_indices = kept
        .iter()
        .map(|&v| r.index(v, n_source_features))
        .collect::<Result<Vec<_>>>()?;
    let scores = r.vector()?;
    if scores.len() != kept_indices.len() || kept_indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(r.malformed("selection mask indices"));
    }

    let model = read_classifier(&mut r, spec)?;
    if model.n_features() != kept_indices.len() {
        return Err(r.malformed(format!(
            "model expects {} features, mask keeps {}",
            model.n_features(),
            kept_indices.len()
        )));
    }
    if r.pos != bytes.len() {
        return Err(r.malformed(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(TrainedPipeline {
        preprocess,
        drift_axis,
        retention_axis,
        chain: FeatureChain {
            standardizer: Standardizer { means, stds },
            pca: PcaModel {
                mean,
                components,
                explained_variance,
                explained_variance_ratio,
                requested_components,
            },
        },
        mask: SelectionMask {
            kept_indices,
            scores,
            n_source_features,
            clamped: head[1] != 0.0,
        },
        model,
    })
}

pub fn write_model(pipeline: &TrainedPipeline, path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let bytes = encode_model(pipeline);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(bytes.len())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<TrainedPipeline> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}
