use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::Dataset;
use super::forest::{fit_forest, Forest, Node, Tree};
use super::knn::Knn;
use super::standardize::Standardizer;
use super::svm::{fit_svm, BinaryMachine, Svm};
use super::{ClassLabel, Scheme};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    RandomForest,
    Knn,
    Svm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::RandomForest, ModelKind::Knn, ModelKind::Svm];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::RandomForest => "random_forest",
            ModelKind::Knn => "knn",
            ModelKind::Svm => "svm",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    fn code(self) -> u8 {
        match self {
            ModelKind::RandomForest => 0,
            ModelKind::Knn => 1,
            ModelKind::Svm => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    pub n_trees: u32,
    pub min_leaf: u32,
    pub k: u32,
    pub svm_c: f64,
    pub svm_tol: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self { n_trees: 100, min_leaf: 2, k: 6, svm_c: 1.0, svm_tol: 1e-3 }
    }
}

/// Minimum records per present class for forest and SVM training.
pub const MIN_PER_CLASS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelState {
    RandomForest(Forest),
    Knn(Knn),
    Svm(Svm),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub kind: ModelKind,
    pub scheme: Scheme,
    pub hyper: Hyperparameters,
    pub standardizer: Standardizer,
    pub state: ModelState,
    /// Free text describing how the model was produced; stored verbatim.
    pub provenance: String,
}

impl ModelArtifact {
    pub fn dim(&self) -> usize {
        self.standardizer.dim()
    }

    /// Class index into `scheme.labels()`.
    pub fn predict_index(&self, features: &[f64]) -> Result<usize> {
        if features.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: features.len() });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature);
        }
        let z = self.standardizer.apply(features);
        Ok(match &self.state {
            ModelState::RandomForest(f) => f.predict(&z),
            ModelState::Knn(k) => k.predict(&z),
            ModelState::Svm(s) => s.predict(&z),
        })
    }

    pub fn predict(&self, features: &[f64]) -> Result<ClassLabel> {
        Ok(self.scheme.labels()[self.predict_index(features)?])
    }
}

/// Trains on a raw feature matrix; `y` holds indices into
/// `scheme.labels()`.
pub fn train_matrix(kind: ModelKind, scheme: Scheme, x: &[Vec<f64>], y: &[usize], hyper: &Hyperparameters, seed: u64) -> Result<ModelArtifact> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let n_classes = scheme.n_classes();
    let d = x.first().map_or(0, |r| r.len());
    if d == 0 {
        return Err(Error::InvalidParameter("no features"));
    }
    if let Some(r) = x.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: r.len() });
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteFeature);
    }
    if y.iter().any(|&c| c >= n_classes) {
        return Err(Error::InvalidParameter("class index out of range"));
    }
    let mut counts = alloc::vec![0usize; n_classes];
    for &c in y {
        counts[c] += 1;
    }
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::SingleClass);
    }
    if kind != ModelKind::Knn {
        if let Some((class, &count)) = counts.iter().enumerate().find(|(_, &c)| c > 0 && c < MIN_PER_CLASS) {
            return Err(Error::TooFewPerClass { class, count, needed: MIN_PER_CLASS });
        }
    }
    if hyper.k == 0 || hyper.n_trees == 0 || !(hyper.svm_c > 0.0) || !(hyper.svm_tol > 0.0) {
        return Err(Error::InvalidParameter("hyperparameters must be positive"));
    }
    let standardizer = Standardizer::fit(x);
    let z = standardizer.apply_all(x);
    let state = match kind {
        ModelKind::RandomForest => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            ModelState::RandomForest(fit_forest(&z, y, n_classes, hyper.n_trees as usize, hyper.min_leaf as usize, &mut rng))
        }
        ModelKind::Knn => ModelState::Knn(Knn { k: hyper.k as usize, n_classes, x: z, y: y.to_vec() }),
        ModelKind::Svm => ModelState::Svm(fit_svm(&z, y, n_classes, hyper.svm_c, hyper.svm_tol)),
    };
    Ok(ModelArtifact { kind, scheme, hyper: *hyper, standardizer, state, provenance: String::new() })
}

pub fn train(kind: ModelKind, dataset: &Dataset, hyper: &Hyperparameters, seed: u64) -> Result<ModelArtifact> {
    train_matrix(kind, dataset.scheme, &dataset.feature_matrix(), &dataset.label_indices(), hyper, seed)
}

pub fn predict(model: &ModelArtifact, features: &[f64]) -> Result<ClassLabel> {
    model.predict(features)
}

// ---------------------------------------------------------------------------
// Binary artifact: "TCM1", u32 version, length-prefixed provenance text,
// then little-endian fields.

const MAGIC: &[u8; 4] = b"TCM1";
pub const FORMAT_VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn len(&mut self, v: usize) {
        self.u32(u32::try_from(v).expect("collection fits in u32"));
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s(&mut self, v: &[f64]) {
        self.len(v.len());
        v.iter().for_each(|&x| self.f64(x));
    }
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        if self.0.len() < N {
            return Err(Error::ModelFormat("truncated"));
        }
        let (head, rest) = self.0.split_at(N);
        self.0 = rest;
        Ok(head.try_into().expect("length checked"))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn len(&mut self) -> Result<usize> {
        let n = self.u32()? as usize;
        // every element occupies at least one byte
        if n > self.0.len() {
            return Err(Error::ModelFormat("length exceeds payload"));
        }
        Ok(n)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.len()?;
        (0..n).map(|_| self.f64()).collect()
    }
    fn class(&mut self, n_classes: usize) -> Result<usize> {
        let c = self.u32()? as usize;
        if c >= n_classes {
            return Err(Error::ModelFormat("class index out of range"));
        }
        Ok(c)
    }
}

impl ModelArtifact {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(MAGIC);
        w.u32(FORMAT_VERSION);
        w.len(self.provenance.len());
        w.0.extend_from_slice(self.provenance.as_bytes());
        w.u8(self.kind.code());
        w.u8(match self.scheme {
            Scheme::ThreeClass => 3,
            Scheme::FourClass => 4,
        });
        w.u32(self.hyper.n_trees);
        w.u32(self.hyper.min_leaf);
        w.u32(self.hyper.k);
        w.f64(self.hyper.svm_c);
        w.f64(self.hyper.svm_tol);
        w.f64s(&self.standardizer.mean);
        w.f64s(&self.standardizer.std);
        match &self.state {
            ModelState::RandomForest(f) => {
                w.len(f.trees.len());
                for t in &f.trees {
                    w.len(t.nodes.len());
                    for n in &t.nodes {
                        match *n {
                            Node::Leaf { class } => {
                                w.u8(0);
                                w.u32(class as u32);
                            }
                            Node::Split { feature, threshold, left, right } => {
                                w.u8(1);
                                w.u32(feature as u32);
                                w.f64(threshold);
                                w.u32(left);
                                w.u32(right);
                            }
                        }
                    }
                }
            }
            ModelState::Knn(k) => {
                w.len(k.x.len());
                for (row, &c) in k.x.iter().zip(&k.y) {
                    w.u32(c as u32);
                    row.iter().for_each(|&v| w.f64(v));
                }
            }
            ModelState::Svm(s) => {
                w.f64(s.gamma);
                w.len(s.machines.len());
                for m in &s.machines {
                    w.u32(m.positive as u32);
                    w.u32(m.negative as u32);
                    w.f64(m.rho);
                    w.len(m.support.len());
                    for (sv, &c) in m.support.iter().zip(&m.coef) {
                        w.f64(c);
                        sv.iter().for_each(|&v| w.f64(v));
                    }
                }
            }
        }
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader(bytes);
        if &r.take::<4>()? != MAGIC {
            return Err(Error::ModelFormat("bad magic"));
        }
        if r.u32()? != FORMAT_VERSION {
            return Err(Error::ModelFormat("unsupported version"));
        }
        let n = r.len()?;
        let (text, rest) = r.0.split_at(n);
        r.0 = rest;
        let provenance = String::from_utf8(text.to_vec()).map_err(|_| Error::ModelFormat("provenance is not UTF-8"))?;
        let kind = match r.u8()? {
            0 => ModelKind::RandomForest,
            1 => ModelKind::Knn,
            2 => ModelKind::Svm,
            _ => return Err(Error::ModelFormat("unknown model kind")),
        };
        let scheme = match r.u8()? {
            3 => Scheme::ThreeClass,
            4 => Scheme::FourClass,
            _ => return Err(Error::ModelFormat("unknown scheme")),
        };
        let n_classes = scheme.n_classes();
        let hyper = Hyperparameters { n_trees: r.u32()?, min_leaf: r.u32()?, k: r.u32()?, svm_c: r.f64()?, svm_tol: r.f64()? };
        let mean = r.f64s()?;
        let std = r.f64s()?;
        let d = mean.len();
        if std.len() != d || d == 0 {
            return Err(Error::ModelFormat("standardizer dimension"));
        }
        let read_row = |r: &mut Reader| -> Result<Vec<f64>> { (0..d).map(|_| r.f64()).collect() };
        let state = match kind {
            ModelKind::RandomForest => {
                let n_trees = r.len()?;
                let mut trees = Vec::with_capacity(n_trees);
                for _ in 0..n_trees {
                    let n_nodes = r.len()?;
                    let mut nodes = Vec::with_capacity(n_nodes);
                    for _ in 0..n_nodes {
                        nodes.push(match r.u8()? {
                            0 => Node::Leaf { class: r.class(n_classes)? as u16 },
                            1 => {
                                let feature = r.u32()?;
                                let threshold = r.f64()?;
                                let (left, right) = (r.u32()?, r.u32()?);
                                if feature as usize >= d || left as usize >= n_nodes || right as usize >= n_nodes {
                                    return Err(Error::ModelFormat("tree node out of range"));
                                }
                                Node::Split { feature: feature as u16, threshold, left, right }
                            }
                            _ => return Err(Error::ModelFormat("unknown tree node")),
                        });
                    }
                    // children always follow their parent, so prediction terminates
                    let ordered = nodes.iter().enumerate().all(|(i, n)| match *n {
                        Node::Split { left, right, .. } => left as usize > i && right as usize > i,
                        Node::Leaf { .. } => true,
                    });
                    if nodes.is_empty() || !ordered {
                        return Err(Error::ModelFormat("malformed tree"));
                    }
                    trees.push(Tree { nodes });
                }
                ModelState::RandomForest(Forest { n_classes, trees })
            }
            ModelKind::Knn => {
                let n = r.len()?;
                let mut x = Vec::with_capacity(n);
                let mut y = Vec::with_capacity(n);
                for _ in 0..n {
                    y.push(r.class(n_classes)?);
                    x.push(read_row(&mut r)?);
                }
                if n == 0 {
                    return Err(Error::ModelFormat("empty neighbour set"));
                }
                ModelState::Knn(Knn { k: hyper.k as usize, n_classes, x, y })
            }
            ModelKind::Svm => {
                let gamma = r.f64()?;
                let n_machines = r.len()?;
                let mut machines = Vec::with_capacity(n_machines);
                for _ in 0..n_machines {
                    let positive = r.class(n_classes)?;
                    let negative = r.class(n_classes)?;
                    let rho = r.f64()?;
                    let n_sv = r.len()?;
                    let mut support = Vec::with_capacity(n_sv);
                    let mut coef = Vec::with_capacity(n_sv);
                    for _ in 0..n_sv {
                        coef.push(r.f64()?);
                        support.push(read_row(&mut r)?);
                    }
                    machines.push(BinaryMachine { positive, negative, support, coef, rho });
                }
                ModelState::Svm(Svm { n_classes, gamma, machines })
            }
        };
        if !r.0.is_empty() {
            return Err(Error::ModelFormat("trailing bytes"));
        }
        Ok(ModelArtifact { kind, scheme, hyper, standardizer: Standardizer { mean, std }, state, provenance })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clusters() -> (Vec<Vec<f64>>, Vec<usize>) {
        let x = (0..100).map(|i| alloc::vec![if i < 50 { -1.0 } else { 1.0 }]).collect();
        let y = (0..100).map(|i| if i < 50 { 0 } else { 2 }).collect();
        (x, y)
    }

    #[test]
    fn all_kinds_fit_separable_clusters() {
        let (x, y) = clusters();
        for kind in ModelKind::ALL {
            let m = train_matrix(kind, Scheme::ThreeClass, &x, &y, &Hyperparameters::default(), 3).unwrap();
            for (xi, &yi) in x.iter().zip(&y) {
                assert_eq!(m.predict_index(xi).unwrap(), yi, "{kind:?}");
            }
            assert_eq!(m.predict(&[-1.0]).unwrap(), ClassLabel::Cooler);
            assert_eq!(m.predict(&[1.0, 2.0]), Err(Error::DimensionMismatch { expected: 1, got: 2 }));
        }
    }

    #[test]
    fn guards() {
        let x = alloc::vec![alloc::vec![0.0]; 20];
        let y = alloc::vec![1; 20];
        assert_eq!(train_matrix(ModelKind::Knn, Scheme::ThreeClass, &x, &y, &Hyperparameters::default(), 0), Err(Error::SingleClass));
        let mut y = alloc::vec![1; 20];
        y[0] = 0;
        assert_eq!(
            train_matrix(ModelKind::RandomForest, Scheme::ThreeClass, &x, &y, &Hyperparameters::default(), 0),
            Err(Error::TooFewPerClass { class: 0, count: 1, needed: 10 })
        );
        let mut x = x;
        x[3][0] = f64::NAN;
        assert_eq!(train_matrix(ModelKind::Knn, Scheme::ThreeClass, &x, &y, &Hyperparameters::default(), 0), Err(Error::NonFiniteFeature));
    }

    #[test]
    fn codec_round_trip_and_rejects_garbage() {
        let (x, y) = clusters();
        for kind in ModelKind::ALL {
            let m = train_matrix(kind, Scheme::ThreeClass, &x, &y, &Hyperparameters::default(), 9).unwrap();
            let bytes = m.to_bytes();
            assert_eq!(&bytes[..4], b"TCM1");
            assert_eq!(ModelArtifact::from_bytes(&bytes).unwrap(), m);
            assert!(ModelArtifact::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        }
        assert_eq!(ModelArtifact::from_bytes(b"NOPE\x01\0\0\0"), Err(Error::ModelFormat("bad magic")));
    }
}
