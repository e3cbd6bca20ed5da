use std::io::{Read, Write};

use byteorder::{ReadBytesExt, WriteBytesExt, LE};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{ForestModel, GnbModel, KnnModel, Model, Node, RfParams, Tree};

const MAGIC: &[u8; 8] = b"TEEGMODL";
pub const MODEL_FORMAT_VERSION: u32 = 1;

const KIND_FOREST: u8 = 1;
const KIND_KNN: u8 = 2;
const KIND_GNB: u8 = 3;
const NONE: u32 = u32::MAX;

fn u32_of(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Format(format!("{n} does not fit the model format")))
}

fn put_opt(w: &mut impl Write, v: Option<usize>) -> Result<()> {
    Ok(w.write_u32::<LE>(match v {
        Some(n) => u32_of(n)?,
        None => NONE,
    })?)
}

fn get_opt(r: &mut impl Read) -> Result<Option<usize>> {
    let v = r.read_u32::<LE>()?;
    Ok((v != NONE).then_some(v as usize))
}

fn put_vec<T: Scalar>(w: &mut impl Write, v: &[T]) -> Result<()> {
    for &x in v {
        w.write_f64::<LE>(x.as_f64())?;
    }
    Ok(())
}

fn get_vec<T: Scalar>(r: &mut impl Read, n: usize) -> Result<Vec<T>> {
    (0..n).map(|_| Ok(T::of(r.read_f64::<LE>()?))).collect()
}

fn get_len(r: &mut impl Read, cap: usize, what: &str) -> Result<usize> {
    let n = r.read_u32::<LE>()? as usize;
    if n > cap {
        return Err(Error::Format(format!("{what} count {n} exceeds {cap}")));
    }
    Ok(n)
}

/// Little-endian binary model: magic, format version, kind, class count and
/// feature width, then the kind-specific body with hyperparameters and seed.
/// Scalars are stored as f64.
pub fn save_model<T: Scalar>(m: &Model<T>, w: &mut impl Write) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LE>(MODEL_FORMAT_VERSION)?;
    let kind = match m {
        Model::Forest(_) => KIND_FOREST,
        Model::Knn(_) => KIND_KNN,
        Model::Gnb(_) => KIND_GNB,
    };
    w.write_u8(kind)?;
    w.write_u32::<LE>(u32_of(m.n_classes())?)?;
    w.write_u32::<LE>(u32_of(m.width())?)?;
    match m {
        Model::Forest(f) => {
            w.write_u64::<LE>(f.seed)?;
            let p = &f.params;
            w.write_u32::<LE>(u32_of(p.trees)?)?;
            put_opt(w, p.max_depth)?;
            w.write_u32::<LE>(u32_of(p.min_leaf)?)?;
            put_opt(w, p.max_features)?;
            w.write_u8(u8::from(p.bootstrap))?;
            w.write_u32::<LE>(u32_of(f.trees.len())?)?;
            for t in &f.trees {
                w.write_u32::<LE>(u32_of(t.nodes.len())?)?;
                for n in &t.nodes {
                    match n {
                        Node::Split { feature, threshold, left, right } => {
                            w.write_u8(0)?;
                            w.write_u32::<LE>(u32_of(*feature)?)?;
                            w.write_f64::<LE>(threshold.as_f64())?;
                            w.write_u32::<LE>(u32_of(*left)?)?;
                            w.write_u32::<LE>(u32_of(*right)?)?;
                        }
                        Node::Leaf { hist } => {
                            w.write_u8(1)?;
                            for &h in hist {
                                w.write_f64::<LE>(h)?;
                            }
                        }
                    }
                }
            }
        }
        Model::Knn(k) => {
            w.write_u32::<LE>(u32_of(k.k)?)?;
            w.write_u32::<LE>(u32_of(k.points.len())?)?;
            for (p, &l) in k.points.iter().zip(&k.labels) {
                w.write_u32::<LE>(u32_of(l)?)?;
                put_vec(w, p)?;
            }
        }
        Model::Gnb(g) => {
            put_vec(w, &g.priors)?;
            for (m, v) in g.means.iter().zip(&g.vars) {
                put_vec(w, m)?;
                put_vec(w, v)?;
            }
        }
    }
    Ok(())
}

const MAX_COUNT: usize = 1 << 28;

pub fn load_model<T: Scalar>(r: &mut impl Read) -> Result<Model<T>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a model file".into()));
    }
    let version = r.read_u32::<LE>()?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::Format(format!("model format version {version}, expected {MODEL_FORMAT_VERSION}")));
    }
    let kind = r.read_u8()?;
    let n_classes = get_len(r, 1 << 16, "class")?;
    let width = get_len(r, MAX_COUNT, "feature")?;
    let model = match kind {
        KIND_FOREST => {
            let seed = r.read_u64::<LE>()?;
            let params = RfParams {
                trees: r.read_u32::<LE>()? as usize,
                max_depth: get_opt(r)?,
                min_leaf: r.read_u32::<LE>()? as usize,
                max_features: get_opt(r)?,
                bootstrap: r.read_u8()? != 0,
            };
            let n_trees = get_len(r, MAX_COUNT, "tree")?;
            let mut trees = Vec::with_capacity(n_trees);
            for _ in 0..n_trees {
                let n_nodes = get_len(r, MAX_COUNT, "node")?;
                let mut nodes = Vec::with_capacity(n_nodes);
                for _ in 0..n_nodes {
                    nodes.push(match r.read_u8()? {
                        0 => Node::Split {
                            feature: r.read_u32::<LE>()? as usize,
                            threshold: T::of(r.read_f64::<LE>()?),
                            left: r.read_u32::<LE>()? as usize,
                            right: r.read_u32::<LE>()? as usize,
                        },
                        1 => Node::Leaf { hist: (0..n_classes).map(|_| r.read_f64::<LE>()).collect::<std::io::Result<_>>()? },
                        t => return Err(Error::Format(format!("unknown node tag {t}"))),
                    });
                }
                let tree = Tree { nodes };
                let in_range = tree.nodes.iter().all(|n| match n {
                    Node::Split { feature, .. } => *feature < width,
                    Node::Leaf { .. } => true,
                });
                if !tree.is_well_formed() || !in_range {
                    return Err(Error::Format("malformed tree".into()));
                }
                trees.push(tree);
            }
            Model::Forest(ForestModel { trees, n_classes, width, seed, params })
        }
        KIND_KNN => {
            let k = r.read_u32::<LE>()? as usize;
            let n = get_len(r, MAX_COUNT, "point")?;
            let (mut points, mut labels) = (Vec::with_capacity(n), Vec::with_capacity(n));
            for _ in 0..n {
                let l = r.read_u32::<LE>()? as usize;
                if l >= n_classes {
                    return Err(Error::Format(format!("label {l} outside {n_classes} classes")));
                }
                labels.push(l);
                points.push(get_vec(r, width)?);
            }
            Model::Knn(KnnModel { k, n_classes, width, points, labels })
        }
        KIND_GNB => {
            let priors = get_vec(r, n_classes)?;
            let (mut means, mut vars) = (Vec::new(), Vec::new());
            for _ in 0..n_classes {
                means.push(get_vec(r, width)?);
                vars.push(get_vec(r, width)?);
            }
            Model::Gnb(GnbModel { priors, means, vars })
        }
        k => return Err(Error::Format(format!("unknown model kind {k}"))),
    };
    Ok(model)
}
