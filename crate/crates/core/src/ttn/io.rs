//! Self-describing binary container for networks.
//!
//! Layout (little endian): magic `TTNF`, `u32` version, `u8` scalar kind
//! (0 real, 1 complex), `u64` vertex count followed by `(var, digit)` pairs,
//! `u64` edge count followed by vertex-position pairs, then per vertex the
//! tensor: `u64` rank, `(u8 kind, u64 id, u64 dim)` per index, `u64` value
//! count and the row-major payload (complex values as `re, im`).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;

use super::{NetworkStats, TreeTensorNetwork};
use crate::error::{Error, Result};
use crate::scalar::{Scalar, ScalarKind};
use crate::tensor::{DenseTensor, Index, IndexId};
use crate::topology::{DigitId, GridPoint, LabeledTree};

const MAGIC: &[u8; 4] = b"TTNF";
const VERSION: u32 = 1;

/// A network over either scalar field, as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyNetwork {
    Real(TreeTensorNetwork<f64>),
    Complex(TreeTensorNetwork<Complex64>),
}

impl From<TreeTensorNetwork<f64>> for AnyNetwork {
    fn from(n: TreeTensorNetwork<f64>) -> Self {
        AnyNetwork::Real(n)
    }
}

impl From<TreeTensorNetwork<Complex64>> for AnyNetwork {
    fn from(n: TreeTensorNetwork<Complex64>) -> Self {
        AnyNetwork::Complex(n)
    }
}

impl AnyNetwork {
    pub fn kind(&self) -> ScalarKind {
        match self {
            AnyNetwork::Real(_) => ScalarKind::Real,
            AnyNetwork::Complex(_) => ScalarKind::Complex,
        }
    }

    pub fn tree(&self) -> &LabeledTree {
        match self {
            AnyNetwork::Real(n) => n.tree(),
            AnyNetwork::Complex(n) => n.tree(),
        }
    }

    pub fn stats(&self) -> NetworkStats {
        match self {
            AnyNetwork::Real(n) => n.stats(),
            AnyNetwork::Complex(n) => n.stats(),
        }
    }

    pub fn max_bond(&self) -> usize {
        self.stats().max_bond
    }

    pub fn evaluate(&self, p: &GridPoint) -> Result<Complex64> {
        match self {
            AnyNetwork::Real(n) => n.evaluate(p).map(|x| Complex64::new(x, 0.0)),
            AnyNetwork::Complex(n) => n.evaluate(p),
        }
    }

    pub fn truncate(&self, chi_max: usize, tol: f64) -> Result<Self> {
        Ok(match self {
            AnyNetwork::Real(n) => AnyNetwork::Real(n.truncate(chi_max, tol)?),
            AnyNetwork::Complex(n) => AnyNetwork::Complex(n.truncate(chi_max, tol)?),
        })
    }

    pub fn into_complex(self) -> TreeTensorNetwork<Complex64> {
        match self {
            AnyNetwork::Real(n) => n.to_complex(),
            AnyNetwork::Complex(n) => n,
        }
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        match self {
            AnyNetwork::Real(n) => write_network(n, w),
            AnyNetwork::Complex(n) => write_network(n, w),
        }
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse("not a network file".into()));
        }
        let version = r.read_u32::<LE>()?;
        if version != VERSION {
            return Err(Error::Parse(format!("unsupported version {version}")));
        }
        match r.read_u8()? {
            0 => Ok(AnyNetwork::Real(read_body(r)?)),
            1 => Ok(AnyNetwork::Complex(read_body(r)?)),
            k => Err(Error::Parse(format!("unknown scalar kind {k}"))),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r)
    }
}

fn write_network<T: Scalar, W: Write>(net: &TreeTensorNetwork<T>, w: &mut W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LE>(VERSION)?;
    w.write_u8(match T::KIND {
        ScalarKind::Real => 0,
        ScalarKind::Complex => 1,
    })?;
    let tree = net.tree();
    w.write_u64::<LE>(tree.len() as u64)?;
    for d in tree.vertices() {
        w.write_u64::<LE>(d.var as u64)?;
        w.write_u64::<LE>(d.digit as u64)?;
    }
    w.write_u64::<LE>(tree.edges().len() as u64)?;
    for &(a, b) in tree.edges() {
        w.write_u64::<LE>(a as u64)?;
        w.write_u64::<LE>(b as u64)?;
    }
    for t in net.tensors() {
        w.write_u64::<LE>(t.rank() as u64)?;
        for idx in t.indices() {
            let (kind, id) = match idx.id {
                IndexId::Site(i) => (0u8, i),
                IndexId::Bond(i) => (1, i),
                IndexId::Aux(i) => (2, i),
            };
            w.write_u8(kind)?;
            w.write_u64::<LE>(id as u64)?;
            w.write_u64::<LE>(idx.dim as u64)?;
        }
        w.write_u64::<LE>(t.len() as u64)?;
        for x in t.data() {
            let (re, im) = x.parts();
            w.write_f64::<LE>(re)?;
            if T::KIND == ScalarKind::Complex {
                w.write_f64::<LE>(im)?;
            }
        }
    }
    Ok(())
}

fn read_len<R: Read>(r: &mut R) -> Result<usize> {
    let x = r.read_u64::<LE>()?;
    usize::try_from(x).map_err(|_| Error::Parse(format!("length {x} too large")))
}

fn read_body<T: Scalar, R: Read>(r: &mut R) -> Result<TreeTensorNetwork<T>> {
    let n = read_len(r)?;
    let mut labels = Vec::with_capacity(n.min(1 << 16));
    for _ in 0..n {
        let var = read_len(r)?;
        let digit = read_len(r)?;
        labels.push(DigitId::new(var, digit));
    }
    let m = read_len(r)?;
    let mut edges = Vec::with_capacity(m.min(1 << 16));
    for _ in 0..m {
        let a = read_len(r)?;
        let b = read_len(r)?;
        if a >= n || b >= n {
            return Err(Error::Parse(format!("edge ({a}, {b}) out of range")));
        }
        edges.push((labels[a], labels[b]));
    }
    let tree = LabeledTree::new(labels.clone(), edges)?;
    if tree.vertices() != labels.as_slice() {
        return Err(Error::Parse("vertices not in canonical order".into()));
    }
    let mut tensors = Vec::with_capacity(n);
    for _ in 0..n {
        let rank = read_len(r)?;
        let mut indices = Vec::with_capacity(rank.min(64));
        for _ in 0..rank {
            let kind = r.read_u8()?;
            let id = read_len(r)?;
            let dim = read_len(r)?;
            let id = match kind {
                0 => IndexId::Site(id),
                1 => IndexId::Bond(id),
                2 => IndexId::Aux(id),
                k => return Err(Error::Parse(format!("unknown index kind {k}"))),
            };
            indices.push(Index::new(id, dim));
        }
        let count = read_len(r)?;
        let expected = indices
            .iter()
            .try_fold(1usize, |acc, i| acc.checked_mul(i.dim));
        if expected != Some(count) {
            return Err(Error::Parse("payload size does not match shape".into()));
        }
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            let re = r.read_f64::<LE>()?;
            let im = if T::KIND == ScalarKind::Complex {
                r.read_f64::<LE>()?
            } else {
                0.0
            };
            data.push(T::from_parts(re, im));
        }
        tensors.push(DenseTensor::new(indices, data)?);
    }
    TreeTensorNetwork::new(tree, tensors)
}
