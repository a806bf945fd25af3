//! Binary checkpoint container.
//!
//! All integers are little-endian `u64` unless noted, floats are `f64` LE.
//!
//! ```text
//! magic      8 bytes  "RANDNE01"
//! version    u32
//! n_nodes, dim, order
//! norm       u8       0 adjacency, 1 transition
//! seed
//! weights    u8 flag, then len + len floats
//! parts      order + 1 times: rows, cols, rows * cols floats (row-major)
//! labels     u8 flag, then count and per label a u32 byte length + UTF-8
//! graph      u8 flag, then n_nodes, nnz, offsets, columns, values
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::embed::{ProjectionState, RngSpec, Weights};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeLabels, Normalization};

pub const MAGIC: &[u8; 8] = b"RANDNE01";
pub const VERSION: u32 = 1;

/// Everything needed to recombine or update an embedding later.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub state: ProjectionState,
    pub weights: Option<Weights>,
    pub labels: NodeLabels,
    /// The graph the state was computed for, so an update needs only the
    /// checkpoint and a delta.
    pub graph: Option<Graph>,
}

impl Checkpoint {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(&mut BufReader::new(file)).map_err(|e| match e {
            Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let s = &self.state;
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for x in [s.n_nodes(), s.dim(), s.order()] {
            put_u64(w, x as u64)?;
        }
        w.write_all(&[s.normalization().tag()])?;
        put_u64(w, s.rng().seed)?;

        match &self.weights {
            Some(wt) => {
                w.write_all(&[1])?;
                put_u64(w, wt.alpha().len() as u64)?;
                put_f64s(w, wt.alpha())?;
            }
            None => w.write_all(&[0])?,
        }
        for part in s.parts() {
            write_matrix(w, part)?;
        }

        match &self.labels {
            NodeLabels::Identity => w.write_all(&[0])?,
            NodeLabels::Named(names) => {
                w.write_all(&[1])?;
                put_u64(w, names.len() as u64)?;
                for name in names {
                    w.write_all(&(name.len() as u32).to_le_bytes())?;
                    w.write_all(name.as_bytes())?;
                }
            }
        }

        match &self.graph {
            Some(g) => {
                w.write_all(&[1])?;
                put_u64(w, g.n_nodes() as u64)?;
                put_u64(w, g.nnz() as u64)?;
                for &x in g.row_offsets().iter().chain(g.col_indices()) {
                    put_u64(w, x as u64)?;
                }
                put_f64s(w, g.values())?;
            }
            None => w.write_all(&[0])?,
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        read_exact(r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a checkpoint (bad magic)".into()));
        }
        let mut ver = [0u8; 4];
        read_exact(r, &mut ver)?;
        let version = u32::from_le_bytes(ver);
        if version != VERSION {
            return Err(Error::Format(format!(
                "checkpoint version {version} is not supported (expected {VERSION})"
            )));
        }
        let n = get_len(r)?;
        let d = get_len(r)?;
        let q = get_len(r)?;
        let normalization = Normalization::from_tag(get_u8(r)?)
            .ok_or_else(|| Error::Format("unknown normalization tag".into()))?;
        let seed = get_u64(r)?;

        let weights = match get_flag(r)? {
            true => {
                let len = get_len(r)?;
                Some(Weights::new(get_f64s(r, len)?).map_err(|e| Error::Format(e.to_string()))?)
            }
            false => None,
        };
        let mut parts = Vec::with_capacity(q + 1);
        for i in 0..=q {
            let m = read_matrix(r)?;
            if m.dim() != (n, d) {
                return Err(Error::Format(format!(
                    "part {i} is {:?}, header says {n} x {d}",
                    m.dim()
                )));
            }
            parts.push(m);
        }
        let state = ProjectionState::from_parts(RngSpec::new(seed), normalization, parts)
            .map_err(|e| Error::Format(e.to_string()))?;

        let labels = match get_flag(r)? {
            true => {
                let count = get_len(r)?;
                let mut names = Vec::with_capacity(count.min(1 << 20));
                for _ in 0..count {
                    let mut len = [0u8; 4];
                    read_exact(r, &mut len)?;
                    let mut buf = vec![0u8; u32::from_le_bytes(len) as usize];
                    read_exact(r, &mut buf)?;
                    names.push(
                        String::from_utf8(buf)
                            .map_err(|_| Error::Format("label is not UTF-8".into()))?,
                    );
                }
                NodeLabels::Named(names)
            }
            false => NodeLabels::Identity,
        };

        let graph = match get_flag(r)? {
            true => {
                let gn = get_len(r)?;
                let nnz = get_len(r)?;
                let offsets = get_usizes(r, gn + 1)?;
                let cols = get_usizes(r, nnz)?;
                let vals = get_f64s(r, nnz)?;
                let g = Graph::from_csr(gn, offsets, cols, vals)
                    .and_then(|g| g.with_labels(labels.clone()))
                    .map_err(|e| Error::Format(format!("stored graph: {e}")))?;
                Some(g)
            }
            false => None,
        };
        Ok(Checkpoint {
            state,
            weights,
            labels,
            graph,
        })
    }
}

fn put_u64<W: Write>(w: &mut W, x: u64) -> std::io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

fn put_f64s<W: Write>(w: &mut W, xs: &[f64]) -> std::io::Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

/// `rows`, `cols`, then the entries row by row.
pub fn write_matrix<W: Write>(w: &mut W, m: &Array2<f64>) -> std::io::Result<()> {
    put_u64(w, m.nrows() as u64)?;
    put_u64(w, m.ncols() as u64)?;
    for x in m.iter() {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_matrix<R: Read>(r: &mut R) -> Result<Array2<f64>> {
    let rows = get_len(r)?;
    let cols = get_len(r)?;
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format("matrix size overflows".into()))?;
    let data = get_f64s(r, len)?;
    Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::Format(e.to_string()))
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("file ends early".into()),
        _ => Error::Format(e.to_string()),
    })
}

fn get_u8<R: Read>(r: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    read_exact(r, &mut b)?;
    Ok(b[0])
}

fn get_flag<R: Read>(r: &mut R) -> Result<bool> {
    match get_u8(r)? {
        0 => Ok(false),
        1 => Ok(true),
        x => Err(Error::Format(format!("bad section flag {x}"))),
    }
}

fn get_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_len<R: Read>(r: &mut R) -> Result<usize> {
    usize::try_from(get_u64(r)?).map_err(|_| Error::Format("length does not fit in memory".into()))
}

fn get_f64s<R: Read>(r: &mut R, len: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![
        0u8;
        len.checked_mul(8)
            .ok_or_else(|| Error::Format("array too large".into()))?
    ];
    read_exact(r, &mut bytes)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn get_usizes<R: Read>(r: &mut R, len: usize) -> Result<Vec<usize>> {
    let mut bytes = vec![
        0u8;
        len.checked_mul(8)
            .ok_or_else(|| Error::Format("array too large".into()))?
    ];
    read_exact(r, &mut bytes)?;
    bytes
        .chunks_exact(8)
        .map(|c| {
            usize::try_from(u64::from_le_bytes(c.try_into().unwrap()))
                .map_err(|_| Error::Format("index does not fit in memory".into()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::embed_static;
    use crate::graph::generate_er;

    fn sample(named: bool) -> Checkpoint {
        let g = generate_er(40, 90, 1).unwrap();
        let g = if named {
            g.with_labels(NodeLabels::Named(
                (0..40).map(|i| format!("n{i}é")).collect(),
            ))
            .unwrap()
        } else {
            g
        };
        let w = Weights::new(vec![0.0, 1.0, 0.1, 0.01]).unwrap();
        let (state, _) =
            embed_static(&g, 8, &w, RngSpec::new(3), Normalization::Transition).unwrap();
        Checkpoint {
            state,
            weights: Some(w),
            labels: g.labels().clone(),
            graph: Some(g),
        }
    }

    fn round_trip(c: &Checkpoint) -> Checkpoint {
        let mut buf = Vec::new();
        c.write_to(&mut buf).unwrap();
        Checkpoint::read_from(&mut buf.as_slice()).unwrap()
    }

    #[test]
    fn bitwise_round_trip() {
        for named in [false, true] {
            let c = sample(named);
            let back = round_trip(&c);
            assert_eq!(back, c);
            for (a, b) in back.state.parts().iter().zip(c.state.parts()) {
                assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
            }
        }
        let mut bare = sample(false);
        bare.weights = None;
        bare.graph = None;
        assert_eq!(round_trip(&bare), bare);
    }

    #[test]
    fn header_layout() {
        let c = sample(false);
        let mut buf = Vec::new();
        c.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..8], b"RANDNE01");
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), VERSION);
        assert_eq!(u64::from_le_bytes(buf[12..20].try_into().unwrap()), 40);
        assert_eq!(u64::from_le_bytes(buf[20..28].try_into().unwrap()), 8);
        assert_eq!(u64::from_le_bytes(buf[28..36].try_into().unwrap()), 3);
        assert_eq!(buf[36], 1);
        assert_eq!(u64::from_le_bytes(buf[37..45].try_into().unwrap()), 3);
    }

    #[test]
    fn rejects_bad_input() {
        let mut buf = Vec::new();
        sample(false).write_to(&mut buf).unwrap();

        let mut wrong_version = buf.clone();
        wrong_version[8..12].copy_from_slice(&2u32.to_le_bytes());
        let err = Checkpoint::read_from(&mut wrong_version.as_slice()).unwrap_err();
        assert!(err.to_string().contains("version 2"), "{err}");

        let mut wrong_magic = buf.clone();
        wrong_magic[0] = b'X';
        assert!(matches!(
            Checkpoint::read_from(&mut wrong_magic.as_slice()),
            Err(Error::Format(_))
        ));

        let truncated = &buf[..buf.len() - 5];
        assert!(matches!(
            Checkpoint::read_from(&mut &truncated[..]),
            Err(Error::Format(_))
        ));
    }
}
