//! Binary space file.
//!
//! ```text
//! magic     6 bytes   "LSAQU1"
//! version   u16 LE
//! checksum  32 bytes  SHA-256 of everything after this field
//! body_len  u64 LE
//! body      sections, each a u64 LE byte length followed by its payload:
//!   vocab   n_docs u64, n_terms u64, then per term: u32 len, UTF-8 bytes, u64 df
//!   scheme  kind u8 (0 log-entropy, 1 tfidf), n u64, n × f64
//!   sigma   k u64, k × f64
//!   u       rows u64, cols u64, rows·cols × f64 row-major
//!   v       present u8, [rows u64, cols u64, rows·cols × f64 row-major]
//!   meta    JSON
//! ```
//!
//! All integers and floats are little-endian; floats are stored as f64 bit patterns.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::corpus::Vocabulary;
use crate::error::{LsaError, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;
use crate::space::{BuildMeta, SemanticSpace};
use crate::weighting::{SchemeKind, WeightingScheme};

pub const MAGIC: &[u8; 6] = b"LSAQU1";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 6 + 2 + 32 + 8;

pub fn save_space<T: Scalar>(space: &SemanticSpace<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_bytes(space)?).map_err(|e| LsaError::io(path, e))
}

pub fn load_space<T: Scalar>(path: impl AsRef<Path>) -> Result<SemanticSpace<T>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| LsaError::io(path, e))?;
    from_bytes(&bytes)
}

pub fn to_bytes<T: Scalar>(space: &SemanticSpace<T>) -> Result<Vec<u8>> {
    let mut body = Vec::new();

    let mut sec = Vec::new();
    put_u64(&mut sec, space.vocab.n_docs() as u64);
    put_u64(&mut sec, space.vocab.len() as u64);
    for (term, &df) in space.vocab.terms().iter().zip(space.vocab.doc_frequencies()) {
        sec.extend_from_slice(&(term.len() as u32).to_le_bytes());
        sec.extend_from_slice(term.as_bytes());
        put_u64(&mut sec, df as u64);
    }
    put_section(&mut body, &sec);

    let mut sec = vec![match space.scheme.kind {
        SchemeKind::LogEntropy => 0u8,
        SchemeKind::Tfidf => 1u8,
    }];
    put_floats(&mut sec, &space.scheme.global_weights);
    put_section(&mut body, &sec);

    let mut sec = Vec::new();
    put_floats(&mut sec, &space.sigma);
    put_section(&mut body, &sec);

    let mut sec = Vec::new();
    put_matrix(&mut sec, &space.u);
    put_section(&mut body, &sec);

    let mut sec = Vec::new();
    match &space.v {
        Some(v) => {
            sec.push(1);
            put_matrix(&mut sec, v);
        }
        None => sec.push(0),
    }
    put_section(&mut body, &sec);

    put_section(&mut body, &serde_json::to_vec(&space.meta)?);

    let mut tail = Vec::with_capacity(8 + body.len());
    put_u64(&mut tail, body.len() as u64);
    tail.extend_from_slice(&body);

    let mut out = Vec::with_capacity(HEADER_LEN + body.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&Sha256::digest(&tail));
    out.extend_from_slice(&tail);
    Ok(out)
}

pub fn from_bytes<T: Scalar>(bytes: &[u8]) -> Result<SemanticSpace<T>> {
    if bytes.len() < 8 || &bytes[..6] != MAGIC {
        return Err(LsaError::SpaceFormat("not a space file (bad magic)".into()));
    }
    let version = u16::from_le_bytes([bytes[6], bytes[7]]);
    if version != FORMAT_VERSION {
        return Err(LsaError::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(LsaError::Checksum);
    }
    let tail = &bytes[40..];
    if Sha256::digest(tail).as_slice() != &bytes[8..40] {
        return Err(LsaError::Checksum);
    }
    let mut r = Reader { buf: tail, pos: 0 };
    let body_len = r.u64()? as usize;
    if body_len != tail.len() - 8 {
        return Err(LsaError::SpaceFormat("body length mismatch".into()));
    }

    let mut sec = r.section()?;
    let n_docs = sec.u64()? as usize;
    let n_terms = sec.u64()? as usize;
    let mut terms = Vec::with_capacity(n_terms);
    let mut dfs = Vec::with_capacity(n_terms);
    for _ in 0..n_terms {
        let len = u32::from_le_bytes(sec.take(4)?.try_into().expect("4 bytes")) as usize;
        let term = std::str::from_utf8(sec.take(len)?)
            .map_err(|e| LsaError::SpaceFormat(format!("term is not UTF-8: {e}")))?;
        terms.push(term.to_owned());
        dfs.push(sec.u64()? as usize);
    }
    sec.finish()?;
    let vocab = Vocabulary::from_parts(terms, dfs, n_docs)?;

    let mut sec = r.section()?;
    let kind = match sec.take(1)?[0] {
        0 => SchemeKind::LogEntropy,
        1 => SchemeKind::Tfidf,
        other => return Err(LsaError::SpaceFormat(format!("unknown weighting tag {other}"))),
    };
    let global_weights = sec.floats()?;
    sec.finish()?;

    let mut sec = r.section()?;
    let sigma = sec.floats()?;
    sec.finish()?;

    let mut sec = r.section()?;
    let u = sec.matrix()?;
    sec.finish()?;

    let mut sec = r.section()?;
    let v = match sec.take(1)?[0] {
        0 => None,
        1 => Some(sec.matrix()?),
        other => return Err(LsaError::SpaceFormat(format!("bad V flag {other}"))),
    };
    sec.finish()?;

    let sec = r.section()?;
    let meta: BuildMeta = serde_json::from_slice(sec.buf)?;
    r.finish()?;

    SemanticSpace::from_parts(u, sigma, v, vocab, WeightingScheme { kind, global_weights }, meta)
}

fn put_u64(out: &mut Vec<u8>, x: u64) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn put_section(out: &mut Vec<u8>, payload: &[u8]) {
    put_u64(out, payload.len() as u64);
    out.extend_from_slice(payload);
}

fn put_floats<T: Scalar>(out: &mut Vec<u8>, xs: &[T]) {
    put_u64(out, xs.len() as u64);
    for x in xs {
        out.extend_from_slice(&x.as_f64().to_le_bytes());
    }
}

fn put_matrix<T: Scalar>(out: &mut Vec<u8>, m: &DenseMatrix<T>) {
    put_u64(out, m.rows() as u64);
    put_u64(out, m.cols() as u64);
    for x in m.as_slice() {
        out.extend_from_slice(&x.as_f64().to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| LsaError::SpaceFormat("unexpected end of section".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn section(&mut self) -> Result<Reader<'a>> {
        let len = self.u64()? as usize;
        Ok(Reader {
            buf: self.take(len)?,
            pos: 0,
        })
    }

    fn floats<T: Scalar>(&mut self) -> Result<Vec<T>> {
        let n = self.u64()? as usize;
        if n > self.buf.len() / 8 {
            return Err(LsaError::SpaceFormat("float array longer than section".into()));
        }
        (0..n).map(|_| self.f64().map(T::of)).collect()
    }

    fn matrix<T: Scalar>(&mut self) -> Result<DenseMatrix<T>> {
        let rows = self.u64()? as usize;
        let cols = self.u64()? as usize;
        let n = rows
            .checked_mul(cols)
            .filter(|&n| n <= self.buf.len() / 8)
            .ok_or_else(|| LsaError::SpaceFormat("matrix larger than section".into()))?;
        let data = (0..n).map(|_| self.f64().map(T::of)).collect::<Result<Vec<T>>>()?;
        DenseMatrix::from_row_major(rows, cols, data)
    }

    fn finish(&self) -> Result<()> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(LsaError::SpaceFormat("trailing bytes in section".into()))
        }
    }
}
