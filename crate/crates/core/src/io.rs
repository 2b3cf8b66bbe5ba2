//! CSV input and the binary dataset cache.
//!
//! Cache layout (version 1, all integers little-endian):
//!
//! ```text
//! magic      b"CRDS"
//! version    u32
//! tag        u64            caller-supplied key, e.g. a hash of the preparation config
//! mode       u8             0 = text, 1 = tabular
//! labels     u32 n, n * str
//! schema     text:    u64 corpus_size, u64 min_df, u8 ngram_min, u8 ngram_max,
//!                     u32 n, n * (str gram, u64 df)
//!            tabular: u32 n, n * (str name, u8 kind [0 numeric | 1 nominal, u32 m, m * str])
//! examples   u64 n, n * (str id, u32 label, features)
//!            text features:    u32 count, count * varint rank delta
//!            tabular features: per attribute, f64 (numeric) or u32 symbol (nominal)
//! ```
//!
//! `str` is a u32 byte length followed by UTF-8 bytes; varints are unsigned LEB128.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dataset::{Attribute, AttributeKind, Dataset, Example, Features, Schema, TabularSchema, Value};
use crate::error::{Error, Result};
use crate::vocab::{Feature, Fnv, NgramRange, Vocabulary};

/// Stable 64-bit FNV-1a over `parts`, each followed by a zero byte. Suitable for cache tags.
pub fn content_hash(parts: &[&[u8]]) -> u64 {
    let mut h = Fnv::new();
    for p in parts {
        h.write(p);
        h.write(&[0]);
    }
    h.finish()
}

pub const CACHE_MAGIC: &[u8; 4] = b"CRDS";
pub const CACHE_VERSION: u32 = 1;

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::InvalidConfig(format!("column {name:?} not found in CSV header")))
}

fn reader(path: &Path, delimiter: u8) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new().delimiter(delimiter).has_headers(true).flexible(false).from_path(path)?)
}

/// Reads `(documents, labels)` from a headed CSV file.
pub fn read_text_csv(
    path: &Path,
    text_column: &str,
    label_column: &str,
    delimiter: u8,
) -> Result<(Vec<String>, Vec<String>)> {
    let mut rdr = reader(path, delimiter)?;
    let headers = rdr.headers()?.clone();
    let (ti, li) = (column_index(&headers, text_column)?, column_index(&headers, label_column)?);
    let mut docs = Vec::new();
    let mut labels = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        docs.push(rec[ti].to_string());
        labels.push(rec[li].to_string());
    }
    Ok((docs, labels))
}

/// Header names (without the label column), attribute cells and labels of a tabular CSV.
pub type TabularRows = (Vec<String>, Vec<Vec<String>>, Vec<String>);

pub fn read_tabular_rows(path: &Path, label_column: &str, delimiter: u8) -> Result<TabularRows> {
    let mut rdr = reader(path, delimiter)?;
    let headers = rdr.headers()?.clone();
    let li = column_index(&headers, label_column)?;
    let names: Vec<String> = headers.iter().enumerate().filter(|(i, _)| *i != li).map(|(_, h)| h.to_string()).collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        labels.push(rec[li].to_string());
        rows.push(rec.iter().enumerate().filter(|(i, _)| *i != li).map(|(_, c)| c.to_string()).collect());
    }
    Ok((names, rows, labels))
}

/// Reads a tabular CSV: every column except `label_column` becomes an attribute.
pub fn read_tabular_csv(path: &Path, label_column: &str, delimiter: u8) -> Result<Dataset> {
    let (names, rows, labels) = read_tabular_rows(path, label_column, delimiter)?;
    let (schema, values) = TabularSchema::infer(&names, &rows)?;
    Dataset::from_tabular(schema, values, &labels)
}

pub fn write_text_csv(path: &Path, docs: &[String], labels: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["text", "label"])?;
    for (d, l) in docs.iter().zip(labels) {
        w.write_record([d, l])?;
    }
    w.flush()?;
    Ok(())
}

struct Enc<W: Write>(W);

impl<W: Write> Enc<W> {
    fn u8(&mut self, x: u8) -> Result<()> {
        Ok(self.0.write_all(&[x])?)
    }
    fn u32(&mut self, x: u32) -> Result<()> {
        Ok(self.0.write_all(&x.to_le_bytes())?)
    }
    fn u64(&mut self, x: u64) -> Result<()> {
        Ok(self.0.write_all(&x.to_le_bytes())?)
    }
    fn f64(&mut self, x: f64) -> Result<()> {
        Ok(self.0.write_all(&x.to_le_bytes())?)
    }
    fn str(&mut self, s: &str) -> Result<()> {
        self.u32(s.len() as u32)?;
        Ok(self.0.write_all(s.as_bytes())?)
    }
    fn varint(&mut self, mut x: u32) -> Result<()> {
        loop {
            let b = (x & 0x7f) as u8;
            x >>= 7;
            if x == 0 {
                return self.u8(b);
            }
            self.u8(b | 0x80)?;
        }
    }
}

struct Dec<R: Read>(R);

fn corrupt(what: &str) -> Error {
    Error::InsufficientData(format!("corrupt dataset cache: {what}"))
}

impl<R: Read> Dec<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b).map_err(|_| corrupt("unexpected end of file"))?;
        Ok(b)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        let mut buf = vec![0u8; n];
        self.0.read_exact(&mut buf).map_err(|_| corrupt("truncated string"))?;
        String::from_utf8(buf).map_err(|_| corrupt("invalid UTF-8"))
    }
    fn varint(&mut self) -> Result<u32> {
        let mut x: u32 = 0;
        for shift in (0..35).step_by(7) {
            let b = self.u8()?;
            x |= u32::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                return Ok(x);
            }
        }
        Err(corrupt("varint too long"))
    }
}

pub fn write_cache(path: &Path, data: &Dataset, tag: u64) -> Result<()> {
    let mut e = Enc(BufWriter::new(File::create(path)?));
    e.0.write_all(CACHE_MAGIC)?;
    e.u32(CACHE_VERSION)?;
    e.u64(tag)?;
    match data.schema() {
        Schema::Text(v) => {
            e.u8(0)?;
            write_labels(&mut e, data)?;
            e.u64(v.corpus_size() as u64)?;
            e.u64(v.min_df() as u64)?;
            e.u8(v.ngram_range().min as u8)?;
            e.u8(v.ngram_range().max as u8)?;
            e.u32(v.len() as u32)?;
            for f in v.features() {
                e.str(&f.gram)?;
                e.u64(f.document_frequency as u64)?;
            }
        }
        Schema::Tabular(t) => {
            e.u8(1)?;
            write_labels(&mut e, data)?;
            e.u32(t.attributes.len() as u32)?;
            for a in &t.attributes {
                e.str(&a.name)?;
                match &a.kind {
                    AttributeKind::Numeric => e.u8(0)?,
                    AttributeKind::Nominal(symbols) => {
                        e.u8(1)?;
                        e.u32(symbols.len() as u32)?;
                        for s in symbols {
                            e.str(s)?;
                        }
                    }
                }
            }
        }
    }
    e.u64(data.len() as u64)?;
    for ex in data.examples() {
        e.str(&ex.id)?;
        e.u32(ex.label)?;
        match &ex.features {
            Features::Text(ranks) => {
                e.u32(ranks.len() as u32)?;
                let mut prev = 0;
                for &r in ranks {
                    e.varint(r - prev)?;
                    prev = r;
                }
            }
            Features::Tabular(values) => {
                for v in values {
                    match *v {
                        Value::Numeric(x) => e.f64(x)?,
                        Value::Nominal(s) => e.u32(s)?,
                    }
                }
            }
        }
    }
    e.0.flush()?;
    Ok(())
}

fn write_labels<W: Write>(e: &mut Enc<W>, data: &Dataset) -> Result<()> {
    e.u32(data.labels().len() as u32)?;
    for l in data.labels() {
        e.str(l)?;
    }
    Ok(())
}

/// Loads a cache, returning `None` when its tag differs from `expected_tag`.
pub fn read_cache(path: &Path, expected_tag: u64) -> Result<Option<Dataset>> {
    let mut d = Dec(BufReader::new(File::open(path)?));
    if &d.bytes::<4>()? != CACHE_MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = d.u32()?;
    if version != CACHE_VERSION {
        return Err(corrupt(&format!("unsupported version {version}")));
    }
    if d.u64()? != expected_tag {
        return Ok(None);
    }
    let mode = d.u8()?;
    let n_labels = d.u32()?;
    let labels = (0..n_labels).map(|_| d.str()).collect::<Result<Vec<_>>>()?;
    let schema = match mode {
        0 => {
            let corpus_size = d.u64()? as usize;
            let min_df = d.u64()? as usize;
            let ngram = NgramRange { min: d.u8()? as usize, max: d.u8()? as usize };
            let n = d.u32()?;
            let mut tsv = String::new();
            let mut features = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let gram = d.str()?;
                let document_frequency = d.u64()? as usize;
                features.push(Feature { gram, document_frequency });
            }
            for (rank, f) in features.iter().enumerate() {
                use std::fmt::Write as _;
                let _ = writeln!(tsv, "{rank}\t{}\t{}", f.gram, f.document_frequency);
            }
            Schema::Text(Vocabulary::read_tsv(tsv.as_bytes(), corpus_size, min_df, ngram)?)
        }
        1 => {
            let n = d.u32()?;
            let mut attributes = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let name = d.str()?;
                let kind = match d.u8()? {
                    0 => AttributeKind::Numeric,
                    1 => {
                        let m = d.u32()?;
                        AttributeKind::Nominal((0..m).map(|_| d.str()).collect::<Result<_>>()?)
                    }
                    _ => return Err(corrupt("unknown attribute kind")),
                };
                attributes.push(Attribute { name, kind });
            }
            Schema::Tabular(TabularSchema { attributes })
        }
        _ => return Err(corrupt("unknown mode")),
    };
    let n = d.u64()?;
    let mut examples = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let id = d.str()?;
        let label = d.u32()?;
        let features = match &schema {
            Schema::Text(_) => {
                let count = d.u32()?;
                let mut ranks = Vec::with_capacity(count as usize);
                let mut prev = 0u32;
                for _ in 0..count {
                    prev += d.varint()?;
                    ranks.push(prev);
                }
                Features::Text(ranks)
            }
            Schema::Tabular(t) => Features::Tabular(
                t.attributes
                    .iter()
                    .map(|a| match a.kind {
                        AttributeKind::Numeric => d.f64().map(Value::Numeric),
                        AttributeKind::Nominal(_) => d.u32().map(Value::Nominal),
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        examples.push(Example { id, features, label });
    }
    Ok(Some(Dataset::new(examples, schema, labels)?))
}
