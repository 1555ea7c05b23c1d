use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{check_dim, FeatureVector};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"FVS1";
pub const VERSION: u32 = 1;

const HEADER_LEN: usize = 16;

/// Embeddings of one feature space, keyed by image id in insertion order.
///
/// On disk (little-endian): `"FVS1" · u32 version · u32 count · u32 dim`,
/// then per record `u16 id length · UTF-8 id · dim × f32`. The backend tag
/// lives in a `<file>.meta.json` sidecar so the binary layout stays fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    dim: usize,
    entries: IndexMap<String, FeatureVector>,
    backend_tag: String,
}

#[derive(Serialize, Deserialize)]
struct StoreMeta {
    backend_tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<serde_json::Value>,
}

impl FeatureStore {
    pub fn new(dim: usize, backend_tag: impl Into<String>) -> Self {
        FeatureStore {
            dim,
            entries: IndexMap::new(),
            backend_tag: backend_tag.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn backend_tag(&self) -> &str {
        &self.backend_tag
    }

    pub fn set_backend_tag(&mut self, tag: impl Into<String>) {
        self.backend_tag = tag.into();
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds a unit-norm vector under a new id.
    pub fn insert(&mut self, id: impl Into<String>, vector: FeatureVector) -> Result<()> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::Validation("empty feature id".into()));
        }
        if id.len() > u16::MAX as usize {
            return Err(Error::Validation(format!("id longer than {} bytes", u16::MAX)));
        }
        check_dim(self.dim, vector.dim())?;
        if !vector.is_unit() {
            return Err(Error::Data(format!(
                "vector '{id}' has norm {} (expected unit norm)",
                vector.norm()
            )));
        }
        if self.entries.contains_key(&id) {
            return Err(Error::Validation(format!("duplicate feature id '{id}'")));
        }
        self.entries.insert(id, vector);
        Ok(())
    }

    /// Normalizes raw values and inserts them.
    pub fn insert_raw(&mut self, id: impl Into<String>, values: &[f64]) -> Result<()> {
        let v = FeatureVector::normalized(values)?;
        self.insert(id, v)
    }

    pub fn get(&self, id: &str) -> Option<&FeatureVector> {
        self.entries.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &FeatureVector)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// A new store with the entries whose id satisfies `keep`, order preserved.
    pub fn subset(&self, mut keep: impl FnMut(&str) -> bool) -> FeatureStore {
        FeatureStore {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            backend_tag: self.backend_tag.clone(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let record_len: usize = self
            .entries
            .keys()
            .map(|id| 2 + id.len() + 4 * self.dim)
            .sum();
        let mut buf = Vec::with_capacity(HEADER_LEN + record_len);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        buf.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for (id, v) in &self.entries {
            buf.extend_from_slice(&(id.len() as u16).to_le_bytes());
            buf.extend_from_slice(id.as_bytes());
            for x in v.as_slice() {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        buf
    }

    pub fn from_bytes(bytes: &[u8], backend_tag: impl Into<String>) -> Result<Self> {
        let mut reader = Reader { bytes, pos: 0 };
        if reader.take(4)? != MAGIC {
            return Err(Error::Format("bad magic bytes".into()));
        }
        let version = reader.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let count = reader.u32()? as usize;
        let dim = reader.u32()? as usize;
        let mut store = FeatureStore::new(dim, backend_tag);
        for _ in 0..count {
            let id_len = reader.u16()? as usize;
            let id = std::str::from_utf8(reader.take(id_len)?)
                .map_err(|_| Error::Format("id is not valid UTF-8".into()))?
                .to_string();
            let raw = reader.take(4 * dim)?;
            let values = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            let vector = FeatureVector::new(values)
                .map_err(|e| Error::Format(format!("record '{id}': {e}")))?;
            store
                .insert(id, vector)
                .map_err(|e| Error::Format(e.to_string()))?;
        }
        if reader.pos != bytes.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes after {count} records of dimension {dim}",
                bytes.len() - reader.pos
            )));
        }
        Ok(store)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.save_with_provenance(path, None)
    }

    /// Like [`FeatureStore::save`], recording `provenance` in the sidecar.
    pub fn save_with_provenance(
        &self,
        path: impl AsRef<Path>,
        provenance: Option<serde_json::Value>,
    ) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))?;
        let meta = serde_json::to_vec_pretty(&StoreMeta {
            backend_tag: self.backend_tag.clone(),
            provenance,
        })
        .expect("store metadata serializes");
        let meta_path = meta_path(path);
        fs::write(&meta_path, meta).map_err(|e| Error::io(meta_path, e))
    }

    /// Reads a store; a missing sidecar yields the backend tag `"unknown"`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let meta_path = meta_path(path);
        let tag = match fs::read(&meta_path) {
            Ok(raw) => {
                serde_json::from_slice::<StoreMeta>(&raw)
                    .map_err(|e| Error::Format(format!("{}: {e}", meta_path.display())))?
                    .backend_tag
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => "unknown".to_string(),
            Err(e) => return Err(Error::io(meta_path, e)),
        };
        Self::from_bytes(&bytes, tag)
    }

    /// True if `bytes` start with the store magic.
    pub fn sniff(bytes: &[u8]) -> bool {
        bytes.starts_with(MAGIC)
    }
}

fn meta_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format(format!("truncated file at byte {}", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> FeatureStore {
        let mut s = FeatureStore::new(4, "test");
        s.insert_raw("a", &[1.0, 0.0, 0.0, 0.0]).unwrap();
        s.insert_raw("bb", &[0.0, 1.0, 1.0, 0.0]).unwrap();
        s.insert_raw("ccc", &[1.0, 2.0, 3.0, 4.0]).unwrap();
        s
    }

    #[test]
    fn byte_accounting() {
        let bytes = sample().to_bytes();
        let ids = [1usize, 2, 3];
        let expected = 4 + 4 + 4 + 4 + ids.iter().map(|l| 2 + l).sum::<usize>() + 3 * 4 * 4;
        assert_eq!(bytes.len(), expected);
        assert_eq!(&bytes[..4], b"FVS1");
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &3u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &4u32.to_le_bytes());
        assert_eq!(&bytes[16..18], &1u16.to_le_bytes());
        assert_eq!(bytes[18], b'a');
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.fvs");
        let store = sample();
        store.save(&path).unwrap();
        let back = FeatureStore::load(&path).unwrap();
        assert_eq!(store, back);
        assert_eq!(back.backend_tag(), "test");
    }

    #[test]
    fn rejects_bad_magic() {
        let mut bytes = sample().to_bytes();
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(FeatureStore::from_bytes(&bytes, "t"), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_truncation_and_trailing_bytes() {
        let bytes = sample().to_bytes();
        for cut in [3, 10, 17, bytes.len() - 1] {
            assert!(
                matches!(FeatureStore::from_bytes(&bytes[..cut], "t"), Err(Error::Format(_))),
                "cut at {cut}"
            );
        }
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(matches!(FeatureStore::from_bytes(&longer, "t"), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let mut bytes = sample().to_bytes();
        // claim dim 5 while records hold 4 floats
        bytes[12..16].copy_from_slice(&5u32.to_le_bytes());
        assert!(matches!(FeatureStore::from_bytes(&bytes, "t"), Err(Error::Format(_))));
        let mut s = FeatureStore::new(3, "t");
        assert!(matches!(
            s.insert_raw("x", &[1.0, 0.0]),
            Err(Error::Shape { expected: 3, actual: 2 })
        ));
    }

    #[test]
    fn insert_checks_norm_and_ids() {
        let mut s = FeatureStore::new(2, "t");
        assert!(s.insert("a", FeatureVector::new(vec![2.0, 0.0]).unwrap()).is_err());
        s.insert_raw("a", &[1.0, 1.0]).unwrap();
        assert!(s.insert_raw("a", &[1.0, 0.0]).is_err());
        assert!(s.insert_raw("", &[1.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn bytes_round_trip(
            dim in 1usize..16,
            rows in proptest::collection::btree_map("[a-zA-Z0-9_.-]{1,20}", proptest::collection::vec(-10.0f64..10.0, 16), 0..12),
        ) {
            let mut store = FeatureStore::new(dim, "p");
            for (id, values) in &rows {
                let _ = store.insert_raw(id.clone(), &values[..dim]);
            }
            let back = FeatureStore::from_bytes(&store.to_bytes(), "p").unwrap();
            prop_assert_eq!(store, back);
        }
    }
}
