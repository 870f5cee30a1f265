//! Binary network checkpoints.
//!
//! Layout: the magic bytes `QBNET\x01`, a little-endian u64 header length, a
//! JSON header (format tag, tool version, config, seed, epochs trained), then
//! every parameter as raw little-endian f64 in `params_flat` order. Raw bits
//! round-trip exactly.

use super::{init, DenseNetwork, NetworkConfig};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 6] = b"QBNET\x01";
const FORMAT: &str = "qbayes-net-v1";

/// Provenance recorded next to the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub epochs_trained: u32,
    pub tool_version: String,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    tool_version: String,
    config: NetworkConfig,
    seed: u64,
    epochs_trained: u32,
}

pub fn save_checkpoint(path: &Path, net: &DenseNetwork, meta: &CheckpointMeta) -> Result<()> {
    let header = Header {
        format: FORMAT.to_string(),
        tool_version: meta.tool_version.clone(),
        config: net.config().clone(),
        seed: meta.seed,
        epochs_trained: meta.epochs_trained,
    };
    let header_json = serde_json::to_vec(&header)
        .map_err(|e| Error::Format(format!("checkpoint header: {e}")))?;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(header_json.len() as u64).to_le_bytes())?;
    w.write_all(&header_json)?;
    for p in net.params_flat() {
        w.write_all(&p.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(DenseNetwork, CheckpointMeta)> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a qbayes network checkpoint".into()));
    }
    let mut len_bytes = [0u8; 8];
    r.read_exact(&mut len_bytes)?;
    let header_len = u64::from_le_bytes(len_bytes) as usize;
    let mut header_json = vec![0u8; header_len];
    r.read_exact(&mut header_json)?;
    let header: Header = serde_json::from_slice(&header_json)
        .map_err(|e| Error::Format(format!("checkpoint header: {e}")))?;
    if header.format != FORMAT {
        return Err(Error::Format(format!("unsupported checkpoint format `{}`", header.format)));
    }
    let mut net = init(header.config, 0);
    let n = net.param_count();
    let mut params = Vec::with_capacity(n);
    let mut buf = [0u8; 8];
    for _ in 0..n {
        r.read_exact(&mut buf)?;
        params.push(f64::from_le_bytes(buf));
    }
    if r.read(&mut buf)? != 0 {
        return Err(Error::Format("trailing bytes after checkpoint parameters".into()));
    }
    net.set_params_flat(&params)?;
    let meta = CheckpointMeta {
        seed: header.seed,
        epochs_trained: header.epochs_trained,
        tool_version: header.tool_version,
    };
    Ok((net, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_round_trips_bit_exactly() {
        let cfg = NetworkConfig::new(vec![8, 3], 12, (2.0, -0.25)).unwrap();
        let net = init(cfg, 99);
        let meta = CheckpointMeta {
            seed: 99,
            epochs_trained: 17,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.qbnet");
        save_checkpoint(&path, &net, &meta).unwrap();
        let (loaded, loaded_meta) = load_checkpoint(&path).unwrap();
        assert_eq!(loaded_meta, meta);
        assert_eq!(loaded.config(), net.config());
        let a = net.params_flat();
        let b = loaded.params_flat();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        // And the file itself is stable under a save/load/save cycle.
        let path2 = dir.path().join("net2.qbnet");
        save_checkpoint(&path2, &loaded, &loaded_meta).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.qbnet");
        std::fs::write(&path, b"definitely not a checkpoint").unwrap();
        assert!(load_checkpoint(&path).is_err());
    }
}
