//! `EVKN` network files.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! "EVKN"  u32 version
//! u8 backend (0 = KAN, 1 = MLP)
//! u8 embedding (0 = identity, 1 = periodic sin/cos)  f64 half-period
//! u32 n_widths  u32 × n_widths
//! u32 order  u32 grid  f64 lo  f64 hi
//! u8 scales (0 = trainable, 1 = fixed)  f64 base  f64 spline
//! u8 full_hessian
//! u64 n_params  f64 × n_params (layout order)
//! ```

use std::path::Path;

use super::network::{Backend, Embedding, Network, NetworkSpec, ParamVector, ScaleMode};
use crate::error::{Error, Result};
use crate::util::{ByteReader, ByteWriter};

pub const NETWORK_MAGIC: &[u8; 4] = b"EVKN";
pub const NETWORK_FORMAT_VERSION: u32 = 1;

pub fn encode_network(net: &Network, params: &ParamVector) -> Result<Vec<u8>> {
    if params.len() != net.n_params() {
        return Err(Error::validation("params", "length does not match network"));
    }
    let spec = net.spec();
    let mut w = ByteWriter::default();
    w.bytes(NETWORK_MAGIC);
    w.u32(NETWORK_FORMAT_VERSION);
    w.u8(match spec.backend {
        Backend::Kan => 0,
        Backend::Mlp => 1,
    });
    match spec.embedding {
        Embedding::Identity => {
            w.u8(0);
            w.f64(0.0);
        }
        Embedding::PeriodicSinCos { half_period } => {
            w.u8(1);
            w.f64(half_period);
        }
    }
    w.u32(spec.widths.len() as u32);
    for &width in &spec.widths {
        w.u32(width as u32);
    }
    w.u32(spec.order as u32);
    w.u32(spec.grid as u32);
    w.f64(spec.domain.0);
    w.f64(spec.domain.1);
    match spec.scales {
        ScaleMode::Trainable => {
            w.u8(0);
            w.f64(0.0);
            w.f64(0.0);
        }
        ScaleMode::Fixed { base, spline } => {
            w.u8(1);
            w.f64(base);
            w.f64(spline);
        }
    }
    w.u8(spec.full_hessian as u8);
    w.u64(params.len() as u64);
    for &v in params.as_slice() {
        w.f64(v);
    }
    Ok(w.finish())
}

pub fn decode_network(bytes: &[u8], origin: &Path) -> Result<(Network, ParamVector)> {
    let bad = |reason: &str| Error::format(origin, reason);
    let mut r = ByteReader::new(bytes, origin);
    if r.take(4)? != NETWORK_MAGIC {
        return Err(bad("missing EVKN magic"));
    }
    let version = r.u32()?;
    if version != NETWORK_FORMAT_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let backend = match r.u8()? {
        0 => Backend::Kan,
        1 => Backend::Mlp,
        t => return Err(bad(&format!("unknown backend tag {t}"))),
    };
    let emb_tag = r.u8()?;
    let half_period = r.f64()?;
    let embedding = match emb_tag {
        0 => Embedding::Identity,
        1 => Embedding::PeriodicSinCos { half_period },
        t => return Err(bad(&format!("unknown embedding tag {t}"))),
    };
    let n_widths = r.u32()? as usize;
    if n_widths > 1024 {
        return Err(bad("implausible layer count"));
    }
    let widths = (0..n_widths)
        .map(|_| r.u32().map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    let order = r.u32()? as usize;
    let grid = r.u32()? as usize;
    let lo = r.f64()?;
    let hi = r.f64()?;
    let scale_tag = r.u8()?;
    let base = r.f64()?;
    let spline = r.f64()?;
    let scales = match scale_tag {
        0 => ScaleMode::Trainable,
        1 => ScaleMode::Fixed { base, spline },
        t => return Err(bad(&format!("unknown scale tag {t}"))),
    };
    let full_hessian = r.u8()? != 0;
    let net = Network::new(NetworkSpec {
        backend,
        embedding,
        widths,
        order,
        grid,
        domain: (lo, hi),
        scales,
        full_hessian,
    })
    .map_err(|e| bad(&e.to_string()))?;
    let n = r.u64()? as usize;
    if n != net.n_params() {
        return Err(bad(&format!(
            "file stores {n} parameters, layout needs {}",
            net.n_params()
        )));
    }
    let params = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    r.expect_end()?;
    Ok((net, ParamVector(params)))
}

pub fn save_network(path: &Path, net: &Network, params: &ParamVector) -> Result<()> {
    let bytes = encode_network(net, params)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_network(path: &Path) -> Result<(Network, ParamVector)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_network(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let net = Network::new(NetworkSpec::kan(vec![1, 2, 1])).unwrap();
        let p = net.init_params(1);
        let bytes = encode_network(&net, &p).unwrap();
        assert_eq!(&bytes[..4], b"EVKN");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(bytes[8], 0);
        let tail = &bytes[bytes.len() - 8..];
        assert_eq!(f64::from_le_bytes(tail.try_into().unwrap()), *p.0.last().unwrap());
    }

    #[test]
    fn truncated_and_corrupt_files_rejected() {
        let net = Network::new(NetworkSpec::mlp(vec![2, 3, 1])).unwrap();
        let p = net.init_params(1);
        let bytes = encode_network(&net, &p).unwrap();
        let here = Path::new("mem");
        assert!(decode_network(&bytes[..bytes.len() - 3], here).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_network(&bad, here).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_network(&extra, here).is_err());
        let (net2, p2) = decode_network(&bytes, here).unwrap();
        assert_eq!(net2.spec(), net.spec());
        assert_eq!(p2, p);
    }
}
