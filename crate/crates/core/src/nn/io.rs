//! Little-endian binary encoding for networks and optimizer state.
//!
//! A file is `MAGIC`, a `u32` format version, a sequence of records and the
//! `END` marker. Each network is its layer count followed by, per layer,
//! `(out, in, activation)` and the row-major weights and biases as `f64`.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::adam::{Adam, ScalarAdam};
use super::network::{Activation, Grads, Layer, Network};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"DSGELAB\x01";
pub const END: &[u8; 4] = b"END\x00";
pub const FORMAT_VERSION: u32 = 1;

/// Sanity cap on any single stored dimension.
const MAX_DIM: u64 = 1 << 24;

pub struct Encoder<W: Write> {
    out: W,
}

impl<W: Write> Encoder<W> {
    pub fn new(out: W) -> Self {
        Encoder { out }
    }

    pub fn header(&mut self) -> std::io::Result<()> {
        self.out.write_all(MAGIC)?;
        self.u32(FORMAT_VERSION)
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.out.write_all(END)?;
        Ok(self.out)
    }

    pub fn u8(&mut self, v: u8) -> std::io::Result<()> {
        self.out.write_all(&[v])
    }

    pub fn u32(&mut self, v: u32) -> std::io::Result<()> {
        self.out.write_all(&v.to_le_bytes())
    }

    pub fn u64(&mut self, v: u64) -> std::io::Result<()> {
        self.out.write_all(&v.to_le_bytes())
    }

    pub fn f64(&mut self, v: f64) -> std::io::Result<()> {
        self.out.write_all(&v.to_le_bytes())
    }

    pub fn f64s<'a>(&mut self, vs: impl IntoIterator<Item = &'a f64>) -> std::io::Result<()> {
        for v in vs {
            self.f64(*v)?;
        }
        Ok(())
    }

    pub fn network(&mut self, net: &Network) -> std::io::Result<()> {
        self.u64(net.layers.len() as u64)?;
        for l in &net.layers {
            self.u64(l.w.nrows() as u64)?;
            self.u64(l.w.ncols() as u64)?;
            self.u8(l.act.to_code())?;
            self.f64s(l.w.iter())?;
            self.f64s(l.b.iter())?;
        }
        Ok(())
    }

    fn grads(&mut self, g: &Grads) -> std::io::Result<()> {
        for (w, b) in g.w.iter().zip(&g.b) {
            self.f64s(w.iter())?;
            self.f64s(b.iter())?;
        }
        Ok(())
    }

    pub fn adam(&mut self, a: &Adam) -> std::io::Result<()> {
        self.f64s([a.lr, a.beta1, a.beta2, a.eps].iter())?;
        self.u64(a.t)?;
        self.grads(&a.m)?;
        self.grads(&a.v)
    }

    pub fn scalar_adam(&mut self, a: &ScalarAdam) -> std::io::Result<()> {
        self.f64(a.lr)?;
        self.u64(a.t)?;
        self.f64(a.m)?;
        self.f64(a.v)
    }
}

pub struct Decoder<R: Read> {
    inp: R,
}

fn corrupt(what: impl Into<String>) -> Error {
    Error::Checkpoint {
        path: Default::default(),
        reason: what.into(),
    }
}

impl<R: Read> Decoder<R> {
    pub fn new(inp: R) -> Self {
        Decoder { inp }
    }

    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inp
            .read_exact(&mut b)
            .map_err(|_| corrupt("unexpected end of file"))?;
        Ok(b)
    }

    pub fn header(&mut self) -> Result<()> {
        if &self.bytes::<8>()? != MAGIC {
            return Err(corrupt("not a checkpoint (bad magic)"));
        }
        let v = self.u32()?;
        if v != FORMAT_VERSION {
            return Err(corrupt(format!(
                "format version {v}, expected {FORMAT_VERSION}"
            )));
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        if &self.bytes::<4>()? != END {
            return Err(corrupt("missing end marker"));
        }
        let mut rest = [0u8; 1];
        match self.inp.read(&mut rest) {
            Ok(0) => Ok(()),
            _ => Err(corrupt("trailing bytes after end marker")),
        }
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    pub fn dim(&mut self) -> Result<usize> {
        let d = self.u64()?;
        if d == 0 || d > MAX_DIM {
            return Err(corrupt(format!("implausible dimension {d}")));
        }
        Ok(d as usize)
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn fill<'a>(&mut self, it: impl Iterator<Item = &'a mut f64>) -> Result<()> {
        for v in it {
            *v = self.f64()?;
        }
        Ok(())
    }

    pub fn network(&mut self) -> Result<Network> {
        let n = self.dim()?;
        let mut layers = Vec::with_capacity(n.min(64));
        for _ in 0..n {
            let out = self.dim()?;
            let inp = self.dim()?;
            let act =
                Activation::from_code(self.u8()?).ok_or_else(|| corrupt("unknown activation"))?;
            let mut w = Array2::zeros((out, inp));
            self.fill(w.iter_mut())?;
            let mut b = Array1::zeros(out);
            self.fill(b.iter_mut())?;
            layers.push(Layer { w, b, act });
        }
        let net = Network { layers };
        if net
            .layers
            .windows(2)
            .any(|p| p[0].w.nrows() != p[1].w.ncols())
        {
            return Err(corrupt("layer shapes do not chain"));
        }
        Ok(net)
    }

    fn grads(&mut self, like: &Network) -> Result<Grads> {
        let mut g = Grads::zeros_like(like);
        for (w, b) in g.w.iter_mut().zip(g.b.iter_mut()) {
            self.fill(w.iter_mut())?;
            self.fill(b.iter_mut())?;
        }
        Ok(g)
    }

    pub fn adam(&mut self, like: &Network) -> Result<Adam> {
        let (lr, beta1, beta2, eps) = (self.f64()?, self.f64()?, self.f64()?, self.f64()?);
        let t = self.u64()?;
        let m = self.grads(like)?;
        let v = self.grads(like)?;
        Ok(Adam {
            lr,
            beta1,
            beta2,
            eps,
            t,
            m,
            v,
        })
    }

    pub fn scalar_adam(&mut self) -> Result<ScalarAdam> {
        Ok(ScalarAdam {
            lr: self.f64()?,
            t: self.u64()?,
            m: self.f64()?,
            v: self.f64()?,
        })
    }
}

/// Write `bytes` to `path` through a temporary sibling and a rename so a
/// crash never leaves a half-written file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Save a single network as a standalone file.
pub fn save_network(net: &Network, path: &Path) -> Result<()> {
    let mut enc = Encoder::new(Vec::new());
    enc.header()
        .and_then(|_| enc.network(net))
        .map_err(|e| Error::io(path, e))?;
    let bytes = enc.finish().map_err(|e| Error::io(path, e))?;
    write_atomic(path, &bytes)
}

pub fn load_network(path: &Path) -> Result<Network> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut dec = Decoder::new(bytes.as_slice());
    let with_path = |e: Error| match e {
        Error::Checkpoint { reason, .. } => Error::Checkpoint {
            path: path.to_path_buf(),
            reason,
        },
        other => other,
    };
    dec.header().map_err(with_path)?;
    let net = dec.network().map_err(with_path)?;
    dec.finish().map_err(with_path)?;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn network_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.bin");
        let net = Network::new(&[8, 32, 32, 6], 11).unwrap();
        save_network(&net, &path).unwrap();
        let back = load_network(&path).unwrap();
        assert_eq!(back, net);
        assert!(net
            .params()
            .zip(back.params())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn truncation_and_bad_magic_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.bin");
        save_network(&Network::new(&[3, 4, 2], 1).unwrap(), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 7]).unwrap();
        assert!(matches!(load_network(&path), Err(Error::Checkpoint { .. })));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(load_network(&path), Err(Error::Checkpoint { .. })));
        let mut ver = bytes;
        ver[8] = 9;
        std::fs::write(&path, &ver).unwrap();
        let err = load_network(&path).unwrap_err().to_string();
        assert!(err.contains("version"), "{err}");
    }
}
