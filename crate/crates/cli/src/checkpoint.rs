//! Binary model files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "VDSC"  u32 version
//! u64 config length, config text (UTF-8, `key = value` lines)
//! u32 tensor count, then per tensor:
//!     u32 name length, name, u32 rank, rank x u64 dims, f64 payload
//! ```

use std::path::Path;

use vadesc_core::nn::{Activation, DenseLayer, DenseNet};
use vadesc_core::{Error, FeatureKind, Location, Matrix, PreprocessStats, VadescParams};

use crate::config::RunConfig;
use crate::error::{io_at, CliResult};

pub const MAGIC: &[u8; 4] = b"VDSC";
pub const VERSION: u32 = 1;

/// A trained model with the run settings and the training-split statistics
/// needed to preprocess new data.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: RunConfig,
    pub params: VadescParams,
    pub stats: PreprocessStats,
}

struct Tensor {
    name: String,
    dims: Vec<usize>,
    data: Vec<f64>,
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_tensor(out: &mut Vec<u8>, name: &str, dims: &[usize], data: &[f64]) {
    put_u32(out, name.len() as u32);
    out.extend_from_slice(name.as_bytes());
    put_u32(out, dims.len() as u32);
    for d in dims {
        put_u64(out, *d as u64);
    }
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn put_net(out: &mut Vec<u8>, prefix: &str, net: &DenseNet) {
    for (i, l) in net.layers().iter().enumerate() {
        put_tensor(out, &format!("{prefix}.{i}.weight"), &[l.weight.rows(), l.weight.cols()], l.weight.as_slice());
        put_tensor(out, &format!("{prefix}.{i}.bias"), &[l.bias.len()], &l.bias);
    }
}

fn format_error(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        location: Location::Byte(offset as u64),
        message: message.into(),
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], Error> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(format_error(
                self.pos,
                format!("truncated file: {what} needs {n} bytes, {} left", self.bytes.len() - self.pos),
            )),
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32, Error> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64, Error> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn len(&mut self, what: &str) -> Result<usize, Error> {
        let at = self.pos;
        let v = self.u64(what)?;
        usize::try_from(v).map_err(|_| format_error(at, format!("{what} {v} does not fit in memory")))
    }

    fn tensor(&mut self) -> Result<Tensor, Error> {
        let name_len = self.u32("tensor name length")? as usize;
        let at = self.pos;
        let name = std::str::from_utf8(self.take(name_len, "tensor name")?)
            .map_err(|_| format_error(at, "tensor name is not UTF-8"))?
            .to_string();
        let rank = self.u32("tensor rank")? as usize;
        let mut dims = Vec::with_capacity(rank.min(8));
        for _ in 0..rank {
            dims.push(self.len("tensor dimension")?);
        }
        let at = self.pos;
        let count = dims
            .iter()
            .try_fold(1usize, |acc, d| acc.checked_mul(*d))
            .and_then(|c| c.checked_mul(8))
            .ok_or_else(|| format_error(at, format!("tensor {name} dimensions overflow")))?;
        let payload = self.take(count, &format!("tensor {name}"))?;
        let data = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Tensor { name, dims, data })
    }
}

struct Tensors {
    items: Vec<(usize, Tensor)>,
}

impl Tensors {
    fn take(&mut self, name: &str) -> Result<(usize, Tensor), Error> {
        let idx = self
            .items
            .iter()
            .position(|(_, t)| t.name == name)
            .ok_or_else(|| format_error(0, format!("missing tensor {name}")))?;
        Ok(self.items.remove(idx))
    }

    fn vector(&mut self, name: &str) -> Result<Vec<f64>, Error> {
        let (at, t) = self.take(name)?;
        if t.dims.len() != 1 {
            return Err(format_error(at, format!("tensor {name} must have rank 1, has rank {}", t.dims.len())));
        }
        Ok(t.data)
    }

    fn matrix(&mut self, name: &str) -> Result<Matrix, Error> {
        let (at, t) = self.take(name)?;
        match t.dims[..] {
            [r, c] => Matrix::from_vec(r, c, t.data),
            _ => Err(format_error(at, format!("tensor {name} must have rank 2, has rank {}", t.dims.len()))),
        }
    }

    fn scalar(&mut self, name: &str) -> Result<f64, Error> {
        let (at, t) = self.take(name)?;
        match t.data[..] {
            [v] if t.dims == [1] => Ok(v),
            _ => Err(format_error(at, format!("tensor {name} must hold a single value"))),
        }
    }

    fn net(&mut self, prefix: &str) -> Result<DenseNet, Error> {
        let mut layers = Vec::new();
        while self.items.iter().any(|(_, t)| t.name == format!("{prefix}.{}.weight", layers.len())) {
            let i = layers.len();
            let weight = self.matrix(&format!("{prefix}.{i}.weight"))?;
            let bias = self.vector(&format!("{prefix}.{i}.bias"))?;
            layers.push(DenseLayer {
                weight,
                bias,
                activation: Activation::Relu,
            });
        }
        match layers.last_mut() {
            Some(last) => last.activation = Activation::Identity,
            None => return Err(format_error(0, format!("missing tensor {prefix}.0.weight"))),
        }
        DenseNet::new(layers)
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, VERSION);
        let mut config = self.config.clone();
        config.feature_kind = Some(self.stats.feature_kind);
        config.train.recon_loss = self.params.recon_loss;
        let text = config.to_text();
        put_u64(&mut out, text.len() as u64);
        out.extend_from_slice(text.as_bytes());

        let p = &self.params;
        let count = 2 * (p.encoder.layers().len() + p.decoder.layers().len())
            + 8
            + usize::from(p.latent_centers.is_some());
        put_u32(&mut out, count as u32);
        put_net(&mut out, "encoder", &p.encoder);
        put_net(&mut out, "decoder", &p.decoder);
        put_tensor(&mut out, "mixture_logits", &[p.mixture_logits.len()], &p.mixture_logits);
        for (name, m) in [("means", &p.means), ("log_vars", &p.log_vars), ("betas", &p.betas)] {
            put_tensor(&mut out, name, &[m.rows(), m.cols()], m.as_slice());
        }
        put_tensor(&mut out, "shape", &[1], &[p.shape]);
        if let Some(c) = &p.latent_centers {
            put_tensor(&mut out, "latent_centers", &[c.rows(), c.cols()], c.as_slice());
        }
        put_tensor(&mut out, "stats.max_time", &[1], &[self.stats.max_time]);
        put_tensor(&mut out, "stats.means", &[self.stats.means.len()], &self.stats.means);
        put_tensor(&mut out, "stats.stds", &[self.stats.stds.len()], &self.stats.stds);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> CliResult<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(4, "magic")?;
        if magic != MAGIC {
            return Err(format_error(0, format!("bad magic {magic:?}, expected \"VDSC\"")).into());
        }
        let at = r.pos;
        let version = r.u32("version")?;
        if version != VERSION {
            return Err(format_error(at, format!("unsupported version {version}, expected {VERSION}")).into());
        }
        let text_len = r.len("config length")?;
        let at = r.pos;
        let text = std::str::from_utf8(r.take(text_len, "config text")?)
            .map_err(|_| format_error(at, "config text is not UTF-8"))?;
        let config = RunConfig::parse(text).map_err(|e| format_error(at, format!("config text: {}", e.message())))?;
        let count = r.u32("tensor count")? as usize;
        let mut items = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let at = r.pos;
            let t = r.tensor()?;
            if items.iter().any(|(_, u): &(usize, Tensor)| u.name == t.name) {
                return Err(format_error(at, format!("duplicate tensor {}", t.name)).into());
            }
            items.push((at, t));
        }
        if r.pos != bytes.len() {
            return Err(format_error(r.pos, format!("{} trailing bytes", bytes.len() - r.pos)).into());
        }

        let mut tensors = Tensors { items };
        let encoder = tensors.net("encoder")?;
        let decoder = tensors.net("decoder")?;
        let mixture_logits = tensors.vector("mixture_logits")?;
        let means = tensors.matrix("means")?;
        let log_vars = tensors.matrix("log_vars")?;
        let betas = tensors.matrix("betas")?;
        let shape = tensors.scalar("shape")?;
        let latent_centers = if tensors.items.iter().any(|(_, t)| t.name == "latent_centers") {
            Some(tensors.matrix("latent_centers")?)
        } else {
            None
        };
        let stats = PreprocessStats {
            max_time: tensors.scalar("stats.max_time")?,
            feature_kind: config.feature_kind.unwrap_or(FeatureKind::Real),
            means: tensors.vector("stats.means")?,
            stds: tensors.vector("stats.stds")?,
        };
        if let Some((at, t)) = tensors.items.first() {
            return Err(format_error(*at, format!("unexpected tensor {}", t.name)).into());
        }
        let params = VadescParams {
            encoder,
            decoder,
            recon_loss: config.train.recon_loss,
            mixture_logits,
            means,
            log_vars,
            betas,
            shape,
            latent_centers,
        };
        params.validate()?;
        if stats.feature_kind == FeatureKind::Real
            && (stats.means.len() != params.input_dim() || stats.stds.len() != params.input_dim())
        {
            return Err(Error::Format {
                location: Location::Header,
                message: format!("feature statistics cover {} columns, model expects {}", stats.means.len(), params.input_dim()),
            }
            .into());
        }
        Ok(Checkpoint { config, params, stats })
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_bytes()).map_err(io_at(path))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let bytes = std::fs::read(path).map_err(io_at(path))?;
        Checkpoint::from_bytes(&bytes)
    }
}
