//! Binary model file.
//!
//! Little-endian: magic `GFRM`, version `u16`, input width, hidden layer
//! count, hidden width and output width as `u32`, then the feature scaler
//! (means and standard deviations as `f64`), then every layer's weights
//! (row-major, `out x in`) followed by its biases, all `f32`.

use std::io::{Read, Write};
use std::path::Path;

use super::{MlpArchitecture, MlpModel};
use crate::dataset::FeatureScaler;
use crate::error::{Error, Result};
use crate::io::{write_atomic, Cursor};

pub const MODEL_MAGIC: &[u8; 4] = b"GFRM";
pub const MODEL_VERSION: u16 = 1;

pub fn write_model(model: &MlpModel, w: &mut impl Write) -> std::io::Result<()> {
    let a = &model.arch;
    let mut buf = Vec::with_capacity(22 + 16 * a.input_dim + 4 * model.param_count());
    buf.extend_from_slice(MODEL_MAGIC);
    buf.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    for v in [a.input_dim, a.hidden_layers, a.hidden_width, a.output_dim] {
        buf.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for v in model.scaler.mean.iter().chain(&model.scaler.std) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for layer in &model.layers {
        for &p in layer.weights.iter().chain(&layer.bias) {
            buf.extend_from_slice(&(p as f32).to_le_bytes());
        }
    }
    w.write_all(&buf)
}

pub fn read_model(r: &mut impl Read) -> Result<MlpModel> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| Error::Format {
        offset: 0,
        message: e.to_string(),
    })?;
    let mut c = Cursor {
        bytes: &bytes,
        pos: 0,
    };
    if c.take(4, "magic")? != MODEL_MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: "bad magic, expected \"GFRM\"".into(),
        });
    }
    let version = c.u16("version")?;
    if version != MODEL_VERSION {
        return Err(Error::Format {
            offset: 4,
            message: format!("unsupported model version {version}"),
        });
    }
    let dims_at = c.pos as u64;
    let arch = MlpArchitecture {
        input_dim: c.u32("input width")? as usize,
        hidden_layers: c.u32("hidden layer count")? as usize,
        hidden_width: c.u32("hidden width")? as usize,
        output_dim: c.u32("output width")? as usize,
    };
    arch.validate().map_err(|e| Error::Format {
        offset: dims_at,
        message: e.to_string(),
    })?;
    let expected = 16 * arch.input_dim as u64 + 4 * arch.parameter_count() as u64;
    let remaining = (bytes.len() - c.pos) as u64;
    if remaining != expected {
        return Err(Error::Format {
            offset: c.pos as u64,
            message: format!("payload is {remaining} bytes, architecture needs {expected}"),
        });
    }
    let mut scaler = FeatureScaler::identity(arch.input_dim);
    for v in scaler.mean.iter_mut().chain(scaler.std.iter_mut()) {
        *v = c.f64("scaler")?;
    }
    let mut model = MlpModel::zeros(arch);
    model.scaler = scaler;
    for layer in &mut model.layers {
        for p in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
            *p = f64::from(c.f32("parameter")?);
        }
    }
    Ok(model)
}

pub fn save_model(path: &Path, model: &MlpModel) -> Result<()> {
    write_atomic(path, |w| write_model(model, w))
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(&mut std::io::BufReader::new(file))
}
