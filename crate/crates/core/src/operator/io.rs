use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mionet::{Framework, MioNet, Normalization};
use super::mlp::MlpSpec;
use crate::error::{Error, Result};
use crate::pdegen::{read_array, read_bytes, write_array, write_bytes};
use crate::scalar::Real;

pub const MODEL_FORMAT: &str = "deformnet-model-1";
const MAGIC: &[u8; 8] = b"DEFMODEL";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub format: String,
    pub framework: Framework,
    pub branches: Vec<MlpSpec>,
    pub trunk: MlpSpec,
    pub p: usize,
    pub outputs: usize,
    pub norm: Normalization,
    pub encoder_hash: String,
    pub n_params: usize,
}

impl<T: Real> MioNet<T> {
    pub fn header(&self) -> ModelHeader {
        ModelHeader {
            format: MODEL_FORMAT.into(),
            framework: self.framework,
            branches: self.branches.clone(),
            trunk: self.trunk.clone(),
            p: self.p,
            outputs: self.outputs,
            norm: self.norm.clone(),
            encoder_hash: self.encoder_hash.clone(),
            n_params: self.params.len(),
        }
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        write_bytes(w, serde_json::to_string(&self.header())?.as_bytes())?;
        let p: Vec<f64> = self.params.iter().map(|v| v.as_f64()).collect();
        write_array(w, &p)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a model file".into()));
        }
        let h: ModelHeader = serde_json::from_slice(&read_bytes(r)?)?;
        if h.format != MODEL_FORMAT {
            return Err(Error::Format(format!("unsupported model format {}", h.format)));
        }
        let params = read_array(r)?;
        let expected: usize = h.branches.iter().map(|b| b.n_params()).sum::<usize>() + h.trunk.n_params();
        if params.len() != expected || h.n_params != expected {
            return Err(Error::Format(format!("{} weights for an architecture with {expected}", params.len())));
        }
        if h.branches.is_empty() || h.branches.iter().any(|b| b.output_len() != h.p) || h.trunk.output_len() != h.p * h.outputs {
            return Err(Error::Format("branch and trunk widths disagree".into()));
        }
        Ok(Self {
            framework: h.framework,
            branches: h.branches,
            trunk: h.trunk,
            p: h.p,
            outputs: h.outputs,
            norm: h.norm,
            encoder_hash: h.encoder_hash,
            params: params.into_iter().map(T::lit).collect(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::ModelConfig;

    #[test]
    fn round_trip_is_exact() {
        let cfg = ModelConfig { p: 5, domain_hidden: vec![7], input_hidden: vec![], trunk_hidden: vec![6], ..Default::default() };
        let m = MioNet::<f64>::new(Framework::D2d, 4, &[3], 2, &cfg).unwrap();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        let back = MioNet::<f64>::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, m);
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        assert_eq!(buf, again);
        buf[0] = b'X';
        assert!(MioNet::<f64>::read_from(&mut buf.as_slice()).is_err());
    }
}
