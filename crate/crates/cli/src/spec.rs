//! Chain specification documents.

use pstlab::pst::PstConfig;
use pstlab::surgery::surgery_chain;
use pstlab::{JacobiMatrix, KrawtchoukParams, Normalization, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ChainSpec {
    Explicit {
        offdiag: Vec<f64>,
        diag: Vec<f64>,
    },
    Krawtchouk {
        p: f64,
        #[serde(rename = "M")]
        m: usize,
        #[serde(default = "orthonormal")]
        normalization: Normalization,
    },
    Spectrum {
        eigenvalues: Vec<f64>,
        weights: Vec<f64>,
    },
    Surgery {
        base: Box<ChainSpec>,
        remove: Vec<usize>,
    },
    Xkrawtchouk {
        #[serde(rename = "N")]
        n: usize,
        p: f64,
    },
}

fn orthonormal() -> Normalization {
    Normalization::Orthonormal
}

impl ChainSpec {
    pub fn parse(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// The Jacobi matrix described by the spec; `None` for the X-walk,
    /// which is a band matrix rather than a chain.
    pub fn build(&self, config: &PstConfig) -> Result<Option<JacobiMatrix>> {
        Ok(Some(match self {
            ChainSpec::Explicit { offdiag, diag } => JacobiMatrix::new(offdiag.clone(), diag.clone())?,
            ChainSpec::Krawtchouk { p, m, .. } => JacobiMatrix::krawtchouk(KrawtchoukParams::new(*p, *m)?)?,
            ChainSpec::Spectrum { eigenvalues, weights } => {
                pstlab::spectral::jacobi_from_spectrum(eigenvalues, weights)?
            }
            ChainSpec::Surgery { base, remove } => {
                let Some(j) = base.build(config)? else {
                    return Err(pstlab::Error::Invalid("surgery needs a chain as its base".into()));
                };
                surgery_chain(&j, remove, config)?.0
            }
            ChainSpec::Xkrawtchouk { .. } => return Ok(None),
        }))
    }
}
