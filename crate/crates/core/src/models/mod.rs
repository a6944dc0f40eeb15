//! The six compared architectures and the ablation variants behind one
//! forward interface.

mod spec;

pub use spec::{ablation_variant, Architecture, ModelSpec, Variant};

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::layers::{
    dropout, BiLstm, Conv1d, Dense, FeedForward, GruLayer, Head, LstmDirection, MultiHeadAttention, ResidualNorm,
    RnnLayer,
};
use crate::tensor::{checkpoint, Bound, NumArray, ParameterSet, Tape, Var};

/// Largest and smallest probabilities ever reported; keeps every prediction
/// strictly inside (0, 1) even when the logit saturates the sigmoid.
const PROB_FLOOR: f64 = f64::MIN_POSITIVE;
const PROB_CEIL: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Clone, Debug)]
struct Encoder {
    attention: MultiHeadAttention,
    norm_attention: ResidualNorm,
    ffn: Option<(FeedForward, ResidualNorm)>,
}

#[derive(Clone, Debug)]
enum Sequence {
    Bi(BiLstm),
    Lstm(LstmDirection),
    Gru(GruLayer),
    Rnn(RnnLayer),
}

#[derive(Clone, Debug)]
enum Graph {
    Recurrent {
        encoder: Option<Encoder>,
        sequence: Sequence,
        head: Head,
    },
    Convolutional {
        conv: Conv1d,
        output: Dense,
    },
}

impl Graph {
    fn from_spec(spec: &ModelSpec) -> Result<Self> {
        use Architecture::*;
        let (f, h) = (spec.features, spec.hidden);
        if let Cnn = spec.architecture {
            return Ok(Graph::Convolutional {
                conv: Conv1d::new("conv", f, spec.conv_channels, spec.conv_kernel),
                output: Dense::new("output", spec.conv_channels, 1),
            });
        }
        let encoder = match spec.architecture {
            ReseBilstm | M1EBilstm | M2ABilstm | M4ReseLstm => {
                let residual = spec.architecture != M1EBilstm;
                let ffn = (spec.architecture != M2ABilstm).then(|| {
                    (
                        FeedForward::new("encoder.ffn", f),
                        ResidualNorm::new("encoder.norm_ffn", f, residual),
                    )
                });
                Some(Encoder {
                    attention: MultiHeadAttention::new("encoder.attention", f, spec.heads, spec.key_width)?,
                    norm_attention: ResidualNorm::new("encoder.norm_attention", f, residual),
                    ffn,
                })
            }
            _ => None,
        };
        let (sequence, width) = match spec.architecture {
            ReseBilstm | M1EBilstm | M2ABilstm | Bilstm => (Sequence::Bi(BiLstm::new("bilstm", f, h)), 2 * h),
            M4ReseLstm | Lstm => (Sequence::Lstm(LstmDirection::new("lstm", f, h)), h),
            Gru => (Sequence::Gru(GruLayer::new("gru", f, h)), h),
            Rnn => (Sequence::Rnn(RnnLayer::new("rnn", f, h)), h),
            Cnn => unreachable!(),
        };
        Ok(Graph::Recurrent {
            encoder,
            sequence,
            head: Head::new("head", spec.steps * width, spec.head_hidden),
        })
    }

    fn init(&self, params: &mut ParameterSet, rng: &mut ChaCha8Rng) -> Result<()> {
        match self {
            Graph::Recurrent {
                encoder,
                sequence,
                head,
            } => {
                if let Some(enc) = encoder {
                    enc.attention.init(params, rng)?;
                    enc.norm_attention.init(params)?;
                    if let Some((ffn, norm)) = &enc.ffn {
                        ffn.init(params, rng)?;
                        norm.init(params)?;
                    }
                }
                match sequence {
                    Sequence::Bi(l) => l.init(params, rng)?,
                    Sequence::Lstm(l) => l.init(params, rng)?,
                    Sequence::Gru(l) => l.init(params, rng)?,
                    Sequence::Rnn(l) => l.init(params, rng)?,
                }
                head.init(params, rng)
            }
            Graph::Convolutional { conv, output } => {
                conv.init(params, rng)?;
                output.init(params, rng)
            }
        }
    }
}

/// A built network: its spec, its parameters and the layer graph.
#[derive(Clone, Debug)]
pub struct Model {
    pub spec: ModelSpec,
    pub params: ParameterSet,
    graph: Graph,
}

impl Model {
    /// Builds the graph and initializes parameters from `spec.seed`.
    pub fn build(spec: ModelSpec) -> Result<Self> {
        spec.validate()?;
        let graph = Graph::from_spec(&spec)?;
        let mut params = ParameterSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        graph.init(&mut params, &mut rng)?;
        Ok(Self { spec, params, graph })
    }

    /// Rebuilds a model around existing parameters, checking that names and
    /// shapes match what the spec would create.
    pub fn from_parts(spec: ModelSpec, params: ParameterSet) -> Result<Self> {
        let fresh = Self::build(spec)?;
        if fresh.params.len() != params.len() {
            return Err(Error::Format(format!(
                "expected {} parameters for {}, found {}",
                fresh.params.len(),
                fresh.spec.architecture,
                params.len()
            )));
        }
        for (name, value) in fresh.params.iter() {
            match params.get(name) {
                Some(v) if v.shape() == value.shape() => {}
                Some(v) => {
                    return Err(Error::Format(format!(
                        "parameter {name} has shape {:?}, expected {:?}",
                        v.shape(),
                        value.shape()
                    )))
                }
                None => return Err(Error::Format(format!("missing parameter {name}"))),
            }
        }
        Ok(Self {
            spec: fresh.spec,
            params,
            graph: fresh.graph,
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.params.scalar_count()
    }

    /// Logits `[B]` for `x: [B, T, F]`. Dropout is applied only when `rng`
    /// is given.
    pub fn logits(&self, tape: &mut Tape, p: &Bound, x: Var, mut rng: Option<&mut dyn rand::RngCore>) -> Result<Var> {
        let shape = tape.shape(x).to_vec();
        if shape.len() != 3 || shape[1] != self.spec.steps || shape[2] != self.spec.features {
            return Err(Error::shape(
                "model input",
                &shape,
                &[shape.first().copied().unwrap_or(0), self.spec.steps, self.spec.features],
            ));
        }
        let batch = shape[0];
        match &self.graph {
            Graph::Recurrent {
                encoder,
                sequence,
                head,
            } => {
                let mut h = x;
                if let Some(enc) = encoder {
                    let a = enc.attention.forward(tape, p, h)?;
                    h = enc.norm_attention.forward(tape, p, a, h)?;
                    h = dropout(tape, h, self.spec.dropout, rng.as_deref_mut())?;
                    if let Some((ffn, norm)) = &enc.ffn {
                        let o = ffn.forward(tape, p, h)?;
                        h = norm.forward(tape, p, o, h)?;
                        h = dropout(tape, h, self.spec.dropout, rng.as_deref_mut())?;
                    }
                }
                let seq = match sequence {
                    Sequence::Bi(l) => l.run(tape, p, h)?,
                    Sequence::Lstm(l) => l.forward(tape, p, h)?,
                    Sequence::Gru(l) => l.forward(tape, p, h)?,
                    Sequence::Rnn(l) => l.forward(tape, p, h)?,
                };
                let width = tape.shape(seq)[1] * tape.shape(seq)[2];
                let flat = tape.reshape(seq, &[batch, width])?;
                head.forward(tape, p, flat)
            }
            Graph::Convolutional { conv, output } => {
                let c = conv.forward(tape, p, x)?;
                let pooled = tape.max_over_time(c)?;
                let z = output.forward(tape, p, pooled)?;
                tape.reshape(z, &[batch])
            }
        }
    }

    /// Mean binary cross-entropy of a batch; the training objective.
    pub fn loss(
        &self,
        tape: &mut Tape,
        p: &Bound,
        x: Var,
        labels: &[f64],
        rng: Option<&mut dyn rand::RngCore>,
    ) -> Result<Var> {
        let z = self.logits(tape, p, x, rng)?;
        tape.bce_with_logits(z, labels)
    }

    /// Default probabilities for `batch: [B, T, F]`, evaluation mode.
    pub fn predict(&self, batch: &NumArray) -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let p = self.params.bind(&mut tape);
        let x = tape.constant(batch.clone());
        let z = self.logits(&mut tape, &p, x, None)?;
        let z = tape.sigmoid(z);
        Ok(tape
            .value(z)
            .data()
            .iter()
            .map(|v| v.clamp(PROB_FLOOR, PROB_CEIL))
            .collect())
    }

    /// Writes the parameter container to `path` and the spec next to it.
    pub fn save(&self, path: &Path) -> Result<()> {
        checkpoint::save(path, &self.params)?;
        let text = toml::to_string(&self.spec).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(sidecar_path(path), text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(sidecar_path(path))?;
        let spec: ModelSpec = toml::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
        let params = checkpoint::load(path)?;
        Self::from_parts(spec, params)
    }
}

/// Location of the spec sidecar for a checkpoint at `path`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".toml");
    PathBuf::from(name)
}
