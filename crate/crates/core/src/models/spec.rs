use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    ReseBilstm,
    Lstm,
    Bilstm,
    Gru,
    Rnn,
    Cnn,
    /// Encoder without residual additions.
    M1EBilstm,
    /// Attention and its norm only, no feed-forward block.
    M2ABilstm,
    /// Full encoder in front of a forward-only LSTM.
    M4ReseLstm,
}

impl Architecture {
    pub const ALL: [Architecture; 9] = [
        Self::ReseBilstm,
        Self::Lstm,
        Self::Bilstm,
        Self::Gru,
        Self::Rnn,
        Self::Cnn,
        Self::M1EBilstm,
        Self::M2ABilstm,
        Self::M4ReseLstm,
    ];

    /// The six architectures of the main comparison, in report order.
    pub const COMPARED: [Architecture; 6] =
        [Self::Lstm, Self::Bilstm, Self::Gru, Self::Cnn, Self::Rnn, Self::ReseBilstm];

    pub fn tag(self) -> &'static str {
        match self {
            Self::ReseBilstm => "rese_bilstm",
            Self::Lstm => "lstm",
            Self::Bilstm => "bilstm",
            Self::Gru => "gru",
            Self::Rnn => "rnn",
            Self::Cnn => "cnn",
            Self::M1EBilstm => "m1_e_bilstm",
            Self::M2ABilstm => "m2_a_bilstm",
            Self::M4ReseLstm => "m4_rese_lstm",
        }
    }

    /// Name used in result tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Self::ReseBilstm => "ResE-BiLSTM",
            Self::Lstm => "LSTM",
            Self::Bilstm => "BiLSTM",
            Self::Gru => "GRU",
            Self::Rnn => "RNN",
            Self::Cnn => "CNN",
            Self::M1EBilstm => "E-BiLSTM",
            Self::M2ABilstm => "A-BiLSTM",
            Self::M4ReseLstm => "ResE-LSTM",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| Error::Config(format!("unknown architecture tag {s:?}")))
    }
}

/// Hyperparameters that fully determine a network and its initialization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub architecture: Architecture,
    /// Input months per sample.
    pub steps: usize,
    /// Encoded feature width per month.
    pub features: usize,
    pub hidden: usize,
    pub heads: usize,
    pub key_width: usize,
    pub head_hidden: usize,
    pub dropout: f64,
    pub conv_channels: usize,
    pub conv_kernel: usize,
    pub seed: u64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            architecture: Architecture::ReseBilstm,
            steps: 14,
            features: 17,
            hidden: 64,
            heads: 4,
            key_width: 16,
            head_hidden: 64,
            dropout: 0.1,
            conv_channels: 64,
            conv_kernel: 3,
            seed: 0,
        }
    }
}

impl ModelSpec {
    pub fn new(architecture: Architecture) -> Self {
        Self {
            architecture,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("steps", self.steps),
            ("features", self.features),
            ("hidden", self.hidden),
            ("heads", self.heads),
            ("key_width", self.key_width),
            ("head_hidden", self.head_hidden),
            ("conv_channels", self.conv_channels),
            ("conv_kernel", self.conv_kernel),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("model {name} must be positive")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout rate {} outside [0, 1)", self.dropout)));
        }
        if self.architecture == Architecture::Cnn && self.conv_kernel > self.steps {
            return Err(Error::Config(format!(
                "conv kernel {} longer than {} input steps",
                self.conv_kernel, self.steps
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    M1,
    M2,
    M3,
    M4,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Self::M1, Self::M2, Self::M3, Self::M4];
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "M1" => Ok(Self::M1),
            "M2" => Ok(Self::M2),
            "M3" => Ok(Self::M3),
            "M4" => Ok(Self::M4),
            _ => Err(Error::Config(format!("unknown ablation variant {s:?}"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Spec of an ablated model derived from a full ResE-BiLSTM spec.
pub fn ablation_variant(base: &ModelSpec, which: Variant) -> Result<ModelSpec> {
    if base.architecture != Architecture::ReseBilstm {
        return Err(Error::Config(format!(
            "ablations derive from rese_bilstm, not {}",
            base.architecture
        )));
    }
    let architecture = match which {
        Variant::M1 => Architecture::M1EBilstm,
        Variant::M2 => Architecture::M2ABilstm,
        Variant::M3 => Architecture::Bilstm,
        Variant::M4 => Architecture::M4ReseLstm,
    };
    Ok(ModelSpec {
        architecture,
        ..base.clone()
    })
}
