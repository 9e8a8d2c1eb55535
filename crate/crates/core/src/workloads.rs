//! CNN conv-layer tables.
//!
//! Networks are described in TOML:
//!
//! ```toml
//! name = "tiny"
//! chained = true        # optional: check out_channels[i] == in_channels[i+1]
//!
//! [[layers]]
//! in_size = 8
//! kernel = 3
//! stride = 1
//! in_channels = 1
//! out_channels = 1
//! padding = "same"      # optional, "same" (default) or "valid"
//! ```
//!
//! Pooling and activations are not compute; they show up only as a change
//! of `in_size` between entries. Residual adds are ignored.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorkloadError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("layer {layer}: {field} {reason}")]
    Validation { layer: usize, field: &'static str, reason: String },
    #[error("network has no layers")]
    Empty,
    #[error("unknown network '{0}' (known: alexnet, vgg16, resnet18, resnet34, resnet32, resnet50)")]
    UnknownNetwork(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerPadding {
    /// Output is `ceil(S_i / stride)` wide.
    #[default]
    Same,
    /// Output is `floor((S_i - S_k) / stride) + 1` wide.
    Valid,
}

/// One convolution layer with square inputs and kernels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub in_size: usize,
    pub kernel: usize,
    pub stride: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    #[serde(default)]
    pub padding: LayerPadding,
}

impl LayerSpec {
    pub fn new(in_size: usize, kernel: usize, stride: usize, in_channels: usize, out_channels: usize) -> Self {
        Self { name: None, in_size, kernel, stride, in_channels, out_channels, padding: LayerPadding::Same }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_padding(mut self, padding: LayerPadding) -> Self {
        self.padding = padding;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn out_size(&self) -> usize {
        match self.padding {
            LayerPadding::Same => self.in_size.div_ceil(self.stride),
            LayerPadding::Valid => (self.in_size - self.kernel) / self.stride + 1,
        }
    }

    /// Multiply-accumulates for one inference.
    pub fn macs(&self) -> u64 {
        let out = self.out_size() as u64;
        out * out * (self.kernel * self.kernel * self.in_channels * self.out_channels) as u64
    }

    pub fn validate(&self, index: usize) -> Result<(), WorkloadError> {
        let bad = |field, reason: &str| WorkloadError::Validation { layer: index, field, reason: reason.into() };
        for (field, v) in [
            ("in_size", self.in_size),
            ("kernel", self.kernel),
            ("stride", self.stride),
            ("in_channels", self.in_channels),
            ("out_channels", self.out_channels),
        ] {
            if v == 0 {
                return Err(bad(field, "must be a positive integer"));
            }
        }
        if self.kernel > self.in_size {
            return Err(bad("kernel", &format!("{} exceeds in_size {}", self.kernel, self.in_size)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub chained: bool,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        if self.layers.is_empty() {
            return Err(WorkloadError::Empty);
        }
        for (i, l) in self.layers.iter().enumerate() {
            l.validate(i)?;
        }
        if self.chained {
            for (i, w) in self.layers.windows(2).enumerate() {
                if w[0].out_channels != w[1].in_channels {
                    return Err(WorkloadError::Validation {
                        layer: i + 1,
                        field: "in_channels",
                        reason: format!(
                            "{} does not match previous out_channels {}",
                            w[1].in_channels, w[0].out_channels
                        ),
                    });
                }
                if w[1].in_size > w[0].out_size() {
                    return Err(WorkloadError::Validation {
                        layer: i + 1,
                        field: "in_size",
                        reason: format!("{} exceeds previous output size {}", w[1].in_size, w[0].out_size()),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn total_macs(&self) -> u64 {
        self.layers.iter().map(LayerSpec::macs).sum()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("network spec serializes")
    }
}

pub fn parse_network(doc: &str) -> Result<NetworkSpec, WorkloadError> {
    let net: NetworkSpec = toml::from_str(doc).map_err(|e| {
        let line = e.span().map(|s| doc[..s.start.min(doc.len())].lines().count().max(1)).unwrap_or(0);
        WorkloadError::Parse { line, message: e.message().to_string() }
    })?;
    net.validate()?;
    Ok(net)
}

pub const BUILTIN_NETWORKS: [&str; 5] = ["alexnet", "vgg16", "resnet18", "resnet34", "resnet50"];

pub fn builtin_network(name: &str) -> Result<NetworkSpec, WorkloadError> {
    let layers = match name.to_ascii_lowercase().as_str() {
        "alexnet" => alexnet(),
        "vgg16" => vgg16(),
        "resnet18" => resnet_basic(&[2, 2, 2, 2]),
        // "resnet32" is accepted as a name for the same 34-layer table
        "resnet34" | "resnet32" => resnet_basic(&[3, 4, 6, 3]),
        "resnet50" => resnet_bottleneck(&[3, 4, 6, 3]),
        _ => return Err(WorkloadError::UnknownNetwork(name.to_string())),
    };
    let canonical = if name.eq_ignore_ascii_case("resnet32") { "resnet34" } else { name };
    Ok(NetworkSpec { name: canonical.to_ascii_lowercase(), chained: false, layers })
}

fn conv(name: String, in_size: usize, kernel: usize, stride: usize, cin: usize, cout: usize) -> LayerSpec {
    LayerSpec::new(in_size, kernel, stride, cin, cout).named(name)
}

fn alexnet() -> Vec<LayerSpec> {
    vec![
        conv("conv1".into(), 224, 11, 4, 3, 64),
        conv("conv2".into(), 27, 5, 1, 64, 192),
        conv("conv3".into(), 13, 3, 1, 192, 384),
        conv("conv4".into(), 13, 3, 1, 384, 256),
        conv("conv5".into(), 13, 3, 1, 256, 256),
    ]
}

fn vgg16() -> Vec<LayerSpec> {
    let stages: [(usize, &[usize]); 5] =
        [(224, &[64, 64]), (112, &[128, 128]), (56, &[256, 256, 256]), (28, &[512, 512, 512]), (14, &[512, 512, 512])];
    let mut layers = Vec::new();
    let mut cin = 3;
    for (s, (size, widths)) in stages.iter().enumerate() {
        for (i, &w) in widths.iter().enumerate() {
            layers.push(conv(format!("conv{}_{}", s + 1, i + 1), *size, 3, 1, cin, w));
            cin = w;
        }
    }
    layers
}

fn resnet_stem() -> Vec<LayerSpec> {
    vec![conv("conv1".into(), 224, 7, 2, 3, 64)]
}

fn resnet_basic(blocks: &[usize; 4]) -> Vec<LayerSpec> {
    let mut layers = resnet_stem();
    let (mut size, mut cin) = (56, 64);
    for (stage, &n) in blocks.iter().enumerate() {
        let width = 64 << stage;
        for b in 0..n {
            let stride = if stage > 0 && b == 0 { 2 } else { 1 };
            let tag = format!("layer{}.{}", stage + 1, b);
            layers.push(conv(format!("{tag}.conv1"), size, 3, stride, cin, width));
            if stride != 1 || cin != width {
                layers.push(conv(format!("{tag}.downsample"), size, 1, stride, cin, width));
            }
            size = size.div_ceil(stride);
            layers.push(conv(format!("{tag}.conv2"), size, 3, 1, width, width));
            cin = width;
        }
    }
    layers
}

fn resnet_bottleneck(blocks: &[usize; 4]) -> Vec<LayerSpec> {
    let mut layers = resnet_stem();
    let (mut size, mut cin) = (56, 64);
    for (stage, &n) in blocks.iter().enumerate() {
        let width = 64 << stage;
        let out = width * 4;
        for b in 0..n {
            let stride = if stage > 0 && b == 0 { 2 } else { 1 };
            let tag = format!("layer{}.{}", stage + 1, b);
            layers.push(conv(format!("{tag}.conv1"), size, 1, 1, cin, width));
            layers.push(conv(format!("{tag}.conv2"), size, 3, stride, width, width));
            if stride != 1 || cin != out {
                layers.push(conv(format!("{tag}.downsample"), size, 1, stride, cin, out));
            }
            size = size.div_ceil(stride);
            layers.push(conv(format!("{tag}.conv3"), size, 1, 1, width, out));
            cin = out;
        }
    }
    layers
}
