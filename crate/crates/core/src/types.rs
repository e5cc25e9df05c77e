//! Domain types shared by every stage of the pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The seven feature-bearing network layers. The classifier output layer is
/// deliberately not represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LayerId {
    Conv1,
    Conv2,
    Conv3,
    Conv4,
    Conv5,
    Fc6,
    Fc7,
}

impl LayerId {
    pub const ALL: [LayerId; 7] = [
        LayerId::Conv1,
        LayerId::Conv2,
        LayerId::Conv3,
        LayerId::Conv4,
        LayerId::Conv5,
        LayerId::Fc6,
        LayerId::Fc7,
    ];

    pub const COUNT: usize = 7;

    /// Length of the flattened activation at this layer for the reference
    /// 3x227x227 input geometry.
    pub fn flattened_len(self) -> usize {
        match self {
            LayerId::Conv1 => 96 * 55 * 55,
            LayerId::Conv2 => 256 * 27 * 27,
            LayerId::Conv3 => 384 * 13 * 13,
            LayerId::Conv4 => 384 * 13 * 13,
            LayerId::Conv5 => 256 * 13 * 13,
            LayerId::Fc6 => 4096,
            LayerId::Fc7 => 4096,
        }
    }

    /// Activation shape `(channels, height, width)` for conv layers; fully
    /// connected layers report `(units, 1, 1)`.
    pub fn activation_shape(self) -> (usize, usize, usize) {
        match self {
            LayerId::Conv1 => (96, 55, 55),
            LayerId::Conv2 => (256, 27, 27),
            LayerId::Conv3 => (384, 13, 13),
            LayerId::Conv4 => (384, 13, 13),
            LayerId::Conv5 => (256, 13, 13),
            LayerId::Fc6 => (4096, 1, 1),
            LayerId::Fc7 => (4096, 1, 1),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LayerId::Conv1 => "conv1",
            LayerId::Conv2 => "conv2",
            LayerId::Conv3 => "conv3",
            LayerId::Conv4 => "conv4",
            LayerId::Conv5 => "conv5",
            LayerId::Fc6 => "fc6",
            LayerId::Fc7 => "fc7",
        }
    }
}

impl fmt::Display for LayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LayerId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "conv1" => Ok(LayerId::Conv1),
            "conv2" => Ok(LayerId::Conv2),
            "conv3" => Ok(LayerId::Conv3),
            "conv4" => Ok(LayerId::Conv4),
            "conv5" => Ok(LayerId::Conv5),
            "fc6" => Ok(LayerId::Fc6),
            "fc7" => Ok(LayerId::Fc7),
            other => Err(Error::invalid(format!(
                "unknown layer '{other}' (expected one of conv1..conv5, fc6, fc7)"
            ))),
        }
    }
}

impl Serialize for LayerId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for LayerId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The ten visual brain regions. `Lvc`, `Hvc`, and `Vc` are composites whose
/// voxel arrays concatenate their constituents in [`RoiId::composition`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RoiId {
    V1,
    V2,
    V3,
    V4,
    Loc,
    Ffa,
    Ppa,
    Lvc,
    Hvc,
    Vc,
}

impl RoiId {
    pub const ALL: [RoiId; 10] = [
        RoiId::V1,
        RoiId::V2,
        RoiId::V3,
        RoiId::V4,
        RoiId::Loc,
        RoiId::Ffa,
        RoiId::Ppa,
        RoiId::Lvc,
        RoiId::Hvc,
        RoiId::Vc,
    ];

    pub const ATOMIC: [RoiId; 7] = [
        RoiId::V1,
        RoiId::V2,
        RoiId::V3,
        RoiId::V4,
        RoiId::Loc,
        RoiId::Ffa,
        RoiId::Ppa,
    ];

    pub const COMPOSITE: [RoiId; 3] = [RoiId::Lvc, RoiId::Hvc, RoiId::Vc];

    /// Atomic constituents in concatenation order. Atomic regions return
    /// themselves.
    pub fn composition(self) -> &'static [RoiId] {
        match self {
            RoiId::V1 => &[RoiId::V1],
            RoiId::V2 => &[RoiId::V2],
            RoiId::V3 => &[RoiId::V3],
            RoiId::V4 => &[RoiId::V4],
            RoiId::Loc => &[RoiId::Loc],
            RoiId::Ffa => &[RoiId::Ffa],
            RoiId::Ppa => &[RoiId::Ppa],
            RoiId::Lvc => &[RoiId::V1, RoiId::V2, RoiId::V3],
            RoiId::Hvc => &[RoiId::Loc, RoiId::Ffa, RoiId::Ppa],
            RoiId::Vc => &[
                RoiId::V1,
                RoiId::V2,
                RoiId::V3,
                RoiId::V4,
                RoiId::Loc,
                RoiId::Ffa,
                RoiId::Ppa,
            ],
        }
    }

    pub fn is_atomic(self) -> bool {
        self.composition() == [self]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RoiId::V1 => "V1",
            RoiId::V2 => "V2",
            RoiId::V3 => "V3",
            RoiId::V4 => "V4",
            RoiId::Loc => "LOC",
            RoiId::Ffa => "FFA",
            RoiId::Ppa => "PPA",
            RoiId::Lvc => "LVC",
            RoiId::Hvc => "HVC",
            RoiId::Vc => "VC",
        }
    }
}

impl fmt::Display for RoiId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RoiId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "V1" => Ok(RoiId::V1),
            "V2" => Ok(RoiId::V2),
            "V3" => Ok(RoiId::V3),
            "V4" => Ok(RoiId::V4),
            "LOC" => Ok(RoiId::Loc),
            "FFA" => Ok(RoiId::Ffa),
            "PPA" => Ok(RoiId::Ppa),
            "LVC" => Ok(RoiId::Lvc),
            "HVC" => Ok(RoiId::Hvc),
            "VC" => Ok(RoiId::Vc),
            other => Err(Error::invalid(format!(
                "unknown ROI '{other}' (expected one of V1..V4, LOC, FFA, PPA, LVC, HVC, VC)"
            ))),
        }
    }
}

impl Serialize for RoiId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RoiId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A dense 3-channel image with values in `[0, 1]`, stored channel-major,
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl ImageTensor {
    pub const CHANNELS: usize = 3;

    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid("image height and width must be positive"));
        }
        let expected = Self::CHANNELS * height * width;
        if values.len() != expected {
            return Err(Error::shape(
                "image tensor",
                format!("{expected} values (3x{height}x{width})"),
                format!("{} values", values.len()),
            ));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("image tensor at flat index {i}")));
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!(
                    "image value {v} at flat index {i} is outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, channel: usize, y: usize, x: usize) -> f64 {
        self.values[(channel * self.height + y) * self.width + x]
    }
}

/// Flattened post-activation values of one network layer for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub layer: LayerId,
    pub image_id: String,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(layer: LayerId, image_id: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            layer,
            image_id: image_id.into(),
            values,
        }
    }
}

/// One image's voxel responses for one brain region.
#[derive(Debug, Clone, PartialEq)]
pub struct FmriRecord {
    pub roi: RoiId,
    pub image_id: String,
    pub voxels: Vec<f64>,
}

impl FmriRecord {
    pub fn new(roi: RoiId, image_id: impl Into<String>, voxels: Vec<f64>) -> Self {
        Self {
            roi,
            image_id: image_id.into(),
            voxels,
        }
    }
}

/// An attentional-blink magnitude tied to one image. When derived from
/// detection probabilities the value lies in `[-1, 1]`; regression output is
/// not clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbmRecord {
    pub image_id: String,
    pub abm: f64,
}

impl AbmRecord {
    pub fn new(image_id: impl Into<String>, abm: f64) -> Self {
        Self {
            image_id: image_id.into(),
            abm,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_lengths_match_activation_shapes() {
        for layer in LayerId::ALL {
            let (c, h, w) = layer.activation_shape();
            assert_eq!(layer.flattened_len(), c * h * w, "{layer}");
        }
        assert_eq!(LayerId::Conv1.flattened_len(), 290_400);
        assert_eq!(LayerId::Conv2.flattened_len(), 186_624);
        assert_eq!(LayerId::Conv3.flattened_len(), 64_896);
        assert_eq!(LayerId::Conv4.flattened_len(), 64_896);
        assert_eq!(LayerId::Conv5.flattened_len(), 43_264);
        assert_eq!(LayerId::Fc6.flattened_len(), 4096);
        assert_eq!(LayerId::Fc7.flattened_len(), 4096);
    }

    #[test]
    fn exactly_seven_layers_and_ten_rois() {
        assert_eq!(LayerId::ALL.len(), 7);
        assert_eq!(RoiId::ALL.len(), 10);
        assert_eq!(RoiId::ATOMIC.len(), 7);
    }

    #[test]
    fn roi_compositions_are_consistent() {
        use std::collections::BTreeSet;

        let lvc: BTreeSet<_> = RoiId::Lvc.composition().iter().copied().collect();
        let hvc: BTreeSet<_> = RoiId::Hvc.composition().iter().copied().collect();
        let vc: BTreeSet<_> = RoiId::Vc.composition().iter().copied().collect();

        let mut union = lvc.clone();
        union.extend(&hvc);
        union.insert(RoiId::V4);
        assert_eq!(union, vc);
        assert!(lvc.is_disjoint(&hvc));

        for roi in RoiId::ATOMIC {
            assert!(roi.is_atomic());
            assert_eq!(roi.composition(), [roi]);
        }
        for roi in RoiId::COMPOSITE {
            assert!(!roi.is_atomic());
            assert!(roi.composition().iter().all(|r| r.is_atomic()));
        }
    }

    #[test]
    fn ids_round_trip_through_strings() {
        for layer in LayerId::ALL {
            assert_eq!(layer.as_str().parse::<LayerId>().unwrap(), layer);
        }
        for roi in RoiId::ALL {
            assert_eq!(roi.as_str().parse::<RoiId>().unwrap(), roi);
        }
        assert!("fc8".parse::<LayerId>().is_err());
        assert!("IT".parse::<RoiId>().is_err());
    }

    #[test]
    fn image_tensor_rejects_bad_input() {
        assert!(ImageTensor::new(2, 2, vec![0.5; 12]).is_ok());
        assert!(ImageTensor::new(2, 2, vec![0.5; 11]).is_err());
        assert!(ImageTensor::new(0, 2, vec![]).is_err());
        assert!(ImageTensor::new(1, 1, vec![0.0, 1.5, 0.0]).is_err());
        assert!(ImageTensor::new(1, 1, vec![0.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn image_tensor_indexing_is_channel_major() {
        let values: Vec<f64> = (0..12).map(|v| v as f64 / 12.0).collect();
        let img = ImageTensor::new(2, 2, values).unwrap();
        assert_eq!(img.get(0, 0, 0), 0.0);
        assert_eq!(img.get(0, 1, 1), 3.0 / 12.0);
        assert_eq!(img.get(2, 0, 0), 8.0 / 12.0);
    }
}
