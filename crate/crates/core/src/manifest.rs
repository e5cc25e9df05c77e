//! Dataset manifest: the JSON index of a dataset directory.
//!
//! A manifest names the feature file for each layer, the fMRI file for each
//! ROI, the ABM file, split membership, and category labels. All paths are
//! relative to the manifest's directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{LayerId, RoiId};

pub const MANIFEST_FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMembership {
    pub stage1_train: Vec<String>,
    pub stage2_train: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    /// Seed the dataset was generated with, when synthetic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Feature length per layer as stored in the feature files.
    pub layer_dims: BTreeMap<LayerId, usize>,
    /// Voxel count per ROI as stored in the fMRI files.
    pub voxel_counts: BTreeMap<RoiId, usize>,
    pub feature_files: BTreeMap<LayerId, PathBuf>,
    pub fmri_files: BTreeMap<RoiId, PathBuf>,
    pub abm_file: PathBuf,
    /// Raw image tensors keyed by image id, for feature extraction. Synthetic
    /// datasets have none.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub image_files: BTreeMap<String, PathBuf>,
    pub splits: SplitMembership,
    /// Category label -> member image ids (subset of the test split).
    pub categories: BTreeMap<String, Vec<String>>,
}

impl DatasetManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let manifest: DatasetManifest =
            serde_json::from_str(&text).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                source,
            })?;
        manifest.validate()?;
        Ok(manifest)
    }

    /// Writes the manifest as pretty JSON with a trailing newline.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.validate()?;
        let mut text = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        text.push('\n');
        fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for layer in LayerId::ALL {
            if !self.layer_dims.contains_key(&layer) {
                return Err(Error::missing(format!("layer_dims entry for {layer}")));
            }
            if !self.feature_files.contains_key(&layer) {
                return Err(Error::missing(format!("feature file for layer {layer}")));
            }
        }
        for roi in RoiId::ALL {
            if !self.voxel_counts.contains_key(&roi) {
                return Err(Error::missing(format!("voxel_counts entry for {roi}")));
            }
            if !self.fmri_files.contains_key(&roi) {
                return Err(Error::missing(format!("fMRI file for ROI {roi}")));
            }
        }
        for roi in RoiId::COMPOSITE {
            let sum: usize = roi
                .composition()
                .iter()
                .map(|part| self.voxel_counts[part])
                .sum();
            if self.voxel_counts[&roi] != sum {
                return Err(Error::invalid(format!(
                    "voxel count for {roi} is {}, but its constituents sum to {sum}",
                    self.voxel_counts[&roi]
                )));
            }
        }
        for (category, members) in &self.categories {
            for id in members {
                if !self.splits.test.contains(id) {
                    return Err(Error::invalid(format!(
                        "category '{category}' member '{id}' is not in the test split"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Resolves a manifest-relative path against the manifest's directory.
    pub fn resolve(base_dir: &Path, relative: &Path) -> PathBuf {
        if relative.is_absolute() {
            relative.to_path_buf()
        } else {
            base_dir.join(relative)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample_manifest() -> DatasetManifest {
        let layer_dims = LayerId::ALL.iter().map(|&l| (l, 16)).collect();
        let feature_files = LayerId::ALL
            .iter()
            .map(|&l| (l, PathBuf::from(format!("features/{l}.csv"))))
            .collect();
        let mut voxel_counts: BTreeMap<RoiId, usize> =
            RoiId::ATOMIC.iter().map(|&r| (r, 8)).collect();
        for roi in RoiId::COMPOSITE {
            voxel_counts.insert(roi, 8 * roi.composition().len());
        }
        let fmri_files = RoiId::ALL
            .iter()
            .map(|&r| (r, PathBuf::from(format!("fmri/{r}.csv"))))
            .collect();
        DatasetManifest {
            format_version: 1,
            seed: Some(7),
            layer_dims,
            voxel_counts,
            feature_files,
            fmri_files,
            abm_file: PathBuf::from("abm.csv"),
            image_files: BTreeMap::new(),
            splits: SplitMembership {
                stage1_train: vec!["a".into(), "b".into()],
                stage2_train: vec!["c".into()],
                test: vec!["d".into(), "e".into()],
            },
            categories: BTreeMap::from([
                ("animal".to_string(), vec!["d".to_string()]),
                ("object".to_string(), vec!["e".to_string()]),
            ]),
        }
    }

    #[test]
    fn round_trips_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(MANIFEST_FILE_NAME);
        let manifest = sample_manifest();
        manifest.save(&path).unwrap();
        let loaded = DatasetManifest::load(&path).unwrap();
        assert_eq!(loaded, manifest);
    }

    #[test]
    fn save_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        sample_manifest().save(&a).unwrap();
        sample_manifest().save(&b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn rejects_inconsistent_composite_voxel_counts() {
        let mut manifest = sample_manifest();
        manifest.voxel_counts.insert(RoiId::Lvc, 1);
        assert!(manifest.validate().is_err());
    }

    #[test]
    fn rejects_category_member_outside_test_split() {
        let mut manifest = sample_manifest();
        manifest
            .categories
            .insert("animal".into(), vec!["a".into()]);
        assert!(manifest.validate().is_err());
    }

    #[test]
    fn resolves_relative_paths_against_base() {
        let base = Path::new("/data/set1");
        assert_eq!(
            DatasetManifest::resolve(base, Path::new("abm.csv")),
            PathBuf::from("/data/set1/abm.csv")
        );
        assert_eq!(
            DatasetManifest::resolve(base, Path::new("/abs/abm.csv")),
            PathBuf::from("/abs/abm.csv")
        );
    }
}
