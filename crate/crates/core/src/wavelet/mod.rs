//! Separable 2D discrete wavelet transform and the band-weighted residual
//! loss built on top of it.
//!
//! Filtering uses periodic wrap on even-length lanes, which keeps the
//! orthonormal filters exactly invertible and energy preserving. Odd lanes
//! are first extended to even length by mirroring the last sample, so every
//! band has `ceil(H/2) x ceil(W/2)` coefficients.

mod filters;
mod loss;
mod transform;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::dump::{DumpHeader, DumpSegment};
use crate::error::{input, Result};

pub use filters::{FilterKind, FilterPair};
pub use loss::{
    combined_loss, mean_absolute_error, residual_maps, wavelet_loss, wavelet_loss_breakdown, wavelet_loss_grad,
    CombinedLoss, WaveletLoss,
};
pub use transform::{
    band_len, dwt2, dwt2_adjoint, dwt2_levels, idwt2, min_size_for_levels, pyramid_adjoint, SubbandSet, WaveletPyramid,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Band {
    LL,
    LH,
    HL,
    HH,
}

impl Band {
    pub const ALL: [Band; 4] = [Band::LL, Band::LH, Band::HL, Band::HH];

    pub fn as_str(self) -> &'static str {
        match self {
            Band::LL => "LL",
            Band::LH => "LH",
            Band::HL => "HL",
            Band::HH => "HH",
        }
    }
}

/// One value per sub-band.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerBand<T> {
    #[serde(rename = "LL")]
    pub ll: T,
    #[serde(rename = "LH")]
    pub lh: T,
    #[serde(rename = "HL")]
    pub hl: T,
    #[serde(rename = "HH")]
    pub hh: T,
}

impl<T: Copy> PerBand<T> {
    pub const fn new(ll: T, lh: T, hl: T, hh: T) -> Self {
        Self { ll, lh, hl, hh }
    }

    pub fn get(&self, band: Band) -> T {
        match band {
            Band::LL => self.ll,
            Band::LH => self.lh,
            Band::HL => self.hl,
            Band::HH => self.hh,
        }
    }

    pub fn get_mut(&mut self, band: Band) -> &mut T {
        match band {
            Band::LL => &mut self.ll,
            Band::LH => &mut self.lh,
            Band::HL => &mut self.hl,
            Band::HH => &mut self.hh,
        }
    }
}

pub const DEFAULT_LAMBDA: PerBand<f64> = PerBand::new(1.0, 0.5, 0.5, 0.25);
pub const DEFAULT_LEVELS: usize = 2;

/// Configuration of the wavelet loss: band weights (applied at every
/// level), number of levels and filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandLossSpec {
    pub lambda: PerBand<f64>,
    pub levels: usize,
    pub filter: FilterKind,
}

impl Default for BandLossSpec {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            levels: DEFAULT_LEVELS,
            filter: FilterKind::Haar,
        }
    }
}

impl BandLossSpec {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return input("levels must be at least 1");
        }
        for band in Band::ALL {
            let v = self.lambda.get(band);
            if !(v >= 0.0 && v.is_finite()) {
                return input(format!("lambda {} must be non-negative, got {v}", band.as_str()));
            }
        }
        Ok(())
    }

    /// True when every band weight is zero, so the loss vanishes identically.
    pub fn is_degenerate(&self) -> bool {
        Band::ALL.iter().all(|&b| self.lambda.get(b) == 0.0)
    }
}

/// Multi-level decomposition with the levels and filter of `spec`.
pub fn dwt2_multi(image: ArrayView2<f64>, spec: &BandLossSpec) -> Result<WaveletPyramid> {
    spec.validate()?;
    dwt2_levels(image, spec.filter.filter(), spec.levels)
}

/// Flattens per-channel pyramids into one dump payload. Segments are named
/// `c{channel}/L{level}/{band}` with levels counted from 1 (finest).
pub fn pyramid_dump(channels: &[WaveletPyramid]) -> (DumpHeader, Vec<f64>) {
    let mut data = Vec::new();
    let mut segments = Vec::new();
    for (c, pyramid) in channels.iter().enumerate() {
        for (j, level) in pyramid.levels().iter().enumerate() {
            for band in Band::ALL {
                let arr = level.band(band);
                segments.push(DumpSegment {
                    name: format!("c{c}/L{}/{}", j + 1, band.as_str()),
                    shape: arr.shape().to_vec(),
                    offset: data.len(),
                });
                data.extend(arr.iter().copied());
            }
        }
    }
    let mut header = DumpHeader::new(vec![data.len()]);
    header.segments = segments;
    (header, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn spec_defaults_and_validation() {
        let spec = BandLossSpec::default();
        assert_eq!(spec.levels, 2);
        assert_eq!(spec.lambda, PerBand::new(1.0, 0.5, 0.5, 0.25));
        assert!(spec.validate().is_ok());
        assert!(BandLossSpec { levels: 0, ..spec }.validate().is_err());
        let neg = BandLossSpec {
            lambda: PerBand::new(1.0, -0.1, 0.0, 0.0),
            ..spec
        };
        assert!(neg.validate().is_err());
        let zero = BandLossSpec {
            lambda: PerBand::default(),
            ..spec
        };
        assert!(zero.is_degenerate() && zero.validate().is_ok());
    }

    #[test]
    fn spec_json_uses_band_names() {
        let json = serde_json::to_value(BandLossSpec::default()).unwrap();
        assert_eq!(json["lambda"]["HH"], 0.25);
        assert_eq!(json["filter"], "haar");
        let bad = r#"{"lambda":{"LL":1,"LH":1,"HL":1,"HH":1,"XX":1},"levels":1,"filter":"haar"}"#;
        assert!(serde_json::from_str::<BandLossSpec>(bad).is_err());
    }

    #[test]
    fn dump_segments_cover_payload() {
        let img = Array2::from_shape_fn((8, 6), |(i, j)| (i * 6 + j) as f64);
        let p = dwt2_multi(img.view(), &BandLossSpec::default()).unwrap();
        let (header, data) = pyramid_dump(&[p]);
        assert_eq!(header.segments.len(), 8);
        assert_eq!(header.segments[0].name, "c0/L1/LL");
        assert_eq!(header.segments[0].shape, vec![4, 3]);
        assert_eq!(header.segments[4].name, "c0/L2/LL");
        assert_eq!(header.segments[4].shape, vec![2, 2]);
        assert_eq!(data.len(), 4 * 12 + 4 * 4);
        assert_eq!(header.shape, vec![data.len()]);
    }
}
