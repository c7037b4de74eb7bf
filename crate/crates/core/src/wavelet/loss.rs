use std::collections::BTreeMap;

use ndarray::{Array3, ArrayView2, ArrayView3, Axis};
use serde::Serialize;

use super::transform::{dwt2_levels, pyramid_adjoint, SubbandSet, WaveletPyramid};
use super::{Band, BandLossSpec, PerBand};
use crate::error::{input, Error, Result};

fn check_pair(gt: &ArrayView3<f64>, rendered: &ArrayView3<f64>) -> Result<()> {
    if gt.shape() != rendered.shape() {
        return Err(Error::Shape {
            left: gt.shape().to_vec(),
            right: rendered.shape().to_vec(),
        });
    }
    if gt.iter().chain(rendered.iter()).any(|v| !v.is_finite()) {
        return input("images contain non-finite values");
    }
    Ok(())
}

fn channels<'a>(img: &'a ArrayView3<'a, f64>) -> impl Iterator<Item = ArrayView2<'a, f64>> + 'a {
    img.axis_iter(Axis(2))
}

/// Residual pyramids `W(gt) - W(rendered)`, one per channel.
pub fn residual_maps(
    gt: ArrayView3<f64>,
    rendered: ArrayView3<f64>,
    spec: &BandLossSpec,
) -> Result<Vec<WaveletPyramid>> {
    check_pair(&gt, &rendered)?;
    spec.validate()?;
    let filter = spec.filter.filter();
    channels(&gt)
        .zip(channels(&rendered))
        .map(|(g, r)| {
            let pg = dwt2_levels(g, filter, spec.levels)?;
            let pr = dwt2_levels(r, filter, spec.levels)?;
            Ok(pg.difference(&pr))
        })
        .collect()
}

/// Loss value with its weighted contribution per level and band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveletLoss {
    pub total: f64,
    /// `per_level[j]` is level `j + 1`, finest first.
    pub per_level: Vec<PerBand<f64>>,
}

fn squared_norm(a: &ndarray::Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum()
}

/// `sum_x lambda_x * ||delta_x||^2` over levels and channels, with the
/// per-band breakdown.
pub fn wavelet_loss_breakdown(
    gt: ArrayView3<f64>,
    rendered: ArrayView3<f64>,
    spec: &BandLossSpec,
) -> Result<WaveletLoss> {
    if spec.is_degenerate() {
        log::warn!("all wavelet band weights are zero; the wavelet loss is identically 0");
    }
    let residuals = residual_maps(gt, rendered, spec)?;
    let mut per_level = vec![PerBand::<f64>::default(); spec.levels];
    for pyramid in &residuals {
        for (slot, level) in per_level.iter_mut().zip(pyramid.levels()) {
            for band in Band::ALL {
                *slot.get_mut(band) += spec.lambda.get(band) * squared_norm(level.band(band));
            }
        }
    }
    let total = per_level.iter().flat_map(|p| Band::ALL.map(|b| p.get(b))).sum();
    Ok(WaveletLoss { total, per_level })
}

pub fn wavelet_loss(gt: ArrayView3<f64>, rendered: ArrayView3<f64>, spec: &BandLossSpec) -> Result<f64> {
    Ok(wavelet_loss_breakdown(gt, rendered, spec)?.total)
}

/// Gradient of [`wavelet_loss`] with respect to `rendered`:
/// `-2 * sum_x lambda_x * W_x^T(delta_x)` pulled back through every level.
pub fn wavelet_loss_grad(gt: ArrayView3<f64>, rendered: ArrayView3<f64>, spec: &BandLossSpec) -> Result<Array3<f64>> {
    let residuals = residual_maps(gt.view(), rendered.view(), spec)?;
    let filter = spec.filter.filter();
    let mut grad = Array3::zeros(rendered.raw_dim());
    for (c, pyramid) in residuals.iter().enumerate() {
        let band_grads: Vec<SubbandSet> = pyramid
            .levels()
            .iter()
            .map(|level| {
                let mut g = level.clone();
                for band in Band::ALL {
                    *g.band_mut(band) *= -2.0 * spec.lambda.get(band);
                }
                g
            })
            .collect();
        let image_grad = pyramid_adjoint(&band_grads, pyramid, filter);
        grad.index_axis_mut(Axis(2), c).assign(&image_grad);
    }
    Ok(grad)
}

pub fn mean_absolute_error(gt: ArrayView3<f64>, rendered: ArrayView3<f64>) -> Result<f64> {
    check_pair(&gt, &rendered)?;
    if gt.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = gt.iter().zip(rendered.iter()).map(|(a, b)| (a - b).abs()).sum();
    Ok(sum / gt.len() as f64)
}

/// Photometric plus wavelet objective. `photometric` and `wavelet` are the
/// unweighted terms; `per_band` holds the weighted band contributions to the
/// wavelet term, keyed by level (1 = finest).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinedLoss {
    pub total: f64,
    pub photometric: f64,
    pub wavelet: f64,
    pub per_band: BTreeMap<usize, PerBand<f64>>,
}

/// `photometric_weight * MAE + wavelet_weight * wavelet_loss`.
pub fn combined_loss(
    gt: ArrayView3<f64>,
    rendered: ArrayView3<f64>,
    spec: &BandLossSpec,
    photometric_weight: f64,
    wavelet_weight: f64,
) -> Result<CombinedLoss> {
    for (name, w) in [
        ("photometric_weight", photometric_weight),
        ("wavelet_weight", wavelet_weight),
    ] {
        if !(w >= 0.0 && w.is_finite()) {
            return input(format!("{name} must be non-negative, got {w}"));
        }
    }
    let photometric = mean_absolute_error(gt.view(), rendered.view())?;
    let wavelet = wavelet_loss_breakdown(gt, rendered, spec)?;
    Ok(CombinedLoss {
        total: photometric_weight * photometric + wavelet_weight * wavelet.total,
        photometric,
        wavelet: wavelet.total,
        per_band: wavelet
            .per_level
            .into_iter()
            .enumerate()
            .map(|(j, p)| (j + 1, p))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::FilterKind;
    use ndarray::Array3;
    use proptest::prelude::*;

    fn random(shape: (usize, usize, usize), seed: u64) -> Array3<f64> {
        let mut s = seed;
        Array3::from_shape_fn(shape, |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        })
    }

    fn haar_single(lambda: PerBand<f64>) -> BandLossSpec {
        BandLossSpec {
            lambda,
            levels: 1,
            filter: FilterKind::Haar,
        }
    }

    #[test]
    fn constant_block_loss() {
        let gt = Array3::ones((2, 2, 1));
        let rendered = Array3::zeros((2, 2, 1));
        let all = haar_single(PerBand::new(1.0, 1.0, 1.0, 1.0));
        let l = wavelet_loss(gt.view(), rendered.view(), &all).unwrap();
        assert!((l - 4.0).abs() < 1e-12);
        let no_ll = haar_single(PerBand::new(0.0, 1.0, 1.0, 1.0));
        assert!(wavelet_loss(gt.view(), rendered.view(), &no_ll).unwrap().abs() < 1e-24);
        let img = random((4, 4, 3), 1);
        assert_eq!(
            wavelet_loss(img.view(), img.view(), &BandLossSpec::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn residual_properties() {
        let spec = BandLossSpec::default();
        let gt = random((8, 8, 2), 2);
        let r = random((8, 8, 2), 3);
        let same = residual_maps(gt.view(), gt.view(), &spec).unwrap();
        assert!(same.iter().all(|p| p.levels().iter().all(|l| l.energy() == 0.0)));

        let zero = Array3::zeros((8, 8, 2));
        let against_zero = residual_maps(gt.view(), zero.view(), &spec).unwrap();
        let direct = dwt2_levels(gt.index_axis(Axis(2), 1), spec.filter.filter(), 2).unwrap();
        assert_eq!(against_zero[1], direct);

        let ab = residual_maps(gt.view(), r.view(), &spec).unwrap();
        let ba = residual_maps(r.view(), gt.view(), &spec).unwrap();
        for (p, q) in ab.iter().zip(&ba) {
            for (x, y) in p.levels().iter().zip(q.levels()) {
                for band in Band::ALL {
                    assert_eq!(x.band(band), &-y.band(band));
                }
            }
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = Array3::zeros((4, 4, 1));
        let b = Array3::zeros((4, 6, 1));
        let spec = BandLossSpec::default();
        assert!(matches!(
            wavelet_loss(a.view(), b.view(), &spec),
            Err(Error::Shape { .. })
        ));
        assert!(wavelet_loss_grad(a.view(), b.view(), &spec).is_err());
    }

    #[test]
    fn degenerate_weights_give_zero() {
        let spec = haar_single(PerBand::default());
        let l = wavelet_loss(random((4, 4, 1), 4).view(), random((4, 4, 1), 5).view(), &spec).unwrap();
        assert_eq!(l, 0.0);
    }

    #[test]
    fn gradient_zero_at_identity_and_antisymmetric() {
        let spec = BandLossSpec::default();
        let gt = random((8, 6, 2), 6);
        let r = random((8, 6, 2), 7);
        assert!(wavelet_loss_grad(gt.view(), gt.view(), &spec)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        // d/d(rendered) L(gt, rendered) = -d/d(gt) L(gt, rendered) = -d/d(rendered') L(rendered', gt)
        let g1 = wavelet_loss_grad(gt.view(), r.view(), &spec).unwrap();
        let g2 = wavelet_loss_grad(r.view(), gt.view(), &spec).unwrap();
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences_on_odd_shape() {
        let spec = BandLossSpec {
            filter: FilterKind::Db4,
            ..BandLossSpec::default()
        };
        let gt = random((7, 9, 1), 8);
        let r = random((7, 9, 1), 9);
        let grad = wavelet_loss_grad(gt.view(), r.view(), &spec).unwrap();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        let scale = grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for idx in 0..r.len() {
            let mut plus = r.clone();
            let mut minus = r.clone();
            plus.as_slice_mut().unwrap()[idx] += h;
            minus.as_slice_mut().unwrap()[idx] -= h;
            let fd = (wavelet_loss(gt.view(), plus.view(), &spec).unwrap()
                - wavelet_loss(gt.view(), minus.view(), &spec).unwrap())
                / (2.0 * h);
            worst = worst.max((fd - grad.as_slice().unwrap()[idx]).abs() / scale);
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn combined_examples() {
        let spec = BandLossSpec::default();
        let gt = random((4, 4, 3), 10);
        let r = random((4, 4, 3), 11);
        let same = combined_loss(gt.view(), gt.view(), &spec, 1.0, 1.0).unwrap();
        assert_eq!((same.total, same.photometric, same.wavelet), (0.0, 0.0, 0.0));
        let photo_only = combined_loss(gt.view(), r.view(), &spec, 0.8, 0.0).unwrap();
        assert_eq!(photo_only.total, 0.8 * photo_only.photometric);
        let wave_only = combined_loss(gt.view(), r.view(), &spec, 0.0, 1.0).unwrap();
        assert_eq!(wave_only.total, wavelet_loss(gt.view(), r.view(), &spec).unwrap());
        assert_eq!(wave_only.per_band.len(), 2);
        assert!(combined_loss(gt.view(), r.view(), &spec, -1.0, 1.0).is_err());
        let json = serde_json::to_value(&wave_only).unwrap();
        assert!(json["per_band"]["1"]["LL"].is_number());
    }

    proptest! {
        #[test]
        fn loss_non_negative_and_quadratic(c in -4.0f64..4.0, s1 in any::<u64>(), s2 in any::<u64>(), db in any::<bool>()) {
            let spec = BandLossSpec {
                filter: if db { FilterKind::Db4 } else { FilterKind::Haar },
                ..BandLossSpec::default()
            };
            let gt = random((8, 10, 2), s1);
            let r = random((8, 10, 2), s2);
            let base = wavelet_loss(gt.view(), r.view(), &spec).unwrap();
            prop_assert!(base >= 0.0);
            let scaled = wavelet_loss((&gt * c).view(), (&r * c).view(), &spec).unwrap();
            prop_assert!((scaled - c * c * base).abs() <= 1e-9 * (c * c * base).max(1e-12));
        }

        #[test]
        fn loss_vanishes_only_for_equal_images(s in any::<u64>(), idx in 0usize..64, eps in 1e-3f64..1.0) {
            let spec = BandLossSpec::default();
            let gt = random((8, 8, 1), s);
            let mut r = gt.clone();
            r.as_slice_mut().unwrap()[idx] += eps;
            prop_assert!(wavelet_loss(gt.view(), r.view(), &spec).unwrap() > 1e-9);
        }
    }
}
