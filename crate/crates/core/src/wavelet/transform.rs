use ndarray::{Array2, ArrayView1, ArrayView2, ArrayViewMut1, Axis};

use super::filters::FilterPair;
use super::Band;
use crate::error::{input, Error, Result};

/// The four sub-bands of one decomposition level.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandSet {
    /// Low-pass along rows and columns.
    pub ll: Array2<f64>,
    /// Low-pass along rows, high-pass along columns.
    pub lh: Array2<f64>,
    /// High-pass along rows, low-pass along columns.
    pub hl: Array2<f64>,
    /// High-pass along rows and columns.
    pub hh: Array2<f64>,
}

impl SubbandSet {
    pub fn zeros(shape: (usize, usize)) -> Self {
        Self {
            ll: Array2::zeros(shape),
            lh: Array2::zeros(shape),
            hl: Array2::zeros(shape),
            hh: Array2::zeros(shape),
        }
    }

    pub fn band(&self, band: Band) -> &Array2<f64> {
        match band {
            Band::LL => &self.ll,
            Band::LH => &self.lh,
            Band::HL => &self.hl,
            Band::HH => &self.hh,
        }
    }

    pub fn band_mut(&mut self, band: Band) -> &mut Array2<f64> {
        match band {
            Band::LL => &mut self.ll,
            Band::LH => &mut self.lh,
            Band::HL => &mut self.hl,
            Band::HH => &mut self.hh,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.ll.dim()
    }

    /// Sum of squares over all four bands.
    pub fn energy(&self) -> f64 {
        Band::ALL
            .iter()
            .map(|&b| self.band(b).iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Array2<f64>, &Array2<f64>) -> Array2<f64>) -> Self {
        Self {
            ll: f(&self.ll, &other.ll),
            lh: f(&self.lh, &other.lh),
            hl: f(&self.hl, &other.hl),
            hh: f(&self.hh, &other.hh),
        }
    }

    /// Bandwise `self - other`.
    pub fn difference(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }
}

/// Number of coefficients per band for a signal of length `len`.
pub fn band_len(len: usize) -> usize {
    len.div_ceil(2)
}

/// How synthesis treats the extra sample added to odd-length signals.
#[derive(Clone, Copy)]
enum Tail {
    /// Drop it: inverse transform.
    Crop,
    /// Add it back onto the last sample: adjoint of the symmetric pad.
    Fold,
}

/// One analysis step. Odd signals are extended by repeating the last
/// sample; the even-length result is filtered with periodic wrap and
/// downsampled by two.
fn analyze(x: ArrayView1<f64>, f: &FilterPair, mut lo: ArrayViewMut1<f64>, mut hi: ArrayViewMut1<f64>) {
    let n = x.len();
    let padded = n + n % 2;
    let sample = |t: usize| if t < n { x[t] } else { x[n - 1] };
    for k in 0..padded / 2 {
        let (mut a, mut d) = (0.0, 0.0);
        for (m, (&h, &g)) in f.low.iter().zip(&f.high).enumerate() {
            let v = sample((2 * k + m) % padded);
            a += h * v;
            d += g * v;
        }
        lo[k] = a;
        hi[k] = d;
    }
}

/// Transpose of the periodic filter bank, followed by either cropping or
/// folding the padded tail.
fn synthesize(lo: ArrayView1<f64>, hi: ArrayView1<f64>, f: &FilterPair, mut out: ArrayViewMut1<f64>, tail: Tail) {
    let n = out.len();
    let padded = n + n % 2;
    let mut buf = vec![0.0; padded];
    for k in 0..padded / 2 {
        for (m, (&h, &g)) in f.low.iter().zip(&f.high).enumerate() {
            buf[(2 * k + m) % padded] += h * lo[k] + g * hi[k];
        }
    }
    for t in 0..n {
        out[t] = buf[t];
    }
    if padded > n {
        if let Tail::Fold = tail {
            out[n - 1] += buf[n];
        }
    }
}

/// Filters every lane along `axis`, returning (low, high) halves.
fn analyze_axis(x: ArrayView2<f64>, f: &FilterPair, axis: Axis) -> (Array2<f64>, Array2<f64>) {
    let mut shape = x.raw_dim();
    shape[axis.index()] = band_len(x.len_of(axis));
    let mut lo = Array2::zeros(shape);
    let mut hi = Array2::zeros(shape);
    for ((lane, lo_lane), hi_lane) in x
        .lanes(axis)
        .into_iter()
        .zip(lo.lanes_mut(axis))
        .zip(hi.lanes_mut(axis))
    {
        analyze(lane, f, lo_lane, hi_lane);
    }
    (lo, hi)
}

fn synthesize_axis(
    lo: ArrayView2<f64>,
    hi: ArrayView2<f64>,
    f: &FilterPair,
    axis: Axis,
    len: usize,
    tail: Tail,
) -> Array2<f64> {
    let mut shape = lo.raw_dim();
    shape[axis.index()] = len;
    let mut out = Array2::zeros(shape);
    for ((l, h), o) in lo.lanes(axis).into_iter().zip(hi.lanes(axis)).zip(out.lanes_mut(axis)) {
        synthesize(l, h, f, o, tail);
    }
    out
}

/// Single-level separable 2D DWT. Rows are filtered first, then columns.
pub fn dwt2(image: ArrayView2<f64>, filter: &FilterPair) -> Result<SubbandSet> {
    let (h, w) = image.dim();
    if h < 2 || w < 2 {
        return input(format!("image must be at least 2x2, got {h}x{w}"));
    }
    if image.iter().any(|v| !v.is_finite()) {
        return input("image contains non-finite values");
    }
    Ok(dwt2_unchecked(image, filter))
}

pub(crate) fn dwt2_unchecked(image: ArrayView2<f64>, filter: &FilterPair) -> SubbandSet {
    // rows are lanes along Axis(1)
    let (row_lo, row_hi) = analyze_axis(image, filter, Axis(1));
    let (ll, lh) = analyze_axis(row_lo.view(), filter, Axis(0));
    let (hl, hh) = analyze_axis(row_hi.view(), filter, Axis(0));
    SubbandSet { ll, lh, hl, hh }
}

fn check_band_shapes(bands: &SubbandSet, out_shape: (usize, usize)) -> Result<()> {
    let expected = (band_len(out_shape.0), band_len(out_shape.1));
    for band in Band::ALL {
        let got = bands.band(band).dim();
        if got != expected {
            return Err(Error::Shape {
                left: vec![got.0, got.1],
                right: vec![expected.0, expected.1],
            });
        }
    }
    if out_shape.0 < 2 || out_shape.1 < 2 {
        return input(format!("output shape {out_shape:?} must be at least 2x2"));
    }
    Ok(())
}

fn backward(bands: &SubbandSet, filter: &FilterPair, out_shape: (usize, usize), tail: Tail) -> Array2<f64> {
    let (h, w) = out_shape;
    let row_lo = synthesize_axis(bands.ll.view(), bands.lh.view(), filter, Axis(0), h, tail);
    let row_hi = synthesize_axis(bands.hl.view(), bands.hh.view(), filter, Axis(0), h, tail);
    synthesize_axis(row_lo.view(), row_hi.view(), filter, Axis(1), w, tail)
}

/// Inverse of [`dwt2`] for orthonormal filters; `out_shape` is the shape of
/// the original image.
pub fn idwt2(bands: &SubbandSet, filter: &FilterPair, out_shape: (usize, usize)) -> Result<Array2<f64>> {
    check_band_shapes(bands, out_shape)?;
    Ok(backward(bands, filter, out_shape, Tail::Crop))
}

/// Adjoint of [`dwt2`]: maps band-space gradients back to image space.
/// Coincides with [`idwt2`] on even shapes.
pub fn dwt2_adjoint(bands: &SubbandSet, filter: &FilterPair, out_shape: (usize, usize)) -> Result<Array2<f64>> {
    check_band_shapes(bands, out_shape)?;
    Ok(backward(bands, filter, out_shape, Tail::Fold))
}

/// Multi-level decomposition. `levels()[0]` is the finest level; each
/// further level decomposes the previous level's LL band.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    levels: Vec<SubbandSet>,
    input_shapes: Vec<(usize, usize)>,
}

impl WaveletPyramid {
    pub fn levels(&self) -> &[SubbandSet] {
        &self.levels
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Shape of the signal that level `j` decomposed.
    pub fn input_shape(&self, level: usize) -> (usize, usize) {
        self.input_shapes[level]
    }

    /// Approximation band of the coarsest level.
    pub fn final_ll(&self) -> &Array2<f64> {
        &self.levels.last().expect("pyramid has at least one level").ll
    }

    /// Levelwise, bandwise difference of two pyramids of the same geometry.
    pub fn difference(&self, other: &Self) -> Self {
        debug_assert_eq!(self.input_shapes, other.input_shapes);
        Self {
            levels: self
                .levels
                .iter()
                .zip(&other.levels)
                .map(|(a, b)| a.difference(b))
                .collect(),
            input_shapes: self.input_shapes.clone(),
        }
    }

    /// Rebuilds the image from the coarsest LL and every level's details.
    pub fn reconstruct(&self, filter: &FilterPair) -> Array2<f64> {
        let mut current = self.final_ll().clone();
        for (bands, &shape) in self.levels.iter().zip(&self.input_shapes).rev() {
            let level = SubbandSet {
                ll: current,
                ..bands.clone()
            };
            current = backward(&level, filter, shape, Tail::Crop);
        }
        current
    }
}

/// Smallest side length accepted for `levels` decomposition levels.
pub fn min_size_for_levels(levels: usize) -> usize {
    1usize << levels.min(usize::BITS as usize - 1)
}

/// Applies [`dwt2`] recursively to the LL band `levels` times.
pub fn dwt2_levels(image: ArrayView2<f64>, filter: &FilterPair, levels: usize) -> Result<WaveletPyramid> {
    if levels == 0 {
        return input("at least one decomposition level is required");
    }
    let (h, w) = image.dim();
    let min = min_size_for_levels(levels);
    if h < min || w < min {
        return input(format!(
            "image {h}x{w} is too small for {levels} levels; minimum size is {min}x{min}"
        ));
    }
    if image.iter().any(|v| !v.is_finite()) {
        return input("image contains non-finite values");
    }
    let mut out = Vec::with_capacity(levels);
    let mut shapes = Vec::with_capacity(levels);
    let mut current = dwt2_unchecked(image, filter);
    shapes.push((h, w));
    for _ in 1..levels {
        let next = dwt2_unchecked(current.ll.view(), filter);
        shapes.push(current.ll.dim());
        out.push(std::mem::replace(&mut current, next));
    }
    out.push(current);
    Ok(WaveletPyramid {
        levels: out,
        input_shapes: shapes,
    })
}

/// Adjoint of [`dwt2_levels`]: takes one gradient per band per level and
/// returns the gradient with respect to the input image.
pub fn pyramid_adjoint(grads: &[SubbandSet], geometry: &WaveletPyramid, filter: &FilterPair) -> Array2<f64> {
    let mut carry: Option<Array2<f64>> = None;
    for (j, g) in grads.iter().enumerate().rev() {
        let mut level = g.clone();
        if let Some(c) = carry.take() {
            level.ll += &c;
        }
        carry = Some(backward(&level, filter, geometry.input_shape(j), Tail::Fold));
    }
    carry.expect("pyramid has at least one level")
}
