use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

/// Two-channel analysis filter bank. The high-pass branch is the
/// alternating-sign reversal of the low-pass one: `g[k] = (-1)^k h[L-1-k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair {
    pub name: String,
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

impl FilterPair {
    /// Builds the pair from its low-pass taps.
    pub fn from_low(name: impl Into<String>, low: Vec<f64>) -> Self {
        let len = low.len();
        let high = (0..len)
            .map(|k| {
                if k % 2 == 0 {
                    low[len - 1 - k]
                } else {
                    -low[len - 1 - k]
                }
            })
            .collect();
        Self {
            name: name.into(),
            low,
            high,
        }
    }

    pub fn haar() -> Self {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_low("haar", vec![c, c])
    }

    /// Four-tap Daubechies filter (two vanishing moments).
    pub fn daubechies4() -> Self {
        let s3 = 3f64.sqrt();
        let norm = 4.0 * 2f64.sqrt();
        Self::from_low(
            "db4",
            vec![
                (1.0 + s3) / norm,
                (3.0 + s3) / norm,
                (3.0 - s3) / norm,
                (1.0 - s3) / norm,
            ],
        )
    }

    pub fn len(&self) -> usize {
        self.low.len()
    }

    pub fn is_empty(&self) -> bool {
        self.low.is_empty()
    }

    pub fn is_quadrature_mirror(&self, tol: f64) -> bool {
        let len = self.low.len();
        self.high.len() == len
            && (0..len).all(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                (self.high[k] - sign * self.low[len - 1 - k]).abs() <= tol
            })
    }

    /// Unit energy and orthogonality to every even shift of itself.
    pub fn is_orthonormal(&self, tol: f64) -> bool {
        let h = &self.low;
        (0..h.len()).step_by(2).all(|shift| {
            let dot: f64 = h.iter().zip(&h[shift..]).map(|(a, b)| a * b).sum();
            let expected = if shift == 0 { 1.0 } else { 0.0 };
            (dot - expected).abs() <= tol
        })
    }
}

/// Built-in filters selectable from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    #[default]
    Haar,
    Db4,
}

static HAAR: LazyLock<FilterPair> = LazyLock::new(|| checked(FilterPair::haar()));
static DB4: LazyLock<FilterPair> = LazyLock::new(|| checked(FilterPair::daubechies4()));

fn checked(f: FilterPair) -> FilterPair {
    assert!(f.is_quadrature_mirror(1e-15), "{} violates the QMF relation", f.name);
    assert!(f.is_orthonormal(1e-12), "{} is not orthonormal", f.name);
    f
}

impl FilterKind {
    pub fn filter(self) -> &'static FilterPair {
        match self {
            FilterKind::Haar => &HAAR,
            FilterKind::Db4 => &DB4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Haar => "haar",
            FilterKind::Db4 => "db4",
        }
    }
}
