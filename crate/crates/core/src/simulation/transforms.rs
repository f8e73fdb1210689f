use nalgebra::DMatrix;

/// Strictly increasing marginal distortions applied to simulated columns.
/// Each is the CDF of a location-scale family evaluated with the column mean
/// as location and the column standard deviation as scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarginalTransform {
    /// Asymmetric Laplace CDF with asymmetry κ.
    AsymmetricLaplace {
        kappa: f64,
    },
    /// Type I extreme value (Gumbel, maximum) CDF.
    ExtremeValue,
    Logistic,
}

/// Round-robin assignment of transforms to columns.
pub const TRANSFORM_CYCLE: [MarginalTransform; 3] = [
    MarginalTransform::AsymmetricLaplace { kappa: 2.0 },
    MarginalTransform::ExtremeValue,
    MarginalTransform::Logistic,
];

impl MarginalTransform {
    pub fn cdf(&self, x: f64, location: f64, scale: f64) -> f64 {
        let z = (x - location) / scale;
        match *self {
            MarginalTransform::AsymmetricLaplace { kappa } => {
                let k2 = kappa * kappa;
                if z <= 0.0 {
                    k2 / (1.0 + k2) * (z / kappa).exp()
                } else {
                    1.0 - (-kappa * z).exp() / (1.0 + k2)
                }
            }
            MarginalTransform::ExtremeValue => (-(-z).exp()).exp(),
            MarginalTransform::Logistic => 1.0 / (1.0 + (-z).exp()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MarginalTransform::AsymmetricLaplace { .. } => "asymmetric-laplace",
            MarginalTransform::ExtremeValue => "extreme-value",
            MarginalTransform::Logistic => "logistic",
        }
    }
}

/// Applies `transforms[j]` to column j with moment-matched parameters.
pub fn apply_transforms(y: &DMatrix<f64>, transforms: &[MarginalTransform]) -> DMatrix<f64> {
    assert_eq!(y.ncols(), transforms.len(), "one transform per column");
    let mut x = y.clone();
    for (j, t) in transforms.iter().enumerate() {
        let col = y.column(j);
        let mean = col.mean();
        let sd = col.variance().sqrt().max(f64::MIN_POSITIVE);
        for (out, v) in x.column_mut(j).iter_mut().zip(col.iter()) {
            *out = t.cdf(*v, mean, sd);
        }
    }
    x
}
