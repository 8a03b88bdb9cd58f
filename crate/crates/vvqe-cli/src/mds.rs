//! Classical multidimensional scaling of optimizer solutions: double-center
//! the squared-dissimilarity matrix and keep the top two eigenvectors.
//!
//! Parameters are angles, so the default dissimilarity is the periodic
//! d(a, b) = sum_i (1 - cos(a_i - b_i)), which vanishes when the vectors
//! agree componentwise mod 2*pi.

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MdsError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("point {index} has length {got}, expected {want}")]
    LengthMismatch { index: usize, got: usize, want: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdsMetric {
    /// sum_i (1 - cos(a_i - b_i))
    PeriodicCosine,
    /// Euclidean distance of the raw vectors.
    Euclidean,
}

impl MdsMetric {
    pub fn dissimilarity(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            MdsMetric::PeriodicCosine => a
                .iter()
                .zip(b)
                .map(|(x, y)| 1.0 - (x - y).cos())
                .sum(),
            MdsMetric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MdsEmbedding {
    /// One (x, y) per input point.
    pub coords: Vec<[f64; 2]>,
    /// The two leading eigenvalues of the centered Gram matrix.
    pub leading_eigenvalues: [f64; 2],
    /// All points identical (all dissimilarities zero): coordinates are all
    /// at the origin and carry no geometry.
    pub degenerate: bool,
}

/// Classical MDS of the given parameter vectors into the plane.
pub fn mds_embed(thetas: &[Vec<f64>], metric: MdsMetric) -> Result<MdsEmbedding, MdsError> {
    let n = thetas.len();
    if n < 3 {
        return Err(MdsError::TooFewPoints(n));
    }
    let dim = thetas[0].len();
    for (index, t) in thetas.iter().enumerate() {
        if t.len() != dim {
            return Err(MdsError::LengthMismatch {
                index,
                got: t.len(),
                want: dim,
            });
        }
    }
    // squared dissimilarities
    let mut d2 = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let d = metric.dissimilarity(&thetas[i], &thetas[j]);
            d2[(i, j)] = d * d;
            d2[(j, i)] = d * d;
        }
    }
    // B = -1/2 C D2 C with the centering matrix C = I - 1/n J
    let ones = DMatrix::from_element(n, n, 1.0 / n as f64);
    let c = DMatrix::identity(n, n) - ones;
    let b = -0.5 * (&c * d2 * &c);
    let b = (b.transpose() + b) * 0.5;
    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b2| eig.eigenvalues[b2].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let (i1, i2) = (order[0], order[1]);
    let (l1, l2) = (eig.eigenvalues[i1], eig.eigenvalues[i2]);
    let degenerate = l1 <= 1e-12;
    let s1 = l1.max(0.0).sqrt();
    let s2 = l2.max(0.0).sqrt();
    let coords = (0..n)
        .map(|p| [s1 * eig.eigenvectors[(p, i1)], s2 * eig.eigenvectors[(p, i2)]])
        .collect();
    Ok(MdsEmbedding {
        coords,
        leading_eigenvalues: [l1, l2],
        degenerate,
    })
}
