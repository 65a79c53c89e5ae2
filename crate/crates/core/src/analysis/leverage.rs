use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{svd, DenseMatrix, DEFAULT_TOL_RANK};
use crate::solvers::PrefixSampler;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetScheme {
    /// `p_j = ‖a_j‖² / ‖A‖_F²`
    NormSampling,
    /// `p_j = ℓ_j / r`
    LeverageSampling,
}

/// Rank-`r` leverage scores: squared row norms of the leading `r` left
/// singular vectors.
pub fn leverage_scores(a: &DenseMatrix, r: usize) -> Result<Vec<f64>> {
    if r == 0 {
        return Err(Error::InvalidConfig("leverage scores need r >= 1".into()));
    }
    let f = svd(a)?;
    let rank = f.rank(DEFAULT_TOL_RANK);
    if r > rank {
        return Err(Error::RankDeficient(format!(
            "target rank {r} exceeds numerical rank {rank}"
        )));
    }
    Ok((0..a.rows())
        .map(|i| (0..r).map(|j| f.u[(i, j)] * f.u[(i, j)]).sum())
        .collect())
}

/// Draws `count` rows independently under `scheme` and returns the distinct
/// indices, sorted.
pub fn sample_good_subset<R: Rng + ?Sized>(
    a: &DenseMatrix,
    r: usize,
    count: usize,
    scheme: SubsetScheme,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if count == 0 {
        return Err(Error::InvalidConfig("subset sampling needs at least one draw".into()));
    }
    let weights = match scheme {
        SubsetScheme::NormSampling => a.row_norms_sq(),
        SubsetScheme::LeverageSampling => leverage_scores(a, r)?,
    };
    let sampler = PrefixSampler::new(&weights)?;
    let mut picked = (0..count)
        .map(|_| sampler.draw(rng))
        .collect::<Result<Vec<_>>>()?;
    picked.sort_unstable();
    picked.dedup();
    Ok(picked)
}
