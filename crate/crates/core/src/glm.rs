//! Team quality from a no-intercept regression of point differential on
//! team identities.
//!
//! Each game row contributes one equation `point_diff ≈ q[t1] − q[t2]`, so
//! the design matrix is the signed team incidence of the season's games.
//! The ridge-regularized normal equations are solved per `(gender, season)`
//! by conjugate gradients. The signed design has a one-dimensional null
//! space (shifting all qualities by a constant), which the ridge term
//! suppresses for λ > 0; the fitted vector is mean-centered afterwards so
//! λ = 0 lands on the same canonical representative.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::data::{Gender, MatchRow, Season, TeamId};
use crate::math;

/// Fitted team qualities keyed by `(gender, season, team)`. Qualities are
/// expected point-differential contributions, mean zero within each group.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QualityTable {
    pub quality: BTreeMap<(Gender, Season, TeamId), f64>,
}

impl QualityTable {
    /// Quality for a team-season; teams unseen by the fit get the neutral
    /// value zero.
    pub fn quality_or_zero(&self, gender: Gender, season: Season, team: TeamId) -> f64 {
        self.quality
            .get(&(gender, season, team))
            .copied()
            .unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GlmError {
    /// Conjugate gradients failed to reach the residual tolerance.
    NoConvergence {
        gender: Gender,
        season: Season,
        residual_norm: f64,
    },
}

impl fmt::Display for GlmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlmError::NoConvergence {
                gender,
                season,
                residual_norm,
            } => write!(
                f,
                "quality fit did not converge for {gender} {season} (residual norm {residual_norm:e})"
            ),
        }
    }
}

impl core::error::Error for GlmError {}

/// Fits qualities for every `(gender, season)` group present in `rows`.
///
/// `ridge` is the λ ≥ 0 coefficient on `‖q‖²`. Rows may be a symmetrized
/// set (each game from both perspectives) or single-perspective; the
/// duplicated equations only rescale the objective.
pub fn fit_glm_quality(rows: &[MatchRow], ridge: f64) -> Result<QualityTable, GlmError> {
    let mut groups: BTreeMap<(Gender, Season), Vec<&MatchRow>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.gender, row.season))
            .or_default()
            .push(row);
    }

    let mut table = QualityTable::default();
    for ((gender, season), group) in groups {
        let mut team_index: BTreeMap<TeamId, usize> = BTreeMap::new();
        for row in &group {
            let next = team_index.len();
            team_index.entry(row.t1).or_insert(next);
            let next = team_index.len();
            team_index.entry(row.t2).or_insert(next);
        }
        let n = team_index.len();

        // Normal equations M q = b with M = AᵀA + λI, b = Aᵀd.
        let mut m = vec![0.0f64; n * n];
        let mut b = vec![0.0f64; n];
        for row in &group {
            let i = team_index[&row.t1];
            let j = team_index[&row.t2];
            let d = row.point_diff();
            m[i * n + i] += 1.0;
            m[j * n + j] += 1.0;
            m[i * n + j] -= 1.0;
            m[j * n + i] -= 1.0;
            b[i] += d;
            b[j] -= d;
        }
        for i in 0..n {
            m[i * n + i] += ridge;
        }

        let b_norm = math::sqrt(b.iter().map(|v| v * v).sum());
        let tol = 1e-12 * (1.0 + b_norm);
        let q = conjugate_gradient(&m, &b, n, tol).map_err(|residual_norm| {
            GlmError::NoConvergence {
                gender,
                season,
                residual_norm,
            }
        })?;

        let mean = q.iter().sum::<f64>() / n as f64;
        for (team, idx) in &team_index {
            table
                .quality
                .insert((gender, season, *team), q[*idx] - mean);
        }
    }
    Ok(table)
}

/// Plain CG on a symmetric positive semidefinite system, starting from
/// zero. Starting at zero keeps the iterates orthogonal to the all-ones
/// null vector of the λ = 0 incidence system, since every row of the
/// design sums to zero.
fn conjugate_gradient(m: &[f64], b: &[f64], n: usize, tol: f64) -> Result<Vec<f64>, f64> {
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rs: f64 = r.iter().map(|v| v * v).sum();
    let max_iter = 10 * n + 100;

    for _ in 0..max_iter {
        if math::sqrt(rs) <= tol {
            return Ok(x);
        }
        let mut mp = vec![0.0; n];
        for i in 0..n {
            let row = &m[i * n..(i + 1) * n];
            mp[i] = row.iter().zip(p.iter()).map(|(a, b)| a * b).sum();
        }
        let p_mp: f64 = p.iter().zip(mp.iter()).map(|(a, b)| a * b).sum();
        if p_mp <= 0.0 {
            // Search direction hit the null space; the residual target is
            // unreachable from here.
            return Err(math::sqrt(rs));
        }
        let alpha = rs / p_mp;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * mp[i];
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rs_new / rs;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rs = rs_new;
    }
    if math::sqrt(rs) <= tol {
        Ok(x)
    } else {
        Err(math::sqrt(rs))
    }
}
