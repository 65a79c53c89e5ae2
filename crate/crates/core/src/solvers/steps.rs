use rand::Rng;

use super::sampling::PrefixSampler;
use super::LinearProblem;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm_sq, pseudoinverse, singular_values, ProjectorFactorization};

fn check_row(problem: &LinearProblem, x: &[f64], j: usize) -> Result<()> {
    if j >= problem.m() {
        return Err(Error::dims(format!("row {j} of a {}-row system", problem.m())));
    }
    if x.len() != problem.n() {
        return Err(Error::dims(format!(
            "iterate of length {} for {} unknowns",
            x.len(),
            problem.n()
        )));
    }
    Ok(())
}

/// Projection of `x` onto the hyperplane `a_jᵀ z = b_j`.
pub fn rk_step(problem: &LinearProblem, x: &[f64], j: usize) -> Result<Vec<f64>> {
    check_row(problem, x, j)?;
    let a = problem.a.row(j);
    let nsq = norm_sq(a);
    if nsq == 0.0 {
        return Err(Error::ZeroRow(j));
    }
    let t = (problem.b[j] - dot(a, x)) / nsq;
    let mut out = x.to_vec();
    axpy(t, a, &mut out);
    Ok(out)
}

/// `x + (b_j - a_jᵀ x) / ‖P a_j‖² · P a_j`.
///
/// For `x` on the trusted solution space this is the projection onto the
/// intersection of that space with the hyperplane of row `j`.
pub fn scrk_step(
    problem: &LinearProblem,
    pf: &ProjectorFactorization,
    x: &[f64],
    j: usize,
) -> Result<Vec<f64>> {
    check_row(problem, x, j)?;
    let a = problem.a.row(j);
    let pa = pf.project(a)?;
    let pn_sq = norm_sq(&pa);
    if pn_sq.sqrt() <= pf.tol_rank * norm_sq(a).sqrt() || pn_sq == 0.0 {
        return Err(Error::DegenerateDirection(j));
    }
    let t = (problem.b[j] - dot(a, x)) / pn_sq;
    let mut out = x.to_vec();
    axpy(t, &pa, &mut out);
    Ok(out)
}

/// Projection onto `{A_{I0 ∪ J} z = b_{I0 ∪ J}}` done in two stages: first
/// onto the trusted solution space, then along `Range(P A_Jᵀ)`.
pub fn two_step_block_update(
    problem: &LinearProblem,
    pf: &ProjectorFactorization,
    x: &[f64],
    j_block: &[usize],
) -> Result<Vec<f64>> {
    if x.len() != problem.n() {
        return Err(Error::dims("iterate length"));
    }
    if let Some(&j) = j_block.iter().find(|&&j| j >= problem.m()) {
        return Err(Error::dims(format!("row {j} of a {}-row system", problem.m())));
    }
    let tol = pf.tol_rank;
    let a_i0 = problem.a.select_rows(&problem.i0);
    let a_j = problem.a.select_rows(j_block);
    let mut rows = problem.i0.clone();
    rows.extend_from_slice(j_block);
    let stacked = problem.a.select_rows(&rows);
    let s = singular_values(&stacked)?;
    if stacked.rows() > stacked.cols() || s.last().is_none_or(|&lo| lo <= tol * s[0]) {
        return Err(Error::RankDeficient(
            "trusted rows plus block are not full row rank".into(),
        ));
    }
    let b_i0: Vec<f64> = problem.i0.iter().map(|&i| problem.b[i]).collect();
    let b_j: Vec<f64> = j_block.iter().map(|&i| problem.b[i]).collect();

    let a_i0_pinv = pseudoinverse(&a_i0, tol)?;
    let r0: Vec<f64> = b_i0
        .iter()
        .zip(a_i0.matvec(x)?)
        .map(|(b, ax)| b - ax)
        .collect();
    let mut y = x.to_vec();
    axpy(1.0, &a_i0_pinv.matvec(&r0)?, &mut y);

    let x_part = a_i0_pinv.matvec(&b_i0)?;
    let beta: Vec<f64> = b_j
        .iter()
        .zip(a_j.matvec(&x_part)?)
        .map(|(b, v)| b - v)
        .collect();
    let ajp = pf.project_rows(&a_j)?;
    let rhs: Vec<f64> = beta
        .iter()
        .zip(ajp.matvec(&y)?)
        .map(|(b, v)| b - v)
        .collect();
    let mut out = y;
    axpy(1.0, &pseudoinverse(&ajp, tol)?.matvec(&rhs)?, &mut out);
    Ok(out)
}

/// One SCRK draw `j ∝ ‖P a_j‖²` over `I1`, applied only when
/// `|b_j - a_jᵀ x| <= gamma_q`. Returns the drawn row and the new iterate,
/// or `None` for the iterate when the draw is rejected.
///
/// Conditioned on acceptance, the accepted row follows the norm law
/// restricted to the admissible set.
pub fn rejection_sampling_step<R: Rng + ?Sized>(
    problem: &LinearProblem,
    pf: &ProjectorFactorization,
    x: &[f64],
    rng: &mut R,
    gamma_q: f64,
) -> Result<(usize, Option<Vec<f64>>)> {
    let i1 = problem.i1();
    let mut weights = Vec::with_capacity(i1.len());
    for &j in &i1 {
        let a = problem.a.row(j);
        let pn_sq = norm_sq(&pf.project(a)?);
        let degenerate = pn_sq.sqrt() <= pf.tol_rank * norm_sq(a).sqrt();
        weights.push(if degenerate { 0.0 } else { pn_sq });
    }
    let j = i1[PrefixSampler::new(&weights)?.draw(rng)?];
    let r = problem.b[j] - dot(problem.a.row(j), x);
    if r.abs() <= gamma_q {
        Ok((j, Some(scrk_step(problem, pf, x, j)?)))
    } else {
        Ok((j, None))
    }
}
