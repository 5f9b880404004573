use crate::error::{Error, Result};
use crate::linalg::{check_dense_qubits, hermiticity_error, inner, qubits_for_dim, CMatrix, HERMITICITY_TOLERANCE, ZERO};

/// Trace over every site not in `keep` (1-based). The kept sites appear in
/// ascending order, the lowest site on the most significant qubit.
pub fn partial_trace(rho: &CMatrix, keep: &[usize]) -> Result<CMatrix> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::Dimension("operator is not square".into()));
    }
    let n = qubits_for_dim(rho.nrows())?;
    check_dense_qubits(n)?;
    let mut sites = keep.to_vec();
    sites.sort_unstable();
    sites.dedup();
    if sites.len() != keep.len() {
        return Err(Error::Validation("repeated site in partial trace".into()));
    }
    if let Some(bad) = sites.iter().find(|&&s| s == 0 || s > n) {
        return Err(Error::Domain(format!("site {bad} outside 1..={n}")));
    }
    let bit = |s: usize| 1usize << (n - s);
    let keep_mask: usize = sites.iter().map(|&s| bit(s)).sum();
    let traced: Vec<usize> = (1..=n).filter(|s| keep_mask & bit(*s) == 0).map(bit).collect();
    let k = sites.len();
    // spread a k-bit kept index onto the full register
    let spread = |a: usize| -> usize {
        sites
            .iter()
            .enumerate()
            .filter(|(pos, _)| a & (1 << (k - 1 - pos)) != 0)
            .map(|(_, &s)| bit(s))
            .sum()
    };
    let env: Vec<usize> = (0..1usize << traced.len())
        .map(|e| {
            traced
                .iter()
                .enumerate()
                .filter(|(pos, _)| e & (1 << pos) != 0)
                .map(|(_, b)| b)
                .sum()
        })
        .collect();
    let dk = 1usize << k;
    let offsets: Vec<usize> = (0..dk).map(spread).collect();
    let mut out = CMatrix::from_element(dk, dk, ZERO);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = ZERO;
            for e in &env {
                acc += rho[(offsets[a] | e, offsets[b] | e)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

fn check_pair(th: &CMatrix, ex: &CMatrix) -> Result<()> {
    if th.shape() != ex.shape() || th.nrows() != th.ncols() {
        return Err(Error::Dimension(format!("{:?} vs {:?}", th.shape(), ex.shape())));
    }
    for m in [th, ex] {
        let err = hermiticity_error(m);
        if err > HERMITICITY_TOLERANCE {
            return Err(Error::Validation(format!("input is not Hermitian (error {err:e})")));
        }
    }
    Ok(())
}

fn purity(m: &CMatrix) -> f64 {
    inner(m, m).re
}

/// `F = tr(ρ_th ρ_ex) / √(tr ρ_th² · tr ρ_ex²)`: invariant under rescaling of either input.
pub fn fidelity_metric(th: &CMatrix, ex: &CMatrix) -> Result<f64> {
    check_pair(th, ex)?;
    let denom = (purity(th) * purity(ex)).sqrt();
    if denom <= f64::MIN_POSITIVE {
        return Err(Error::UndefinedMetric("zero-norm input to F".into()));
    }
    Ok(inner(th, ex).re / denom)
}

/// `c = tr(ρ_th ρ_ex) / tr ρ_th²`: scales linearly with `ρ_ex`.
pub fn attenuated_correlation(th: &CMatrix, ex: &CMatrix) -> Result<f64> {
    check_pair(th, ex)?;
    let denom = purity(th);
    if denom <= f64::MIN_POSITIVE {
        return Err(Error::UndefinedMetric("zero-norm reference in c".into()));
    }
    Ok(inner(th, ex).re / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, kron, max_abs_diff, trace};

    fn dm(v: &[(f64, f64)]) -> CMatrix {
        let psi = crate::linalg::CVector::from_iterator(v.len(), v.iter().map(|&(a, b)| c(a, b)));
        &psi * psi.adjoint()
    }

    #[test]
    fn partial_trace_of_product() {
        let a = dm(&[(0.6, 0.0), (0.0, 0.8)]);
        let b = dm(&[(1.0, 0.0), (0.0, 0.0)]);
        let cc = CMatrix::identity(2, 2) * c(0.5, 0.0);
        let rho = kron(&kron(&a, &b), &cc);
        assert!(max_abs_diff(&partial_trace(&rho, &[1]).unwrap(), &a) < 1e-15);
        assert!(max_abs_diff(&partial_trace(&rho, &[2]).unwrap(), &b) < 1e-15);
        assert!(max_abs_diff(&partial_trace(&rho, &[3]).unwrap(), &cc) < 1e-15);
        assert!(max_abs_diff(&partial_trace(&rho, &[1, 3]).unwrap(), &kron(&a, &cc)) < 1e-15);
        assert!(max_abs_diff(&partial_trace(&rho, &[3, 1]).unwrap(), &kron(&a, &cc)) < 1e-15);
        assert!((trace(&partial_trace(&rho, &[]).unwrap()).re - 1.0).abs() < 1e-15);
        assert!(partial_trace(&rho, &[4]).is_err());
        assert!(partial_trace(&rho, &[1, 1]).is_err());
    }

    #[test]
    fn metric_examples() {
        let rho = dm(&[(0.6, 0.0), (0.0, 0.8)]);
        assert!((fidelity_metric(&rho, &rho).unwrap() - 1.0).abs() < 1e-15);
        assert!((attenuated_correlation(&rho, &rho).unwrap() - 1.0).abs() < 1e-15);
        let half = &rho * c(0.5, 0.0);
        assert!((fidelity_metric(&rho, &half).unwrap() - 1.0).abs() < 1e-15);
        assert!((attenuated_correlation(&rho, &half).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            fidelity_metric(&rho, &CMatrix::zeros(2, 2)),
            Err(Error::UndefinedMetric(_))
        ));
    }
}
