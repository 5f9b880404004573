use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the palindromic symmetry test on couplings and fields.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// An open XY chain: `N` sites, `N − 1` nearest-neighbour couplings, `N` local fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSpec {
    n: usize,
    couplings: Vec<f64>,
    fields: Vec<f64>,
}

impl ChainSpec {
    pub fn new(n: usize, couplings: Vec<f64>, fields: Vec<f64>) -> Result<ChainSpec> {
        if n == 0 {
            return Err(Error::Domain("a chain needs at least one site".into()));
        }
        if couplings.len() != n - 1 {
            return Err(Error::Dimension(format!(
                "{} couplings for {n} sites (expected {})",
                couplings.len(),
                n - 1
            )));
        }
        if fields.len() != n {
            return Err(Error::Dimension(format!("{} fields for {n} sites", fields.len())));
        }
        if couplings.iter().chain(&fields).any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite coupling or field".into()));
        }
        Ok(ChainSpec { n, couplings, fields })
    }

    /// Zero-field chain with `J_i = √(i(N−i))`.
    pub fn engineered(n: usize) -> Result<ChainSpec> {
        ChainSpec::new(n, engineered_couplings(n)?, vec![0.0; n])
    }

    pub fn uniform(n: usize, coupling: f64) -> Result<ChainSpec> {
        ChainSpec::new(n, vec![coupling; n.saturating_sub(1)], vec![0.0; n])
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    /// `J_i = J_{N−i}` and `h_i = h_{N+1−i}` (1-based).
    pub fn is_mirror_symmetric(&self) -> bool {
        let palindrome = |v: &[f64]| {
            v.iter()
                .zip(v.iter().rev())
                .all(|(a, b)| (a - b).abs() <= SYMMETRY_TOLERANCE)
        };
        palindrome(&self.couplings) && palindrome(&self.fields)
    }

    /// 1-based mirror image of a site.
    pub fn mirror_site(&self, site: usize) -> usize {
        self.n + 1 - site
    }

    pub fn from_json(text: &str) -> Result<ChainSpec> {
        let file: ChainSpecFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

/// `J_i = √(i(N − i))` for `i = 1 … N−1`.
pub fn engineered_couplings(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Domain(format!("engineered couplings need N ≥ 2, got {n}")));
    }
    Ok((1..n).map(|i| ((i * (n - i)) as f64).sqrt()).collect())
}

/// On-disk chain description. With `engineered: true` the couplings and
/// fields may be omitted and are generated.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpecFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<Vec<f64>>,
    #[serde(default)]
    pub engineered: bool,
}

impl TryFrom<ChainSpecFile> for ChainSpec {
    type Error = Error;
    fn try_from(f: ChainSpecFile) -> Result<ChainSpec> {
        let couplings = match (f.couplings, f.engineered) {
            (Some(c), _) => c,
            (None, true) => engineered_couplings(f.n)?,
            (None, false) => return Err(Error::Parse("missing \"couplings\"".into())),
        };
        let fields = match (f.fields, f.engineered) {
            (Some(h), _) => h,
            (None, true) => vec![0.0; f.n],
            (None, false) => return Err(Error::Parse("missing \"fields\"".into())),
        };
        let spec = ChainSpec::new(f.n, couplings, fields)?;
        if f.engineered {
            let expected = ChainSpec::engineered(f.n)?;
            if spec != expected {
                return Err(Error::Validation(
                    "\"engineered\": true conflicts with the given couplings/fields".into(),
                ));
            }
        }
        Ok(spec)
    }
}

impl From<&ChainSpec> for ChainSpecFile {
    fn from(s: &ChainSpec) -> ChainSpecFile {
        ChainSpecFile {
            n: s.n,
            couplings: Some(s.couplings.clone()),
            fields: Some(s.fields.clone()),
            engineered: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engineered_values() {
        let j4 = engineered_couplings(4).unwrap();
        assert_eq!(j4, vec![3f64.sqrt(), 2.0, 3f64.sqrt()]);
        let j5 = engineered_couplings(5).unwrap();
        assert_eq!(j5, vec![2.0, 6f64.sqrt(), 6f64.sqrt(), 2.0]);
        assert_eq!(engineered_couplings(2).unwrap(), vec![1.0]);
        assert!(matches!(engineered_couplings(1), Err(Error::Domain(_))));
        for n in 2..20 {
            let j = engineered_couplings(n).unwrap();
            assert!(j.iter().zip(j.iter().rev()).all(|(a, b)| a == b));
        }
    }

    #[test]
    fn length_checks() {
        assert!(ChainSpec::new(3, vec![1.0], vec![0.0; 3]).is_err());
        assert!(ChainSpec::new(3, vec![1.0; 2], vec![0.0; 2]).is_err());
        assert!(ChainSpec::new(0, vec![], vec![]).is_err());
        assert!(ChainSpec::new(1, vec![], vec![0.5]).is_ok());
    }

    #[test]
    fn mirror_symmetry_flag() {
        assert!(ChainSpec::engineered(6).unwrap().is_mirror_symmetric());
        assert!(!ChainSpec::new(3, vec![1.0, 2.0], vec![0.0; 3]).unwrap().is_mirror_symmetric());
        assert!(!ChainSpec::new(3, vec![1.0, 1.0], vec![1.0, 0.0, 0.0])
            .unwrap()
            .is_mirror_symmetric());
        assert!(ChainSpec::new(3, vec![1.0, 1.0], vec![1.0, 5.0, 1.0])
            .unwrap()
            .is_mirror_symmetric());
    }

    #[test]
    fn json_forms() {
        let s = ChainSpec::from_json(r#"{"n": 5, "engineered": true}"#).unwrap();
        assert_eq!(s, ChainSpec::engineered(5).unwrap());
        let s = ChainSpec::from_json(r#"{"n": 2, "couplings": [3.0], "fields": [1.0, 1.0]}"#)
            .unwrap();
        assert_eq!(s.couplings(), &[3.0]);
        assert!(ChainSpec::from_json(r#"{"n": 2, "couplings": [3.0]}"#).is_err());
        assert!(ChainSpec::from_json(r#"{"n": 2, "engineered": true, "extra": 1}"#).is_err());
        assert!(ChainSpec::from_json(r#"{"n": 3, "engineered": true, "couplings": [1, 1]}"#)
            .is_err());
    }
}
