//! Reference coins shipped with the crate.
//!
//! The coin files live in `fixtures/` and use the expression grammar, so the
//! matrices here are exactly what `parse_coin` produces from those files.

use crate::coin::{validate_coin, Coin};
use crate::error::Result;
use crate::io::{parse_coin, parse_family, CoinFamily};
use crate::linalg::{ComplexMatrix, C64};
use crate::Tolerances;

/// Coin files by name: `(name, file text)`.
pub const COIN_FILES: &[(&str, &str)] = &[
    ("pq-diagonal", include_str!("../fixtures/pq-diagonal.json")),
    ("pq-antidiagonal", include_str!("../fixtures/pq-antidiagonal.json")),
    ("pq-mixed", include_str!("../fixtures/pq-mixed.json")),
    ("unitary-sum", include_str!("../fixtures/unitary-sum.json")),
    ("unbalanced", include_str!("../fixtures/unbalanced.json")),
    ("triangular", include_str!("../fixtures/triangular.json")),
    ("qutrit", include_str!("../fixtures/qutrit.json")),
    ("classical-fair", include_str!("../fixtures/classical-fair.json")),
    ("classical-third", include_str!("../fixtures/classical-third.json")),
];

/// Family files by name.
pub const FAMILY_FILES: &[(&str, &str)] = &[
    ("common-e1", include_str!("../fixtures/common-e1.family.json")),
    ("unitary-sum", include_str!("../fixtures/unitary-sum.family.json")),
];

/// Density files by name.
pub const DENSITY_FILES: &[(&str, &str)] = &[
    ("e1", include_str!("../fixtures/densities/e1.json")),
    ("e2", include_str!("../fixtures/densities/e2.json")),
    ("maximally-mixed", include_str!("../fixtures/densities/maximally-mixed.json")),
    ("plus", include_str!("../fixtures/densities/plus.json")),
    ("off-diagonal", include_str!("../fixtures/densities/off-diagonal.json")),
];

pub fn coin_text(name: &str) -> Option<&'static str> {
    COIN_FILES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn family_text(name: &str) -> Option<&'static str> {
    FAMILY_FILES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Parses a bundled coin by name.
pub fn coin(name: &str) -> Option<Coin> {
    coin_text(name).map(|t| parse_coin(t).expect("bundled coin file is valid"))
}

pub fn family(name: &str) -> Option<CoinFamily> {
    family_text(name).map(|t| parse_family(t).expect("bundled family file is valid"))
}

/// `L = diag(1/√3, √2/√3)`, `R = diag(√2/√3, 1/√3)`.
pub fn pq_diagonal() -> Coin {
    coin("pq-diagonal").unwrap()
}

/// Diagonal `L`, antidiagonal `R`.
pub fn pq_antidiagonal() -> Coin {
    coin("pq-antidiagonal").unwrap()
}

/// `L = diag(1/√3, 1/√2)`, `R = diag(√2/√3, 1/√2)`.
pub fn pq_mixed() -> Coin {
    coin("pq-mixed").unwrap()
}

pub fn unbalanced() -> Coin {
    coin("unbalanced").unwrap()
}

/// `L = [[1,1],[0,1]]/√3`, `R = [[1,0],[-1,1]]/√3`.
pub fn triangular() -> Coin {
    coin("triangular").unwrap()
}

pub fn qutrit() -> Coin {
    coin("qutrit").unwrap()
}

/// `L = [[a, b], [0, 0]]`, `R = [[0, 0], [-b̄, ā]]`; a coin iff `|a|² + |b|² = 1`.
pub fn unitary_sum(a: C64, b: C64) -> Result<Coin> {
    let z = C64::new(0.0, 0.0);
    let l = ComplexMatrix::new(2, vec![a, b, z, z])?;
    let r = ComplexMatrix::new(2, vec![z, z, -b.conj(), a.conj()])?;
    validate_coin(l, r, Tolerances::default().coin)
}

/// Upper-triangular pair sharing only `e₁`; valid for `0 ≤ x ≤ 1/√2`.
pub fn common_e1_family(x: f64) -> Coin {
    family("common-e1")
        .unwrap()
        .instantiate(x, Tolerances::default().coin)
        .expect("parameter inside the family's domain")
}

/// The three unitary-sum samples used by the reference suite.
pub fn unitary_sum_samples() -> Vec<(String, Coin)> {
    let h = 0.5f64.sqrt();
    [
        (C64::new(0.6, 0.0), C64::new(0.8, 0.0)),
        (C64::new(h, 0.0), C64::new(h, 0.0)),
        (C64::new(0.6, 0.0), C64::new(0.0, 0.8)),
    ]
    .into_iter()
    .map(|(a, b)| (format!("unitary-sum(a={a}, b={b})"), unitary_sum(a, b).unwrap()))
    .collect()
}

/// Every reference coin with a display name, one sample per family.
pub fn reference_coins() -> Vec<(String, Coin)> {
    vec![
        ("pq-diagonal".into(), pq_diagonal()),
        ("pq-antidiagonal".into(), pq_antidiagonal()),
        ("pq-mixed".into(), pq_mixed()),
        ("unitary-sum".into(), coin("unitary-sum").unwrap()),
        ("unbalanced".into(), unbalanced()),
        ("triangular".into(), triangular()),
        ("common-e1(x=0.3)".into(), common_e1_family(0.3)),
        ("qutrit".into(), qutrit()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_bundled_files_parse() {
        for (name, text) in COIN_FILES {
            let c = parse_coin(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(c.residual() < 1e-14, "{name}: residual {}", c.residual());
        }
        for (name, text) in DENSITY_FILES {
            crate::io::parse_operator(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        for x in [0.05, 0.1, 0.3, 0.45, 0.5] {
            assert!(common_e1_family(x).residual() < 1e-14);
        }
        assert_eq!(qutrit().dim(), 3);
        assert_eq!(unitary_sum_samples().len(), 3);
    }

    #[test]
    fn bundled_matrices_match_closed_forms() {
        let s3 = 3f64.sqrt();
        let s2 = 2f64.sqrt();
        let c = pq_antidiagonal();
        assert_eq!(c.left()[(1, 1)].re, s2 / s3);
        assert_eq!(c.right()[(0, 1)].re, 1.0 / s3);
        let t = triangular();
        assert_eq!(t.right()[(1, 0)].re, -1.0 / s3);
        let q = qutrit();
        assert_eq!(q.right()[(1, 1)].re, 6f64.sqrt() / 2.0 / 3.0);
    }

    #[test]
    fn unitary_sum_requires_unit_norm() {
        assert!(unitary_sum(C64::new(0.6, 0.0), C64::new(0.6, 0.0)).is_err());
    }
}
