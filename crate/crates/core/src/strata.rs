//! Points of the symmetric product, partition types, stratum dimensions and
//! Betti numbers of `Sym^d` of a genus-`g` surface.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrataError {
    #[error("degree must be at least 1, got {0}")]
    InvalidDegree(i64),
    #[error("partition {partition} does not sum to d = {degree}")]
    PartitionMismatch { partition: Partition, degree: usize },
    #[error("rank n must be at least 1")]
    InvalidRank,
    #[error("divisor point listed twice")]
    DuplicatePoint,
    #[error("divisor multiplicities must be at least 1")]
    ZeroMultiplicity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorPoint<P> {
    pub position: P,
    pub multiplicity: u32,
}

/// A finite formal sum `Σ mᵢ·xᵢ` with distinct positions and `mᵢ ≥ 1`.
///
/// Positions are generic so the same type serves the numerical side
/// (`Complex64` points of a torus) and the exact side (`ExactScalar`
/// points of an affine chart).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveDivisor<P> {
    points: Vec<DivisorPoint<P>>,
}

impl<P: PartialEq> EffectiveDivisor<P> {
    pub fn new(points: Vec<(P, u32)>) -> Result<Self, StrataError> {
        let mut out: Vec<DivisorPoint<P>> = Vec::with_capacity(points.len());
        for (position, multiplicity) in points {
            if multiplicity == 0 {
                return Err(StrataError::ZeroMultiplicity);
            }
            if out.iter().any(|p| p.position == position) {
                return Err(StrataError::DuplicatePoint);
            }
            out.push(DivisorPoint { position, multiplicity });
        }
        Ok(Self { points: out })
    }

    pub fn empty() -> Self {
        Self { points: Vec::new() }
    }

    pub fn points(&self) -> &[DivisorPoint<P>] {
        &self.points
    }

    pub fn degree(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn multiplicity_at(&self, position: &P) -> u32 {
        self.points
            .iter()
            .find(|p| &p.position == position)
            .map_or(0, |p| p.multiplicity)
    }

    /// Partition type of the multiplicities; `None` for the empty divisor.
    pub fn partition(&self) -> Option<Partition> {
        Partition::new(self.points.iter().map(|p| p.multiplicity as usize).collect()).ok()
    }

    /// Same divisor up to reordering of the points.
    pub fn same_as(&self, other: &Self) -> bool {
        self.points.len() == other.points.len()
            && self
                .points
                .iter()
                .all(|p| other.multiplicity_at(&p.position) == p.multiplicity)
    }
}

impl<'de, P: Deserialize<'de> + PartialEq> Deserialize<'de> for EffectiveDivisor<P> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw<P> {
            points: Vec<DivisorPoint<P>>,
        }
        let raw = Raw::<P>::deserialize(deserializer)?;
        Self::new(raw.points.into_iter().map(|p| (p.position, p.multiplicity)).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// Weakly decreasing list of positive parts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition(Vec<usize>);

impl Partition {
    /// Sorts `parts` into decreasing order; rejects empty lists and zero parts.
    pub fn new(mut parts: Vec<usize>) -> Result<Self, StrataError> {
        if parts.is_empty() {
            return Err(StrataError::InvalidDegree(0));
        }
        if parts.contains(&0) {
            return Err(StrataError::ZeroMultiplicity);
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_generic(&self) -> bool {
        self.0.iter().all(|&m| m == 1)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All partitions of `d`, sorted lexicographically on their part lists.
pub fn enumerate_partitions(d: i64) -> Result<Vec<Partition>, StrataError> {
    if d <= 0 {
        return Err(StrataError::InvalidDegree(d));
    }
    fn rec(remaining: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition(prefix.clone()));
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            prefix.push(part);
            rec(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let d = d as usize;
    let mut out = Vec::new();
    rec(d, d, &mut Vec::new(), &mut out);
    out.sort();
    Ok(out)
}

/// Dimensions attached to one partition type of `Sym^d` for rank-`n` local vortices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumInfo {
    pub partition: Partition,
    pub num_points: usize,
    pub base_dim: usize,
    pub fiber_dim: usize,
    pub total_dim: usize,
    pub codim: usize,
}

/// Complex dimensions of the stratum of type `p` and of its preimage under the
/// divisor map.
///
/// Every one of the `d` elementary modifications in a tower picks a
/// hyperplane in an `n`-dimensional fibre, so the fibre dimension is
/// `(n-1)·d` on every stratum; only the base dimension (the number of
/// distinct points) changes.
pub fn stratum_info(p: &Partition, n: usize, d: usize) -> Result<StratumInfo, StrataError> {
    if n == 0 {
        return Err(StrataError::InvalidRank);
    }
    if p.total() != d {
        return Err(StrataError::PartitionMismatch { partition: p.clone(), degree: d });
    }
    let a = p.len();
    let fiber_dim = (n - 1) * d;
    Ok(StratumInfo {
        partition: p.clone(),
        num_points: a,
        base_dim: a,
        fiber_dim,
        total_dim: a + fiber_dim,
        codim: d - a,
    })
}

/// Betti numbers `b_0, …, b_{2d}` of `Sym^d(Σ_g)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymBetti {
    pub genus: usize,
    pub degree: usize,
    pub betti: Vec<BigUint>,
}

impl SymBetti {
    pub fn b1(&self) -> &BigUint {
        &self.betti[1]
    }

    pub fn euler_characteristic(&self) -> num_bigint::BigInt {
        self.betti
            .iter()
            .enumerate()
            .fold(num_bigint::BigInt::zero(), |acc, (k, b)| {
                let b = num_bigint::BigInt::from(b.clone());
                if k % 2 == 0 {
                    acc + b
                } else {
                    acc - b
                }
            })
    }
}

impl Serialize for SymBetti {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let numbers: Vec<serde_json::Value> = self
            .betti
            .iter()
            .map(|b| match b.to_u64() {
                Some(v) => serde_json::Value::from(v),
                None => serde_json::Value::from(b.to_string()),
            })
            .collect();
        let mut st = serializer.serialize_struct("SymBetti", 3)?;
        st.serialize_field("genus", &self.genus)?;
        st.serialize_field("degree", &self.degree)?;
        st.serialize_field("betti", &numbers)?;
        st.end()
    }
}

/// Coefficient of `x^d` in `(1 + x t)^{2g} / ((1 - x)(1 - x t²))`, read as a
/// polynomial in `t`.
pub fn sym_betti(g: usize, d: usize) -> SymBetti {
    // Truncated series in x whose coefficients are polynomials in t.
    type Series = Vec<Vec<BigUint>>;
    let t_len = 2 * d + 1;
    let mul = |a: &Series, b: &Series| -> Series {
        let mut out = vec![vec![BigUint::zero(); t_len]; d + 1];
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate().take(d + 1 - i) {
                for (s, x) in ai.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    for (u, y) in bj.iter().enumerate().take(t_len - s) {
                        out[i + j][s + u] += x * y;
                    }
                }
            }
        }
        out
    };
    let monomial = |x_pow: usize, t_pow: usize| -> Series {
        let mut s = vec![vec![BigUint::zero(); t_len]; d + 1];
        if x_pow <= d && t_pow < t_len {
            s[x_pow][t_pow] = BigUint::from(1u32);
        }
        s
    };
    let add = |a: &Series, b: &Series| -> Series {
        a.iter()
            .zip(b)
            .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
            .collect()
    };
    let one_plus_xt = add(&monomial(0, 0), &monomial(1, 1));
    let mut acc = monomial(0, 0);
    for _ in 0..2 * g {
        acc = mul(&acc, &one_plus_xt);
    }
    // 1/(1-x) and 1/(1-x t²) as truncated geometric series.
    let geometric = |t_step: usize| -> Series {
        (0..=d)
            .map(|k| {
                let mut row = vec![BigUint::zero(); t_len];
                if k * t_step < t_len {
                    row[k * t_step] = BigUint::from(1u32);
                }
                row
            })
            .collect()
    };
    acc = mul(&acc, &geometric(0));
    acc = mul(&acc, &geometric(2));
    SymBetti { genus: g, degree: d, betti: acc.swap_remove(d) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_partition_count(d: usize) -> usize {
        // Count weakly decreasing sequences via compositions filtered by order.
        fn compositions(n: usize, out: &mut Vec<Vec<usize>>, prefix: &mut Vec<usize>) {
            if n == 0 {
                out.push(prefix.clone());
                return;
            }
            for k in 1..=n {
                prefix.push(k);
                compositions(n - k, out, prefix);
                prefix.pop();
            }
        }
        let mut all = Vec::new();
        compositions(d, &mut all, &mut Vec::new());
        all.iter().filter(|c| c.windows(2).all(|w| w[0] >= w[1])).count()
    }

    #[test]
    fn partition_examples() {
        assert_eq!(enumerate_partitions(1).unwrap(), vec![Partition(vec![1])]);
        let four = enumerate_partitions(4).unwrap();
        assert_eq!(four.len(), 5);
        assert_eq!(four.len(), brute_force_partition_count(4));
        assert_eq!(four.first().unwrap().parts(), &[1, 1, 1, 1]);
        assert_eq!(four.last().unwrap().parts(), &[4]);
        assert!(four.windows(2).all(|w| w[0] < w[1]));
        let ten = enumerate_partitions(10).unwrap();
        assert_eq!(ten.len(), brute_force_partition_count(10));
        assert_eq!(ten.len(), 42);
        assert_eq!(enumerate_partitions(0), Err(StrataError::InvalidDegree(0)));
        assert_eq!(enumerate_partitions(-3), Err(StrataError::InvalidDegree(-3)));
    }

    #[test]
    fn stratum_examples() {
        for n in 1..=4 {
            let generic = Partition::new(vec![1; 5]).unwrap();
            assert_eq!(stratum_info(&generic, n, 5).unwrap().total_dim, n * 5);
        }
        let info = stratum_info(&Partition::new(vec![2]).unwrap(), 2, 2).unwrap();
        assert_eq!((info.fiber_dim, info.total_dim, info.codim), (2, 3, 1));
        let abelian = stratum_info(&Partition::new(vec![3]).unwrap(), 1, 3).unwrap();
        assert_eq!((abelian.fiber_dim, abelian.total_dim), (0, 1));
        assert!(matches!(
            stratum_info(&Partition::new(vec![2, 1]).unwrap(), 2, 4),
            Err(StrataError::PartitionMismatch { .. })
        ));
        assert_eq!(
            stratum_info(&Partition::new(vec![1]).unwrap(), 0, 1),
            Err(StrataError::InvalidRank)
        );
    }

    #[test]
    fn exactly_one_generic_stratum_and_it_is_maximal() {
        for d in 1..=7 {
            for n in 1..=3 {
                let infos: Vec<_> = enumerate_partitions(d as i64)
                    .unwrap()
                    .iter()
                    .map(|p| stratum_info(p, n, d).unwrap())
                    .collect();
                let generic: Vec<_> = infos.iter().filter(|i| i.codim == 0).collect();
                assert_eq!(generic.len(), 1);
                assert!(generic[0].partition.is_generic());
                let max = infos.iter().map(|i| i.total_dim).max().unwrap();
                assert_eq!(max, n * d);
                for i in &infos {
                    assert_eq!(i.total_dim == max, i.codim == 0);
                    assert_eq!(i.total_dim + i.codim, n * d);
                }
            }
        }
    }

    #[test]
    fn betti_examples() {
        let as_u64 = |b: &SymBetti| b.betti.iter().map(|x| x.to_u64().unwrap()).collect::<Vec<_>>();
        for g in 0..5 {
            assert_eq!(as_u64(&sym_betti(g, 1)), vec![1, 2 * g as u64, 1]);
        }
        assert_eq!(as_u64(&sym_betti(2, 2)), vec![1, 4, 7, 4, 1]);
        // Sym^d of the sphere is CP^d.
        assert_eq!(as_u64(&sym_betti(0, 3)), vec![1, 0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn betti_palindromic_with_b1_equal_2g() {
        for g in 0..=4 {
            for d in 1..=6 {
                let b = sym_betti(g, d);
                assert_eq!(b.betti.len(), 2 * d + 1);
                assert_eq!(b.betti[0], BigUint::from(1u32));
                assert_eq!(b.b1(), &BigUint::from(2 * g));
                let rev: Vec<_> = b.betti.iter().rev().cloned().collect();
                assert_eq!(rev, b.betti);
            }
        }
    }

    #[test]
    fn euler_characteristic_matches_macdonald() {
        // χ(Sym^d Σ_g) = (-1)^d · C(2g-2, d)
        fn binom(n: i64, k: i64) -> i64 {
            // generalised binomial for possibly negative n
            (0..k).fold(1i64, |acc, i| acc * (n - i)) / (1..=k).product::<i64>().max(1)
        }
        for g in 0..=4i64 {
            for d in 1..=6i64 {
                let expected = if d % 2 == 0 { 1 } else { -1 } * binom(2 * g - 2, d);
                assert_eq!(
                    sym_betti(g as usize, d as usize).euler_characteristic(),
                    expected.into(),
                    "g={g} d={d}"
                );
            }
        }
    }

    #[test]
    fn divisor_validation() {
        let d = EffectiveDivisor::new(vec![(1, 2), (3, 1)]).unwrap();
        assert_eq!(d.degree(), 3);
        assert_eq!(d.partition().unwrap().parts(), &[2, 1]);
        assert_eq!(EffectiveDivisor::new(vec![(1, 2), (1, 1)]), Err(StrataError::DuplicatePoint));
        assert_eq!(EffectiveDivisor::new(vec![(1, 0)]), Err(StrataError::ZeroMultiplicity));
        assert!(EffectiveDivisor::<i32>::empty().partition().is_none());
    }
}
