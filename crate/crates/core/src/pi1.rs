//! Finite presentations, integer Smith normal form, and the fundamental group
//! of the vortex moduli space.
//!
//! Words are lists of signed 1-based generator indices: `3` is `x₃`, `-3` is
//! `x₃⁻¹`.

use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Pi1Error {
    #[error("generator index {index} out of range 1..={num_generators}")]
    InvalidGenerator { index: i64, num_generators: usize },
    #[error("fibration calculus needs a simply connected fiber and a section (fiber_simply_connected = {fiber_simply_connected}, has_section = {has_section})")]
    InsufficientHypotheses { fiber_simply_connected: bool, has_section: bool },
    #[error("degree {0} is out of scope: the no-go statement concerns d > 1")]
    OutOfScopeDegree(i64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cyclic factor {0} must be at least 2")]
    InvalidCyclicFactor(u64),
}

pub type Word = Vec<i64>;

/// Cancels adjacent `x x⁻¹` pairs.
pub fn free_reduce(word: &[i64]) -> Word {
    let mut out: Word = Vec::with_capacity(word.len());
    for &letter in word {
        if out.last() == Some(&-letter) {
            out.pop();
        } else {
            out.push(letter);
        }
    }
    out
}

pub fn inverse_word(word: &[i64]) -> Word {
    word.iter().rev().map(|&l| -l).collect()
}

pub fn commutator(a: i64, b: i64) -> Word {
    vec![a, b, -a, -b]
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawPresentation")]
pub struct GroupPresentation {
    num_generators: usize,
    relators: Vec<Word>,
}

#[derive(Deserialize)]
struct RawPresentation {
    num_generators: usize,
    relators: Vec<Word>,
}

impl TryFrom<RawPresentation> for GroupPresentation {
    type Error = Pi1Error;
    fn try_from(raw: RawPresentation) -> Result<Self, Pi1Error> {
        Self::new(raw.num_generators, raw.relators)
    }
}

impl GroupPresentation {
    /// Validates generator indices, freely reduces each relator and drops the
    /// ones that reduce to the identity.
    pub fn new(num_generators: usize, relators: Vec<Word>) -> Result<Self, Pi1Error> {
        for &letter in relators.iter().flatten() {
            if letter == 0 || letter.unsigned_abs() as usize > num_generators {
                return Err(Pi1Error::InvalidGenerator { index: letter, num_generators });
            }
        }
        let relators = relators
            .iter()
            .map(|r| free_reduce(r))
            .filter(|r| !r.is_empty())
            .collect();
        Ok(Self { num_generators, relators })
    }

    pub fn trivial() -> Self {
        Self { num_generators: 0, relators: Vec::new() }
    }

    pub fn num_generators(&self) -> usize {
        self.num_generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    /// Exponent sum of every generator in every relator; one row per relator.
    pub fn relation_matrix(&self) -> Vec<Vec<BigInt>> {
        self.relators
            .iter()
            .map(|r| {
                let mut row = vec![BigInt::zero(); self.num_generators];
                for &l in r {
                    let k = l.unsigned_abs() as usize - 1;
                    row[k] += if l > 0 { 1 } else { -1 };
                }
                row
            })
            .collect()
    }

    /// Whether every commutator `[xᵢ, xⱼ]` is a relator, up to cyclic
    /// rotation and inversion. Such a presentation defines an abelian group.
    pub fn contains_all_commutators(&self) -> bool {
        let n = self.num_generators as i64;
        (1..=n).all(|i| (i + 1..=n).all(|j| self.has_relator_up_to_conjugacy(&commutator(i, j))))
    }

    fn has_relator_up_to_conjugacy(&self, word: &[i64]) -> bool {
        let inv = inverse_word(word);
        self.relators.iter().any(|r| is_rotation(r, word) || is_rotation(r, &inv))
    }
}

fn is_rotation(a: &[i64], b: &[i64]) -> bool {
    a.len() == b.len() && (0..a.len().max(1)).any(|s| a.iter().cycle().skip(s).take(a.len()).eq(b.iter()))
}

/// Invariants of a finitely generated abelian group `ℤ^r ⊕ ℤ/t₁ ⊕ … ⊕ ℤ/t_k`
/// with `t₁ | t₂ | …`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct AbelianInvariants {
    pub free_rank: usize,
    #[serde(serialize_with = "serialize_big_list")]
    pub torsion: Vec<BigUint>,
}

fn serialize_big_list<S: Serializer>(values: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(values.len()))?;
    for v in values {
        match v.to_u64() {
            Some(x) => seq.serialize_element(&x)?,
            None => seq.serialize_element(&v.to_string())?,
        }
    }
    seq.end()
}

impl AbelianInvariants {
    pub fn free(rank: usize) -> Self {
        Self { free_rank: rank, torsion: Vec::new() }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn is_free(&self) -> bool {
        self.torsion.is_empty()
    }
}

/// Diagonal of the Smith normal form of an integer matrix: nonnegative
/// entries `d₁ | d₂ | …`, one per row/column up to the smaller dimension.
pub fn smith_diagonal(matrix: &[Vec<BigInt>]) -> Vec<BigInt> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<BigInt>> = matrix.to_vec();
    let size = rows.min(cols);
    let mut diag = Vec::with_capacity(size);
    for t in 0..size {
        loop {
            let pivot = (t..rows)
                .flat_map(|i| (t..cols).map(move |j| (i, j)))
                .filter(|&(i, j)| !a[i][j].is_zero())
                .min_by(|&(i, j), &(k, l)| a[i][j].abs().cmp(&a[k][l].abs()));
            let Some((pi, pj)) = pivot else {
                diag.extend((t..size).map(|_| BigInt::zero()));
                return diag;
            };
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            let p = a[t][t].clone();
            let mut clean = true;
            for i in t + 1..rows {
                let q = &a[i][t] / &p;
                if !q.is_zero() {
                    for j in t..cols {
                        let delta = &q * &a[t][j];
                        a[i][j] -= delta;
                    }
                }
                clean &= a[i][t].is_zero();
            }
            for j in t + 1..cols {
                let q = &a[t][j] / &p;
                if !q.is_zero() {
                    for row in a.iter_mut().skip(t) {
                        let delta = &q * &row[t];
                        row[j] -= delta;
                    }
                }
                clean &= a[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a[i][j].is_multiple_of(&p)));
            match offender {
                Some(i) => {
                    for j in t..cols {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
    }
    diag
}

pub fn abelianization(p: &GroupPresentation) -> AbelianInvariants {
    let diag = smith_diagonal(&p.relation_matrix());
    let rank = diag.iter().filter(|d| !d.is_zero()).count();
    let torsion = diag
        .into_iter()
        .filter(|d| !d.is_zero() && !d.is_one())
        .map(|d| d.to_biguint().expect("Smith diagonal is nonnegative"))
        .collect();
    AbelianInvariants { free_rank: p.num_generators - rank, torsion }
}

/// `⟨a₁, b₁, …, a_g, b_g | [a₁,b₁]⋯[a_g,b_g]⟩`, with `aᵢ = 2i−1`, `bᵢ = 2i`.
pub fn surface_group(g: usize) -> GroupPresentation {
    if g == 0 {
        return GroupPresentation::trivial();
    }
    let relator = (1..=g as i64).flat_map(|i| commutator(2 * i - 1, 2 * i)).collect();
    GroupPresentation { num_generators: 2 * g, relators: vec![relator] }
}

/// `π₁(Sym^d Σ_g)`: the surface group for `d = 1`, its abelianization for `d ≥ 2`.
pub fn sym_product_pi1(g: usize, d: usize) -> Result<GroupPresentation, Pi1Error> {
    if d == 0 {
        return Err(Pi1Error::InvalidParameter("d must be at least 1".into()));
    }
    let mut p = surface_group(g);
    if d >= 2 {
        let n = p.num_generators as i64;
        for i in 1..=n {
            for j in i + 1..=n {
                p.relators.push(commutator(i, j));
            }
        }
    }
    Ok(p)
}

/// Spaces whose fundamental group is taken from a fact table rather than computed.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnownSpace {
    Point,
    /// Complex projective space `ℙ^dim`.
    ProjectiveSpace { dim: usize },
    Circle,
    Product(Vec<KnownSpace>),
}

impl KnownSpace {
    /// `(ℙ^{n−1})^d`.
    pub fn projective_power(n: usize, d: usize) -> Self {
        KnownSpace::Product(vec![KnownSpace::ProjectiveSpace { dim: n.saturating_sub(1) }; d])
    }

    pub fn is_simply_connected(&self) -> bool {
        match self {
            KnownSpace::Point | KnownSpace::ProjectiveSpace { .. } => true,
            KnownSpace::Circle => false,
            KnownSpace::Product(factors) => factors.iter().all(KnownSpace::is_simply_connected),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct FibrationDescriptor {
    pub base: GroupPresentation,
    pub fiber_simply_connected: bool,
    pub has_section: bool,
}

impl FibrationDescriptor {
    /// The divisor map of the rank-`n`, degree-`d` moduli space over `Sym^d Σ_g`,
    /// with generic fibre `(ℙ^{n−1})^d` and the section `θ`.
    pub fn vortex_moduli(g: usize, n: usize, d: usize) -> Result<Self, Pi1Error> {
        Ok(Self {
            base: sym_product_pi1(g, d)?,
            fiber_simply_connected: KnownSpace::projective_power(n, d).is_simply_connected(),
            has_section: true,
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct FibrationCertificate {
    pub fiber_simply_connected: bool,
    pub has_section: bool,
    pub surjectivity: &'static str,
    pub injectivity: &'static str,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CertifiedPresentation {
    pub presentation: GroupPresentation,
    pub certificate: FibrationCertificate,
}

/// `π₁(total) ≅ π₁(base)` when the fibre is simply connected and a section exists.
pub fn pi1_from_fibration(f: &FibrationDescriptor) -> Result<CertifiedPresentation, Pi1Error> {
    if !(f.fiber_simply_connected && f.has_section) {
        return Err(Pi1Error::InsufficientHypotheses {
            fiber_simply_connected: f.fiber_simply_connected,
            has_section: f.has_section,
        });
    }
    Ok(CertifiedPresentation {
        presentation: f.base.clone(),
        certificate: FibrationCertificate {
            fiber_simply_connected: true,
            has_section: true,
            surjectivity: "the section splits the projection on fundamental groups",
            injectivity: "the homotopy exact sequence ends in the trivial group of the fibre",
        },
    })
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ModuliPi1 {
    pub g: usize,
    pub n: usize,
    pub d: usize,
    pub presentation: GroupPresentation,
    pub invariants: AbelianInvariants,
    /// `None` for `n = 1`, where the moduli space is `Sym^d Σ` itself.
    pub certificate: Option<FibrationCertificate>,
}

pub fn moduli_pi1(g: usize, n: usize, d: usize) -> Result<ModuliPi1, Pi1Error> {
    if n == 0 {
        return Err(Pi1Error::InvalidParameter("n must be at least 1".into()));
    }
    let (presentation, certificate) = if n == 1 {
        (sym_product_pi1(g, d)?, None)
    } else {
        let c = pi1_from_fibration(&FibrationDescriptor::vortex_moduli(g, n, d)?)?;
        (c.presentation, Some(c.certificate))
    };
    let invariants = abelianization(&presentation);
    Ok(ModuliPi1 { g, n, d, presentation, invariants, certificate })
}

/// Character of `ℤ/k₁ × ⋯ × ℤ/k_r` sending the `i`-th generator to `exp(2πi·aᵢ/kᵢ)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct Character {
    pub exponents: Vec<u64>,
}

impl Character {
    pub fn dimension(&self) -> usize {
        1
    }

    pub fn value(&self, factors: &[u64], element: &[u64]) -> Complex64 {
        let phase: f64 = self
            .exponents
            .iter()
            .zip(factors)
            .zip(element)
            .map(|((&a, &k), &x)| ((a * x) % k) as f64 / k as f64)
            .sum();
        Complex64::from_polar(1.0, 2.0 * PI * phase)
    }
}

/// All elements of `ℤ/k₁ × ⋯ × ℤ/k_r` in lexicographic order.
pub fn group_elements(factors: &[u64]) -> Vec<Vec<u64>> {
    factors.iter().fold(vec![Vec::new()], |acc, &k| {
        acc.into_iter()
            .flat_map(|prefix| {
                (0..k).map(move |x| {
                    let mut e = prefix.clone();
                    e.push(x);
                    e
                })
            })
            .collect()
    })
}

pub fn character_table_abelian(cyclic_factors: &[u64]) -> Result<Vec<Character>, Pi1Error> {
    if let Some(&bad) = cyclic_factors.iter().find(|&&k| k < 2) {
        return Err(Pi1Error::InvalidCyclicFactor(bad));
    }
    Ok(group_elements(cyclic_factors).into_iter().map(|exponents| Character { exponents }).collect())
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct NogoReport {
    pub pi1_abelian: bool,
    pub max_irreducible_rank: usize,
    pub rep_variety_dim: usize,
    pub invariants: AbelianInvariants,
    pub certificate: Option<FibrationCertificate>,
}

/// Irreducible unitary local systems on the `d > 1` moduli space are rank one,
/// and `Hom(π₁, U(1))` is a torus of dimension `b₁`.
pub fn nogo_check(g: usize, n: usize, d: i64) -> Result<NogoReport, Pi1Error> {
    if d <= 1 {
        return Err(Pi1Error::OutOfScopeDegree(d));
    }
    let m = moduli_pi1(g, n, d as usize)?;
    let pi1_abelian = m.presentation.contains_all_commutators();
    if !pi1_abelian {
        return Err(Pi1Error::InvalidParameter("presentation is not visibly abelian".into()));
    }
    Ok(NogoReport {
        pi1_abelian,
        max_irreducible_rank: 1,
        rep_variety_dim: m.invariants.free_rank,
        invariants: m.invariants,
        certificate: m.certificate,
    })
}

/// `|Hom(A, ℤ/k)|` for the abelian group with the given invariants.
pub fn hom_count_to_cyclic(inv: &AbelianInvariants, k: u64) -> BigUint {
    let k_big = BigUint::from(k);
    let mut count = k_big.pow(inv.free_rank as u32);
    for t in &inv.torsion {
        count *= t.gcd(&k_big);
    }
    count
}
