//! Local `U(n)` vortices as towers of Hecke modifications of the trivial bundle.
//!
//! The base curve is modelled on one affine chart with coordinate `z`. A
//! rank-`n` lattice `K ⊂ O^n` is represented by a [`PolyMatrix`] whose
//! columns are a basis of `K`; the inclusion `h : K → O^n` is that matrix and
//! the `n`-pair is its dual `(K*, h*)`. An elementary modification at `x`
//! along a hyperplane `H ⊂ K_x` replaces `K` by `{w ∈ K : w(x) ∈ H}`, which
//! multiplies the determinant by `(z − x)`.
//!
//! The divisor map sends a lattice to the divisor of `det h`; its section
//! sends `Σ mᵢ xᵢ` to `O(−D) ⊕ O^{n−1}`.

mod matrix;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{ExactScalar, Poly};
use crate::strata::{EffectiveDivisor, StrataError};
pub use matrix::PolyMatrix;
use matrix::{nullspace, row_echelon};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeckeError {
    #[error("hyperplane covector is zero")]
    DegenerateHyperplane,
    #[error("point {0} appears in more than one tower group")]
    DuplicatePoint(Box<ExactScalar>),
    #[error("tower group at {0} has no hyperplanes")]
    EmptyGroup(Box<ExactScalar>),
    #[error("determinant keeps a factor of degree {residual_degree} with roots outside the expected support")]
    SupportMismatch { residual_degree: usize },
    #[error("expected size {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("rank must be at least 1")]
    InvalidRank,
    #[error(transparent)]
    Divisor(#[from] StrataError),
}

/// A hyperplane `{v : c·v = 0}` stored by its covector `c`, scaled so the
/// first nonzero entry is 1.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
#[serde(transparent)]
pub struct Hyperplane(Vec<ExactScalar>);

impl Hyperplane {
    pub fn new(covector: Vec<ExactScalar>) -> Result<Self, HeckeError> {
        let lead = covector
            .iter()
            .find(|c| !c.is_zero())
            .ok_or(HeckeError::DegenerateHyperplane)?
            .inv();
        Ok(Self(covector.iter().map(|c| c * &lead).collect()))
    }

    /// Coordinate hyperplane `{v_k = 0}`.
    pub fn coordinate(n: usize, k: usize) -> Self {
        let mut c = vec![ExactScalar::zero(); n];
        c[k] = ExactScalar::one();
        Self(c)
    }

    pub fn covector(&self) -> &[ExactScalar] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, v: &[ExactScalar]) -> bool {
        pairing(&self.0, v).is_zero()
    }

    fn pivot(&self) -> usize {
        self.0.iter().position(|c| !c.is_zero()).expect("canonical covector is nonzero")
    }
}

impl<'de> Deserialize<'de> for Hyperplane {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Hyperplane::new(Vec::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

fn pairing(c: &[ExactScalar], v: &[ExactScalar]) -> ExactScalar {
    c.iter().zip(v).fold(ExactScalar::zero(), |acc, (a, b)| &acc + &(a * b))
}

/// One elementary modification; the hyperplane is written in the evaluation
/// frame of the lattice it modifies (see [`fiber_coordinates`]).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct HeckeStep {
    pub point: ExactScalar,
    pub hyperplane: Hyperplane,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TowerGroup {
    pub point: ExactScalar,
    /// First entry lives in `ℂⁿ = O^n_x`; each later entry lives in the fibre
    /// at `x`, in the Hermite basis, of the lattice produced from `O^n` by the
    /// previous entries of this group alone.
    pub hyperplanes: Vec<Hyperplane>,
}

/// Hyperplane data for a whole tower: one group per distinct point, the
/// group size being the multiplicity of that point.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TowerDatum {
    pub groups: Vec<TowerGroup>,
}

impl TowerDatum {
    pub fn degree(&self) -> usize {
        self.groups.iter().map(|g| g.hyperplanes.len()).sum()
    }

    pub fn points(&self) -> Vec<ExactScalar> {
        self.groups.iter().map(|g| g.point.clone()).collect()
    }

    /// The divisor the tower is built over.
    pub fn divisor(&self) -> Result<EffectiveDivisor<ExactScalar>, HeckeError> {
        Ok(EffectiveDivisor::new(
            self.groups
                .iter()
                .map(|g| (g.point.clone(), g.hyperplanes.len() as u32))
                .collect(),
        )?)
    }

    fn validate(&self, n: usize) -> Result<(), HeckeError> {
        for (k, g) in self.groups.iter().enumerate() {
            if g.hyperplanes.is_empty() {
                return Err(HeckeError::EmptyGroup(Box::new(g.point.clone())));
            }
            if self.groups[..k].iter().any(|h| h.point == g.point) {
                return Err(HeckeError::DuplicatePoint(Box::new(g.point.clone())));
            }
            if let Some(bad) = g.hyperplanes.iter().find(|h| h.dim() != n) {
                return Err(HeckeError::DimensionMismatch { expected: n, found: bad.dim() });
            }
        }
        Ok(())
    }
}

/// `M · P · diag(z − x, 1, …, 1)` in Hermite normal form, where the columns
/// `2..n` of the constant matrix `P` span the hyperplane.
pub fn elementary_modification(m: &PolyMatrix, step: &HeckeStep) -> Result<PolyMatrix, HeckeError> {
    let n = m.size();
    let c = step.hyperplane.covector();
    if c.len() != n {
        return Err(HeckeError::DimensionMismatch { expected: n, found: c.len() });
    }
    if c.iter().all(ExactScalar::is_zero) {
        return Err(HeckeError::DegenerateHyperplane);
    }
    let k = step.hyperplane.pivot();
    let lead_inv = c[k].inv();
    // Column 0 is e_k, the others e_j − (c_j/c_k) e_k, which c annihilates.
    let mut p = vec![vec![ExactScalar::zero(); n]; n];
    p[k][0] = ExactScalar::one();
    for (col, j) in (0..n).filter(|&j| j != k).enumerate() {
        p[j][col + 1] = ExactScalar::one();
        p[k][col + 1] = -(&c[j] * &lead_inv);
    }
    let mut twist = vec![Poly::one(); n];
    twist[0] = Poly::linear(&step.point);
    let modified = m.mul(&PolyMatrix::constant(&p)).mul(&PolyMatrix::diagonal(twist));
    Ok(modified.hermite_normal_form())
}

/// The fibre `K_x = K / (z − x)K` of a lattice together with its map to `ℂⁿ = O^n_x`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct FiberFrame {
    pub point: ExactScalar,
    /// `M(x)`: column `j` is the image in `ℂⁿ` of the `j`-th basis vector of `K_x`.
    pub evaluation: Vec<Vec<ExactScalar>>,
    /// Basis (in lattice coordinates) of the kernel of `K_x → ℂⁿ`; empty away
    /// from the support of the modifications.
    pub kernel: Vec<Vec<ExactScalar>>,
    pub rank: usize,
}

impl FiberFrame {
    /// Pulls a hyperplane of `ℂⁿ` back to `K_x`; the result always contains the kernel.
    pub fn pull_back(&self, ambient: &Hyperplane) -> Result<Hyperplane, HeckeError> {
        let n = self.evaluation.len();
        if ambient.dim() != n {
            return Err(HeckeError::DimensionMismatch { expected: n, found: ambient.dim() });
        }
        let c = ambient.covector();
        Hyperplane::new((0..n).map(|j| pairing(c, &self.column(j))).collect())
    }

    pub fn column(&self, j: usize) -> Vec<ExactScalar> {
        self.evaluation.iter().map(|row| row[j].clone()).collect()
    }

    /// Whether `v ∈ ℂⁿ` lies in the image of `K_x → ℂⁿ`.
    pub fn image_contains(&self, v: &[ExactScalar]) -> bool {
        let mut augmented = self.evaluation.clone();
        for (row, vi) in augmented.iter_mut().zip(v) {
            row.push(vi.clone());
        }
        row_echelon(&augmented).1.len() == self.rank
    }

    /// Away from the modified points the fibre map is an isomorphism and the
    /// lattice fibre is canonically `ℂⁿ`.
    pub fn is_canonical(&self) -> bool {
        self.rank == self.evaluation.len()
    }
}

/// Evaluation frame of the lattice at `x`, in which the next modification at
/// `x` must express its hyperplane.
pub fn fiber_coordinates(m: &PolyMatrix, x: &ExactScalar) -> FiberFrame {
    let evaluation = m.eval(x);
    let kernel = nullspace(&evaluation);
    let rank = evaluation.len() - kernel.len();
    FiberFrame { point: x.clone(), evaluation, kernel, rank }
}

/// Lattice obtained from `O^n` by the modifications of a single group, all at one point.
pub fn local_tower(n: usize, group: &TowerGroup) -> Result<PolyMatrix, HeckeError> {
    if n == 0 {
        return Err(HeckeError::InvalidRank);
    }
    group.hyperplanes.iter().try_fold(PolyMatrix::identity(n), |m, hyperplane| {
        elementary_modification(&m, &HeckeStep { point: group.point.clone(), hyperplane: hyperplane.clone() })
    })
}

/// Group whose steps impose the ambient hyperplanes `H₁, …, H_m` on values at
/// `x`, each pulled back to the fibre of the lattice built so far. The result
/// is `{w : w(x) ∈ H₁ ∩ … ∩ H_m}`.
pub fn transverse_group(n: usize, point: &ExactScalar, ambient: &[Hyperplane]) -> Result<TowerGroup, HeckeError> {
    let mut m = PolyMatrix::identity(n);
    let mut hyperplanes = Vec::with_capacity(ambient.len());
    for h in ambient {
        let pulled = fiber_coordinates(&m, point).pull_back(h)?;
        m = elementary_modification(&m, &HeckeStep { point: point.clone(), hyperplane: pulled.clone() })?;
        hyperplanes.push(pulled);
    }
    Ok(TowerGroup { point: point.clone(), hyperplanes })
}

/// `A ∩ B` for lattices of coprime index, computed as `det(A)·B + det(B)·A`.
pub fn intersect_coprime(a: &PolyMatrix, b: &PolyMatrix) -> PolyMatrix {
    let (da, db) = (a.det(), b.det());
    let rows = (0..a.size())
        .map(|i| {
            let left = b.rows()[i].iter().map(|p| p * &da);
            let right = a.rows()[i].iter().map(|p| p * &db);
            left.chain(right).collect()
        })
        .collect();
    PolyMatrix::lattice_spanned_by(rows)
}

/// Builds every group locally and glues the results; the outcome does not
/// depend on the order of the groups.
pub fn build_tower(n: usize, datum: &TowerDatum) -> Result<PolyMatrix, HeckeError> {
    if n == 0 {
        return Err(HeckeError::InvalidRank);
    }
    datum.validate(n)?;
    datum.groups.iter().try_fold(PolyMatrix::identity(n), |m, group| {
        Ok(intersect_coprime(&m, &local_tower(n, group)?))
    })
}

/// Reads the divisor of `det M` off the candidate support points by exact division.
pub fn phi_divisor(
    m: &PolyMatrix,
    expected_points: &[ExactScalar],
) -> Result<EffectiveDivisor<ExactScalar>, HeckeError> {
    let mut rest = m.det();
    if rest.is_zero() {
        return Err(HeckeError::SingularMatrix);
    }
    let mut points = Vec::new();
    for (k, x) in expected_points.iter().enumerate() {
        if expected_points[..k].contains(x) {
            continue;
        }
        let (mult, cofactor) = rest.divide_out_root(x);
        if mult > 0 {
            points.push((x.clone(), mult as u32));
        }
        rest = cofactor;
    }
    if !rest.is_constant() {
        return Err(HeckeError::SupportMismatch { residual_degree: rest.degree().unwrap_or(0) });
    }
    Ok(EffectiveDivisor::new(points)?)
}

/// Exponents `a₁ ≤ … ≤ aₙ` of `(z − x)` in the Smith invariant factors of `M`.
pub fn local_type(m: &PolyMatrix, x: &ExactScalar) -> Vec<usize> {
    m.local_exponents(x)
}

/// `diag(Π (z − xᵢ)^{mᵢ}, 1, …, 1)`, the embedding `O(−D) ⊕ O^{n−1} ⊂ O^n`.
pub fn theta_section(n: usize, divisor: &EffectiveDivisor<ExactScalar>) -> Result<PolyMatrix, HeckeError> {
    if n == 0 {
        return Err(HeckeError::InvalidRank);
    }
    let first = divisor
        .points()
        .iter()
        .fold(Poly::one(), |acc, p| &acc * &Poly::linear(&p.position).pow(p.multiplicity as usize));
    let mut diag = vec![Poly::one(); n];
    diag[0] = first;
    Ok(PolyMatrix::diagonal(diag))
}

/// Full record of a built tower, as emitted by the command line tool.
#[derive(Clone, Debug, Serialize)]
pub struct TowerReport {
    pub n: usize,
    pub degree: usize,
    pub matrix: PolyMatrix,
    /// Monic determinant, coefficients lowest degree first.
    pub det: Poly,
    pub divisor: EffectiveDivisor<ExactScalar>,
    pub local_types: Vec<LocalType>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalType {
    pub point: ExactScalar,
    pub exponents: Vec<usize>,
}

impl TowerReport {
    pub fn build(n: usize, datum: &TowerDatum) -> Result<Self, HeckeError> {
        let matrix = build_tower(n, datum)?;
        let points = datum.points();
        let divisor = phi_divisor(&matrix, &points)?;
        let local_types = points
            .iter()
            .map(|x| LocalType { point: x.clone(), exponents: local_type(&matrix, x) })
            .collect();
        Ok(Self { n, degree: datum.degree(), det: matrix.det().monic(), matrix, divisor, local_types })
    }
}

/// Small random Gaussian rational `a/b + (c/e) i` used for test and sweep data.
pub fn random_scalar<R: Rng + ?Sized>(rng: &mut R, span: i64, max_den: i64) -> ExactScalar {
    ExactScalar::from_fractions(
        (rng.random_range(-span..=span), rng.random_range(1..=max_den)),
        (rng.random_range(-span..=span), rng.random_range(1..=max_den)),
    )
}

pub fn random_hyperplane<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Hyperplane {
    loop {
        let c: Vec<ExactScalar> = (0..n)
            .map(|_| ExactScalar::gaussian(rng.random_range(-3..=3), rng.random_range(-3..=3)))
            .collect();
        if let Ok(h) = Hyperplane::new(c) {
            return h;
        }
    }
}

/// `count` distinct random points.
pub fn random_points<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<ExactScalar> {
    let mut pts: Vec<ExactScalar> = Vec::with_capacity(count);
    while pts.len() < count {
        let x = random_scalar(rng, 6, 3);
        if !pts.contains(&x) {
            pts.push(x);
        }
    }
    pts
}

/// Random datum with the given multiplicities at random distinct points.
pub fn random_datum<R: Rng + ?Sized>(rng: &mut R, n: usize, multiplicities: &[usize]) -> TowerDatum {
    let points = random_points(rng, multiplicities.len());
    TowerDatum {
        groups: points
            .into_iter()
            .zip(multiplicities)
            .map(|(point, &m)| TowerGroup {
                point,
                hyperplanes: (0..m).map(|_| random_hyperplane(rng, n)).collect(),
            })
            .collect(),
    }
}

/// Random composition of `d` into at most `max_points` positive parts.
pub fn random_multiplicities<R: Rng + ?Sized>(rng: &mut R, d: usize, max_points: usize) -> Vec<usize> {
    let parts = rng.random_range(1..=d.min(max_points).max(1));
    let mut mults = vec![1; parts];
    for _ in parts..d {
        let k = rng.random_range(0..parts);
        mults[k] += 1;
    }
    mults
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(v: i64) -> ExactScalar {
        ExactScalar::from_int(v)
    }

    fn z_minus(x: i64) -> Poly {
        Poly::linear(&s(x))
    }

    fn step(x: i64, c: &[i64]) -> HeckeStep {
        HeckeStep { point: s(x), hyperplane: Hyperplane::new(c.iter().map(|&v| s(v)).collect()).unwrap() }
    }

    #[test]
    fn hyperplane_canonical_form() {
        let h = Hyperplane::new(vec![s(0), s(2), s(4)]).unwrap();
        assert_eq!(h.covector(), &[s(0), s(1), s(2)]);
        assert_eq!(Hyperplane::new(vec![s(0), s(0)]), Err(HeckeError::DegenerateHyperplane));
        assert!(h.contains(&[s(7), s(-2), s(1)]));
    }

    #[test]
    fn single_modification_of_identity() {
        let m = elementary_modification(&PolyMatrix::identity(2), &step(0, &[1, 0])).unwrap();
        assert_eq!(m, PolyMatrix::diagonal(vec![z_minus(0), Poly::one()]));
        assert_eq!(m.det(), z_minus(0));
        assert_eq!(local_type(&m, &s(0)), vec![0, 1]);
    }

    #[test]
    fn second_modification_elsewhere_tracks_divisor() {
        let m = elementary_modification(&PolyMatrix::identity(2), &step(0, &[1, 0])).unwrap();
        let frame = fiber_coordinates(&m, &s(1));
        let generic = frame.pull_back(&Hyperplane::new(vec![s(2), s(-3)]).unwrap()).unwrap();
        let m2 = elementary_modification(&m, &HeckeStep { point: s(1), hyperplane: generic }).unwrap();
        assert_eq!(m2.det().monic(), &z_minus(0) * &z_minus(1));
    }

    #[test]
    fn coordinate_hyperplanes_give_full_twist() {
        for n in 1..=4 {
            let x = s(3);
            let mut m = PolyMatrix::identity(n);
            for k in 0..n {
                m = elementary_modification(&m, &HeckeStep { point: x.clone(), hyperplane: Hyperplane::coordinate(n, k) })
                    .unwrap();
            }
            let twist = PolyMatrix::diagonal(vec![Poly::linear(&x); n]);
            assert_eq!(m.hermite_normal_form(), twist.hermite_normal_form());
            assert_eq!(local_type(&m, &x), vec![1; n]);
        }
    }

    #[test]
    fn modification_rejects_bad_hyperplanes() {
        let m = PolyMatrix::identity(2);
        let bad = HeckeStep { point: s(0), hyperplane: Hyperplane(vec![s(0), s(0)]) };
        assert_eq!(elementary_modification(&m, &bad), Err(HeckeError::DegenerateHyperplane));
        let wrong = HeckeStep { point: s(0), hyperplane: Hyperplane::coordinate(3, 0) };
        assert!(matches!(elementary_modification(&m, &wrong), Err(HeckeError::DimensionMismatch { .. })));
    }

    #[test]
    fn new_lattice_is_the_preimage_of_the_hyperplane() {
        // {M w : w(x) ∈ H} must contain (z−x)·K and M w₀ for every constant w₀ ∈ H.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = build_tower(3, &random_datum(&mut rng, 3, &[2, 1])).unwrap();
        let x = s(5);
        let frame = fiber_coordinates(&m, &x);
        let h = frame.pull_back(&random_hyperplane(&mut rng, 3)).unwrap();
        let m2 = elementary_modification(&m, &HeckeStep { point: x.clone(), hyperplane: h.clone() }).unwrap();
        let kernel_vectors = nullspace(&[h.covector().to_vec()]);
        let mut gens: Vec<Vec<Poly>> = kernel_vectors
            .iter()
            .map(|w| (0..3).map(|i| (0..3).fold(Poly::zero(), |acc, k| &acc + &m.entry(i, k).scale(&w[k]))).collect())
            .collect();
        // Add (z − x)·(first column not in H).
        let outside = (0..3).find(|&k| !h.covector()[k].is_zero()).unwrap();
        gens.push((0..3).map(|i| m.entry(i, outside) * &Poly::linear(&x)).collect());
        let rows: Vec<Vec<Poly>> = (0..3).map(|i| gens.iter().map(|g| g[i].clone()).collect()).collect();
        let built = PolyMatrix::from_rows(rows).unwrap();
        assert_eq!(built.hermite_normal_form(), m2);
    }

    #[test]
    fn transverse_and_nested_double_points() {
        let x = s(0);
        let m1 = elementary_modification(&PolyMatrix::identity(2), &step(0, &[1, 0])).unwrap();
        let frame = fiber_coordinates(&m1, &x);
        // Hyperplane containing the kernel of K_x → ℂ² imposes a second
        // condition on values: the quotient becomes ℂ² killed by z.
        let transverse = frame.pull_back(&Hyperplane::coordinate(2, 1)).unwrap();
        assert!(transverse.contains(&frame.kernel[0]));
        let mt = elementary_modification(&m1, &HeckeStep { point: x.clone(), hyperplane: transverse }).unwrap();
        assert_eq!(local_type(&mt, &x), vec![1, 1]);
        // Hyperplane spanned by the surviving direction: curvilinear quotient O/z².
        let nested = Hyperplane::new(vec![s(1), s(0)]).unwrap();
        assert!(!nested.contains(&frame.kernel[0]));
        let mn = elementary_modification(&m1, &HeckeStep { point: x.clone(), hyperplane: nested }).unwrap();
        assert_eq!(local_type(&mn, &x), vec![0, 2]);
        assert_eq!(mn.det().monic(), z_minus(0).pow(2));
    }

    #[test]
    fn tower_examples() {
        let datum = TowerDatum {
            groups: vec![
                TowerGroup { point: s(0), hyperplanes: vec![Hyperplane::coordinate(2, 0), Hyperplane::coordinate(2, 0)] },
                TowerGroup { point: s(1), hyperplanes: vec![Hyperplane::coordinate(2, 1)] },
            ],
        };
        let m = build_tower(2, &datum).unwrap();
        let d = phi_divisor(&m, &datum.points()).unwrap();
        assert_eq!(d, EffectiveDivisor::new(vec![(s(0), 2), (s(1), 1)]).unwrap());
        assert_eq!(m.det().monic(), &z_minus(0).pow(2) * &z_minus(1));
    }

    #[test]
    fn distinct_points_give_product_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=4 {
            let datum = random_datum(&mut rng, n, &[1, 1, 1, 1]);
            let m = build_tower(n, &datum).unwrap();
            let expected = datum.points().iter().fold(Poly::one(), |acc, x| &acc * &Poly::linear(x));
            assert_eq!(m.det().monic(), expected);
            for x in datum.points() {
                let mut expect = vec![0; n];
                expect[n - 1] = 1;
                assert_eq!(local_type(&m, &x), expect);
            }
        }
    }

    #[test]
    fn tower_validation_errors() {
        let h = Hyperplane::coordinate(2, 0);
        let dup = TowerDatum {
            groups: vec![
                TowerGroup { point: s(1), hyperplanes: vec![h.clone()] },
                TowerGroup { point: s(1), hyperplanes: vec![h.clone()] },
            ],
        };
        assert_eq!(build_tower(2, &dup), Err(HeckeError::DuplicatePoint(Box::new(s(1)))));
        let empty = TowerDatum { groups: vec![TowerGroup { point: s(1), hyperplanes: vec![] }] };
        assert_eq!(build_tower(2, &empty), Err(HeckeError::EmptyGroup(Box::new(s(1)))));
        let ok = TowerDatum { groups: vec![TowerGroup { point: s(1), hyperplanes: vec![h] }] };
        assert!(matches!(build_tower(3, &ok), Err(HeckeError::DimensionMismatch { .. })));
    }

    #[test]
    fn phi_divisor_examples() {
        assert!(phi_divisor(&PolyMatrix::identity(3), &[]).unwrap().is_empty());
        let m = theta_section(2, &EffectiveDivisor::new(vec![(s(2), 1)]).unwrap()).unwrap();
        assert_eq!(phi_divisor(&m, &[s(5)]), Err(HeckeError::SupportMismatch { residual_degree: 1 }));
    }

    #[test]
    fn theta_examples() {
        let d = EffectiveDivisor::new(vec![(s(0), 1)]).unwrap();
        assert_eq!(theta_section(2, &d).unwrap(), PolyMatrix::diagonal(vec![z_minus(0), Poly::one()]));
        let d = EffectiveDivisor::new(vec![(s(0), 2), (s(3), 1)]).unwrap();
        let t = theta_section(3, &d).unwrap();
        assert_eq!(*t.entry(0, 0), &z_minus(0).pow(2) * &z_minus(3));
        assert!(phi_divisor(&t, &[s(0), s(3)]).unwrap().same_as(&d));
        assert_eq!(local_type(&t, &s(0)), vec![0, 0, 2]);
    }

    #[test]
    fn fiber_frames() {
        let id = fiber_coordinates(&PolyMatrix::identity(3), &s(2));
        assert!(id.is_canonical());
        assert!(id.kernel.is_empty());
        assert_eq!(id.evaluation, PolyMatrix::identity(3).eval(&s(0)));

        let h = Hyperplane::new(vec![s(1), s(-1), s(0)]).unwrap();
        let m = elementary_modification(&PolyMatrix::identity(3), &HeckeStep { point: s(0), hyperplane: h.clone() }).unwrap();
        let at = fiber_coordinates(&m, &s(0));
        assert_eq!(at.rank, 2);
        assert_eq!(at.kernel.len(), 1);
        // The image of K_x in ℂ³ is exactly the chosen hyperplane.
        for j in 0..3 {
            assert!(h.contains(&at.column(j)));
        }
        assert!(at.image_contains(&[s(1), s(1), s(0)]));
        assert!(at.image_contains(&[s(0), s(0), s(1)]));
        assert!(!at.image_contains(&[s(1), s(0), s(0)]));
        // Away from the modified point the fibre map is an isomorphism.
        let away = fiber_coordinates(&m, &s(4));
        assert!(away.is_canonical());
        for k in 0..3 {
            let mut e = vec![s(0); 3];
            e[k] = s(1);
            assert!(away.image_contains(&e));
        }
    }

    #[test]
    fn tower_does_not_depend_on_group_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let datum = random_datum(&mut rng, 3, &[2, 1, 2]);
        let mut reversed = datum.clone();
        reversed.groups.reverse();
        assert_eq!(build_tower(3, &datum).unwrap(), build_tower(3, &reversed).unwrap());
    }

    #[test]
    fn datum_json_schema() {
        let text = r#"{"groups": [{"point": "1/2+i", "hyperplanes": [[1, "2i"], ["0", 3]]}]}"#;
        let datum: TowerDatum = serde_json::from_str(text).unwrap();
        assert_eq!(datum.groups[0].point, ExactScalar::from_fractions((1, 2), (1, 1)));
        assert_eq!(datum.groups[0].hyperplanes[1].covector(), &[s(0), s(1)]);
        assert!(serde_json::from_str::<TowerDatum>(r#"{"groups": [{"point": "0", "hyperplanes": [[0, 0]]}]}"#).is_err());
        let report = TowerReport::build(2, &datum).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        for key in ["matrix", "det", "divisor", "local_types"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
