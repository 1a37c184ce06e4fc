//! Seeded generators of instances with known ground truth.
//!
//! Every generator is a pure function of its spec: the random stream is a
//! `ChaCha8Rng` seeded from the spec's `seed`, and entries are drawn with
//! real and imaginary parts uniform on `[-1, 1]`.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    commutant_residual, word_basis, AlgebraElement, AlgebraPresentation, Representation,
};
use crate::error::{Error, Result};
use crate::minimality::{is_minimal, reduce_to_minimal};
use crate::numerics::{
    block_diag, c, diag, frobenius, hstack, identity, inverse, kron, max_abs, pseudo_inverse, re,
    vstack, zeros, ComplexMatrix, TolerancePolicy,
};
use crate::stinespring::{MapInstance, StinespringData};

/// Upper bounds enforced on generated sizes.
pub const MAX_SLOT_DIM: usize = 16;
pub const MAX_SLOTS: usize = 4;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
    })
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    if n == 0 {
        return zeros(0, 0);
    }
    let qr = random_matrix(rng, n, n).qr();
    // fix the phase of R's diagonal so the distribution does not depend on
    // the QR sign convention
    let r = qr.r();
    let phases: Vec<Complex64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                re(1.0)
            }
        })
        .collect();
    qr.q() * diag(&phases)
}

/// Invertible matrix `U diag(s) V` with singular values uniform in
/// `[lo, hi]`.
pub fn random_invertible(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> ComplexMatrix {
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let s: Vec<Complex64> = (0..n).map(|_| re(rng.random_range(lo..=hi))).collect();
    u * diag(&s) * v
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let m = random_matrix(rng, n, n);
    (&m + m.adjoint()) * re(0.5)
}

pub fn random_unit_vector(rng: &mut impl Rng, n: usize) -> DVector<Complex64> {
    loop {
        let v = DVector::from_fn(n, |_, _| {
            c(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
        });
        let norm = v.norm();
        if norm > 1e-3 {
            return v / re(norm);
        }
    }
}

// ---------------------------------------------------------------------------
// CP dilations

/// Stinespring dilation of `a ↦ Σ_j V_j* a V_j` on `M_n`: `π(a) = I_m ⊗ a`,
/// `X_1 = [V_1; …; V_m]`, `X_0 = X_1*`.
pub fn gen_cp_dilation(kraus: &[ComplexMatrix], pol: &TolerancePolicy) -> Result<StinespringData> {
    let Some(first) = kraus.first() else {
        return Err(Error::InvalidInput(
            "need at least one Kraus operator".into(),
        ));
    };
    let n = first.nrows();
    if n == 0 || kraus.iter().any(|v| v.nrows() != n || v.ncols() != n) {
        return Err(Error::Shape(
            "Kraus operators must all be n x n with n >= 1".into(),
        ));
    }
    if kraus.iter().all(|v| max_abs(v) <= pol.eq_atol) {
        return Err(Error::InvalidInput("all Kraus operators vanish".into()));
    }
    let alg = Arc::new(AlgebraPresentation::full_matrix(n));
    let rep = Representation::amplified(alg, kraus.len());
    let parts: Vec<&ComplexMatrix> = kraus.iter().collect();
    let x1 = vstack(&parts, n);
    let x0 = x1.adjoint();
    StinespringData::new(n, n, vec![rep], vec![x0, x1])
}

/// `Σ_j V_j* a V_j`, the reference evaluation of a CP dilation.
pub fn kraus_apply(kraus: &[ComplexMatrix], a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    kraus
        .iter()
        .fold(zeros(n, n), |acc, v| acc + v.adjoint() * a * v)
}

// ---------------------------------------------------------------------------
// Commutant perturbations

/// Twist slot `slot` (zero-based) by an invertible `S` in the commutant of
/// its representation: `X_slot ← X_slot S⁻¹`, `X_{slot+1} ← S X_{slot+1}`.
/// The map is unchanged, and the canonical intertwiner from `base` to the
/// result is `S` at that slot and the identity elsewhere.
pub fn gen_commutant_perturbation(
    base: &StinespringData,
    slot: usize,
    s: &ComplexMatrix,
    pol: &TolerancePolicy,
) -> Result<(StinespringData, Vec<ComplexMatrix>)> {
    if slot >= base.k() {
        return Err(Error::InvalidInput(format!(
            "slot {slot} out of range for k = {}",
            base.k()
        )));
    }
    let d = base.rep(slot).dim();
    if s.nrows() != d || s.ncols() != d {
        return Err(Error::Shape(format!("S must be {d}x{d}")));
    }
    let residual = commutant_residual(base.rep(slot), s);
    if residual > pol.eq_atol {
        return Err(Error::NotInCommutant { residual });
    }
    let s_inv = inverse(s, pol)?;
    let perturbed = base
        .with_connector(slot, base.connector(slot) * &s_inv)?
        .with_connector(slot + 1, s * base.connector(slot + 1))?;
    let expected = (0..base.k())
        .map(|i| {
            if i == slot {
                s.clone()
            } else {
                identity(base.rep(i).dim())
            }
        })
        .collect();
    Ok((perturbed, expected))
}

// ---------------------------------------------------------------------------
// Spectral triples

/// Finite spectral-triple data: an algebra in `M_n`, a Hermitian `D` and a
/// unit vector `ξ`, defining the `(k+1)`-linear form
/// `(a_0, …, a_k) ↦ ⟨a_0 [D, a_1] ⋯ [D, a_k] ξ, ξ⟩`.
#[derive(Debug, Clone)]
pub struct SpectralTriple {
    pub d: ComplexMatrix,
    pub algebra: Arc<AlgebraPresentation>,
    pub xi: DVector<Complex64>,
    pub k: usize,
}

impl SpectralTriple {
    pub fn new(
        d: ComplexMatrix,
        algebra: Arc<AlgebraPresentation>,
        xi: DVector<Complex64>,
        k: usize,
        pol: &TolerancePolicy,
    ) -> Result<Self> {
        let n = algebra.ambient_dim();
        if d.nrows() != n || d.ncols() != n || xi.len() != n {
            return Err(Error::Shape(format!(
                "D and xi must match the algebra dimension {n}"
            )));
        }
        if k == 0 {
            return Err(Error::InvalidInput(
                "spectral-triple forms need k >= 1 commutators".into(),
            ));
        }
        let residual = max_abs(&(&d - d.adjoint()));
        if residual > pol.eq_atol {
            return Err(Error::NotHermitian { residual });
        }
        if (xi.norm() - 1.0).abs() > pol.eq_atol {
            return Err(Error::InvalidInput(format!(
                "xi must be a unit vector, |xi| = {}",
                xi.norm()
            )));
        }
        Ok(SpectralTriple { d, algebra, xi, k })
    }

    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    /// `⟨a_0 [D, a_1] ⋯ [D, a_k] ξ, ξ⟩` from matrices `a_0 … a_k`.
    pub fn evaluate_direct(&self, args: &[ComplexMatrix]) -> Complex64 {
        assert_eq!(args.len(), self.k + 1);
        let mut v = self.xi.clone();
        for a in args[1..].iter().rev() {
            let commutator = &self.d * a - a * &self.d;
            v = commutator * v;
        }
        v = &args[0] * v;
        self.xi.dotc(&v)
    }

    /// Direct evaluation on algebra elements, as a 1x1 matrix.
    pub fn evaluate_elements(&self, args: &[AlgebraElement]) -> ComplexMatrix {
        let mats: Vec<ComplexMatrix> = args
            .iter()
            .map(|x| self.algebra.element_matrix(x))
            .collect();
        ComplexMatrix::from_element(1, 1, self.evaluate_direct(&mats))
    }

    /// The block factorization
    /// `K_ξ a_0 (D  −I) diag(a_1, a_1) (D −I; D² −D) ⋯ diag(a_k, a_k) (I; D) B_ξ`
    /// as `(k+1)`-linear Stinespring data with `dim_g = dim_h = 1`.
    pub fn stinespring(&self) -> StinespringData {
        let n = self.n();
        let d = &self.d;
        let id = identity(n);
        let minus_id = -&id;
        let d2 = d * d;
        let minus_d = -d;

        let k_xi = self.xi.adjoint(); // γ ↦ ⟨γ, ξ⟩
        let b_xi = ComplexMatrix::from_column_slice(n, 1, self.xi.as_slice());
        let first = hstack(&[d, &minus_id], n);
        let top = hstack(&[d, &minus_id], n);
        let bottom = hstack(&[&d2, &minus_d], n);
        let middle = vstack(&[&top, &bottom], 2 * n);
        let last = vstack(&[&id, d], n) * b_xi;

        let mut reps = vec![Representation::identity(self.algebra.clone())];
        let mut connectors = vec![ComplexMatrix::from_row_slice(1, n, k_xi.as_slice()), first];
        for j in 1..=self.k {
            reps.push(Representation::amplified(self.algebra.clone(), 2));
            if j < self.k {
                connectors.push(middle.clone());
            }
        }
        connectors.push(last);
        StinespringData::new(1, 1, reps, connectors)
            .expect("block shapes are consistent by construction")
    }
}

pub fn gen_spectral_triple(spec: &SpectralTriple) -> (SpectralTriple, StinespringData) {
    (spec.clone(), spec.stinespring())
}

/// Random Hermitian `D` and unit `ξ` over `M_n` for `n ≤ 3`, the diagonal
/// algebra otherwise (keeps the word-basis tuple count modest).
pub fn random_spectral_triple(
    seed: u64,
    n: usize,
    k: usize,
    pol: &TolerancePolicy,
) -> Result<SpectralTriple> {
    let mut rng = rng_from_seed(seed);
    let algebra = if n <= 3 {
        AlgebraPresentation::full_matrix(n)
    } else {
        AlgebraPresentation::diagonal(n)
    };
    let d = random_hermitian(&mut rng, n);
    let xi = random_unit_vector(&mut rng, n);
    SpectralTriple::new(d, Arc::new(algebra), xi, k, pol)
}

// ---------------------------------------------------------------------------
// Similarity-twisted homomorphisms

/// `a ↦ X⁻¹ π(a) X` as one-variable data with `X_0 = X⁻¹`, `X_1 = X`.
pub fn gen_similarity_homomorphism(
    rep: &Representation,
    x: &ComplexMatrix,
    pol: &TolerancePolicy,
) -> Result<StinespringData> {
    if x.nrows() != rep.dim() || x.ncols() != rep.dim() {
        return Err(Error::Shape(format!("X must be {0}x{0}", rep.dim())));
    }
    let x_inv = inverse(x, pol)?;
    StinespringData::new(
        rep.dim(),
        rep.dim(),
        vec![rep.clone()],
        vec![x_inv, x.clone()],
    )
}

/// `max ‖φ(uv) − φ(u)φ(v)‖` over pairs of basis words of a one-variable map.
pub fn homomorphism_residual(s: &StinespringData, pol: &TolerancePolicy) -> Result<f64> {
    if s.k() != 1 {
        return Err(Error::InvalidInput(
            "homomorphism check needs a one-variable map".into(),
        ));
    }
    let wb = word_basis(s.rep(0).algebra(), pol)?;
    let mut worst: f64 = 0.0;
    for u in wb.elements() {
        let phi_u = s.evaluate(std::slice::from_ref(&u))?;
        for v in wb.elements() {
            let phi_v = s.evaluate(std::slice::from_ref(&v))?;
            let phi_uv = s.evaluate(&[u.times(&v)])?;
            worst = worst.max(frobenius(&(phi_uv - &phi_u * phi_v)));
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Random instances

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AlgebraSpec {
    /// `M_n`.
    Full { n: usize },
    /// `C^n` as diagonal matrices.
    Diagonal { n: usize },
}

impl AlgebraSpec {
    pub fn build(&self) -> AlgebraPresentation {
        match *self {
            AlgebraSpec::Full { n } => AlgebraPresentation::full_matrix(n),
            AlgebraSpec::Diagonal { n } => AlgebraPresentation::diagonal(n),
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            AlgebraSpec::Full { n } | AlgebraSpec::Diagonal { n } => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomInstanceSpec {
    pub seed: u64,
    pub algebras: Vec<AlgebraSpec>,
    /// Amplification multiplicity per slot.
    pub multiplicities: Vec<usize>,
    pub dim_g: usize,
    pub dim_h: usize,
    /// Reduce the generated representation(s) to minimal ones.
    #[serde(default)]
    pub reduce: bool,
    /// When present, build a second representation of the same map by
    /// dilating the base through these multiplicities (one per slot, each at
    /// least the base multiplicity) along an independent random path.
    #[serde(default)]
    pub pair_multiplicities: Option<Vec<usize>>,
}

impl RandomInstanceSpec {
    fn check(&self) -> Result<()> {
        let k = self.algebras.len();
        if k == 0 || k > MAX_SLOTS {
            return Err(Error::InvalidInput(format!(
                "need 1..={MAX_SLOTS} slots, got {k}"
            )));
        }
        if self.multiplicities.len() != k {
            return Err(Error::InvalidInput(
                "one multiplicity per slot required".into(),
            ));
        }
        if self.dim_g == 0 || self.dim_h == 0 {
            return Err(Error::InvalidInput(
                "dim_g and dim_h must be positive".into(),
            ));
        }
        for (i, (a, &m)) in self.algebras.iter().zip(&self.multiplicities).enumerate() {
            if a.n() == 0 || m == 0 || a.n() * m > MAX_SLOT_DIM {
                return Err(Error::InvalidInput(format!(
                    "slot {i}: dimension out of range"
                )));
            }
        }
        if let Some(pm) = &self.pair_multiplicities {
            if pm.len() != k {
                return Err(Error::InvalidInput(
                    "one pair multiplicity per slot required".into(),
                ));
            }
            for (i, (a, &m)) in self.algebras.iter().zip(pm).enumerate() {
                if m < self.multiplicities[i] || a.n() * m > MAX_SLOT_DIM {
                    return Err(Error::InvalidInput(format!(
                        "slot {i}: pair multiplicity out of range"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Random data with `π_s = I_{m_s} ⊗ id` on the given algebras.
fn random_data(
    rng: &mut ChaCha8Rng,
    algebras: &[Arc<AlgebraPresentation>],
    multiplicities: &[usize],
    dim_g: usize,
    dim_h: usize,
) -> StinespringData {
    let reps: Vec<Representation> = algebras
        .iter()
        .zip(multiplicities)
        .map(|(a, &m)| Representation::amplified(a.clone(), m))
        .collect();
    let mut dims = vec![dim_h];
    dims.extend(reps.iter().map(Representation::dim));
    dims.push(dim_g);
    let connectors = dims
        .windows(2)
        .map(|w| random_matrix(rng, w[0], w[1]))
        .collect();
    StinespringData::new(dim_g, dim_h, reps, connectors).expect("shapes consistent by construction")
}

/// Re-dilate `base` (amplified slots) to multiplicities `target`, through
/// random injections `J_s = J0_s ⊗ I_n` and random left inverses.
fn redilate(
    rng: &mut ChaCha8Rng,
    base: &StinespringData,
    base_mult: &[usize],
    target: &[usize],
) -> StinespringData {
    let k = base.k();
    let mut ups = Vec::with_capacity(k);
    let mut downs = Vec::with_capacity(k);
    let mut reps = Vec::with_capacity(k);
    for s in 0..k {
        let (m0, m) = (base_mult[s], target[s]);
        let alg = base.rep(s).algebra_arc().clone();
        let n = alg.ambient_dim();
        let j0 = if m == m0 {
            random_invertible(rng, m, 0.5, 2.0)
        } else {
            hstack(
                &[&random_invertible(rng, m, 0.5, 2.0)
                    .columns(0, m0)
                    .into_owned()],
                m,
            )
        };
        // left inverse plus an arbitrary part on the complement of range(J0)
        let pinv = pseudo_inverse(&j0, &TolerancePolicy::DEFAULT);
        let complement = identity(m) - &j0 * &pinv;
        let left = &pinv + random_matrix(rng, m0, m) * complement;
        ups.push(kron(&j0, &identity(n)));
        downs.push(kron(&left, &identity(n)));
        reps.push(Representation::amplified(alg, m));
    }
    let mut connectors = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let mut x = if i < k {
            base.connector(i) * &downs[i]
        } else {
            base.connector(i).clone()
        };
        if i > 0 {
            x = &ups[i - 1] * x;
        }
        connectors.push(x);
    }
    StinespringData::new(base.dim_g(), base.dim_h(), reps, connectors)
        .expect("shapes consistent by construction")
}

fn reduce_or_degenerate(s: &StinespringData, pol: &TolerancePolicy) -> Result<StinespringData> {
    Ok(reduce_to_minimal(s, pol)?.data)
}

/// Random instance per spec. With `pair_multiplicities`, both
/// representations are re-dilations of one random base map along
/// independent random paths, so they represent the same map; the second
/// one additionally has every slot conjugated by a random unitary.
pub fn random_instance(spec: &RandomInstanceSpec, pol: &TolerancePolicy) -> Result<MapInstance> {
    spec.check()?;
    let mut rng = rng_from_seed(spec.seed);
    let algebras: Vec<Arc<AlgebraPresentation>> =
        spec.algebras.iter().map(|a| Arc::new(a.build())).collect();
    let base = random_data(
        &mut rng,
        &algebras,
        &spec.multiplicities,
        spec.dim_g,
        spec.dim_h,
    );

    let Some(pair_mult) = &spec.pair_multiplicities else {
        let a = if spec.reduce {
            reduce_or_degenerate(&base, pol)?
        } else {
            base
        };
        return MapInstance::new(algebras, a, None);
    };

    let a = redilate(&mut rng, &base, &spec.multiplicities, &spec.multiplicities);
    let mut b = redilate(&mut rng, &base, &spec.multiplicities, pair_mult);
    for s in 0..b.k() {
        let u = random_unitary(&mut rng, b.rep(s).dim());
        b = b.conjugate_slot(s, &u);
    }
    let (a, b) = if spec.reduce {
        (
            reduce_or_degenerate(&a, pol)?,
            reduce_or_degenerate(&b, pol)?,
        )
    } else {
        (a, b)
    };
    MapInstance::new(algebras, a, Some(b))
}

/// Sample a random spec: `k` slots over `M_1`, `M_2`, `C^2`, `C^3`, with
/// multiplicities up to `max_mult` and slot dimensions at most `max_dim`.
pub fn sample_random_spec(
    seed: u64,
    k: usize,
    max_mult: usize,
    max_dim: usize,
) -> RandomInstanceSpec {
    let mut rng = rng_from_seed(seed ^ 0x005e_ed0f_5bec);
    let choices = [
        AlgebraSpec::Full { n: 1 },
        AlgebraSpec::Full { n: 2 },
        AlgebraSpec::Diagonal { n: 2 },
        AlgebraSpec::Diagonal { n: 3 },
    ];
    let mut algebras = Vec::with_capacity(k);
    let mut multiplicities = Vec::with_capacity(k);
    for _ in 0..k {
        let a = choices[rng.random_range(0..choices.len())];
        let cap = (max_dim / a.n()).clamp(1, max_mult);
        algebras.push(a);
        multiplicities.push(rng.random_range(1..=cap));
    }
    RandomInstanceSpec {
        seed,
        algebras,
        multiplicities,
        dim_g: rng.random_range(1..=3),
        dim_h: rng.random_range(1..=3),
        reduce: false,
        pair_multiplicities: None,
    }
}

/// A minimal base with a reducible slot, a random commutant element `S` for
/// that slot, and the perturbed partner.
#[derive(Debug, Clone)]
pub struct CommutantPair {
    pub instance: MapInstance,
    pub slot: usize,
    pub expected_t: Vec<ComplexMatrix>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutantPerturbationSpec {
    pub seed: u64,
    pub k: usize,
    /// Multiplicity of the perturbed slot; at least 2 makes it reducible.
    pub multiplicity: usize,
}

/// Draw minimal bases until one is found (deterministic in the seed), then
/// perturb one slot of multiplicity `m` by `S = C ⊗ I_n` with `C` a random
/// invertible `m × m` matrix, singular values in `[0.5, 2]`.
pub fn random_commutant_pair(
    spec: &CommutantPerturbationSpec,
    pol: &TolerancePolicy,
) -> Result<CommutantPair> {
    if spec.k == 0 || spec.k > MAX_SLOTS || spec.multiplicity == 0 || spec.multiplicity > 3 {
        return Err(Error::InvalidInput(
            "need 1..=4 slots and multiplicity 1..=3".into(),
        ));
    }
    let mut rng = rng_from_seed(spec.seed);
    let slot = rng.random_range(0..spec.k);
    for _attempt in 0..64 {
        let mut algebras = Vec::with_capacity(spec.k);
        let mut mults = Vec::with_capacity(spec.k);
        for s in 0..spec.k {
            let n = rng.random_range(2..=3);
            let alg = if s == slot || rng.random_bool(0.5) {
                AlgebraPresentation::full_matrix(n)
            } else {
                AlgebraPresentation::diagonal(n)
            };
            algebras.push(Arc::new(alg));
            mults.push(if s == slot {
                spec.multiplicity
            } else {
                rng.random_range(1..=2)
            });
        }
        let dim = spec.multiplicity.max(2);
        let base = random_data(&mut rng, &algebras, &mults, dim, dim);
        if !is_minimal(&base, pol).minimal {
            continue;
        }
        let n = algebras[slot].ambient_dim();
        let c = random_invertible(&mut rng, spec.multiplicity, 0.5, 2.0);
        let s = kron(&c, &identity(n));
        let (perturbed, expected_t) = gen_commutant_perturbation(&base, slot, &s, pol)?;
        return Ok(CommutantPair {
            instance: MapInstance::new(algebras, base, Some(perturbed))?,
            slot,
            expected_t,
        });
    }
    Err(Error::InvalidInput(
        "no minimal base found within 64 draws".into(),
    ))
}

// ---------------------------------------------------------------------------
// Serializable generator specs

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// Random Kraus operators on `M_n`; with `zero_first` the first one is
    /// replaced by zero, forcing a non-minimal dilation.
    CpDilation {
        seed: u64,
        n: usize,
        kraus: usize,
        #[serde(default)]
        zero_first: bool,
    },
    CommutantPerturbation(CommutantPerturbationSpec),
    SpectralTriple {
        seed: u64,
        n: usize,
        k: usize,
    },
    SimilarityHomomorphism {
        seed: u64,
        n: usize,
    },
    RandomInstance(RandomInstanceSpec),
}

impl GeneratorSpec {
    pub fn seed(&self) -> u64 {
        match self {
            GeneratorSpec::CpDilation { seed, .. }
            | GeneratorSpec::SpectralTriple { seed, .. }
            | GeneratorSpec::SimilarityHomomorphism { seed, .. } => *seed,
            GeneratorSpec::CommutantPerturbation(s) => s.seed,
            GeneratorSpec::RandomInstance(s) => s.seed,
        }
    }

    pub fn with_seed(&self, new_seed: u64) -> Self {
        let mut out = self.clone();
        match &mut out {
            GeneratorSpec::CpDilation { seed, .. }
            | GeneratorSpec::SpectralTriple { seed, .. }
            | GeneratorSpec::SimilarityHomomorphism { seed, .. } => *seed = new_seed,
            GeneratorSpec::CommutantPerturbation(s) => s.seed = new_seed,
            GeneratorSpec::RandomInstance(s) => s.seed = new_seed,
        }
        out
    }
}

/// Materialize a generator spec as a map instance.
pub fn generate(spec: &GeneratorSpec, pol: &TolerancePolicy) -> Result<MapInstance> {
    match spec {
        GeneratorSpec::CpDilation {
            seed,
            n,
            kraus,
            zero_first,
        } => {
            if *n == 0 || *n > MAX_SLOT_DIM || *kraus == 0 || n * kraus > MAX_SLOT_DIM {
                return Err(Error::InvalidInput(
                    "cp_dilation: dimension out of range".into(),
                ));
            }
            let mut rng = rng_from_seed(*seed);
            let mut ops: Vec<ComplexMatrix> = (0..*kraus)
                .map(|_| random_matrix(&mut rng, *n, *n))
                .collect();
            if *zero_first {
                ops[0] = zeros(*n, *n);
            }
            Ok(MapInstance::single(gen_cp_dilation(&ops, pol)?))
        }
        GeneratorSpec::CommutantPerturbation(s) => Ok(random_commutant_pair(s, pol)?.instance),
        GeneratorSpec::SpectralTriple { seed, n, k } => {
            if *n == 0 || *n > 8 || *k == 0 || *k + 1 > MAX_SLOTS + 1 {
                return Err(Error::InvalidInput(
                    "spectral_triple: size out of range".into(),
                ));
            }
            let triple = random_spectral_triple(*seed, *n, *k, pol)?;
            Ok(MapInstance::single(triple.stinespring()))
        }
        GeneratorSpec::SimilarityHomomorphism { seed, n } => {
            if *n == 0 || *n > MAX_SLOT_DIM {
                return Err(Error::InvalidInput(
                    "similarity_homomorphism: size out of range".into(),
                ));
            }
            let mut rng = rng_from_seed(*seed);
            let rep = Representation::identity(Arc::new(AlgebraPresentation::full_matrix(*n)));
            let x = random_invertible(&mut rng, *n, 0.5, 2.0);
            Ok(MapInstance::single(gen_similarity_homomorphism(
                &rep, &x, pol,
            )?))
        }
        GeneratorSpec::RandomInstance(s) => random_instance(s, pol),
    }
}

/// Block-diagonal embedding helper used by tests: pad `s` with zero rows and
/// columns so slot `slot` lives in a space `extra` dimensions larger.
pub fn zero_pad_slot(s: &StinespringData, slot: usize, extra: usize) -> Result<StinespringData> {
    let rep = s.rep(slot);
    let alg = rep.algebra_arc().clone();
    let d = rep.dim();
    // the padding carries another copy of the defining representation so the
    // padded images still form a representation
    let n = alg.ambient_dim();
    if !extra.is_multiple_of(n) {
        return Err(Error::InvalidInput(format!(
            "padding must be a multiple of {n}"
        )));
    }
    let pad = Representation::amplified(alg.clone(), extra / n);
    let images = rep
        .images()
        .iter()
        .zip(pad.images())
        .map(|(a, b)| block_diag(&[a, b]))
        .collect();
    let new_rep = Representation::new(alg, d + extra, images)?;
    let (dim_g, dim_h, mut reps, mut connectors) = s.clone().into_parts();
    reps[slot] = new_rep;
    let left = &connectors[slot];
    connectors[slot] = hstack(&[left, &zeros(left.nrows(), extra)], left.nrows());
    let right = &connectors[slot + 1];
    connectors[slot + 1] = vstack(&[right, &zeros(extra, right.ncols())], right.ncols());
    StinespringData::new(dim_g, dim_h, reps, connectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{sigma_x, sigma_z};
    use crate::intertwiner::construct_intertwiners;
    use crate::numerics::real_matrix;
    use crate::stinespring::{compare_with_reference, phi_equal};

    fn pol() -> TolerancePolicy {
        TolerancePolicy::DEFAULT
    }

    #[test]
    fn cp_dilation_examples() {
        let s = gen_cp_dilation(&[identity(2)], &pol()).unwrap();
        let a = random_matrix(&mut rng_from_seed(1), 2, 2);
        let out = s.evaluate(&[AlgebraElement::unit()]).unwrap();
        assert!(frobenius(&(out - identity(2))) < 1e-14);
        let alg = s.rep(0).algebra().clone();
        let cmp = compare_with_reference(&s, |args| alg.element_matrix(&args[0]), &pol()).unwrap();
        assert!(cmp.equal);
        let _ = a;

        // pinching: Kraus {e11, e22} gives the diagonal part
        let e11 = real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let e22 = real_matrix(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let s = gen_cp_dilation(&[e11, e22], &pol()).unwrap();
        let cmp = compare_with_reference(
            &s,
            |args| {
                let m = alg.element_matrix(&args[0]);
                diag(&[m[(0, 0)], m[(1, 1)]])
            },
            &pol(),
        )
        .unwrap();
        assert!(cmp.equal, "residual {}", cmp.max_residual);
    }

    #[test]
    fn cp_dilation_with_zero_kraus_reduces() {
        let mut rng = rng_from_seed(2);
        let v = random_matrix(&mut rng, 2, 2);
        let s = gen_cp_dilation(&[zeros(2, 2), v], &pol()).unwrap();
        assert!(!is_minimal(&s, &pol()).minimal);
        let red = reduce_to_minimal(&s, &pol()).unwrap();
        assert!(red.data.slot_dims()[0] < 4);
        assert!(is_minimal(&red.data, &pol()).minimal);
        assert!(phi_equal(&s, &red.data, &pol()).unwrap().equal);
    }

    #[test]
    fn cp_dilation_matches_kraus_sum() {
        let mut rng = rng_from_seed(3);
        let kraus: Vec<ComplexMatrix> = (0..3).map(|_| random_matrix(&mut rng, 3, 3)).collect();
        let s = gen_cp_dilation(&kraus, &pol()).unwrap();
        let alg = s.rep(0).algebra().clone();
        let cmp = compare_with_reference(
            &s,
            |args| kraus_apply(&kraus, &alg.element_matrix(&args[0])),
            &pol(),
        )
        .unwrap();
        assert!(cmp.equal, "residual {}", cmp.max_residual);
        // independent Kraus operators: positive definite Choi matrix, minimal
        assert!(is_minimal(&s, &pol()).minimal);
    }

    #[test]
    fn commutant_perturbation_examples() {
        let alg = Arc::new(AlgebraPresentation::pauli());
        let base = StinespringData::new(
            2,
            2,
            vec![Representation::identity(alg.clone())],
            vec![identity(2), identity(2)],
        )
        .unwrap();

        let (b, t) = gen_commutant_perturbation(&base, 0, &identity(2), &pol()).unwrap();
        assert_eq!(b.connectors(), base.connectors());
        assert_eq!(t, vec![identity(2)]);

        let (b, t) =
            gen_commutant_perturbation(&base, 0, &(identity(2) * re(2.0)), &pol()).unwrap();
        assert!(frobenius(&(b.connector(0) - identity(2) * re(0.5))) < 1e-14);
        assert!(frobenius(&(b.connector(1) - identity(2) * re(2.0))) < 1e-14);
        assert!(frobenius(&(&t[0] - identity(2) * re(2.0))) < 1e-14);

        // multiplicity two: S = diag(2 I2, 3 I2) lies in the commutant
        let rep = Representation::amplified(alg, 2);
        let x1 = vstack(&[&identity(2), &sigma_z()], 2);
        let base = StinespringData::new(2, 2, vec![rep], vec![x1.adjoint(), x1]).unwrap();
        assert!(is_minimal(&base, &pol()).minimal);
        let s = diag(&[re(2.0), re(2.0), re(3.0), re(3.0)]);
        let (b, t) = gen_commutant_perturbation(&base, 0, &s, &pol()).unwrap();
        assert_eq!(t[0], s);
        let res = construct_intertwiners(&MapInstance::pair(base, b).unwrap(), &pol()).unwrap();
        assert!(frobenius(&(&res.slots[0].t - &s)) < 1e-8);
    }

    #[test]
    fn commutant_perturbation_rejects_non_commuting() {
        let alg = Arc::new(AlgebraPresentation::pauli());
        let base = StinespringData::new(
            2,
            2,
            vec![Representation::identity(alg)],
            vec![identity(2), identity(2)],
        )
        .unwrap();
        assert!(matches!(
            gen_commutant_perturbation(&base, 0, &sigma_x(), &pol()),
            Err(Error::NotInCommutant { .. })
        ));
        assert!(matches!(
            gen_commutant_perturbation(&base, 0, &zeros(2, 2), &pol()),
            Err(Error::NotInvertible { .. })
        ));
    }

    #[test]
    fn spectral_triple_hand_case() {
        let alg = Arc::new(AlgebraPresentation::pauli());
        let xi = DVector::from_column_slice(&[re(1.0), re(0.0)]);
        let st = SpectralTriple::new(sigma_x(), alg, xi, 1, &pol()).unwrap();
        let direct = st.evaluate_direct(&[sigma_x(), sigma_z()]);
        assert!((direct - re(2.0)).norm() < 1e-12);
        let data = st.stinespring();
        let factored = data
            .evaluate(&[AlgebraElement::generator(0), AlgebraElement::generator(1)])
            .unwrap();
        assert!((factored[(0, 0)] - re(2.0)).norm() < 1e-12);
    }

    #[test]
    fn spectral_triple_commuting_and_unit_cases() {
        let alg = Arc::new(AlgebraPresentation::diagonal(3));
        let d = diag(&[re(1.0), re(-2.0), re(0.5)]);
        let xi = random_unit_vector(&mut rng_from_seed(4), 3);
        let st = SpectralTriple::new(d, alg, xi, 2, &pol()).unwrap();
        let data = st.stinespring();
        let cmp = compare_with_reference(&data, |_| zeros(1, 1), &pol()).unwrap();
        assert!(cmp.max_residual < 1e-12);

        let st = random_spectral_triple(5, 3, 1, &pol()).unwrap();
        let x = AlgebraElement::generator(1);
        let v = st.evaluate_elements(&[x, AlgebraElement::unit()]);
        assert!(v[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn spectral_triple_rejects_non_hermitian() {
        let alg = Arc::new(AlgebraPresentation::pauli());
        let xi = DVector::from_column_slice(&[re(1.0), re(0.0)]);
        let d = real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            SpectralTriple::new(d, alg, xi, 1, &pol()),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn similarity_examples() {
        let alg = Arc::new(AlgebraPresentation::pauli());
        let rep = Representation::identity(alg.clone());
        let s = gen_similarity_homomorphism(&rep, &identity(2), &pol()).unwrap();
        let cmp = compare_with_reference(&s, |args| alg.element_matrix(&args[0]), &pol()).unwrap();
        assert!(cmp.equal);

        let dalg = Arc::new(AlgebraPresentation::diagonal(2));
        let drep = Representation::identity(dalg.clone());
        let s = gen_similarity_homomorphism(&drep, &diag(&[re(1.0), re(2.0)]), &pol()).unwrap();
        let cmp = compare_with_reference(&s, |args| dalg.element_matrix(&args[0]), &pol()).unwrap();
        assert!(cmp.equal);

        // X = [[1, 1], [0, 1]]: X⁻¹ σz X = [[1, 2], [0, -1]] is not self-adjoint
        let x = real_matrix(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let s = gen_similarity_homomorphism(&rep, &x, &pol()).unwrap();
        let phi_z = s.evaluate(&[AlgebraElement::generator(1)]).unwrap();
        assert!(frobenius(&(&phi_z - real_matrix(2, 2, &[1.0, 2.0, 0.0, -1.0]))) < 1e-14);
        assert!(frobenius(&(&phi_z - phi_z.adjoint())) > 1.0);
        assert!(homomorphism_residual(&s, &pol()).unwrap() <= pol().eq_atol);

        assert!(matches!(
            gen_similarity_homomorphism(&rep, &zeros(2, 2), &pol()),
            Err(Error::NotInvertible { .. })
        ));
    }

    #[test]
    fn random_instance_is_deterministic() {
        let spec = sample_random_spec(0, 3, 3, 8);
        let a = random_instance(&spec, &pol()).unwrap();
        let b = random_instance(&spec, &pol()).unwrap();
        assert_eq!(
            a.representation_a.connectors(),
            b.representation_a.connectors()
        );
    }

    #[test]
    fn random_pair_represents_one_map() {
        let mut spec = sample_random_spec(9, 2, 2, 6);
        spec.pair_multiplicities = Some(spec.multiplicities.iter().map(|m| m + 1).collect());
        spec.reduce = true;
        let inst = random_instance(&spec, &pol()).unwrap();
        let b = inst.representation_b.as_ref().unwrap();
        assert!(phi_equal(&inst.representation_a, b, &pol()).unwrap().equal);
        assert!(is_minimal(&inst.representation_a, &pol()).minimal);
        assert!(is_minimal(b, &pol()).minimal);
    }

    #[test]
    fn multiplicity_one_instances_are_minimal() {
        for seed in 0..10 {
            let mut spec = sample_random_spec(seed, 3, 1, 3);
            spec.dim_g = 2;
            spec.dim_h = 2;
            assert!(spec.multiplicities.iter().all(|&m| m == 1));
            let inst = random_instance(&spec, &pol()).unwrap();
            assert!(
                is_minimal(&inst.representation_a, &pol()).minimal,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn zero_padding_is_undone_by_reduction() {
        let mut spec = sample_random_spec(4, 2, 1, 3);
        spec.dim_g = 2;
        spec.dim_h = 2;
        let inst = random_instance(&spec, &pol()).unwrap();
        let s = &inst.representation_a;
        let n0 = s.rep(0).algebra().ambient_dim();
        let n1 = s.rep(1).algebra().ambient_dim();
        let padded = zero_pad_slot(&zero_pad_slot(s, 0, 2 * n0).unwrap(), 1, n1).unwrap();
        let red = reduce_to_minimal(&padded, &pol()).unwrap();
        assert_eq!(red.data.slot_dims(), s.slot_dims());
    }
}
