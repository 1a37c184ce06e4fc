//! Unital matrix *-algebras presented by generators, formal elements as
//! linear combinations of words, and representations given by generator
//! images.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    self, block_diag, frobenius, identity, max_abs, zeros, ComplexMatrix, TolerancePolicy, ONE,
};

/// A word in the generators; the empty word is the unit.
pub type Word = Vec<usize>;

/// A concrete unital *-algebra: the span of all products of the generator
/// matrices. The generator list is closed under adjoints through
/// `adjoint_map`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraPresentation {
    label: String,
    adjoint_map: Vec<usize>,
    generators: Vec<ComplexMatrix>,
    ambient_dim: usize,
}

impl AlgebraPresentation {
    pub fn new(
        label: impl Into<String>,
        generators: Vec<ComplexMatrix>,
        adjoint_map: Vec<usize>,
        pol: &TolerancePolicy,
    ) -> Result<Self> {
        let label = label.into();
        let ambient_dim = match generators.first() {
            Some(g) => g.nrows(),
            None => {
                return Err(Error::InvalidInput(format!(
                    "algebra `{label}` has no generators"
                )))
            }
        };
        if ambient_dim == 0 {
            return Err(Error::InvalidInput(format!(
                "algebra `{label}` has zero ambient dimension"
            )));
        }
        if adjoint_map.len() != generators.len() {
            return Err(Error::InvalidInput(format!(
                "algebra `{label}`: adjoint map has {} entries for {} generators",
                adjoint_map.len(),
                generators.len()
            )));
        }
        for (g, m) in generators.iter().enumerate() {
            if m.nrows() != ambient_dim || m.ncols() != ambient_dim {
                return Err(Error::Shape(format!(
                    "algebra `{label}`: generator {g} is {}x{}, expected {ambient_dim}x{ambient_dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if !numerics::is_finite(m) {
                return Err(Error::InvalidInput(format!(
                    "algebra `{label}`: generator {g} has non-finite entries"
                )));
            }
        }
        for (g, &h) in adjoint_map.iter().enumerate() {
            if h >= generators.len() || adjoint_map[h] != g {
                return Err(Error::InvalidInput(format!(
                    "algebra `{label}`: adjoint map is not an involution at generator {g}"
                )));
            }
            let res = max_abs(&(&generators[h] - generators[g].adjoint()));
            if res > pol.eq_atol {
                return Err(Error::InvalidInput(format!(
                    "algebra `{label}`: generator {h} is not the adjoint of generator {g} (residual {res:e})"
                )));
            }
        }
        Ok(AlgebraPresentation {
            label,
            adjoint_map,
            generators,
            ambient_dim,
        })
    }

    /// `M_n`, generated by the matrix unit `e_11` and the cyclic shift with
    /// its adjoint. `M_1` is generated by the 1x1 identity.
    pub fn full_matrix(n: usize) -> Self {
        assert!(n >= 1);
        if n == 1 {
            return Self::scalars();
        }
        let mut e11 = zeros(n, n);
        e11[(0, 0)] = ONE;
        let mut shift = zeros(n, n);
        for i in 0..n {
            shift[((i + 1) % n, i)] = ONE;
        }
        let shift_adj = shift.adjoint();
        AlgebraPresentation {
            label: format!("M{n}"),
            adjoint_map: vec![0, 2, 1],
            generators: vec![e11, shift, shift_adj],
            ambient_dim: n,
        }
    }

    /// `M_2` generated by the self-adjoint Pauli matrices `σx`, `σz`.
    pub fn pauli() -> Self {
        AlgebraPresentation {
            label: "M2-pauli".into(),
            adjoint_map: vec![0, 1],
            generators: vec![sigma_x(), sigma_z()],
            ambient_dim: 2,
        }
    }

    /// The diagonal algebra `C^n`, generated by its minimal projections.
    pub fn diagonal(n: usize) -> Self {
        assert!(n >= 1);
        let generators = (0..n)
            .map(|j| {
                let mut p = zeros(n, n);
                p[(j, j)] = ONE;
                p
            })
            .collect();
        AlgebraPresentation {
            label: format!("C^{n}"),
            adjoint_map: (0..n).collect(),
            generators,
            ambient_dim: n,
        }
    }

    /// The one-dimensional algebra `C`.
    pub fn scalars() -> Self {
        AlgebraPresentation {
            label: "C".into(),
            adjoint_map: vec![0],
            generators: vec![identity(1)],
            ambient_dim: 1,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn gen_count(&self) -> usize {
        self.generators.len()
    }

    pub fn adjoint_map(&self) -> &[usize] {
        &self.adjoint_map
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn gen_matrices(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    /// Image of a word under the defining matrices.
    pub fn word_matrix(&self, word: &[usize]) -> ComplexMatrix {
        product(&self.generators, self.ambient_dim, word)
    }

    pub fn element_matrix(&self, x: &AlgebraElement) -> ComplexMatrix {
        evaluate_terms(&self.generators, self.ambient_dim, x)
    }
}

pub fn sigma_x() -> ComplexMatrix {
    numerics::real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn sigma_z() -> ComplexMatrix {
    numerics::real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

fn product(images: &[ComplexMatrix], dim: usize, word: &[usize]) -> ComplexMatrix {
    let mut it = word.iter();
    let Some(&first) = it.next() else {
        return identity(dim);
    };
    it.fold(images[first].clone(), |acc, &g| acc * &images[g])
}

fn evaluate_terms(images: &[ComplexMatrix], dim: usize, x: &AlgebraElement) -> ComplexMatrix {
    let mut out = zeros(dim, dim);
    for (coeff, word) in &x.terms {
        out += product(images, dim, word) * *coeff;
    }
    out
}

/// A formal linear combination of words.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlgebraElement {
    pub terms: Vec<(Complex64, Word)>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        AlgebraElement { terms: Vec::new() }
    }

    pub fn unit() -> Self {
        Self::word(Vec::new())
    }

    pub fn generator(g: usize) -> Self {
        Self::word(vec![g])
    }

    pub fn word(word: Word) -> Self {
        AlgebraElement {
            terms: vec![(ONE, word)],
        }
    }

    pub fn scaled(mut self, s: Complex64) -> Self {
        for (c, _) in &mut self.terms {
            *c *= s;
        }
        self
    }

    pub fn plus(mut self, other: AlgebraElement) -> Self {
        self.terms.extend(other.terms);
        self
    }

    /// Concatenate words termwise: the formal product `self · other`.
    pub fn times(&self, other: &AlgebraElement) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, u) in &self.terms {
            for (b, v) in &other.terms {
                let mut w = u.clone();
                w.extend_from_slice(v);
                terms.push((a * b, w));
            }
        }
        AlgebraElement { terms }
    }

    /// Formal adjoint: conjugate coefficients, reverse words, swap each
    /// generator for its adjoint.
    pub fn adjoint(&self, alg: &AlgebraPresentation) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(c, w)| {
                let w = w.iter().rev().map(|&g| alg.adjoint_map[g]).collect();
                (c.conj(), w)
            })
            .collect();
        AlgebraElement { terms }
    }

    pub fn validate(&self, alg: &AlgebraPresentation) -> Result<()> {
        for (c, w) in &self.terms {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidInput("non-finite coefficient".into()));
            }
            if let Some(&g) = w.iter().find(|&&g| g >= alg.gen_count()) {
                return Err(Error::InvalidInput(format!(
                    "generator index {g} out of range for algebra `{}` with {} generators",
                    alg.label,
                    alg.gen_count()
                )));
            }
        }
        Ok(())
    }
}

/// A linear basis of the algebra made of words, unit first.
#[derive(Debug, Clone)]
pub struct WordBasis {
    pub words: Vec<Word>,
    /// Column `j` is the column-major vectorization of the image of `words[j]`.
    pub coeff_matrix: ComplexMatrix,
    pinv: ComplexMatrix,
    /// `I = Σ c_w img(w)` over non-empty words.
    pub unit_expansion: Vec<(Complex64, Word)>,
}

impl WordBasis {
    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn elements(&self) -> Vec<AlgebraElement> {
        self.words
            .iter()
            .cloned()
            .map(AlgebraElement::word)
            .collect()
    }

    /// Coordinates of `m` in the word basis (least squares).
    pub fn coordinates(&self, m: &ComplexMatrix) -> DVector<Complex64> {
        &self.pinv * DVector::from_column_slice(m.as_slice())
    }
}

/// Incremental orthonormal basis of vectorized matrices.
struct SpanTracker {
    q: Vec<DVector<Complex64>>,
    scale: f64,
    rtol: f64,
}

impl SpanTracker {
    fn new(rtol: f64) -> Self {
        SpanTracker {
            q: Vec::new(),
            scale: 0.0,
            rtol,
        }
    }

    fn residual(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut r = v.clone();
        // two passes of classical Gram-Schmidt
        for _ in 0..2 {
            for q in &self.q {
                let proj = q.dotc(&r);
                r -= q * proj;
            }
        }
        r
    }

    /// Add `v` if it enlarges the span; returns whether it did.
    fn try_add(&mut self, v: &DVector<Complex64>) -> bool {
        let norm = v.norm();
        let scale = self.scale.max(norm);
        if scale == 0.0 {
            return false;
        }
        let r = self.residual(v);
        let rn = r.norm();
        let cutoff = self.rtol * scale * v.len().max(self.q.len() + 1) as f64;
        if rn > cutoff {
            self.q.push(r / Complex64::new(rn, 0.0));
            self.scale = scale;
            true
        } else {
            false
        }
    }
}

fn vectorize(m: &ComplexMatrix) -> DVector<Complex64> {
    DVector::from_column_slice(m.as_slice())
}

/// Breadth-first closure of words: extend accepted words on the right by
/// every generator, keep a word when its image enlarges the span, and stop
/// once a round adds nothing or words reach length `ambient_dim²`.
fn close_words(
    alg: &AlgebraPresentation,
    seeds: Vec<Word>,
    pol: &TolerancePolicy,
) -> (Vec<Word>, SpanTracker) {
    let max_len = alg.ambient_dim * alg.ambient_dim;
    let mut tracker = SpanTracker::new(pol.rank_rtol);
    let mut words = Vec::new();
    let mut frontier = Vec::new();
    for w in seeds {
        if tracker.try_add(&vectorize(&alg.word_matrix(&w))) {
            words.push(w.clone());
            frontier.push(w);
        }
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for w in &frontier {
            if w.len() >= max_len {
                continue;
            }
            for g in 0..alg.gen_count() {
                let mut cand = w.clone();
                cand.push(g);
                if tracker.try_add(&vectorize(&alg.word_matrix(&cand))) {
                    words.push(cand.clone());
                    next.push(cand);
                }
            }
        }
        frontier = next;
    }
    (words, tracker)
}

/// Word basis of the algebra, unit first.
pub fn word_basis(alg: &AlgebraPresentation, pol: &TolerancePolicy) -> Result<WordBasis> {
    let n = alg.ambient_dim;
    let gen_words = (0..alg.gen_count()).map(|g| vec![g]).collect();
    let (gen_closure, tracker) = close_words(alg, gen_words, pol);
    let id = vectorize(&identity(n));
    if tracker.residual(&id).norm() > pol.eq_atol {
        return Err(Error::NotUnital {
            label: alg.label.clone(),
        });
    }
    let mut span = zeros(n * n, gen_closure.len());
    for (j, w) in gen_closure.iter().enumerate() {
        span.set_column(j, &vectorize(&alg.word_matrix(w)));
    }
    let unit_coords = numerics::pseudo_inverse(&span, pol) * &id;
    let unit_expansion = unit_coords.iter().copied().zip(gen_closure).collect();

    let (words, _) = close_words(alg, vec![Vec::new()], pol);
    let mut coeff_matrix = zeros(n * n, words.len());
    for (j, w) in words.iter().enumerate() {
        coeff_matrix.set_column(j, &vectorize(&alg.word_matrix(w)));
    }
    let pinv = numerics::pseudo_inverse(&coeff_matrix, pol);
    Ok(WordBasis {
        words,
        coeff_matrix,
        pinv,
        unit_expansion,
    })
}

/// A representation of a presented algebra, fixed by the images of the
/// generators. The unit always maps to the identity.
#[derive(Debug, Clone)]
pub struct Representation {
    algebra: Arc<AlgebraPresentation>,
    dim: usize,
    images: Vec<ComplexMatrix>,
}

impl Representation {
    pub fn new(
        algebra: Arc<AlgebraPresentation>,
        dim: usize,
        images: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if images.len() != algebra.gen_count() {
            return Err(Error::Shape(format!(
                "representation of `{}` has {} images for {} generators",
                algebra.label,
                images.len(),
                algebra.gen_count()
            )));
        }
        for (g, m) in images.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::Shape(format!(
                    "image of generator {g} is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if !numerics::is_finite(m) {
                return Err(Error::InvalidInput(format!(
                    "image of generator {g} has non-finite entries"
                )));
            }
        }
        Ok(Representation {
            algebra,
            dim,
            images,
        })
    }

    /// The defining representation `a ↦ a`.
    pub fn identity(algebra: Arc<AlgebraPresentation>) -> Self {
        let images = algebra.generators.clone();
        let dim = algebra.ambient_dim;
        Representation {
            algebra,
            dim,
            images,
        }
    }

    /// Multiplicity-`m` amplification `a ↦ diag(a, …, a) = I_m ⊗ a`.
    pub fn amplified(algebra: Arc<AlgebraPresentation>, multiplicity: usize) -> Self {
        let images = algebra
            .generators
            .iter()
            .map(|g| block_diag(&vec![g; multiplicity]))
            .collect();
        let dim = algebra.ambient_dim * multiplicity;
        Representation {
            algebra,
            dim,
            images,
        }
    }

    /// The zero-dimensional representation.
    pub fn empty(algebra: Arc<AlgebraPresentation>) -> Self {
        let images = vec![zeros(0, 0); algebra.gen_count()];
        Representation {
            algebra,
            dim: 0,
            images,
        }
    }

    /// Conjugate every image: `g ↦ U g U*`.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Self {
        let u_adj = u.adjoint();
        Representation {
            algebra: self.algebra.clone(),
            dim: u.nrows(),
            images: self.images.iter().map(|g| u * g * &u_adj).collect(),
        }
    }

    /// Compression `g ↦ E* g E` to the range of an isometry `E`.
    pub fn compressed(&self, embedding: &ComplexMatrix) -> Self {
        let e_adj = embedding.adjoint();
        Representation {
            algebra: self.algebra.clone(),
            dim: embedding.ncols(),
            images: self.images.iter().map(|g| &e_adj * g * embedding).collect(),
        }
    }

    pub fn algebra(&self) -> &AlgebraPresentation {
        &self.algebra
    }

    pub fn algebra_arc(&self) -> &Arc<AlgebraPresentation> {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn images(&self) -> &[ComplexMatrix] {
        &self.images
    }

    pub fn word_image(&self, word: &[usize]) -> ComplexMatrix {
        product(&self.images, self.dim, word)
    }

    pub fn evaluate(&self, x: &AlgebraElement) -> ComplexMatrix {
        evaluate_terms(&self.images, self.dim, x)
    }
}

/// Direct sum `π ⊕ ρ` of two representations of the same algebra.
pub fn direct_sum(pi: &Representation, rho: &Representation) -> Representation {
    debug_assert_eq!(pi.algebra, rho.algebra);
    let images = pi
        .images
        .iter()
        .zip(&rho.images)
        .map(|(a, b)| block_diag(&[a, b]))
        .collect();
    Representation {
        algebra: pi.algebra.clone(),
        dim: pi.dim + rho.dim,
        images,
    }
}

pub fn evaluate_element(rep: &Representation, x: &AlgebraElement) -> ComplexMatrix {
    rep.evaluate(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepresentationReport {
    pub max_residual: f64,
    pub relations_checked: usize,
}

/// Check that the images satisfy every linear relation among words of the
/// defining matrices.
///
/// With a word basis `b_j` (unit first), each product `b_i·g` has defining
/// image `Σ_j c_j b_j`; requiring the same expansion for the images, plus
/// the expansion of the identity through non-empty words and adjoint
/// compatibility of the generators, makes the induced map on the span
/// well defined and multiplicative.
pub fn verify_representation(
    rep: &Representation,
    pol: &TolerancePolicy,
) -> Result<RepresentationReport> {
    let alg = rep.algebra();
    let basis = word_basis(alg, pol)?;
    let mut max_residual: f64 = 0.0;
    let mut relations = 0;

    for (g, &h) in alg.adjoint_map.iter().enumerate() {
        let r = max_abs(&(&rep.images[h] - rep.images[g].adjoint()));
        max_residual = max_residual.max(r);
        relations += 1;
    }

    if rep.dim > 0 {
        let basis_images: Vec<ComplexMatrix> =
            basis.words.iter().map(|w| rep.word_image(w)).collect();
        let expand = |coords: &DVector<Complex64>| {
            let mut acc = zeros(rep.dim, rep.dim);
            for (j, c) in coords.iter().enumerate() {
                acc += &basis_images[j] * *c;
            }
            acc
        };

        for (i, w) in basis.words.iter().enumerate() {
            for g in 0..alg.gen_count() {
                let mut wg = w.clone();
                wg.push(g);
                let coords = basis.coordinates(&alg.word_matrix(&wg));
                let lhs = &basis_images[i] * &rep.images[g];
                max_residual = max_residual.max(max_abs(&(lhs - expand(&coords))));
                relations += 1;
            }
        }

        // Unit relation: I = Σ d_w img(w) over non-empty words.
        let mut acc = zeros(rep.dim, rep.dim);
        for (d, w) in &basis.unit_expansion {
            acc += rep.word_image(w) * *d;
        }
        max_residual = max_residual.max(max_abs(&(acc - identity(rep.dim))));
        relations += 1;
    }

    if max_residual > pol.eq_atol {
        return Err(Error::NotARepresentation {
            label: alg.label.clone(),
            residual: max_residual,
            threshold: pol.eq_atol,
        });
    }
    Ok(RepresentationReport {
        max_residual,
        relations_checked: relations,
    })
}

/// Residual of `S` commuting with all generator images.
pub fn commutant_residual(rep: &Representation, s: &ComplexMatrix) -> f64 {
    rep.images
        .iter()
        .map(|g| frobenius(&(s * g - g * s)))
        .fold(0.0, f64::max)
}
