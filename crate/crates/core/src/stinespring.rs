//! Stinespring data for k-linear maps
//! `Φ(a_1, …, a_k) = X_0 π_1(a_1) X_1 ⋯ π_k(a_k) X_k`, evaluation of the map
//! and of the adjoint chains, and an exhaustive equality check between two
//! representations.
//!
//! Slots are indexed from zero in code: slot `s` carries `reps[s]` on
//! `C^{d_s}`, is entered from the left through `connectors[s]` and left to
//! the right through `connectors[s + 1]`.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::algebra::{
    verify_representation, word_basis, AlgebraElement, AlgebraPresentation, Representation,
};
use crate::error::{Error, Result};
use crate::numerics::{max_abs, zeros, ComplexMatrix, TolerancePolicy};

#[derive(Debug, Clone)]
pub struct StinespringData {
    dim_g: usize,
    dim_h: usize,
    reps: Vec<Representation>,
    connectors: Vec<ComplexMatrix>,
}

impl StinespringData {
    /// Assemble and shape-check the data. `connectors` holds `X_0 … X_k`:
    /// `X_0` is `dim_h × d_1`, `X_i` is `d_i × d_{i+1}`, `X_k` is `d_k × dim_g`.
    pub fn new(
        dim_g: usize,
        dim_h: usize,
        reps: Vec<Representation>,
        connectors: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let k = reps.len();
        if k == 0 {
            return Err(Error::InvalidInput(
                "a Stinespring representation needs k >= 1 slots".into(),
            ));
        }
        if connectors.len() != k + 1 {
            return Err(Error::Shape(format!(
                "{k} slots need {} connecting operators, got {}",
                k + 1,
                connectors.len()
            )));
        }
        let mut dims = Vec::with_capacity(k + 2);
        dims.push(dim_h);
        dims.extend(reps.iter().map(Representation::dim));
        dims.push(dim_g);
        for (i, x) in connectors.iter().enumerate() {
            let (r, c) = (dims[i], dims[i + 1]);
            if x.nrows() != r || x.ncols() != c {
                return Err(Error::Shape(format!(
                    "X_{i} is {}x{}, expected {r}x{c}",
                    x.nrows(),
                    x.ncols()
                )));
            }
            if !crate::numerics::is_finite(x) {
                return Err(Error::InvalidInput(format!("X_{i} has non-finite entries")));
            }
        }
        Ok(StinespringData {
            dim_g,
            dim_h,
            reps,
            connectors,
        })
    }

    /// Check every slot representation against its algebra.
    pub fn validate(&self, pol: &TolerancePolicy) -> Result<()> {
        for rep in &self.reps {
            verify_representation(rep, pol)?;
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.reps.len()
    }

    pub fn dim_g(&self) -> usize {
        self.dim_g
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn reps(&self) -> &[Representation] {
        &self.reps
    }

    pub fn rep(&self, slot: usize) -> &Representation {
        &self.reps[slot]
    }

    pub fn connectors(&self) -> &[ComplexMatrix] {
        &self.connectors
    }

    pub fn connector(&self, i: usize) -> &ComplexMatrix {
        &self.connectors[i]
    }

    pub fn slot_dims(&self) -> Vec<usize> {
        self.reps.iter().map(Representation::dim).collect()
    }

    pub fn algebras(&self) -> Vec<Arc<AlgebraPresentation>> {
        self.reps.iter().map(|r| r.algebra_arc().clone()).collect()
    }

    pub fn into_parts(self) -> (usize, usize, Vec<Representation>, Vec<ComplexMatrix>) {
        (self.dim_g, self.dim_h, self.reps, self.connectors)
    }

    /// Replace slot `s` by a unitarily equivalent copy: `π ↦ UπU*`,
    /// `X_{s} ↦ X_{s} U*`, `X_{s+1} ↦ U X_{s+1}`. The map is unchanged.
    pub fn conjugate_slot(&self, slot: usize, u: &ComplexMatrix) -> Self {
        let mut out = self.clone();
        out.reps[slot] = self.reps[slot].conjugated(u);
        out.connectors[slot] = &self.connectors[slot] * u.adjoint();
        out.connectors[slot + 1] = u * &self.connectors[slot + 1];
        out
    }

    pub fn with_connector(&self, i: usize, x: ComplexMatrix) -> Result<Self> {
        let mut connectors = self.connectors.clone();
        connectors[i] = x;
        Self::new(self.dim_g, self.dim_h, self.reps.clone(), connectors)
    }

    /// `X_0 π_1(a_1) X_1 ⋯ π_k(a_k) X_k`.
    pub fn evaluate(&self, args: &[AlgebraElement]) -> Result<ComplexMatrix> {
        if args.len() != self.k() {
            return Err(Error::Shape(format!(
                "map has {} slots, got {} arguments",
                self.k(),
                args.len()
            )));
        }
        let mut acc = self.connectors[0].clone();
        for (s, a) in args.iter().enumerate() {
            acc = acc * self.reps[s].evaluate(a) * &self.connectors[s + 1];
        }
        Ok(acc)
    }

    /// Evaluation with arguments given as slot images `π_s(a_s)` directly.
    pub fn evaluate_images(&self, images: &[&ComplexMatrix]) -> ComplexMatrix {
        debug_assert_eq!(images.len(), self.k());
        let mut acc = self.connectors[0].clone();
        for (s, m) in images.iter().enumerate() {
            acc = acc * *m * &self.connectors[s + 1];
        }
        acc
    }

    /// `π_s(a_s) X_{s}^* ⋯ π_0(a_0) X_0^* η` for zero-based slot `s`, with
    /// `args` holding `a_0 … a_s`.
    pub fn adjoint_chain(
        &self,
        slot: usize,
        args: &[AlgebraElement],
        eta: &DVector<Complex64>,
    ) -> Result<DVector<Complex64>> {
        if slot >= self.k() || args.len() != slot + 1 {
            return Err(Error::Shape(format!(
                "adjoint chain to slot {slot} needs {} arguments, got {}",
                slot + 1,
                args.len()
            )));
        }
        if eta.len() != self.dim_h {
            return Err(Error::Shape(format!(
                "eta has length {}, expected {}",
                eta.len(),
                self.dim_h
            )));
        }
        let mut v = eta.clone();
        for (s, a) in args.iter().enumerate() {
            v = self.reps[s].evaluate(a) * (self.connectors[s].adjoint() * v);
        }
        Ok(v)
    }
}

pub fn evaluate_phi(s: &StinespringData, args: &[AlgebraElement]) -> Result<ComplexMatrix> {
    s.evaluate(args)
}

pub fn evaluate_adjoint_chain(
    s: &StinespringData,
    slot: usize,
    args: &[AlgebraElement],
    eta: &DVector<Complex64>,
) -> Result<DVector<Complex64>> {
    s.adjoint_chain(slot, args, eta)
}

/// Outcome of comparing two maps on all word-basis tuples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiComparison {
    pub equal: bool,
    pub max_residual: f64,
    pub tuples_checked: usize,
}

fn check_same_shape(a: &StinespringData, b: &StinespringData) -> Result<()> {
    if a.k() != b.k() || a.dim_g != b.dim_g || a.dim_h != b.dim_h {
        return Err(Error::Shape(format!(
            "cannot compare a {}-linear map into {}x{} with a {}-linear map into {}x{}",
            a.k(),
            a.dim_h,
            a.dim_g,
            b.k(),
            b.dim_h,
            b.dim_g
        )));
    }
    for s in 0..a.k() {
        if a.reps[s].algebra() != b.reps[s].algebra() {
            return Err(Error::InvalidInput(format!(
                "slot {s} uses different algebras (`{}` vs `{}`)",
                a.reps[s].algebra().label(),
                b.reps[s].algebra().label()
            )));
        }
    }
    Ok(())
}

/// Images of the word basis of every slot algebra under the slot
/// representation.
fn slot_basis_images(
    s: &StinespringData,
    pol: &TolerancePolicy,
) -> Result<Vec<Vec<ComplexMatrix>>> {
    s.reps
        .iter()
        .map(|rep| {
            let wb = word_basis(rep.algebra(), pol)?;
            Ok(wb.words.iter().map(|w| rep.word_image(w)).collect())
        })
        .collect()
}

/// Exhaustive comparison: both maps are multilinear, so agreeing on every
/// tuple of basis words means agreeing everywhere.
pub fn phi_equal(
    a: &StinespringData,
    b: &StinespringData,
    pol: &TolerancePolicy,
) -> Result<PhiComparison> {
    check_same_shape(a, b)?;
    let ia = slot_basis_images(a, pol)?;
    let ib = slot_basis_images(b, pol)?;

    // Depth-first over tuples, carrying the partial products
    // X_0 π_1(w_1) X_1 ⋯ π_s(w_s) X_s for both sides.
    #[allow(clippy::too_many_arguments)]
    fn walk(
        slot: usize,
        pa: &ComplexMatrix,
        pb: &ComplexMatrix,
        a: &StinespringData,
        b: &StinespringData,
        ia: &[Vec<ComplexMatrix>],
        ib: &[Vec<ComplexMatrix>],
        acc: &mut (f64, usize),
    ) {
        if slot == a.k() {
            acc.0 = acc.0.max(max_abs(&(pa - pb)));
            acc.1 += 1;
            return;
        }
        for (wa, wb) in ia[slot].iter().zip(&ib[slot]) {
            let na = pa * wa * &a.connectors[slot + 1];
            let nb = pb * wb * &b.connectors[slot + 1];
            walk(slot + 1, &na, &nb, a, b, ia, ib, acc);
        }
    }

    let mut acc = (0.0, 0);
    walk(
        0,
        &a.connectors[0],
        &b.connectors[0],
        a,
        b,
        &ia,
        &ib,
        &mut acc,
    );
    Ok(PhiComparison {
        equal: acc.0 <= pol.eq_atol,
        max_residual: acc.0,
        tuples_checked: acc.1,
    })
}

/// Iterate over all index tuples `(i_0, …, i_{n-1})` with `i_s < sizes[s]`.
pub fn for_each_tuple(sizes: &[usize], mut f: impl FnMut(&[usize])) {
    if sizes.contains(&0) {
        return;
    }
    let mut idx = vec![0; sizes.len()];
    loop {
        f(&idx);
        let mut s = sizes.len();
        loop {
            if s == 0 {
                return;
            }
            s -= 1;
            idx[s] += 1;
            if idx[s] < sizes[s] {
                break;
            }
            idx[s] = 0;
        }
    }
}

/// Compare a representation with an arbitrary reference evaluator on every
/// tuple of word-basis elements of the slot algebras.
pub fn compare_with_reference<F>(
    s: &StinespringData,
    reference: F,
    pol: &TolerancePolicy,
) -> Result<PhiComparison>
where
    F: Fn(&[AlgebraElement]) -> ComplexMatrix,
{
    let bases = s
        .reps
        .iter()
        .map(|r| word_basis(r.algebra(), pol).map(|wb| wb.elements()))
        .collect::<Result<Vec<_>>>()?;
    let images: Vec<Vec<ComplexMatrix>> = s
        .reps
        .iter()
        .zip(&bases)
        .map(|(r, els)| els.iter().map(|e| r.evaluate(e)).collect())
        .collect();
    let sizes: Vec<usize> = bases.iter().map(Vec::len).collect();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut shape_error = None;
    for_each_tuple(&sizes, |idx| {
        let args: Vec<AlgebraElement> = idx
            .iter()
            .enumerate()
            .map(|(s, &j)| bases[s][j].clone())
            .collect();
        let imgs: Vec<&ComplexMatrix> = idx
            .iter()
            .enumerate()
            .map(|(s, &j)| &images[s][j])
            .collect();
        let lhs = s.evaluate_images(&imgs);
        let rhs = reference(&args);
        if rhs.shape() != lhs.shape() {
            shape_error = Some(rhs.shape());
            return;
        }
        worst = worst.max(max_abs(&(lhs - rhs)));
        count += 1;
    });
    if let Some((r, c)) = shape_error {
        return Err(Error::Shape(format!(
            "reference evaluator returned {r}x{c}, expected {}x{}",
            s.dim_h, s.dim_g
        )));
    }
    Ok(PhiComparison {
        equal: worst <= pol.eq_atol,
        max_residual: worst,
        tuples_checked: count,
    })
}

/// A map given by one Stinespring representation, optionally paired with a
/// second representation of the same map.
#[derive(Debug, Clone)]
pub struct MapInstance {
    pub algebras: Vec<Arc<AlgebraPresentation>>,
    pub representation_a: StinespringData,
    pub representation_b: Option<StinespringData>,
}

impl MapInstance {
    pub fn new(
        algebras: Vec<Arc<AlgebraPresentation>>,
        representation_a: StinespringData,
        representation_b: Option<StinespringData>,
    ) -> Result<Self> {
        let check = |s: &StinespringData, name: &str| -> Result<()> {
            if s.k() != algebras.len() {
                return Err(Error::Shape(format!(
                    "representation {name} has {} slots for {} algebras",
                    s.k(),
                    algebras.len()
                )));
            }
            for (i, (rep, alg)) in s.reps.iter().zip(&algebras).enumerate() {
                if rep.algebra() != alg.as_ref() {
                    return Err(Error::InvalidInput(format!(
                        "representation {name}: slot {i} does not use algebra {i}"
                    )));
                }
            }
            Ok(())
        };
        check(&representation_a, "A")?;
        if let Some(b) = &representation_b {
            check(b, "B")?;
            check_same_shape(&representation_a, b)?;
        }
        Ok(MapInstance {
            algebras,
            representation_a,
            representation_b,
        })
    }

    pub fn single(s: StinespringData) -> Self {
        MapInstance {
            algebras: s.algebras(),
            representation_a: s,
            representation_b: None,
        }
    }

    pub fn pair(a: StinespringData, b: StinespringData) -> Result<Self> {
        Self::new(a.algebras(), a, Some(b))
    }

    pub fn k(&self) -> usize {
        self.algebras.len()
    }

    pub fn validate(&self, pol: &TolerancePolicy) -> Result<()> {
        self.representation_a.validate(pol)?;
        if let Some(b) = &self.representation_b {
            b.validate(pol)?;
        }
        Ok(())
    }
}

/// The `dim_h × dim_g` zero map with zero-dimensional slots.
pub fn zero_data(
    algebras: &[Arc<AlgebraPresentation>],
    dim_g: usize,
    dim_h: usize,
) -> StinespringData {
    let k = algebras.len();
    let reps = algebras
        .iter()
        .cloned()
        .map(Representation::empty)
        .collect();
    let mut connectors = Vec::with_capacity(k + 1);
    connectors.push(zeros(dim_h, 0));
    for _ in 1..k {
        connectors.push(zeros(0, 0));
    }
    connectors.push(zeros(0, dim_g));
    StinespringData {
        dim_g,
        dim_h,
        reps,
        connectors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{sigma_x, sigma_z};
    use crate::numerics::{identity, re, real_matrix};

    fn pol() -> TolerancePolicy {
        TolerancePolicy::DEFAULT
    }

    fn identity_dilation() -> StinespringData {
        let alg = Arc::new(AlgebraPresentation::pauli());
        StinespringData::new(
            2,
            2,
            vec![Representation::identity(alg)],
            vec![identity(2), identity(2)],
        )
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let s = identity_dilation();
        assert_eq!(
            s.evaluate(&[AlgebraElement::generator(0)]).unwrap(),
            sigma_x()
        );
        assert_eq!(s.evaluate(&[AlgebraElement::zero()]).unwrap(), zeros(2, 2));

        // (1, 0) · diag(1, 1) · (1, 1)^T = 1
        let alg = Arc::new(AlgebraPresentation::diagonal(2));
        let s = StinespringData::new(
            1,
            1,
            vec![Representation::identity(alg)],
            vec![
                real_matrix(1, 2, &[1.0, 0.0]),
                real_matrix(2, 1, &[1.0, 1.0]),
            ],
        )
        .unwrap();
        assert_eq!(s.evaluate(&[AlgebraElement::unit()]).unwrap(), identity(1));
    }

    #[test]
    fn zero_argument_in_any_slot_gives_zero() {
        let alg = Arc::new(AlgebraPresentation::pauli());
        let rep = Representation::identity(alg);
        let s = StinespringData::new(
            2,
            2,
            vec![rep.clone(), rep.clone(), rep],
            vec![identity(2), sigma_x(), sigma_z(), identity(2)],
        )
        .unwrap();
        let g = AlgebraElement::generator(1);
        let args = [g.clone(), AlgebraElement::zero(), g];
        assert_eq!(s.evaluate(&args).unwrap(), zeros(2, 2));
    }

    #[test]
    fn shape_errors() {
        let alg = Arc::new(AlgebraPresentation::pauli());
        let r = StinespringData::new(
            2,
            2,
            vec![Representation::identity(alg)],
            vec![identity(3), identity(2)],
        );
        assert!(matches!(r, Err(Error::Shape(_))));
        let s = identity_dilation();
        assert!(s.evaluate(&[]).is_err());
    }

    #[test]
    fn adjoint_chain_examples() {
        let s = identity_dilation();
        let e1 = DVector::from_column_slice(&[re(1.0), re(0.0)]);
        let v = s.adjoint_chain(0, &[AlgebraElement::unit()], &e1).unwrap();
        assert_eq!(v, e1);
        let zero = DVector::zeros(2);
        assert_eq!(
            s.adjoint_chain(0, &[AlgebraElement::generator(1)], &zero)
                .unwrap(),
            zero
        );
        // σz e1 = e1
        let v = s
            .adjoint_chain(0, &[AlgebraElement::generator(1)], &e1)
            .unwrap();
        assert_eq!(v, e1);
    }

    #[test]
    fn phi_equal_examples() {
        let s = identity_dilation();
        let cmp = phi_equal(&s, &s, &pol()).unwrap();
        assert!(cmp.equal);
        assert_eq!(cmp.max_residual, 0.0);
        assert_eq!(cmp.tuples_checked, 4);

        let h = real_matrix(2, 2, &[1.0, 1.0, 1.0, -1.0]) * re(1.0 / 2f64.sqrt());
        let conj = s.conjugate_slot(0, &h);
        assert!(phi_equal(&s, &conj, &pol()).unwrap().equal);

        // a vs 2a: residual 1 on the unit argument
        let doubled = s.with_connector(1, identity(2) * re(2.0)).unwrap();
        let cmp = phi_equal(&s, &doubled, &pol()).unwrap();
        assert!(!cmp.equal);
        assert!((cmp.max_residual - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reference_comparison_matches_phi_equal() {
        let s = identity_dilation();
        let alg = AlgebraPresentation::pauli();
        let cmp = compare_with_reference(&s, |args| alg.element_matrix(&args[0]), &pol()).unwrap();
        assert!(cmp.equal);
        assert_eq!(cmp.tuples_checked, 4);
        let cmp = compare_with_reference(&s, |args| alg.element_matrix(&args[0]) * re(2.0), &pol())
            .unwrap();
        assert!(!cmp.equal);
    }

    #[test]
    fn tuple_iteration_counts() {
        let mut n = 0;
        for_each_tuple(&[2, 3, 4], |_| n += 1);
        assert_eq!(n, 24);
        n = 0;
        for_each_tuple(&[2, 0], |_| n += 1);
        assert_eq!(n, 0);
    }

    #[test]
    fn zero_data_evaluates_to_zero() {
        let algs = vec![
            Arc::new(AlgebraPresentation::pauli()),
            Arc::new(AlgebraPresentation::diagonal(3)),
        ];
        let z = zero_data(&algs, 2, 3);
        let out = z
            .evaluate(&[AlgebraElement::unit(), AlgebraElement::generator(1)])
            .unwrap();
        assert_eq!(out, zeros(3, 2));
    }
}
