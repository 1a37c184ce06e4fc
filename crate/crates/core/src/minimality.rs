//! Right and left span chains, minimality at each variable, and the
//! right-to-left reduction of a Stinespring representation to a minimal one.

use crate::error::{Error, Result};
use crate::numerics::{
    hstack, identity, orthonormal_basis, ComplexMatrix, Subspace, TolerancePolicy,
};
use crate::stinespring::StinespringData;

/// Smallest subspace containing the columns of `start` and invariant under
/// every operator in `ops`.
///
/// Krylov-style: apply all operators to the current basis, re-orthonormalize,
/// stop when the dimension no longer grows. With a unital algebra the span
/// of `{π(a)v}` is exactly this subspace.
pub fn invariant_closure(
    start: &ComplexMatrix,
    ops: &[ComplexMatrix],
    pol: &TolerancePolicy,
) -> Subspace {
    let n = start.nrows();
    let mut current = orthonormal_basis(start, pol);
    while !current.is_zero() && !current.is_full() {
        let b = current.basis();
        let images: Vec<ComplexMatrix> = ops.iter().map(|g| g * b).collect();
        let mut parts: Vec<&ComplexMatrix> = vec![b];
        parts.extend(images.iter());
        let next = orthonormal_basis(&hstack(&parts, n), pol);
        if next.dim() <= current.dim() {
            break;
        }
        current = next;
    }
    current
}

/// Right spans `V_s = span{π_s(a_s) X_{s+1} ⋯ π_{k-1}(a_{k-1}) X_k γ}`.
pub fn right_chain(s: &StinespringData, pol: &TolerancePolicy) -> Vec<Subspace> {
    let k = s.k();
    let mut chain = vec![Subspace::zero(0); k];
    let mut generators = identity(s.dim_g());
    for slot in (0..k).rev() {
        let start = s.connector(slot + 1) * &generators;
        let v = invariant_closure(&start, s.rep(slot).images(), pol);
        generators = v.basis().clone();
        chain[slot] = v;
    }
    chain
}

/// Left spans `W_s = span{π_s(a_s) X_s^* ⋯ π_0(a_0) X_0^* η}`.
pub fn left_chain(s: &StinespringData, pol: &TolerancePolicy) -> Vec<Subspace> {
    let mut chain = Vec::with_capacity(s.k());
    let mut generators = identity(s.dim_h());
    for slot in 0..s.k() {
        let start = s.connector(slot).adjoint() * &generators;
        let w = invariant_closure(&start, s.rep(slot).images(), pol);
        generators = w.basis().clone();
        chain.push(w);
    }
    chain
}

/// Both span chains of one representation.
#[derive(Debug, Clone)]
pub struct SpanChain {
    pub right: Vec<Subspace>,
    pub left: Vec<Subspace>,
}

pub fn span_chain(s: &StinespringData, pol: &TolerancePolicy) -> SpanChain {
    SpanChain {
        right: right_chain(s, pol),
        left: left_chain(s, pol),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalityReport {
    pub slot_dims: Vec<usize>,
    pub right_dims: Vec<usize>,
    pub left_dims: Vec<usize>,
    pub minimal_right: Vec<bool>,
    pub minimal_left: Vec<bool>,
    pub minimal: bool,
}

impl MinimalityReport {
    fn from_chain(slot_dims: Vec<usize>, chain: &SpanChain) -> Self {
        let right_dims: Vec<usize> = chain.right.iter().map(Subspace::dim).collect();
        let left_dims: Vec<usize> = chain.left.iter().map(Subspace::dim).collect();
        let minimal_right: Vec<bool> = right_dims
            .iter()
            .zip(&slot_dims)
            .map(|(a, b)| a == b)
            .collect();
        let minimal_left: Vec<bool> = left_dims
            .iter()
            .zip(&slot_dims)
            .map(|(a, b)| a == b)
            .collect();
        let minimal = minimal_right.iter().chain(&minimal_left).all(|&f| f);
        MinimalityReport {
            slot_dims,
            right_dims,
            left_dims,
            minimal_right,
            minimal_left,
            minimal,
        }
    }
}

pub fn is_minimal(s: &StinespringData, pol: &TolerancePolicy) -> MinimalityReport {
    MinimalityReport::from_chain(s.slot_dims(), &span_chain(s, pol))
}

/// Result of [`reduce_to_minimal`]: the compressed data and, per slot, the
/// invariant subspace `l_s ⊆ C^{d_s}` it was compressed to.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub data: StinespringData,
    pub projections: Vec<Subspace>,
}

/// Reduce to a minimal representation of the same map, working from the
/// last slot to the first.
///
/// For slot `s`: `r_s` is the invariant subspace generated by the range of
/// the (already compressed) `X_{s+1}`; `l_s` is the invariant subspace
/// generated by `r_s` applied to the left span at `s`. The slot is then
/// compressed to `l_s`, with `X_s ← X_s E` and `X_{s+1} ← E* X_{s+1}` for an
/// orthonormal basis `E` of `l_s`.
///
/// If some `l_s` is zero the map vanishes identically; the zero-dimensional
/// reduction is returned inside [`Error::DegenerateMap`].
pub fn reduce_to_minimal(s: &StinespringData, pol: &TolerancePolicy) -> Result<Reduction> {
    let k = s.k();
    let (dim_g, dim_h, mut reps, mut connectors) = s.clone().into_parts();
    let mut projections = vec![Subspace::zero(0); k];
    let mut degenerate_slot = None;

    for slot in (0..k).rev() {
        let images = reps[slot].images().to_vec();
        let r = invariant_closure(&connectors[slot + 1], &images, pol);

        let current = StinespringData::new(dim_g, dim_h, reps.clone(), connectors.clone())?;
        let left = left_chain_to(&current, slot, pol);
        let l = invariant_closure(&(r.projector() * left.basis()), &images, pol);

        let e = l.basis().clone();
        reps[slot] = reps[slot].compressed(&e);
        connectors[slot] = &connectors[slot] * &e;
        connectors[slot + 1] = e.adjoint() * &connectors[slot + 1];
        if l.is_zero() && degenerate_slot.is_none() {
            degenerate_slot = Some(slot);
        }
        projections[slot] = l;
    }

    let reduction = Reduction {
        data: StinespringData::new(dim_g, dim_h, reps, connectors)?,
        projections,
    };
    match degenerate_slot {
        Some(slot) => Err(Error::DegenerateMap {
            slot,
            reduction: Box::new(reduction),
        }),
        None => Ok(reduction),
    }
}

/// Left span at `slot` only.
fn left_chain_to(s: &StinespringData, slot: usize, pol: &TolerancePolicy) -> Subspace {
    let mut generators = identity(s.dim_h());
    let mut w = Subspace::zero(0);
    for i in 0..=slot {
        let start = s.connector(i).adjoint() * &generators;
        w = invariant_closure(&start, s.rep(i).images(), pol);
        generators = w.basis().clone();
    }
    w
}
