//! Canonical intertwiners between two minimal representations of the same
//! map.
//!
//! For every slot the paired right spans give `R_s ⊆ C^{d_s} ⊕ C^{e_s}` and
//! the orthogonal complement of the paired left spans gives `N_s ⊇ R_s`.
//! When `N_s` and the first summand are in generic position, `N_s` is the
//! graph of an invertible `T_s`, which intertwines the two slot
//! representations; its polar part `W_s` is a unitary equivalence.

use serde::{Deserialize, Serialize};

use crate::algebra::direct_sum;
use crate::error::{Error, Result, Side};
use crate::minimality::{invariant_closure, is_minimal, right_chain};
use crate::numerics::{
    block_diag, frobenius, identity, inverse, orthogonal_complement, polar_decompose,
    subspace_intersection, vstack, ComplexMatrix, Subspace, TolerancePolicy,
};
use crate::stinespring::{phi_equal, MapInstance, StinespringData};

fn require_pair(pair: &MapInstance) -> Result<(&StinespringData, &StinespringData)> {
    match &pair.representation_b {
        Some(b) => Ok((&pair.representation_a, b)),
        None => Err(Error::InvalidInput(
            "instance carries a single representation; two are needed".into(),
        )),
    }
}

/// `R_s`: the invariant closure, under `π_s ⊕ ρ_s`, of the right chains of
/// both representations driven in lockstep.
pub fn build_r(pair: &MapInstance, pol: &TolerancePolicy) -> Result<Vec<Subspace>> {
    let (a, b) = require_pair(pair)?;
    let k = a.k();
    let mut out = vec![Subspace::zero(0); k];
    let mut generators = identity(a.dim_g());
    for slot in (0..k).rev() {
        let sigma = direct_sum(a.rep(slot), b.rep(slot));
        let x = a.connector(slot + 1);
        let y = b.connector(slot + 1);
        let start = if slot + 1 == k {
            vstack(&[x, y], a.dim_g())
        } else {
            block_diag(&[x, y]) * &generators
        };
        let r = invariant_closure(&start, sigma.images(), pol);
        generators = r.basis().clone();
        out[slot] = r;
    }
    Ok(out)
}

/// Invariant closure of the paired left vectors `(-X-chain, Y-chain)`.
fn paired_left_spans(
    a: &StinespringData,
    b: &StinespringData,
    pol: &TolerancePolicy,
) -> Vec<Subspace> {
    let mut out = Vec::with_capacity(a.k());
    let mut generators = identity(a.dim_h());
    for slot in 0..a.k() {
        let sigma = direct_sum(a.rep(slot), b.rep(slot));
        let xa = a.connector(slot).adjoint();
        let yb = b.connector(slot).adjoint();
        let start = if slot == 0 {
            vstack(&[&(-xa), &yb], a.dim_h())
        } else {
            block_diag(&[&xa, &yb]) * &generators
        };
        let m = invariant_closure(&start, sigma.images(), pol);
        generators = m.basis().clone();
        out.push(m);
    }
    out
}

/// `N_s`: the orthogonal complement of all `(-π_s(a_s) X_{s}^* ⋯ X_0^* η,
/// ρ_s(a_s) Y_{s}^* ⋯ Y_0^* η)`.
pub fn build_n(pair: &MapInstance, pol: &TolerancePolicy) -> Result<Vec<Subspace>> {
    let (a, b) = require_pair(pair)?;
    Ok(paired_left_spans(a, b, pol)
        .iter()
        .map(|m| orthogonal_complement(m, pol))
        .collect())
}

/// Dimensions of the four meets of `N` with the first summand `K` of
/// `C^{dK} ⊕ C^{dL}` and their complements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenericPositionReport {
    pub n_meet_k: usize,
    pub n_meet_k_perp: usize,
    pub n_perp_meet_k: usize,
    pub n_perp_meet_k_perp: usize,
    pub dim_n: usize,
    pub split: (usize, usize),
    pub pass: bool,
}

impl GenericPositionReport {
    pub fn meet_dims(&self) -> [usize; 4] {
        [
            self.n_meet_k,
            self.n_meet_k_perp,
            self.n_perp_meet_k,
            self.n_perp_meet_k_perp,
        ]
    }
}

pub fn generic_position_check(
    n: &Subspace,
    split: (usize, usize),
    pol: &TolerancePolicy,
) -> GenericPositionReport {
    let (dk, dl) = split;
    assert_eq!(
        n.ambient_dim(),
        dk + dl,
        "split does not match the ambient dimension"
    );
    let k = Subspace::coordinate(dk + dl, 0, dk);
    let k_perp = Subspace::coordinate(dk + dl, dk, dl);
    let n_perp = orthogonal_complement(n, pol);
    let meets = [
        subspace_intersection(n, &k, pol).dim(),
        subspace_intersection(n, &k_perp, pol).dim(),
        subspace_intersection(&n_perp, &k, pol).dim(),
        subspace_intersection(&n_perp, &k_perp, pol).dim(),
    ];
    // four trivial meets force dim N = dK = dL; checked rather than assumed
    let pass = meets.iter().all(|&d| d == 0) && n.dim() == dk && dk == dl;
    GenericPositionReport {
        n_meet_k: meets[0],
        n_meet_k_perp: meets[1],
        n_perp_meet_k: meets[2],
        n_perp_meet_k_perp: meets[3],
        dim_n: n.dim(),
        split,
        pass,
    }
}

/// `T` with `N = {(ξ, Tξ)}`, together with the residual of the identity
/// `P_N|_K = (I + T*T)^{-1}` for the compression of the projection onto `N`.
#[derive(Debug, Clone)]
pub struct GraphOperator {
    pub t: ComplexMatrix,
    pub halmos_residual: f64,
}

pub fn graph_operator(
    n: &Subspace,
    split: (usize, usize),
    pol: &TolerancePolicy,
) -> Result<GraphOperator> {
    let report = generic_position_check(n, split, pol);
    if !report.pass {
        return Err(Error::GenericPositionViolated { slot: 0, report });
    }
    let (dk, dl) = split;
    let b = n.basis();
    let b_k = b.rows(0, dk).into_owned();
    let b_l = b.rows(dk, dl).into_owned();
    let b_k_inv =
        inverse(&b_k, pol).map_err(|_| Error::GenericPositionViolated { slot: 0, report })?;
    let t = b_l * &b_k_inv;

    let compression = &b_k * b_k.adjoint();
    let gram = identity(dk) + t.adjoint() * &t;
    let expected = inverse(&gram, pol)?;
    let halmos_residual = frobenius(&(compression - expected));
    if halmos_residual > pol.eq_atol {
        return Err(Error::HalmosIdentityViolated {
            residual: halmos_residual,
            threshold: pol.eq_atol,
        });
    }
    Ok(GraphOperator { t, halmos_residual })
}

/// Orthonormal basis of the graph `{(ξ, Tξ)}` of a `dL × dK` matrix.
pub fn graph_subspace(t: &ComplexMatrix, pol: &TolerancePolicy) -> Subspace {
    let dk = t.ncols();
    crate::numerics::orthonormal_basis(&vstack(&[&identity(dk), t], dk), pol)
}

/// Per-slot output of [`construct_intertwiners`].
#[derive(Debug, Clone)]
pub struct SlotIntertwiner {
    pub t: ComplexMatrix,
    pub w: ComplexMatrix,
    pub abs_t: ComplexMatrix,
    pub generic_position: GenericPositionReport,
    pub halmos_res: f64,
    /// `R_s ⊆ N_s`.
    pub containment_res: f64,
    /// `max_g ‖T π(g) − ρ(g) T‖_F`.
    pub intertwine_res: f64,
    /// `max_g ‖W π(g) W* − ρ(g)‖_F`.
    pub unitary_equiv_res: f64,
    /// `max(‖W*W − I‖_F, ‖WW* − I‖_F)`.
    pub unitarity_res: f64,
    /// `max_g ‖|T| π(g) − π(g) |T|‖_F`.
    pub modulus_commutant_res: f64,
    pub sigma_min: f64,
}

#[derive(Debug, Clone)]
pub struct IntertwinerResult {
    pub slots: Vec<SlotIntertwiner>,
    /// `‖T_k X_k − Y_k‖_F`.
    pub boundary_res_iii: f64,
    /// `‖(T_s X_s − Y_s T_{s+1}) P_{E_{s+1}}‖_F` for inner connectors.
    pub chain_res_iv: Vec<f64>,
    /// Same without the compression; diagnostic only.
    pub chain_res_iv_global: Vec<f64>,
    /// `‖(X_0 − Y_0 T_1) P_{E_1}‖_F`.
    pub boundary_res_v_first: f64,
    /// Same without the compression; diagnostic only.
    pub boundary_res_v_first_global: f64,
    /// `‖T_1^* Y_0^* − X_0^*‖_F`.
    pub boundary_res_v_second: f64,
}

impl IntertwinerResult {
    pub fn t(&self) -> Vec<&ComplexMatrix> {
        self.slots.iter().map(|s| &s.t).collect()
    }

    /// Named residual families that gate acceptance.
    pub fn residual_families(&self) -> Vec<(String, f64)> {
        let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
        vec![
            (
                "intertwine".into(),
                max(&mut self.slots.iter().map(|s| s.intertwine_res)),
            ),
            (
                "unitary_equivalence".into(),
                max(&mut self.slots.iter().map(|s| s.unitary_equiv_res)),
            ),
            (
                "modulus_commutant".into(),
                max(&mut self.slots.iter().map(|s| s.modulus_commutant_res)),
            ),
            ("boundary_right".into(), self.boundary_res_iii),
            ("chain".into(), max(&mut self.chain_res_iv.iter().copied())),
            ("boundary_left".into(), self.boundary_res_v_first),
            ("boundary_left_adjoint".into(), self.boundary_res_v_second),
        ]
    }

    pub fn max_residual(&self) -> f64 {
        self.residual_families()
            .iter()
            .map(|(_, r)| *r)
            .fold(0.0, f64::max)
    }

    pub fn max_unitarity_res(&self) -> f64 {
        self.slots
            .iter()
            .map(|s| s.unitarity_res)
            .fold(0.0, f64::max)
    }
}

fn max_over<'a>(
    pairs: impl Iterator<Item = (&'a ComplexMatrix, &'a ComplexMatrix)>,
    f: impl Fn(&ComplexMatrix, &ComplexMatrix) -> ComplexMatrix,
) -> f64 {
    pairs.map(|(p, r)| frobenius(&f(p, r))).fold(0.0, f64::max)
}

/// Build `T_s`, `W_s`, `|T_s|` for every slot and measure every identity
/// they are expected to satisfy.
///
/// Both representations must be minimal and must define the same map; each
/// slot must pass the generic position check independently.
pub fn construct_intertwiners(
    pair: &MapInstance,
    pol: &TolerancePolicy,
) -> Result<IntertwinerResult> {
    let (a, b) = require_pair(pair)?;
    for (side, s) in [(Side::A, a), (Side::B, b)] {
        let report = is_minimal(s, pol);
        if !report.minimal {
            return Err(Error::NotMinimal {
                side,
                report: Box::new(report),
            });
        }
    }
    let cmp = phi_equal(a, b, pol)?;
    if !cmp.equal {
        return Err(Error::MapsDiffer {
            residual: cmp.max_residual,
            threshold: pol.eq_atol,
        });
    }

    let k = a.k();
    let r_spaces = build_r(pair, pol)?;
    let n_spaces = build_n(pair, pol)?;
    let right_a = right_chain(a, pol);

    let mut slots = Vec::with_capacity(k);
    for slot in 0..k {
        let (dk, dl) = (a.rep(slot).dim(), b.rep(slot).dim());
        let n = &n_spaces[slot];
        let report = generic_position_check(n, (dk, dl), pol);
        if !report.pass {
            return Err(Error::GenericPositionViolated { slot, report });
        }
        let graph = graph_operator(n, (dk, dl), pol).map_err(|e| match e {
            Error::GenericPositionViolated { report, .. } => {
                Error::GenericPositionViolated { slot, report }
            }
            other => other,
        })?;
        let t = graph.t;
        let polar = polar_decompose(&t, pol)?;
        let (w, abs_t) = (polar.unitary, polar.modulus);

        let pi = a.rep(slot).images();
        let rho = b.rep(slot).images();
        let intertwine_res = max_over(pi.iter().zip(rho), |p, r| &t * p - r * &t);
        let unitary_equiv_res = max_over(pi.iter().zip(rho), |p, r| &w * p * w.adjoint() - r);
        let modulus_commutant_res = max_over(pi.iter().zip(pi), |p, _| &abs_t * p - p * &abs_t);
        let unitarity_res = frobenius(&(w.adjoint() * &w - identity(dk)))
            .max(frobenius(&(&w * w.adjoint() - identity(dl))));
        let sigma_min = crate::numerics::singular_values(&t)
            .last()
            .copied()
            .unwrap_or(0.0);

        slots.push(SlotIntertwiner {
            t,
            w,
            abs_t,
            generic_position: report,
            halmos_res: graph.halmos_residual,
            containment_res: r_spaces[slot].containment_residual(n),
            intertwine_res,
            unitary_equiv_res,
            unitarity_res,
            modulus_commutant_res,
            sigma_min,
        });
    }

    let t = |s: usize| &slots[s].t;
    let boundary_res_iii = frobenius(&(t(k - 1) * a.connector(k) - b.connector(k)));

    let mut chain_res_iv = Vec::with_capacity(k.saturating_sub(1));
    let mut chain_res_iv_global = Vec::with_capacity(k.saturating_sub(1));
    for s in 0..k.saturating_sub(1) {
        let diff = t(s) * a.connector(s + 1) - b.connector(s + 1) * t(s + 1);
        chain_res_iv.push(frobenius(&(&diff * right_a[s + 1].projector())));
        chain_res_iv_global.push(frobenius(&diff));
    }

    let diff_v = a.connector(0) - b.connector(0) * t(0);
    let boundary_res_v_first = frobenius(&(&diff_v * right_a[0].projector()));
    let boundary_res_v_first_global = frobenius(&diff_v);
    let boundary_res_v_second =
        frobenius(&(t(0).adjoint() * b.connector(0).adjoint() - a.connector(0).adjoint()));

    Ok(IntertwinerResult {
        slots,
        boundary_res_iii,
        chain_res_iv,
        chain_res_iv_global,
        boundary_res_v_first,
        boundary_res_v_first_global,
        boundary_res_v_second,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{sigma_x, AlgebraPresentation, Representation};
    use crate::numerics::{orthonormal_basis, re, real_matrix};
    use std::sync::Arc;

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

    fn scaled_pair() -> MapInstance {
        let a = identity_dilation();
        let b = a
            .with_connector(0, identity(2) * re(0.5))
            .unwrap()
            .with_connector(1, identity(2) * re(2.0))
            .unwrap();
        MapInstance::pair(a, b).unwrap()
    }

    fn diagonal_of_c2_c2() -> Subspace {
        graph_subspace(&identity(2), &pol())
    }

    #[test]
    fn r_and_n_for_identical_representations_are_the_diagonal() {
        let pair = MapInstance::pair(identity_dilation(), identity_dilation()).unwrap();
        let r = &build_r(&pair, &pol()).unwrap()[0];
        let n = &build_n(&pair, &pol()).unwrap()[0];
        let diag = diagonal_of_c2_c2();
        assert_eq!(r.dim(), 2);
        assert_eq!(n.dim(), 2);
        assert!(r.containment_residual(&diag) < 1e-12);
        assert!(n.containment_residual(&diag) < 1e-12);
    }

    #[test]
    fn r_and_n_for_scaled_pair_are_the_graph_of_two() {
        let pair = scaled_pair();
        let graph = graph_subspace(&(identity(2) * re(2.0)), &pol());
        let r = &build_r(&pair, &pol()).unwrap()[0];
        let n = &build_n(&pair, &pol()).unwrap()[0];
        assert_eq!(r.dim(), 2);
        assert!(r.containment_residual(&graph) < 1e-12);
        assert_eq!(n.dim(), 2);
        assert!(n.containment_residual(&graph) < 1e-12);
    }

    #[test]
    fn r_has_no_second_component_when_y_k_is_zero() {
        let a = identity_dilation();
        let b = a.with_connector(1, crate::numerics::zeros(2, 2)).unwrap();
        let pair = MapInstance::pair(a.clone(), b).unwrap();
        let r = &build_r(&pair, &pol()).unwrap()[0];
        assert!(r.containment_residual(&Subspace::coordinate(4, 0, 2)) < 1e-14);
        // both sides zero: R vanishes
        let z = a.with_connector(1, crate::numerics::zeros(2, 2)).unwrap();
        let pair = MapInstance::pair(z.clone(), z).unwrap();
        assert!(build_r(&pair, &pol()).unwrap()[0].is_zero());
    }

    #[test]
    fn generic_position_examples() {
        let line = orthonormal_basis(&real_matrix(2, 1, &[1.0, 2.0]), &pol());
        assert!(generic_position_check(&line, (1, 1), &pol()).pass);

        let k = Subspace::coordinate(4, 0, 2);
        let rep = generic_position_check(&k, (2, 2), &pol());
        assert!(!rep.pass);
        assert_eq!(rep.n_meet_k, 2);

        let graph = graph_subspace(&sigma_x(), &pol());
        assert!(generic_position_check(&graph, (2, 2), &pol()).pass);
    }

    #[test]
    fn graph_operator_examples() {
        let line = orthonormal_basis(&real_matrix(2, 1, &[1.0, 2.0]), &pol());
        let g = graph_operator(&line, (1, 1), &pol()).unwrap();
        assert!((g.t[(0, 0)] - re(2.0)).norm() < 1e-14);

        let g = graph_operator(&diagonal_of_c2_c2(), (2, 2), &pol()).unwrap();
        assert!(frobenius(&(g.t - identity(2))) < 1e-14);

        let k = Subspace::coordinate(4, 0, 2);
        assert!(matches!(
            graph_operator(&k, (2, 2), &pol()),
            Err(Error::GenericPositionViolated { .. })
        ));
    }

    #[test]
    fn identical_pair_gives_identity_intertwiner() {
        let pair = MapInstance::pair(identity_dilation(), identity_dilation()).unwrap();
        let res = construct_intertwiners(&pair, &pol()).unwrap();
        assert!(frobenius(&(&res.slots[0].t - identity(2))) < 1e-10);
        assert!(res.max_residual() <= 1e-10);
    }

    #[test]
    fn scaled_pair_gives_twice_identity() {
        let res = construct_intertwiners(&scaled_pair(), &pol()).unwrap();
        let s = &res.slots[0];
        assert!(frobenius(&(&s.t - identity(2) * re(2.0))) < 1e-12);
        assert!(frobenius(&(&s.w - identity(2))) < 1e-12);
        assert!(frobenius(&(&s.abs_t - identity(2) * re(2.0))) < 1e-12);
        assert!(res.max_residual() <= 1e-10);
    }

    #[test]
    fn single_instance_is_rejected() {
        let inst = MapInstance::single(identity_dilation());
        assert!(matches!(
            construct_intertwiners(&inst, &pol()),
            Err(Error::InvalidInput(_))
        ));
    }
}
