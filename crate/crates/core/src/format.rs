//! JSON instance files, argument files and verification reports.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major nested
//! arrays. Shapes of connector and image matrices are inferred from the
//! declared dimensions, so zero-dimensional spaces serialize as `[]` or as
//! rows of `[]`. Struct fields are emitted in declaration order and floats
//! in shortest round-trip form, so parse-then-serialize is byte-stable.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::algebra::{AlgebraElement, AlgebraPresentation, Representation};
use crate::error::{Error, Result};
use crate::genlab::{generate, GeneratorSpec};
use crate::intertwiner::{GenericPositionReport, IntertwinerResult};
use crate::minimality::MinimalityReport;
use crate::numerics::{ComplexMatrix, TolerancePolicy};
use crate::stinespring::{MapInstance, StinespringData};

pub const FORMAT_VERSION: &str = "1";

pub type ComplexJson = [f64; 2];
pub type MatrixJson = Vec<Vec<ComplexJson>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

/// Parse a row-major matrix that must be `rows × cols`.
pub fn matrix_from_json(
    json: &MatrixJson,
    rows: usize,
    cols: usize,
    what: &str,
) -> Result<ComplexMatrix> {
    // zero rows: `[]` regardless of the column count
    if json.len() != rows {
        return Err(Error::Shape(format!(
            "{what}: expected {rows} rows, found {}",
            json.len()
        )));
    }
    if let Some((i, row)) = json.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(Error::Shape(format!(
            "{what}: row {i} has {} entries, expected {cols}",
            row.len()
        )));
    }
    let m = ComplexMatrix::from_fn(rows, cols, |i, j| {
        Complex64::new(json[i][j][0], json[i][j][1])
    });
    if !crate::numerics::is_finite(&m) {
        return Err(Error::InvalidInput(format!("{what}: non-finite entry")));
    }
    Ok(m)
}

fn square_from_json(json: &MatrixJson, what: &str) -> Result<ComplexMatrix> {
    matrix_from_json(json, json.len(), json.len(), what)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraJson {
    pub label: String,
    pub adjoint_map: Vec<usize>,
    pub generators: Vec<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotJson {
    /// Index into the file's `algebras`.
    pub algebra: usize,
    pub dim: usize,
    /// Images of the algebra's generators.
    pub images: Vec<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationJson {
    pub dim_g: usize,
    pub dim_h: usize,
    pub slots: Vec<SlotJson>,
    /// `X_0, …, X_k`.
    pub connectors: Vec<MatrixJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq_atol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub algebras: Vec<AlgebraJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub representations: Vec<RepresentationJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<ToleranceJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
}

fn algebra_to_json(a: &AlgebraPresentation) -> AlgebraJson {
    AlgebraJson {
        label: a.label().to_string(),
        adjoint_map: a.adjoint_map().to_vec(),
        generators: a.gen_matrices().iter().map(matrix_to_json).collect(),
    }
}

fn data_to_json(s: &StinespringData, algebras: &[Arc<AlgebraPresentation>]) -> RepresentationJson {
    let slots = s
        .reps()
        .iter()
        .map(|rep| SlotJson {
            algebra: algebras
                .iter()
                .position(|a| a.as_ref() == rep.algebra())
                .expect("every slot algebra is declared"),
            dim: rep.dim(),
            images: rep.images().iter().map(matrix_to_json).collect(),
        })
        .collect();
    RepresentationJson {
        dim_g: s.dim_g(),
        dim_h: s.dim_h(),
        slots,
        connectors: s.connectors().iter().map(matrix_to_json).collect(),
    }
}

fn data_from_json(
    r: &RepresentationJson,
    algebras: &[Arc<AlgebraPresentation>],
    name: &str,
) -> Result<StinespringData> {
    let k = r.slots.len();
    if r.connectors.len() != k + 1 {
        return Err(Error::Shape(format!(
            "representation {name}: {} connectors for {k} slots",
            r.connectors.len()
        )));
    }
    let mut reps = Vec::with_capacity(k);
    for (i, slot) in r.slots.iter().enumerate() {
        let alg = algebras.get(slot.algebra).ok_or_else(|| {
            Error::InvalidInput(format!(
                "representation {name}, slot {i}: unknown algebra {}",
                slot.algebra
            ))
        })?;
        let images = slot
            .images
            .iter()
            .enumerate()
            .map(|(g, m)| {
                matrix_from_json(m, slot.dim, slot.dim, &format!("{name} slot {i} image {g}"))
            })
            .collect::<Result<Vec<_>>>()?;
        reps.push(Representation::new(alg.clone(), slot.dim, images)?);
    }
    let mut dims = vec![r.dim_h];
    dims.extend(r.slots.iter().map(|s| s.dim));
    dims.push(r.dim_g);
    let connectors = r
        .connectors
        .iter()
        .enumerate()
        .map(|(i, m)| matrix_from_json(m, dims[i], dims[i + 1], &format!("{name} connector X_{i}")))
        .collect::<Result<Vec<_>>>()?;
    StinespringData::new(r.dim_g, r.dim_h, reps, connectors)
}

impl InstanceFile {
    /// Explicit-data file for an instance.
    pub fn from_instance(inst: &MapInstance, tolerance: Option<ToleranceJson>) -> Self {
        // slots over equal algebras share one declaration
        let mut declared: Vec<Arc<AlgebraPresentation>> = Vec::new();
        for a in &inst.algebras {
            if !declared.iter().any(|d| d == a) {
                declared.push(a.clone());
            }
        }
        let mut representations = vec![data_to_json(&inst.representation_a, &declared)];
        if let Some(b) = &inst.representation_b {
            representations.push(data_to_json(b, &declared));
        }
        InstanceFile {
            version: FORMAT_VERSION.to_string(),
            algebras: declared.iter().map(|a| algebra_to_json(a)).collect(),
            representations,
            tolerance,
            generator: None,
        }
    }

    pub fn from_generator(spec: GeneratorSpec) -> Self {
        InstanceFile {
            version: FORMAT_VERSION.to_string(),
            algebras: Vec::new(),
            representations: Vec::new(),
            tolerance: None,
            generator: Some(spec),
        }
    }

    pub fn parse(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Compact canonical serialization.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("instance files always serialize")
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files always serialize")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_canonical_json().as_bytes()))
    }

    /// File tolerances over the defaults.
    pub fn tolerance_policy(&self) -> Result<TolerancePolicy> {
        let t = self.tolerance.unwrap_or_default();
        TolerancePolicy::new(
            t.rank_rtol.unwrap_or(TolerancePolicy::DEFAULT.rank_rtol),
            t.eq_atol.unwrap_or(TolerancePolicy::DEFAULT.eq_atol),
        )
    }

    /// Build the instance: run the generator, or parse and validate the
    /// explicit data.
    pub fn to_instance(&self, pol: &TolerancePolicy) -> Result<MapInstance> {
        if self.version != FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported instance version `{}` (expected `{FORMAT_VERSION}`)",
                self.version
            )));
        }
        let explicit = !self.representations.is_empty();
        match (&self.generator, explicit) {
            (Some(_), true) => Err(Error::InvalidInput(
                "instance has both explicit representations and a generator spec".into(),
            )),
            (None, false) => Err(Error::InvalidInput(
                "instance has neither explicit representations nor a generator spec".into(),
            )),
            (Some(spec), false) => {
                if !self.algebras.is_empty() {
                    return Err(Error::InvalidInput(
                        "generator instances must not declare algebras".into(),
                    ));
                }
                generate(spec, pol)
            }
            (None, true) => {
                if self.representations.len() > 2 {
                    return Err(Error::InvalidInput(
                        "at most two representations per instance".into(),
                    ));
                }
                let algebras = self
                    .algebras
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let gens = a
                            .generators
                            .iter()
                            .enumerate()
                            .map(|(g, m)| {
                                square_from_json(m, &format!("algebra {i} generator {g}"))
                            })
                            .collect::<Result<Vec<_>>>()?;
                        AlgebraPresentation::new(a.label.clone(), gens, a.adjoint_map.clone(), pol)
                            .map(Arc::new)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let a = data_from_json(&self.representations[0], &algebras, "A")?;
                let b = self
                    .representations
                    .get(1)
                    .map(|r| data_from_json(r, &algebras, "B"))
                    .transpose()?;
                let inst = MapInstance::new(a.algebras(), a, b)?;
                inst.validate(pol)?;
                Ok(inst)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Argument files

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub coeff: ComplexJson,
    pub word: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementJson {
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArgsFile {
    pub args: Vec<ElementJson>,
}

impl ArgsFile {
    pub fn from_elements(args: &[AlgebraElement]) -> Self {
        ArgsFile {
            args: args
                .iter()
                .map(|x| ElementJson {
                    terms: x
                        .terms
                        .iter()
                        .map(|(c, w)| TermJson {
                            coeff: [c.re, c.im],
                            word: w.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_elements(&self) -> Vec<AlgebraElement> {
        self.args
            .iter()
            .map(|e| AlgebraElement {
                terms: e
                    .terms
                    .iter()
                    .map(|t| (Complex64::new(t.coeff[0], t.coeff[1]), t.word.clone()))
                    .collect(),
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `residual <= threshold`.
    pub fn residual(name: impl Into<String>, residual: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            residual,
            threshold,
            pass: residual <= threshold,
        }
    }

    /// A boolean check, recorded as residual 0 or 1 against threshold 0.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            residual: if ok { 0.0 } else { 1.0 },
            threshold: 0.0,
            pass: ok,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub instance_digest: String,
    pub checks: Vec<Check>,
    pub pass: bool,
    /// Seconds; excluded from determinism comparisons.
    pub wall_time: f64,
    /// Command output (matrix, reduced instance, intertwiners) when it is
    /// not written to a separate file; embedded verbatim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact: Option<Box<RawValue>>,
}

impl Report {
    pub fn new(
        command: impl Into<String>,
        instance_digest: impl Into<String>,
        checks: Vec<Check>,
    ) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Report {
            command: command.into(),
            instance_digest: instance_digest.into(),
            checks,
            pass,
            wall_time: 0.0,
            artifact: None,
        }
    }
}

/// Minimality flags as report checks, one per slot and side.
pub fn minimality_checks(prefix: &str, report: &MinimalityReport) -> Vec<Check> {
    let mut out = Vec::new();
    for (s, (&r, &l)) in report
        .minimal_right
        .iter()
        .zip(&report.minimal_left)
        .enumerate()
    {
        out.push(Check::flag(format!("{prefix}minimal_right[{s}]"), r));
        out.push(Check::flag(format!("{prefix}minimal_left[{s}]"), l));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalityJson {
    pub slot_dims: Vec<usize>,
    pub right_dims: Vec<usize>,
    pub left_dims: Vec<usize>,
    pub minimal_right: Vec<bool>,
    pub minimal_left: Vec<bool>,
    pub minimal: bool,
}

impl From<&MinimalityReport> for MinimalityJson {
    fn from(r: &MinimalityReport) -> Self {
        MinimalityJson {
            slot_dims: r.slot_dims.clone(),
            right_dims: r.right_dims.clone(),
            left_dims: r.left_dims.clone(),
            minimal_right: r.minimal_right.clone(),
            minimal_left: r.minimal_left.clone(),
            minimal: r.minimal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotIntertwinerJson {
    pub t: MatrixJson,
    pub w: MatrixJson,
    pub abs_t: MatrixJson,
    pub generic_position: GenericPositionReport,
    pub halmos_res: f64,
    pub containment_res: f64,
    pub intertwine_res: f64,
    pub unitary_equiv_res: f64,
    pub unitarity_res: f64,
    pub modulus_commutant_res: f64,
    pub sigma_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntertwinerJson {
    pub slots: Vec<SlotIntertwinerJson>,
    pub boundary_res_iii: f64,
    pub chain_res_iv: Vec<f64>,
    pub chain_res_iv_global: Vec<f64>,
    pub boundary_res_v_first: f64,
    pub boundary_res_v_first_global: f64,
    pub boundary_res_v_second: f64,
}

impl From<&IntertwinerResult> for IntertwinerJson {
    fn from(r: &IntertwinerResult) -> Self {
        IntertwinerJson {
            slots: r
                .slots
                .iter()
                .map(|s| SlotIntertwinerJson {
                    t: matrix_to_json(&s.t),
                    w: matrix_to_json(&s.w),
                    abs_t: matrix_to_json(&s.abs_t),
                    generic_position: s.generic_position,
                    halmos_res: s.halmos_res,
                    containment_res: s.containment_res,
                    intertwine_res: s.intertwine_res,
                    unitary_equiv_res: s.unitary_equiv_res,
                    unitarity_res: s.unitarity_res,
                    modulus_commutant_res: s.modulus_commutant_res,
                    sigma_min: s.sigma_min,
                })
                .collect(),
            boundary_res_iii: r.boundary_res_iii,
            chain_res_iv: r.chain_res_iv.clone(),
            chain_res_iv_global: r.chain_res_iv_global.clone(),
            boundary_res_v_first: r.boundary_res_v_first,
            boundary_res_v_first_global: r.boundary_res_v_first_global,
            boundary_res_v_second: r.boundary_res_v_second,
        }
    }
}
