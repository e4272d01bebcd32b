//! JSON wire formats.
//!
//! Every file the CLI reads or writes goes through the DTOs here. The shapes
//! are deliberately rigid: unknown fields are rejected, complex scalars are
//! always two-element `[re, im]` arrays, and table layouts follow the
//! canonical copy order of the complex they belong to, so a file is valid
//! exactly when the in-memory validators accept the decoded value.
//!
//! - complex:        `{"n": …, "weights": [{"set": [...], "w": …}, …]}`
//! - group:          `{"order": …, "mul": [[…], …]}`
//! - action:         `{"group": …, "vertex_act": [[…], …], "copy_act": [[…], …]}`
//! - tensor:         `{"dims": […], "entries": [[re, im], …]}` row-major
//! - decomposition:  `{"complex": …, "action": …, "r": …, "dims": […], "locals": […]}`
//!   with `locals[site][assignment]` a length-`dims[site]` list of `[re, im]`
//!   pairs and assignments enumerated in mixed-radix order over the canonical
//!   copy order; matrix-valued variants replace `dims` by `shapes` and carry
//!   `purification` / `assignment_blocks` flags
//! - psd family:     `{"complex": …, "action": …, "r": …, "dims": […], "grids": […]}`
//!   with `grids[site][j]` a row-major t×t Hermitian grid of `[re, im]` pairs
//! - suite report:   `{"seed": …, "passed": …, "failed": …, "criteria": […]}`
//!
//! Weights with `w = 0` are never written and never accepted; an action file
//! does not embed its complex and is interpreted against the complex file it
//! is paired with.

use crate::complex::{SimplexSet, Wsc};
use crate::decomp::Decomposition;
use crate::group::{Action, Group};
use crate::positivity::{MatrixDecomposition, PsdFamily};
use crate::suite::{CheckResult, SuiteReport};
use crate::tensor::GlobalTensor;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Decodes any of the DTOs in this module from a JSON string.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(parse_err)
}

/// Encodes any of the DTOs in this module as pretty-printed JSON.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("DTOs always serialize")
}

fn scalar(pair: [f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn table_to_pairs(table: &[Vec<Complex64>]) -> Vec<Vec<[f64; 2]>> {
    table.iter().map(|block| block.iter().copied().map(pair).collect()).collect()
}

fn table_from_pairs(table: &[Vec<[f64; 2]>]) -> Vec<Vec<Complex64>> {
    table.iter().map(|block| block.iter().copied().map(scalar).collect()).collect()
}

/// One stored simplex weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightDto {
    pub set: Vec<usize>,
    pub w: u64,
}

/// A weighted simplicial complex on vertex set {0, …, n}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WscDto {
    pub n: usize,
    pub weights: Vec<WeightDto>,
}

impl WscDto {
    pub fn from_wsc(w: &Wsc) -> WscDto {
        WscDto {
            n: w.n(),
            weights: w
                .stored_weights()
                .filter(|&(_, wt)| wt != 0)
                .map(|(s, wt)| WeightDto { set: s.vertices().to_vec(), w: wt })
                .collect(),
        }
    }

    pub fn to_wsc(&self) -> Result<Wsc> {
        let mut pairs = Vec::with_capacity(self.weights.len());
        for entry in &self.weights {
            if entry.w == 0 {
                return Err(Error::InvalidComplex(format!(
                    "weight 0 for {:?} may not be listed",
                    entry.set
                )));
            }
            pairs.push((SimplexSet::new(entry.set.iter().copied())?, entry.w));
        }
        Wsc::new(self.n, pairs)
    }
}

/// A finite group as a full multiplication table; element 0 is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDto {
    pub order: usize,
    pub mul: Vec<Vec<usize>>,
}

impl GroupDto {
    pub fn from_group(g: &Group) -> GroupDto {
        GroupDto { order: g.order(), mul: g.mul_table().to_vec() }
    }

    pub fn to_group(&self) -> Result<Group> {
        if self.order != self.mul.len() {
            return Err(Error::InvalidGroup(format!(
                "declared order {} does not match table size {}",
                self.order,
                self.mul.len()
            )));
        }
        Group::new(self.mul.clone())
    }
}

/// A group action on a complex; copy permutations reference the canonical
/// copy order of the complex file this action is paired with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionDto {
    pub group: GroupDto,
    pub vertex_act: Vec<Vec<usize>>,
    pub copy_act: Vec<Vec<usize>>,
}

impl ActionDto {
    pub fn from_action(a: &Action) -> ActionDto {
        ActionDto {
            group: GroupDto::from_group(&a.group),
            vertex_act: a.vertex_act.clone(),
            copy_act: a.copy_act.clone(),
        }
    }

    /// Interprets the action against a concrete complex, fully validating.
    pub fn to_action(&self, complex: Wsc) -> Result<Action> {
        Action::new(complex, self.group.to_group()?, self.vertex_act.clone(), self.copy_act.clone())
    }
}

/// A dense tensor with row-major `[re, im]` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorDto {
    pub dims: Vec<usize>,
    pub entries: Vec<[f64; 2]>,
}

impl TensorDto {
    pub fn from_tensor(t: &GlobalTensor) -> TensorDto {
        TensorDto { dims: t.dims.clone(), entries: t.entries.iter().copied().map(pair).collect() }
    }

    pub fn to_tensor(&self) -> Result<GlobalTensor> {
        GlobalTensor::new(self.dims.clone(), self.entries.iter().copied().map(scalar).collect())
    }
}

/// A decomposition with vector-valued locals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionDto {
    pub complex: WscDto,
    pub action: ActionDto,
    pub r: usize,
    pub dims: Vec<usize>,
    /// `locals[site][assignment]` in mixed-radix order over the canonical
    /// copy order; each entry is a length-`dims[site]` vector.
    pub locals: Vec<Vec<Vec<[f64; 2]>>>,
}

impl DecompositionDto {
    pub fn from_decomposition(d: &Decomposition) -> DecompositionDto {
        DecompositionDto {
            complex: WscDto::from_wsc(&d.action.complex),
            action: ActionDto::from_action(&d.action),
            r: d.r,
            dims: d.dims.clone(),
            locals: d.locals.iter().map(|t| table_to_pairs(t)).collect(),
        }
    }

    pub fn to_decomposition(&self) -> Result<Decomposition> {
        let action = self.action.to_action(self.complex.to_wsc()?)?;
        Decomposition::new(
            action,
            self.r,
            self.dims.clone(),
            self.locals.iter().map(|t| table_from_pairs(t)).collect(),
        )
    }
}

/// A decomposition with matrix-valued locals: separable forms, purifications,
/// and operator decompositions share this shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDecompositionDto {
    pub complex: WscDto,
    pub action: ActionDto,
    pub r: usize,
    /// Per-site `[rows, cols]`.
    pub shapes: Vec<[usize; 2]>,
    /// `locals[site][assignment]` is a row-major rows×cols matrix.
    pub locals: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    pub purification: bool,
    #[serde(default)]
    pub assignment_blocks: bool,
}

impl MatrixDecompositionDto {
    pub fn from_matrix_decomposition(d: &MatrixDecomposition) -> MatrixDecompositionDto {
        MatrixDecompositionDto {
            complex: WscDto::from_wsc(&d.action.complex),
            action: ActionDto::from_action(&d.action),
            r: d.r,
            shapes: d.shapes.iter().map(|&(rows, cols)| [rows, cols]).collect(),
            locals: d.locals.iter().map(|t| table_to_pairs(t)).collect(),
            purification: d.purification,
            assignment_blocks: d.assignment_blocks,
        }
    }

    pub fn to_matrix_decomposition(&self) -> Result<MatrixDecomposition> {
        let action = self.action.to_action(self.complex.to_wsc()?)?;
        MatrixDecomposition::new(
            action,
            self.r,
            self.shapes.iter().map(|&[rows, cols]| (rows, cols)).collect(),
            self.locals.iter().map(|t| table_from_pairs(t)).collect(),
            self.purification,
            self.assignment_blocks,
        )
    }
}

/// A family of per-site, per-physical-index Hermitian grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsdFamilyDto {
    pub complex: WscDto,
    pub action: ActionDto,
    pub r: usize,
    pub dims: Vec<usize>,
    /// `grids[site][j]` is a row-major t×t grid over the site's assignments.
    pub grids: Vec<Vec<Vec<[f64; 2]>>>,
}

impl PsdFamilyDto {
    pub fn from_psd_family(f: &PsdFamily) -> PsdFamilyDto {
        PsdFamilyDto {
            complex: WscDto::from_wsc(&f.action.complex),
            action: ActionDto::from_action(&f.action),
            r: f.r,
            dims: f.dims.clone(),
            grids: f.grids.iter().map(|t| table_to_pairs(t)).collect(),
        }
    }

    pub fn to_psd_family(&self) -> Result<PsdFamily> {
        let action = self.action.to_action(self.complex.to_wsc()?)?;
        PsdFamily::new(
            action,
            self.r,
            self.dims.clone(),
            self.grids.iter().map(|t| table_from_pairs(t)).collect(),
        )
    }
}

/// One acceptance-check outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionDto {
    pub id: String,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// The acceptance-suite report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDto {
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub criteria: Vec<CriterionDto>,
}

impl ReportDto {
    pub fn from_report(report: &SuiteReport) -> ReportDto {
        ReportDto {
            seed: report.seed,
            passed: report.checks.iter().filter(|c| c.pass).count(),
            failed: report.checks.iter().filter(|c| !c.pass).count(),
            criteria: report
                .checks
                .iter()
                .map(|c: &CheckResult| CriterionDto {
                    id: c.id.clone(),
                    name: c.name.clone(),
                    pass: c.pass,
                    detail: c.detail.clone(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::random_condition_b_decomposition;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn circle_action() -> Action {
        Action::rotation_circle(3).unwrap()
    }

    #[test]
    fn complex_round_trip_is_exact() {
        let w = Wsc::cayley(&Group::cyclic(5).unwrap().mul_table().to_vec(), &[1, 2]).unwrap();
        let dto = WscDto::from_wsc(&w);
        let text = to_json(&dto);
        let back: WscDto = from_json(&text).unwrap();
        assert_eq!(back, dto);
        assert_eq!(back.to_wsc().unwrap(), w);
    }

    #[test]
    fn zero_weights_are_rejected_and_never_written() {
        let text = r#"{"n": 1, "weights": [{"set": [0, 1], "w": 0}]}"#;
        let dto: WscDto = from_json(text).unwrap();
        assert!(dto.to_wsc().is_err());
        for entry in WscDto::from_wsc(&Wsc::line(4).unwrap()).weights {
            assert!(entry.w > 0);
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"n": 1, "weights": [], "extra": 3}"#;
        assert!(from_json::<WscDto>(text).is_err());
        let text = r#"{"dims": [2], "entries": [[1.0, 0.0], [0.0, 0.0]], "note": "x"}"#;
        assert!(from_json::<TensorDto>(text).is_err());
    }

    #[test]
    fn group_order_must_match_table() {
        let dto = GroupDto { order: 3, mul: vec![vec![0]] };
        assert!(dto.to_group().is_err());
        let dto = GroupDto::from_group(&Group::cyclic(4).unwrap());
        assert_eq!(dto.order, 4);
        assert!(dto.to_group().is_ok());
    }

    #[test]
    fn action_round_trip_revalidates() {
        let a = circle_action();
        let dto = ActionDto::from_action(&a);
        let text = to_json(&dto);
        let back: ActionDto = from_json(&text).unwrap();
        assert_eq!(back.to_action(a.complex.clone()).unwrap(), a);
        // The same action file against a mismatched complex is rejected.
        assert!(back.to_action(Wsc::line(3).unwrap()).is_err());
    }

    #[test]
    fn tensor_entries_round_trip_bit_exactly() {
        let t = GlobalTensor::new(
            vec![2, 2],
            vec![
                Complex64::new(0.1, -0.25),
                Complex64::new(f64::MIN_POSITIVE, 3.0),
                Complex64::new(-1.5e300, 1.0 / 3.0),
                Complex64::new(0.0, -0.0),
            ],
        )
        .unwrap();
        let text = to_json(&TensorDto::from_tensor(&t));
        let back = from_json::<TensorDto>(&text).unwrap().to_tensor().unwrap();
        for (a, b) in back.entries.iter().zip(&t.entries) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn decomposition_round_trip_preserves_value() {
        let a = circle_action();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = random_condition_b_decomposition(&a, 2, &[2, 2, 2], &mut rng).unwrap();
        let dto = DecompositionDto::from_decomposition(&d);
        let back = from_json::<DecompositionDto>(&to_json(&dto)).unwrap();
        assert_eq!(back.to_decomposition().unwrap(), d);
    }

    #[test]
    fn matrix_decomposition_flags_default_to_false() {
        let a = Action::trivial(Wsc::line(1).unwrap()).unwrap();
        let locals = vec![
            vec![vec![Complex64::new(1.0, 0.0)]; 2],
            vec![vec![Complex64::new(2.0, 0.0)]; 2],
        ];
        let m = MatrixDecomposition::new(a, 2, vec![(1, 1), (1, 1)], locals, false, false).unwrap();
        let dto = MatrixDecompositionDto::from_matrix_decomposition(&m);
        let mut text = to_json(&dto);
        // Strip the flag lines to simulate an older writer; defaults apply.
        text = text
            .lines()
            .filter(|l| !l.contains("purification") && !l.contains("assignment_blocks"))
            .collect::<Vec<_>>()
            .join("\n")
            .replace("],\n}", "]\n}");
        let back: MatrixDecompositionDto = from_json(&text).unwrap();
        assert_eq!(back.to_matrix_decomposition().unwrap(), m);
    }

    #[test]
    fn psd_family_round_trip() {
        let a = Action::trivial(Wsc::line(1).unwrap()).unwrap();
        let eye = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        let f = PsdFamily::new(a, 2, vec![1, 1], vec![vec![eye.clone()], vec![eye]]).unwrap();
        let dto = PsdFamilyDto::from_psd_family(&f);
        let back = from_json::<PsdFamilyDto>(&to_json(&dto)).unwrap();
        assert_eq!(back.to_psd_family().unwrap(), f);
    }
}
