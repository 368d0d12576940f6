//! Scenario data: root covectors, focal offsets and multiplicities.
//!
//! Focal constants `c_i^±` are stored as offsets `d_i^± = arctanh c_i^±`.
//! The chamber is `{w : ⟨root_i, w⟩ < d_i⁺ for every wall}` and always
//! contains the origin.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Residual below which the wall equations are considered concurrent.
pub const CONCURRENCY_TOL: f64 = 1e-10;

/// One curvature-distribution direction of the scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialDatum {
    /// Position in the scenario's radial list.
    #[serde(skip)]
    pub id: usize,
    /// Coordinates of the dual vector of the root covector.
    pub root: Vec<f64>,
    #[serde(default)]
    pub m_plus: u32,
    #[serde(default)]
    pub m_minus: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_minus: Option<f64>,
}

impl RadialDatum {
    pub fn new(root: Vec<f64>, m_plus: u32, m_minus: u32, d_plus: Option<f64>, d_minus: Option<f64>) -> Self {
        RadialDatum {
            id: 0,
            root,
            m_plus,
            m_minus,
            d_plus,
            d_minus,
        }
    }

    /// A radial with `m_plus > 0` bounds the chamber.
    pub fn is_wall(&self) -> bool {
        self.m_plus > 0
    }

    pub fn has_minus(&self) -> bool {
        self.m_minus > 0
    }

    /// `β_i(w)`.
    pub fn eval(&self, w: &[f64]) -> f64 {
        linalg::dot(&self.root, w)
    }

    pub fn root_norm_sq(&self) -> f64 {
        linalg::dot(&self.root, &self.root)
    }

    /// `c_i⁺ = tanh d_i⁺`, for display.
    pub fn c_plus(&self) -> Option<f64> {
        self.d_plus.map(f64::tanh)
    }

    /// `c_i⁻ = tanh d_i⁻`, for display.
    pub fn c_minus(&self) -> Option<f64> {
        self.d_minus.map(f64::tanh)
    }

    fn d_plus_value(&self) -> f64 {
        self.d_plus.unwrap_or(f64::NAN)
    }

    fn d_minus_value(&self) -> f64 {
        self.d_minus.unwrap_or(f64::NAN)
    }
}

/// On-disk scenario document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub name: String,
    pub rank: usize,
    #[serde(default)]
    pub theorem_a: bool,
    pub radials: Vec<RadialDatum>,
}

/// Validated, immutable scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ChamberModel {
    name: String,
    rank: usize,
    radials: Vec<RadialDatum>,
    theorem_a: bool,
    concurrent_point: Option<Vec<f64>>,
    // d⁻ − β(O) per radial, used when gaps are measured from O.
    minus_offsets_at_o: Vec<f64>,
}

/// Gap values `u_i^± = d_i^± − β_i(w)` indexed by radial id. Entries for a
/// branch the radial does not carry are NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct Gaps {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl ChamberModel {
    /// Builds and validates a model. Fails with every violated invariant.
    pub fn new(name: impl Into<String>, rank: usize, radials: Vec<RadialDatum>, theorem_a: bool) -> Result<Self> {
        let model = Self::new_unchecked(name, rank, radials, theorem_a);
        let findings = validate(&model);
        if findings.is_empty() {
            Ok(model)
        } else {
            Err(Error::Validation(findings.iter().map(ToString::to_string).collect()))
        }
    }

    /// Builds a model without validation; `validate` reports what is wrong
    /// with it. The concurrent point is computed only for well-formed walls.
    pub fn new_unchecked(name: impl Into<String>, rank: usize, mut radials: Vec<RadialDatum>, theorem_a: bool) -> Self {
        for (i, r) in radials.iter_mut().enumerate() {
            r.id = i;
        }
        let concurrent_point = compute_concurrent_point(rank, &radials);
        let minus_offsets_at_o = match &concurrent_point {
            Some(o) => radials
                .iter()
                .map(|r| if r.has_minus() { r.d_minus_value() - r.eval(o) } else { 0.0 })
                .collect(),
            None => vec![0.0; radials.len()],
        };
        ChamberModel {
            name: name.into(),
            rank,
            radials,
            theorem_a,
            concurrent_point,
            minus_offsets_at_o,
        }
    }

    pub fn from_document(doc: ScenarioDocument) -> Result<Self> {
        Self::new(doc.name, doc.rank, doc.radials, doc.theorem_a)
    }

    pub fn to_document(&self) -> ScenarioDocument {
        ScenarioDocument {
            name: self.name.clone(),
            rank: self.rank,
            theorem_a: self.theorem_a,
            radials: self.radials.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("scenario documents always serialize")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn radials(&self) -> &[RadialDatum] {
        &self.radials
    }

    pub fn radial(&self, id: usize) -> &RadialDatum {
        &self.radials[id]
    }

    pub fn theorem_a(&self) -> bool {
        self.theorem_a
    }

    /// The common point of all walls, when they meet in one point.
    pub fn concurrent_point(&self) -> Option<&[f64]> {
        self.concurrent_point.as_deref()
    }

    /// Radials with `m_plus > 0`, in order.
    pub fn walls(&self) -> impl Iterator<Item = &RadialDatum> {
        self.radials.iter().filter(|r| r.is_wall())
    }

    /// Radials with `m_minus > 0`, in order.
    pub fn minus_radials(&self) -> impl Iterator<Item = &RadialDatum> {
        self.radials.iter().filter(|r| r.has_minus())
    }

    pub fn wall_ids(&self) -> Vec<usize> {
        self.walls().map(|r| r.id).collect()
    }

    pub fn has_minus_radials(&self) -> bool {
        self.radials.iter().any(RadialDatum::has_minus)
    }

    /// Largest root norm among walls.
    pub fn max_root_norm(&self) -> f64 {
        self.radials.iter().map(|r| r.root_norm_sq().sqrt()).fold(0.0, f64::max)
    }

    pub(crate) fn check_dim(&self, w: &[f64]) -> Result<()> {
        if w.len() == self.rank {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.rank,
                got: w.len(),
            })
        }
    }

    /// Wall and tanh-branch gaps at `w`.
    ///
    /// When the walls are concurrent, gaps are measured from `O` so that
    /// points near `O` keep full relative precision and walls through `O`
    /// are exactly concurrent.
    pub fn gaps(&self, w: &[f64]) -> Gaps {
        let n = self.radials.len();
        let mut plus = vec![f64::NAN; n];
        let mut minus = vec![f64::NAN; n];
        match &self.concurrent_point {
            Some(o) => {
                let x = linalg::sub(w, o);
                for r in &self.radials {
                    let bx = r.eval(&x);
                    if r.is_wall() {
                        plus[r.id] = -bx;
                    }
                    if r.has_minus() {
                        minus[r.id] = self.minus_offsets_at_o[r.id] - bx;
                    }
                }
            }
            None => {
                for r in &self.radials {
                    let bw = r.eval(w);
                    if r.is_wall() {
                        plus[r.id] = r.d_plus_value() - bw;
                    }
                    if r.has_minus() {
                        minus[r.id] = r.d_minus_value() - bw;
                    }
                }
            }
        }
        Gaps { plus, minus }
    }

    /// Model re-expressed with `p` as the new origin. `p` must be interior.
    pub fn translated(&self, p: &[f64]) -> Result<Self> {
        self.check_dim(p)?;
        let gaps = self.gaps(p);
        if self.walls().any(|r| gaps.plus[r.id] <= 0.0) {
            return Err(Error::NotInterior);
        }
        let radials = self
            .radials
            .iter()
            .map(|r| RadialDatum {
                d_plus: r.is_wall().then(|| gaps.plus[r.id]),
                d_minus: r.has_minus().then(|| gaps.minus[r.id]),
                ..r.clone()
            })
            .collect();
        Self::new(self.name.clone(), self.rank, radials, self.theorem_a)
    }
}

fn compute_concurrent_point(rank: usize, radials: &[RadialDatum]) -> Option<Vec<f64>> {
    let walls: Vec<&RadialDatum> = radials
        .iter()
        .filter(|r| r.is_wall() && r.root.len() == rank && r.d_plus.is_some_and(f64::is_finite))
        .collect();
    if walls.is_empty() || walls.len() != radials.iter().filter(|r| r.is_wall()).count() {
        return None;
    }
    let rows: Vec<&[f64]> = walls.iter().map(|r| r.root.as_slice()).collect();
    let rhs: Vec<f64> = walls.iter().map(|r| r.d_plus_value()).collect();
    let o = linalg::least_squares(&rows, &rhs, rank);
    let residual = walls
        .iter()
        .map(|r| (r.eval(&o) - r.d_plus_value()).abs())
        .fold(0.0, f64::max);
    (residual <= CONCURRENCY_TOL).then_some(o)
}

/// One violated invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub radial: Option<usize>,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.radial {
            Some(i) => write!(f, "radial {i}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Checks every scenario invariant. An empty list means the model is valid.
pub fn validate(model: &ChamberModel) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut top = |msg: String| out.push(Finding { radial: None, message: msg });
    if model.rank == 0 {
        top("rank must be positive".into());
    }
    if model.radials.is_empty() {
        top("scenario has no radials".into());
    }
    let mut per = Vec::new();
    for r in &model.radials {
        let mut push = |msg: &str| {
            per.push(Finding {
                radial: Some(r.id),
                message: msg.to_string(),
            })
        };
        if r.root.len() != model.rank {
            push("root length must equal rank");
        }
        if r.root.iter().any(|x| !x.is_finite()) {
            push("root must be finite");
        } else if r.root.iter().all(|&x| x == 0.0) {
            push("root must be nonzero");
        }
        if r.m_plus + r.m_minus == 0 {
            push("m_plus + m_minus must be at least 1");
        }
        match (r.m_plus > 0, r.d_plus) {
            (true, None) => push("d_plus is required when m_plus > 0"),
            (false, Some(_)) => push("d_plus must be absent when m_plus = 0"),
            (_, Some(d)) if !(d > 0.0 && d.is_finite()) => push("d_plus must be positive"),
            _ => {}
        }
        match (r.m_minus > 0, r.d_minus) {
            (true, None) => push("d_minus is required when m_minus > 0"),
            (false, Some(_)) => push("d_minus must be absent when m_minus = 0"),
            (_, Some(d)) if !(d > 0.0 && d.is_finite()) => push("d_minus must be positive"),
            _ => {}
        }
        if model.theorem_a {
            if r.m_plus < r.m_minus {
                push("m_plus < m_minus violates Theorem A hypothesis");
            }
            if r.m_minus > 0 && r.d_minus != r.d_plus {
                push("d_minus != d_plus violates Theorem A hypothesis");
            }
        }
    }
    // Positively parallel roots describe the same eigenspace twice.
    for (a, ra) in model.radials.iter().enumerate() {
        for rb in &model.radials[a + 1..] {
            if ra.root.len() != rb.root.len() || ra.root.len() != model.rank {
                continue;
            }
            let na = ra.root_norm_sq().sqrt();
            let nb = rb.root_norm_sq().sqrt();
            if na == 0.0 || nb == 0.0 {
                continue;
            }
            let cos = linalg::dot(&ra.root, &rb.root) / (na * nb);
            if cos > 1.0 - 1e-12 {
                per.push(Finding {
                    radial: Some(rb.id),
                    message: format!("root duplicates the direction of radial {}", ra.id),
                });
            }
        }
    }
    if let Some(o) = &model.concurrent_point {
        for r in model.walls() {
            if (r.eval(o) - r.d_plus_value()).abs() > CONCURRENCY_TOL {
                per.push(Finding {
                    radial: Some(r.id),
                    message: "concurrent point does not lie on the wall".into(),
                });
            }
        }
    }
    out.extend(per);
    out
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<ChamberModel> {
    let doc: ScenarioDocument = serde_json::from_str(text).map_err(|e| {
        let full = e.to_string();
        let message = match full.rsplit_once(" at line ") {
            Some((head, _)) => head.to_string(),
            None => full,
        };
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message,
        }
    })?;
    ChamberModel::from_document(doc)
}

/// Names accepted by [`builtin`], with their parameter lists.
pub const BUILTINS: &[(&str, &str)] = &[
    ("rank1", "m_plus=1, m_minus=0, d=1"),
    ("slab", "m=1, d=1"),
    ("a2", "m=1, d=1, m_minus=0"),
    ("b2", "m_short=1, m_long=1, d=1"),
];

/// Named synthetic scenarios. Parameters are positional; missing trailing
/// parameters take the defaults listed in [`BUILTINS`].
///
/// Names of the form `table1-<row>` are templates: the row labels are known
/// but the numeric data must come from the user, see [`Table1Row::instantiate`].
pub fn builtin(name: &str, params: &[f64]) -> Result<ChamberModel> {
    let bad = |message: String| Error::BuiltinParams {
        name: name.to_string(),
        message,
    };
    let take = |defaults: &[f64]| -> Result<Vec<f64>> {
        if params.len() > defaults.len() {
            return Err(bad(format!("expects at most {} parameters", defaults.len())));
        }
        let mut v = defaults.to_vec();
        v[..params.len()].copy_from_slice(params);
        Ok(v)
    };
    let mult = |x: f64| -> Result<u32> {
        if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
            Ok(x as u32)
        } else {
            Err(bad(format!("multiplicity {x} is not a non-negative integer")))
        }
    };
    let offset = |x: f64| -> Result<f64> {
        if x > 0.0 && x.is_finite() {
            Ok(x)
        } else {
            Err(bad(format!("offset {x} must be positive")))
        }
    };
    let plus_minus = |root: Vec<f64>, mp: u32, mm: u32, d: f64| {
        RadialDatum::new(root, mp, mm, (mp > 0).then_some(d), (mm > 0).then_some(d))
    };

    match name {
        "rank1" => {
            let p = take(&[1.0, 0.0, 1.0])?;
            let (mp, mm, d) = (mult(p[0])?, mult(p[1])?, offset(p[2])?);
            let theorem_a = mp >= mm && mp > 0;
            ChamberModel::new(
                format!("rank1({mp},{mm},{d})"),
                1,
                vec![plus_minus(vec![1.0], mp, mm, d)],
                theorem_a,
            )
        }
        "slab" => {
            let p = take(&[1.0, 1.0])?;
            let (m, d) = (mult(p[0])?, offset(p[1])?);
            if m == 0 {
                return Err(bad("m must be positive".into()));
            }
            ChamberModel::new(
                format!("slab({m},{d})"),
                1,
                vec![plus_minus(vec![1.0], m, 0, d), plus_minus(vec![-1.0], m, 0, d)],
                false,
            )
        }
        "a2" => {
            let p = take(&[1.0, 1.0, 0.0])?;
            let (m, d, mm) = (mult(p[0])?, offset(p[1])?, mult(p[2])?);
            if m == 0 {
                return Err(bad("m must be positive".into()));
            }
            let h = 3f64.sqrt() / 2.0;
            // Simple roots at offset d; the highest root passes through their
            // intersection, so its offset is 2d.
            let radials = vec![
                plus_minus(vec![1.0, 0.0], m, mm, d),
                plus_minus(vec![-0.5, h], m, mm, d),
                plus_minus(vec![0.5, h], m, mm, 2.0 * d),
            ];
            ChamberModel::new(format!("a2({m},{d})"), 2, radials, m >= mm)
        }
        "b2" => {
            let p = take(&[1.0, 1.0, 1.0])?;
            let (ms, ml, d) = (mult(p[0])?, mult(p[1])?, offset(p[2])?);
            if ms == 0 || ml == 0 {
                return Err(bad("multiplicities must be positive".into()));
            }
            // Simple roots (1,-1) long and (0,1) short meet at O = (2d, d).
            let radials = vec![
                plus_minus(vec![1.0, -1.0], ml, 0, d),
                plus_minus(vec![0.0, 1.0], ms, 0, d),
                plus_minus(vec![1.0, 0.0], ms, 0, 2.0 * d),
                plus_minus(vec![1.0, 1.0], ml, 0, 3.0 * d),
            ];
            ChamberModel::new(format!("b2({ms},{ml},{d})"), 2, radials, true)
        }
        other => match table1_row(other) {
            Some(row) => Err(bad(format!(
                "`{}` on {} is a template; supply roots, multiplicities and offsets",
                row.h, row.space
            ))),
            None => Err(Error::UnknownBuiltin(other.to_string())),
        },
    }
}

/// One row of the table of Hermann actions whose principal orbits satisfy
/// the collapse hypotheses. Only labels are known; numeric data is
/// user-supplied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Table1Row {
    pub key: &'static str,
    pub h: &'static str,
    pub space: &'static str,
    pub focal: &'static str,
    pub focal_perp: &'static str,
}

pub const TABLE1: &[Table1Row] = &[
    Table1Row { key: "table1-1", h: "SO*(2n)", space: "SU*(2n)/Sp(n)", focal: "SO*(2n)/U(n)", focal_perp: "SL(n,C)/SU(n)" },
    Table1Row { key: "table1-2", h: "SO*(2p)", space: "SU(p,p)/S(U(p)xU(p))", focal: "SO*(2p)/U(p)", focal_perp: "Sp(p,R)/U(p)" },
    Table1Row { key: "table1-3", h: "SO(n,C)", space: "SL(n,C)/SU(n)", focal: "SO(n,C)/SO(n)", focal_perp: "SL(n,R)/SO(n)" },
    Table1Row { key: "table1-4", h: "SU*(2p)·U(1)", space: "Sp(p,p)/Sp(p)xSp(p)", focal: "SU*(2p)/Sp(p)", focal_perp: "Sp(p,C)/Sp(p)" },
    Table1Row { key: "table1-5", h: "SL(n,C)·SO(2,C)", space: "Sp(n,C)/Sp(n)", focal: "SL(n,C)/SU(n) x SO(2,C)/SO(2)", focal_perp: "Sp(n,R)/U(n)" },
    Table1Row { key: "table1-6", h: "Sp(1,3)", space: "E6^2/SU(6)·SU(2)", focal: "Sp(1,3)/Sp(1)xSp(3)", focal_perp: "F4^4/Sp(3)·Sp(1)" },
    Table1Row { key: "table1-7", h: "SU(1,5)·SL(2,R)", space: "E6^-14/Spin(10)·U(1)", focal: "SU(1,5)/S(U(1)xU(5)) x SL(2,R)/SO(2)", focal_perp: "SO*(10)/U(5)" },
    Table1Row { key: "table1-8", h: "Sp(4,C)", space: "E6^C/E6", focal: "Sp(4,C)/Sp(4)", focal_perp: "E6^6/Sp(4)" },
    Table1Row { key: "table1-9", h: "SU(2,6)", space: "E7^-5/SO'(12)·SU(2)", focal: "SU(2,6)/S(U(2)xU(6))", focal_perp: "E6^2/SU(6)·SU(2)" },
    Table1Row { key: "table1-10", h: "SL(8,C)", space: "E7^C/E7", focal: "SL(8,C)/SU(8)", focal_perp: "E7^7/SU(8)" },
    Table1Row { key: "table1-11", h: "SO(16,C)", space: "E8^C/E8", focal: "SO(16,C)/SO(16)", focal_perp: "E8^8/SO(16)" },
    Table1Row { key: "table1-12", h: "Sp(3,C)·SL(2,C)", space: "F4^C/F4", focal: "Sp(3,C)/Sp(3) x SL(2,C)/SU(2)", focal_perp: "F4^4/Sp(3)·Sp(1)" },
    Table1Row { key: "table1-13", h: "SL(2,C)xSL(2,C)", space: "G2^C/G2", focal: "SL(2,C)/SU(2) x SL(2,C)/SU(2)", focal_perp: "G2^2/SO(4)" },
];

pub fn table1_row(key: &str) -> Option<&'static Table1Row> {
    TABLE1.iter().find(|r| r.key == key)
}

impl Table1Row {
    pub fn label(&self) -> String {
        format!("{} on {}", self.h, self.space)
    }

    /// Attaches user-supplied radial data to the row. The scenario claims
    /// the collapse hypotheses, so validation enforces them.
    pub fn instantiate(&self, rank: usize, radials: Vec<RadialDatum>) -> Result<ChamberModel> {
        ChamberModel::new(self.label(), rank, radials, true)
    }

    /// Skeleton document for the user to fill in.
    pub fn skeleton(&self) -> ScenarioDocument {
        ScenarioDocument {
            name: self.label(),
            rank: 0,
            theorem_a: true,
            radials: Vec::new(),
        }
    }
}
