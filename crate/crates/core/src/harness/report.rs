//! Report rows, group verdicts and on-disk artifacts.
//!
//! CSV columns (one file per row kind, header row first, floats as `{:.16e}`):
//!
//! | column | meaning |
//! |---|---|
//! | `kind` | row kind, see [`RowKind`] |
//! | `weight` | weight label |
//! | `function` | test function, `h` member or relation name |
//! | `p` | `1`, `2`, `inf` or `-` |
//! | `n` | degree (or `t` for MRS relations) |
//! | `param` | derivative order, eta factor, `x / a_n`, or sample coordinate |
//! | `a_n`, `t_an` | `a_n` and `T(a_n)` |
//! | `err_f` | `||w (f - P)||_p` for the polynomial under test |
//! | `lhs` | measured left-hand side |
//! | `e_ref` | reference quantity entering the bound |
//! | `aux` | `eta` or `w(x)` where used, else 0 |
//! | `bound` | bound factor, recomputable from the columns above |
//! | `ratio` | `lhs / bound`, empty for exact or skipped rows |
//! | `status` | `ok`, `noise`, `exact`, `skipped`, `fail` or `error` |
//! | `note` | free text |

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version of the CSV and JSON layouts.
pub const SCHEMA_VERSION: u32 = 1;

/// Relative tolerance of the bound and ratio recomputation on load.
pub const CONSISTENCY_TOL: f64 = 1e-12;

/// Residual level accepted by the integration-by-parts identity.
pub const PARTS_TOL: f64 = 1e-6;

/// Exact-case rows pass when the measured quantity is below this.
pub const EXACT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    /// `||w(f' - P')|| / (T^{3/4}(a_n) E_{p,n-1}(f'))` with `P` best.
    Simultaneous,
    /// `||w(f' - P')|| / (T^{3/4} E_{p,n}(f') + (n/a_n) T^{1/2} eta)` with `||(f-P)w|| = eta`.
    Perturbed,
    /// `||P' w|| / ((n/a_n) T^{1/2} ||P w||)` for `P = p_n`.
    MarkovBernstein,
    /// `||w(f^{(i)} - P^{(i)})|| / (T^{(2i+1)/4} E_{p,n-i}(f^{(i)}))`.
    HigherDerivatives,
    /// As above with `||(f-P)w|| = T^{1/4}(a_n) E_{p,n}(f)`.
    HigherDerivativesRelaxed,
    /// `E_{1,2n-1}(chi_x) / ((a_n/n) w(x))`.
    StepL1,
    /// `||I(h)' w|| / ||h w||`.
    TailDerivative,
    /// `||I(h) w||_inf / ((a_n/n) ||h w||_inf)` for `h` orthogonal to `P_n`.
    TailDecay,
    /// `|int g h w^2 - int g' I(h) w^2| / scale`.
    TailParts,
    /// `E_{p,n}(g) / ((a_n/n) ||g' w||)`.
    Favard,
    /// `||(f - v_n f) w|| / (T^{1/4} E_{p,n}(f))`.
    VpNearBest,
    /// `||(g - V_n g) w|| / ((a_n/n) T^{1/4} E_{p,n}(g'))`.
    VpPrimitive,
    /// A two-sided asymptotic relation, `lhs` should stay within the band.
    Asymptotic,
    /// `T(a_n) / (n/a_n)^{2/3}` over `n = 2^k`.
    MrsGrowth,
}

impl RowKind {
    pub const ALL: [RowKind; 14] = [
        RowKind::Simultaneous,
        RowKind::Perturbed,
        RowKind::MarkovBernstein,
        RowKind::HigherDerivatives,
        RowKind::HigherDerivativesRelaxed,
        RowKind::StepL1,
        RowKind::TailDerivative,
        RowKind::TailDecay,
        RowKind::TailParts,
        RowKind::Favard,
        RowKind::VpNearBest,
        RowKind::VpPrimitive,
        RowKind::Asymptotic,
        RowKind::MrsGrowth,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RowKind::Simultaneous => "simultaneous",
            RowKind::Perturbed => "perturbed",
            RowKind::MarkovBernstein => "markov_bernstein",
            RowKind::HigherDerivatives => "higher_derivatives",
            RowKind::HigherDerivativesRelaxed => "higher_derivatives_relaxed",
            RowKind::StepL1 => "step_l1",
            RowKind::TailDerivative => "tail_derivative",
            RowKind::TailDecay => "tail_decay",
            RowKind::TailParts => "tail_parts",
            RowKind::Favard => "favard",
            RowKind::VpNearBest => "vp_near_best",
            RowKind::VpPrimitive => "vp_primitive",
            RowKind::Asymptotic => "asymptotic",
            RowKind::MrsGrowth => "mrs_growth",
        }
    }

    /// Bound factor from the row's own columns.
    pub fn bound(self, r: &VerifyRow) -> f64 {
        let n = r.n as f64;
        let t = r.t_an;
        match self {
            RowKind::Simultaneous => t.powf(0.75) * r.e_ref,
            RowKind::HigherDerivatives | RowKind::HigherDerivativesRelaxed => {
                t.powf((2.0 * r.param + 1.0) / 4.0) * r.e_ref
            }
            RowKind::Perturbed => t.powf(0.75) * r.e_ref + n / r.a_n * t.sqrt() * r.aux,
            RowKind::MarkovBernstein => n / r.a_n * t.sqrt() * r.e_ref,
            RowKind::StepL1 => r.a_n / n * r.aux,
            RowKind::TailDecay | RowKind::Favard => r.a_n / n * r.e_ref,
            RowKind::VpNearBest => t.powf(0.25) * r.e_ref,
            RowKind::VpPrimitive => r.a_n / n * t.powf(0.25) * r.e_ref,
            RowKind::TailDerivative | RowKind::TailParts | RowKind::Asymptotic => r.e_ref,
            RowKind::MrsGrowth => (n / r.a_n).powf(2.0 / 3.0),
        }
    }

    /// Relations whose ratio must also stay above `1 / band`.
    fn two_sided(self) -> bool {
        matches!(self, RowKind::Asymptotic)
    }

    /// Inequalities whose ratio must not drift in `n` (`max/median` limit).
    /// The others only need a bounded ratio, which may decay.
    fn stable(self) -> bool {
        matches!(
            self,
            RowKind::Simultaneous | RowKind::HigherDerivatives | RowKind::HigherDerivativesRelaxed
        )
    }
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// The reference error sits at rounding level; the ratio is kept.
    Noise,
    /// The reference error vanishes; `lhs` is checked against [`EXACT_TOL`].
    Exact,
    Skipped,
    Fail,
    Error,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Noise => "noise",
            Status::Exact => "exact",
            Status::Skipped => "skipped",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub kind: RowKind,
    pub weight: String,
    pub function: String,
    pub p: String,
    pub n: usize,
    pub param: f64,
    pub a_n: f64,
    pub t_an: f64,
    pub err_f: f64,
    pub lhs: f64,
    pub e_ref: f64,
    pub aux: f64,
    pub bound: f64,
    pub ratio: Option<f64>,
    pub status: Status,
    pub note: String,
}

impl VerifyRow {
    /// A row with the bound and ratio filled in from the other columns.
    #[allow(clippy::too_many_arguments)]
    pub fn measured(
        kind: RowKind,
        weight: &str,
        function: &str,
        p: &str,
        n: usize,
        param: f64,
        a_n: f64,
        t_an: f64,
        err_f: f64,
        lhs: f64,
        e_ref: f64,
        aux: f64,
    ) -> Self {
        let mut r = VerifyRow {
            kind,
            weight: weight.to_string(),
            function: function.to_string(),
            p: p.to_string(),
            n,
            param,
            a_n,
            t_an,
            err_f,
            lhs,
            e_ref,
            aux,
            bound: 0.0,
            ratio: None,
            status: Status::Ok,
            note: String::new(),
        };
        r.bound = kind.bound(&r);
        r.ratio = Some(lhs / r.bound);
        if !r.ratio.is_some_and(f64::is_finite) {
            r.ratio = None;
            r.status = Status::Fail;
            r.note = "non-finite ratio".into();
        }
        r
    }

    /// The bound is below the resolvable level `floor`: no ratio, pass iff
    /// `lhs <= floor`.
    pub fn below_floor(mut self, floor: f64) -> Self {
        self.ratio = None;
        if self.lhs <= floor {
            self.status = Status::Exact;
            self.note = format!("bound below resolvable level {floor:.3e}");
        } else {
            self.status = Status::Fail;
            self.note = format!("bound below {floor:.3e} but lhs {:.3e}", self.lhs);
        }
        self
    }

    /// Exact case: no ratio, pass iff `lhs <= EXACT_TOL`.
    pub fn exact(mut self) -> Self {
        self.ratio = None;
        if self.lhs <= EXACT_TOL {
            self.status = Status::Exact;
        } else {
            self.status = Status::Fail;
            self.note = format!("exact case with lhs {:.3e}", self.lhs);
        }
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        let note = note.into();
        if self.note.is_empty() {
            self.note = note;
        } else {
            self.note = format!("{}; {note}", self.note);
        }
        self
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    /// A placeholder row for a cell whose computation failed.
    pub fn error(kind: RowKind, weight: &str, function: &str, p: &str, n: usize, param: f64, e: &Error) -> Self {
        VerifyRow {
            kind,
            weight: weight.to_string(),
            function: function.to_string(),
            p: p.to_string(),
            n,
            param,
            a_n: 0.0,
            t_an: 0.0,
            err_f: 0.0,
            lhs: 0.0,
            e_ref: 0.0,
            aux: 0.0,
            bound: 0.0,
            ratio: None,
            status: Status::Error,
            note: e.to_string(),
        }
    }

    pub fn skipped(kind: RowKind, weight: &str, function: &str, p: &str, n: usize, param: f64, why: &str) -> Self {
        let mut r = Self::error(kind, weight, function, p, n, param, &Error::Domain(String::new()));
        r.status = Status::Skipped;
        r.note = why.to_string();
        r
    }

    /// Rows whose ratio enters the group statistics.
    fn counted(&self) -> bool {
        matches!(self.status, Status::Ok | Status::Noise | Status::Fail) && self.ratio.is_some()
    }

    fn group_key(&self) -> GroupKey {
        let (n, param) = match self.kind {
            // one group per degree, ratios across eta factors
            RowKind::Perturbed => (Some(self.n), None),
            // stability across n at a fixed sample point x / a_n
            RowKind::Asymptotic if self.function == "christoffel" => (None, Some(fmt_param(self.param))),
            RowKind::Asymptotic | RowKind::MrsGrowth | RowKind::MarkovBernstein | RowKind::TailDecay => (None, None),
            RowKind::TailDerivative | RowKind::TailParts => (None, None),
            _ => (None, Some(fmt_param(self.param))),
        };
        GroupKey {
            kind: self.kind,
            weight: self.weight.clone(),
            function: self.function.clone(),
            p: self.p.clone(),
            n,
            param,
        }
    }
}

fn fmt_param(v: f64) -> String {
    format!("{v}")
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct GroupKey {
    kind: RowKind,
    weight: String,
    function: String,
    p: String,
    n: Option<usize>,
    param: Option<String>,
}

/// Verdict for one series of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub kind: RowKind,
    pub weight: String,
    pub function: String,
    pub p: String,
    pub n: Option<usize>,
    pub param: Option<String>,
    pub rows: usize,
    pub counted: usize,
    pub max_ratio: Option<f64>,
    pub median_ratio: Option<f64>,
    pub min_ratio: Option<f64>,
    /// Recorded empirical constant (max ratio).
    pub constant: Option<f64>,
    /// `false` for runs outside the hypotheses of the statement.
    pub asserted: bool,
    pub pass: bool,
    pub reasons: Vec<String>,
}

impl GroupSummary {
    pub fn label(&self) -> String {
        let mut s = format!("{}__{}__{}", self.kind, self.weight, self.function);
        if self.p != "-" {
            s.push_str(&format!("__p{}", self.p));
        }
        if let Some(n) = self.n {
            s.push_str(&format!("__n{n}"));
        }
        if let Some(q) = &self.param {
            s.push_str(&format!("__{q}"));
        }
        s.chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-' { c } else { '_' })
            .collect()
    }
}

/// Thresholds applied to every group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criteria {
    /// Ratios must lie below `band` (and above `1/band` for two-sided relations).
    pub band: f64,
    /// `max / median` (one-sided) or `max / min` (two-sided) limit.
    pub stability: f64,
    /// Relative spread allowed for the eta-scaling constant.
    pub eta_spread: f64,
}

impl Default for Criteria {
    fn default() -> Self {
        Criteria { band: 20.0, stability: 10.0, eta_spread: 0.2 }
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

fn summarize(key: &GroupKey, rows: &[&VerifyRow], crit: &Criteria, asserted: bool) -> GroupSummary {
    let mut reasons = Vec::new();
    for r in rows {
        match r.status {
            Status::Fail | Status::Error => reasons.push(format!("n={} param={}: {} {}", r.n, r.param, r.status.as_str(), r.note)),
            _ => {}
        }
    }
    let mut ratios: Vec<f64> = rows.iter().filter(|r| r.counted()).filter_map(|r| r.ratio).collect();
    let counted = ratios.len();
    let (mut max, mut med, mut min) = (None, None, None);
    if !ratios.is_empty() {
        let mx = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mn = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let md = median(&mut ratios);
        max = Some(mx);
        med = Some(md);
        min = Some(mn);
        match key.kind {
            RowKind::TailParts => {
                if mx > PARTS_TOL {
                    reasons.push(format!("identity residual {mx:.3e} > {PARTS_TOL:e}"));
                }
            }
            RowKind::Perturbed => perturbed_verdict(rows, crit, &mut reasons),
            RowKind::MrsGrowth => {
                let seq: Vec<f64> = rows.iter().filter(|r| r.counted()).filter_map(|r| r.ratio).collect();
                if seq.windows(2).any(|w| w[1] >= w[0]) {
                    reasons.push("sequence not decreasing".into());
                }
                if mx > crit.band {
                    reasons.push(format!("max {mx:.4} > declared constant {}", crit.band));
                }
            }
            kind => {
                if mx > crit.band {
                    reasons.push(format!("max ratio {mx:.4} > {}", crit.band));
                }
                if kind.two_sided() {
                    if mn < 1.0 / crit.band {
                        reasons.push(format!("min ratio {mn:.4e} < 1/{}", crit.band));
                    }
                    if mx / mn > crit.stability {
                        reasons.push(format!("max/min {:.4} > {}", mx / mn, crit.stability));
                    }
                } else if kind.stable() && md > 0.0 && mx / md > crit.stability {
                    reasons.push(format!("max/median {:.4} > {}", mx / md, crit.stability));
                }
            }
        }
    }
    GroupSummary {
        kind: key.kind,
        weight: key.weight.clone(),
        function: key.function.clone(),
        p: key.p.clone(),
        n: key.n,
        param: key.param.clone(),
        rows: rows.len(),
        counted,
        max_ratio: max,
        median_ratio: med,
        min_ratio: min,
        constant: max,
        asserted,
        pass: reasons.is_empty(),
        reasons,
    }
}

/// Eta scaling at one degree: the bound is affine in eta, and doubling eta
/// leaves the recorded constant `lhs / bound` unchanged within `eta_spread`.
fn perturbed_verdict(rows: &[&VerifyRow], crit: &Criteria, reasons: &mut Vec<String>) {
    let live: Vec<&&VerifyRow> = rows.iter().filter(|r| r.counted()).collect();
    let c = live.iter().filter_map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    if c > crit.band {
        reasons.push(format!("constant {c:.4} > {}", crit.band));
    }
    for a in &live {
        for b in &live {
            if (b.param - 2.0 * a.param).abs() <= 1e-12 * b.param {
                let q = b.ratio.unwrap_or(f64::NAN) / a.ratio.unwrap_or(f64::NAN);
                if !(q >= 1.0 / (1.0 + crit.eta_spread) && q <= 1.0 + crit.eta_spread) {
                    reasons.push(format!(
                        "eta factor {} -> {}: constant changes by factor {q:.4}",
                        a.param, b.param
                    ));
                }
            }
        }
    }
    // the bound minus its eta-free part must be proportional to eta
    let slopes: Vec<f64> = live
        .iter()
        .filter(|r| r.aux > 0.0)
        .map(|r| (r.bound - r.t_an.powf(0.75) * r.e_ref) / r.aux)
        .collect();
    if let (Some(a), Some(b)) = (
        slopes.iter().cloned().reduce(f64::min),
        slopes.iter().cloned().reduce(f64::max),
    ) {
        if (b - a).abs() > 1e-9 * b.abs() {
            reasons.push(format!("bound not linear in eta: slopes {a:.6e}..{b:.6e}"));
        }
    }
}

/// Facts about a weight recorded in the report header.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightHeader {
    pub weight: String,
    pub in_class: bool,
    pub in_class_lambda: bool,
    pub erdos_type: bool,
    pub lambda_lower: f64,
    pub f_lambda_sup: f64,
    pub growth_ratio_max: f64,
    pub growth_ratio_decreasing: bool,
    /// Whether the simultaneous-approximation runs are inside the hypotheses.
    pub theorem_scope: bool,
    pub scope_note: String,
    /// Truncation radius of the master quadrature rule.
    pub quadrature_radius: f64,
    /// Whether the radius was pulled in below `a_{2m}(1 + 2 delta_{2m})`.
    pub radius_reduced: bool,
}

/// Rows plus group verdicts, as written to disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub code_version: String,
    pub config: serde_json::Value,
    pub assumptions: Vec<String>,
    pub weights: Vec<WeightHeader>,
    pub groups: Vec<GroupSummary>,
    pub pass_count: usize,
    pub fail_count: usize,
    pub rows: Vec<VerifyRow>,
}

impl VerifyReport {
    /// Groups rows in a fixed order and evaluates every group.
    pub fn assemble(
        code_version: &str,
        config: serde_json::Value,
        assumptions: Vec<String>,
        weights: Vec<WeightHeader>,
        rows: Vec<VerifyRow>,
        crit: &Criteria,
    ) -> Self {
        let mut groups: BTreeMap<GroupKey, Vec<&VerifyRow>> = BTreeMap::new();
        for r in &rows {
            groups.entry(r.group_key()).or_default().push(r);
        }
        let scope: BTreeMap<&str, bool> = weights.iter().map(|w| (w.weight.as_str(), w.theorem_scope)).collect();
        let summaries: Vec<GroupSummary> = groups
            .iter()
            .map(|(k, rs)| {
                let theorem_kind = matches!(
                    k.kind,
                    RowKind::Simultaneous
                        | RowKind::Perturbed
                        | RowKind::HigherDerivatives
                        | RowKind::HigherDerivativesRelaxed
                );
                let asserted = !theorem_kind || scope.get(k.weight.as_str()).copied().unwrap_or(true);
                summarize(k, rs, crit, asserted)
            })
            .collect();
        let pass_count = summaries.iter().filter(|g| g.pass).count();
        let fail_count = summaries.len() - pass_count;
        VerifyReport {
            schema_version: SCHEMA_VERSION,
            code_version: code_version.to_string(),
            config,
            assumptions,
            weights,
            groups: summaries,
            pass_count,
            fail_count,
            rows,
        }
    }

    /// All asserted groups pass.
    pub fn passed(&self) -> bool {
        self.groups.iter().all(|g| g.pass || !g.asserted)
    }

    pub fn failing_groups(&self) -> impl Iterator<Item = &GroupSummary> {
        self.groups.iter().filter(|g| g.asserted && !g.pass)
    }

    pub fn kinds(&self) -> Vec<RowKind> {
        RowKind::ALL.iter().copied().filter(|k| self.rows.iter().any(|r| r.kind == *k)).collect()
    }

    pub fn rows_of(&self, kind: RowKind) -> impl Iterator<Item = &VerifyRow> {
        self.rows.iter().filter(move |r| r.kind == kind)
    }

    /// Writes `<kind>.csv`, `summary.json` and `plots/<group>.dat` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir.join("plots"))?;
        let mut written = Vec::new();
        for kind in self.kinds() {
            let path = dir.join(format!("{kind}.csv"));
            fs::write(&path, rows_to_csv(self.rows_of(kind))?)?;
            written.push(path);
        }
        let path = dir.join("summary.json");
        fs::write(&path, serde_json::to_string_pretty(self)? + "\n")?;
        written.push(path);
        for g in &self.groups {
            let data = self.plot_data(g);
            if data.is_empty() {
                continue;
            }
            let path = dir.join("plots").join(format!("{}.dat", g.label()));
            fs::write(&path, data)?;
            written.push(path);
        }
        Ok(written)
    }

    /// Two whitespace-separated columns: abscissa (n, or eta factor) and ratio.
    fn plot_data(&self, g: &GroupSummary) -> String {
        let mut s = String::new();
        for r in self.rows.iter().filter(|r| {
            r.kind == g.kind && r.weight == g.weight && r.function == g.function && r.p == g.p && r.group_key().n == g.n
                && r.group_key().param == g.param
        }) {
            if let Some(v) = r.ratio {
                let x = if g.kind == RowKind::Perturbed { r.param } else { r.n as f64 };
                s.push_str(&format!("{} {:.16e}\n", fmt_param(x), v));
            }
        }
        s
    }

    /// Reads a `summary.json` and checks every row's bound and ratio.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let rep: VerifyReport = serde_json::from_str(&text)?;
        rep.check_consistency()?;
        Ok(rep)
    }

    pub fn check_consistency(&self) -> Result<()> {
        check_rows(&self.rows)
    }
}

/// Recomputes `bound` and `ratio` of every measured row.
pub fn check_rows(rows: &[VerifyRow]) -> Result<()> {
    for (i, r) in rows.iter().enumerate() {
        if matches!(r.status, Status::Error | Status::Skipped) {
            continue;
        }
        let b = r.kind.bound(r);
        if (b - r.bound).abs() > CONSISTENCY_TOL * b.abs() {
            return Err(Error::Config(format!(
                "row {i} ({} n={}): bound {:e} does not match recomputed {b:e}",
                r.kind, r.n, r.bound
            )));
        }
        if let Some(q) = r.ratio {
            let want = r.lhs / r.bound;
            if (q - want).abs() > CONSISTENCY_TOL * want.abs() {
                return Err(Error::Config(format!(
                    "row {i} ({} n={}): ratio {q:e} does not match lhs/bound {want:e}",
                    r.kind, r.n
                )));
            }
        }
    }
    Ok(())
}

pub const CSV_HEADER: [&str; 16] = [
    "kind", "weight", "function", "p", "n", "param", "a_n", "t_an", "err_f", "lhs", "e_ref", "aux", "bound", "ratio",
    "status", "note",
];

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn rows_to_csv<'a>(rows: impl IntoIterator<Item = &'a VerifyRow>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.kind.as_str().to_string(),
            r.weight.clone(),
            r.function.clone(),
            r.p.clone(),
            r.n.to_string(),
            num(r.param),
            num(r.a_n),
            num(r.t_an),
            num(r.err_f),
            num(r.lhs),
            num(r.e_ref),
            num(r.aux),
            num(r.bound),
            r.ratio.map(num).unwrap_or_default(),
            r.status.as_str().to_string(),
            r.note.clone(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Parses a CSV written by [`rows_to_csv`] and checks its consistency.
pub fn rows_from_csv(text: &str) -> Result<Vec<VerifyRow>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let rows = rd
        .deserialize::<VerifyRow>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Config(format!("bad report CSV: {e}")))?;
    check_rows(&rows)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, lhs: f64) -> VerifyRow {
        VerifyRow::measured(RowKind::Simultaneous, "w", "f", "2", n, 1.0, 1.5, 3.0, 1e-3, lhs, 1e-3, 0.0)
    }

    #[test]
    fn bound_is_recomputable_and_csv_round_trips() {
        let rows: Vec<VerifyRow> = (4..8).map(|n| row(n, 1e-3 * n as f64)).collect();
        let text = rows_to_csv(&rows).unwrap();
        assert!(text.starts_with("kind,weight,function,p,n,param"));
        let back = rows_from_csv(&text).unwrap();
        assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.kind, b.kind);
            assert_eq!(a.n, b.n);
            assert!((a.ratio.unwrap() - b.ratio.unwrap()).abs() <= 1e-15 * a.ratio.unwrap());
        }
        let mut bad = rows.clone();
        bad[1].bound *= 1.0 + 1e-9;
        assert!(check_rows(&bad).is_err());
    }

    #[test]
    fn group_verdicts() {
        let crit = Criteria::default();
        let good: Vec<VerifyRow> = (4..10).map(|n| row(n, 1e-3)).collect();
        let rep = VerifyReport::assemble("v", serde_json::Value::Null, vec![], vec![], good, &crit);
        assert!(rep.passed() && rep.groups.len() == 1);
        let mut spiky: Vec<VerifyRow> = (4..10).map(|n| row(n, 1e-4)).collect();
        spiky.push(row(10, 1e-2));
        let rep = VerifyReport::assemble("v", serde_json::Value::Null, vec![], vec![], spiky, &crit);
        assert!(!rep.passed());
        let exact = row(5, 1e-12).exact();
        assert_eq!(exact.status, Status::Exact);
        assert_eq!(row(5, 1e-3).exact().status, Status::Fail);
    }

    #[test]
    fn growth_must_decrease() {
        let crit = Criteria::default();
        let mk = |n: usize, v: f64| VerifyRow::measured(RowKind::MrsGrowth, "w", "-", "-", n, 0.0, 1.0, v, 0.0, v, 0.0, 0.0);
        let up = vec![mk(4, 1.0), mk(8, 5.0)];
        assert!(!VerifyReport::assemble("v", serde_json::Value::Null, vec![], vec![], up, &crit).passed());
    }
}
