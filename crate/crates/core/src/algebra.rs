//! Numerical verifier for operator identities.
//!
//! An identity is a pair of operator pipelines ([`Expr`]) applied to the same random,
//! band-limited, origin-regular input. The residual of one trial is
//! `‖lhs − rhs‖ / max(‖lhs‖, ‖rhs‖, largest intermediate norm)`, which stays meaningful
//! for commutators whose two sides both vanish.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField, SphericalGrid, VectorField, C64};
use crate::harmonics::HarmonicIndex;
use crate::operators as op;
use crate::random::{random_scalar, random_vector, rng, Envelope};

/// Tag marking identities whose stated form is expected to fail numerically.
pub const SUSPECT: &str = "suspect";

/// Value kind flowing through a pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Scalar,
    Vector,
}

/// Input family for the trials of an identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TrialKind {
    /// Random regular scalar field.
    Scalar,
    /// Random regular vector field.
    Vector,
    /// `r^κ Σ_m c_m Y_lm` with random `c_m`; negative `κ` is evaluated on an annulus.
    PowerLaw { l: usize, kappa: i32 },
}

impl TrialKind {
    pub fn input_kind(&self) -> Kind {
        match self {
            TrialKind::Vector => Kind::Vector,
            _ => Kind::Scalar,
        }
    }
}

/// Operator pipeline. `Input` is the trial field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Expr {
    Input,
    Zero { kind: Kind },
    Grad { arg: Box<Expr> },
    Div { arg: Box<Expr> },
    Curl { arg: Box<Expr> },
    L { arg: Box<Expr> },
    N { arg: Box<Expr> },
    M { arg: Box<Expr> },
    /// Scalar Laplacian.
    Lap { arg: Box<Expr> },
    /// Componentwise vector Laplacian.
    VecLap { arg: Box<Expr> },
    /// Angular Laplacian `L·L` on a scalar.
    L2 { arg: Box<Expr> },
    /// `r·∇` on a scalar, or on each Cartesian component of a vector.
    Euler { arg: Box<Expr> },
    /// Multiplication by `r^p`.
    RPow { p: i32, arg: Box<Expr> },
    /// Multiplication by the coordinate `x_i`.
    Coord { i: usize, arg: Box<Expr> },
    /// Cartesian component `V_i`.
    Component { i: usize, arg: Box<Expr> },
    /// Scalar operator `L_i`.
    LComp { i: usize, arg: Box<Expr> },
    /// Scalar operator `N_i`.
    NComp { i: usize, arg: Box<Expr> },
    /// Scalar operator `M_i`.
    MComp { i: usize, arg: Box<Expr> },
    /// Scalar operator `∇_i`.
    GradComp { i: usize, arg: Box<Expr> },
    DotR { arg: Box<Expr> },
    CrossR { arg: Box<Expr> },
    /// `Σ_i L_i V_i`.
    DotL { arg: Box<Expr> },
    /// `Σ_i M_i V_i`.
    DotM { arg: Box<Expr> },
    /// `(L×W)_i = ε_ijk L_j W_k`.
    CrossL { arg: Box<Expr> },
    /// The vector `r f`.
    Position { arg: Box<Expr> },
    Scale { re: f64, im: f64, arg: Box<Expr> },
    Add { a: Box<Expr>, b: Box<Expr> },
    Sub { a: Box<Expr>, b: Box<Expr> },
}

macro_rules! unary {
    ($($name:ident => $variant:ident),* $(,)?) => {
        $(pub fn $name(arg: Expr) -> Expr { Expr::$variant { arg: Box::new(arg) } })*
    };
}

macro_rules! indexed {
    ($($name:ident => $variant:ident),* $(,)?) => {
        $(pub fn $name(i: usize, arg: Expr) -> Expr { Expr::$variant { i, arg: Box::new(arg) } })*
    };
}

/// Pipeline builders.
pub mod build {
    use super::*;

    pub fn input() -> Expr {
        Expr::Input
    }
    pub fn zero(kind: Kind) -> Expr {
        Expr::Zero { kind }
    }
    unary!(grad => Grad, div => Div, curl => Curl, l => L, n => N, m => M, lap => Lap,
        vec_lap => VecLap, l2 => L2, euler => Euler, dot_r => DotR, cross_r => CrossR,
        dot_l => DotL, dot_m => DotM, cross_l => CrossL, position => Position);
    indexed!(coord => Coord, component => Component, l_i => LComp, n_i => NComp,
        m_i => MComp, grad_i => GradComp);
    pub fn rpow(p: i32, arg: Expr) -> Expr {
        Expr::RPow { p, arg: Box::new(arg) }
    }
    pub fn scale(s: f64, arg: Expr) -> Expr {
        Expr::Scale { re: s, im: 0.0, arg: Box::new(arg) }
    }
    pub fn scale_c(s: C64, arg: Expr) -> Expr {
        Expr::Scale { re: s.re, im: s.im, arg: Box::new(arg) }
    }
    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add { a: Box::new(a), b: Box::new(b) }
    }
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub { a: Box::new(a), b: Box::new(b) }
    }
    /// `Σ c_k e_k`, dropping zero coefficients; empty sums become `Zero`.
    pub fn sum(terms: Vec<(f64, Expr)>, kind: Kind) -> Expr {
        terms
            .into_iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|(c, e)| if c == 1.0 { e } else { scale(c, e) })
            .reduce(add)
            .unwrap_or(zero(kind))
    }
    /// `[A, B] = A(B(·)) − B(A(·))` for scalar-to-scalar operators.
    pub fn commutator(a: impl Fn(Expr) -> Expr, b: impl Fn(Expr) -> Expr) -> Expr {
        sub(a(b(input())), b(a(input())))
    }
}

/// Levi-Civita symbol.
pub fn epsilon(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn delta(i: usize, k: usize) -> f64 {
    if i == k {
        1.0
    } else {
        0.0
    }
}

impl Expr {
    /// Output kind given the input kind, or a spec error on mismatch.
    pub fn kind(&self, input: Kind) -> Result<Kind> {
        use Expr::*;
        use Kind::*;
        let need = |e: &Expr, want: Kind, what: &str| -> Result<()> {
            let got = e.kind(input)?;
            if got == want {
                Ok(())
            } else {
                Err(Error::Spec(format!("{what} expects a {want:?} argument, got {got:?}")))
            }
        };
        let idx = |i: usize| -> Result<()> {
            if i < 3 {
                Ok(())
            } else {
                Err(Error::Spec(format!("component index {i} out of range")))
            }
        };
        Ok(match self {
            Input => input,
            Zero { kind } => *kind,
            Grad { arg } | L { arg } | N { arg } | M { arg } | Position { arg } => {
                need(arg, Scalar, "grad/L/N/M/position")?;
                Vector
            }
            Div { arg } | DotR { arg } | DotL { arg } | DotM { arg } => {
                need(arg, Vector, "div/dot")?;
                Scalar
            }
            Curl { arg } | VecLap { arg } | CrossR { arg } | CrossL { arg } => {
                need(arg, Vector, "curl/vec_lap/cross")?;
                Vector
            }
            Lap { arg } | L2 { arg } => {
                need(arg, Scalar, "lap/l2")?;
                Scalar
            }
            Coord { i, arg } | LComp { i, arg } | NComp { i, arg } | MComp { i, arg } | GradComp { i, arg } => {
                idx(*i)?;
                need(arg, Scalar, "component operator")?;
                Scalar
            }
            Component { i, arg } => {
                idx(*i)?;
                need(arg, Vector, "component")?;
                Scalar
            }
            Euler { arg } | RPow { arg, .. } | Scale { arg, .. } => arg.kind(input)?,
            Add { a, b } | Sub { a, b } => {
                let ka = a.kind(input)?;
                let kb = b.kind(input)?;
                if ka != kb {
                    return Err(Error::Spec(format!("cannot combine {ka:?} with {kb:?}")));
                }
                ka
            }
        })
    }
}

/// Field value produced by a pipeline.
#[derive(Debug, Clone)]
pub enum Value {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl Value {
    pub fn norm(&self) -> f64 {
        match self {
            Value::Scalar(f) => f.norm(),
            Value::Vector(v) => v.norm(),
        }
    }

    fn scalar(self) -> ScalarField {
        match self {
            Value::Scalar(f) => f,
            Value::Vector(_) => unreachable!("type-checked pipeline"),
        }
    }

    fn vector(self) -> VectorField {
        match self {
            Value::Vector(v) => v,
            Value::Scalar(_) => unreachable!("type-checked pipeline"),
        }
    }

    fn sub(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a.sub(b).expect("same grid")),
            (Value::Vector(a), Value::Vector(b)) => Value::Vector(a.sub(b).expect("same grid")),
            _ => unreachable!("type-checked pipeline"),
        }
    }
}

fn vector_rpow(v: &VectorField, p: i32) -> VectorField {
    let (r, s, t) = v.channels();
    VectorField::from_channels(op::multiply_r_power(&r, p), op::multiply_r_power(&s, p), op::multiply_r_power(&t, p)).expect("same grid")
}

fn vector_euler(v: &VectorField) -> VectorField {
    let (r, s, t) = v.channels();
    VectorField::from_channels(op::radial_euler(&r), op::radial_euler(&s), op::radial_euler(&t)).expect("same grid")
}

fn dot_with(v: &VectorField, apply: impl Fn(&ScalarField) -> VectorField) -> ScalarField {
    let parts = op::cartesian_components(v);
    let mut acc = ScalarField::zeros(&v.grid);
    for (i, p) in parts.iter().enumerate() {
        acc = acc.add(&op::component(&apply(p), i)).expect("same grid");
    }
    acc
}

fn cross_l(v: &VectorField) -> VectorField {
    let parts = op::cartesian_components(v);
    let lw: Vec<[ScalarField; 3]> = parts.iter().map(|p| op::cartesian_components(&op::apply_l(p))).collect();
    let grid = &v.grid;
    let out: Vec<ScalarField> = (0..3)
        .map(|i| {
            let mut acc = ScalarField::zeros(grid);
            for j in 0..3 {
                for k in 0..3 {
                    let e = epsilon(i, j, k);
                    if e != 0.0 {
                        acc = acc.add(&lw[k][j].scale(C64::new(e, 0.0))).expect("same grid");
                    }
                }
            }
            acc
        })
        .collect();
    op::from_cartesian(&[out[0].clone(), out[1].clone(), out[2].clone()]).expect("same grid")
}

struct Evaluator<'a> {
    grid: &'a Arc<SphericalGrid>,
    input: &'a Value,
    peak: f64,
}

impl Evaluator<'_> {
    fn eval(&mut self, e: &Expr) -> Value {
        use Expr::*;
        let s = |v: Value| v.scalar();
        let v = match e {
            Input => self.input.clone(),
            Zero { kind: Kind::Scalar } => Value::Scalar(ScalarField::zeros(self.grid)),
            Zero { kind: Kind::Vector } => Value::Vector(VectorField::zeros(self.grid)),
            Grad { arg } => Value::Vector(op::gradient(&s(self.eval(arg)))),
            Div { arg } => Value::Scalar(op::divergence(&self.eval(arg).vector())),
            Curl { arg } => Value::Vector(op::curl(&self.eval(arg).vector())),
            L { arg } => Value::Vector(op::apply_l(&s(self.eval(arg)))),
            N { arg } => Value::Vector(op::apply_n(&s(self.eval(arg)))),
            M { arg } => Value::Vector(op::apply_m(&s(self.eval(arg)))),
            Lap { arg } => Value::Scalar(op::laplacian(&s(self.eval(arg)))),
            VecLap { arg } => Value::Vector(op::vector_laplacian(&self.eval(arg).vector())),
            L2 { arg } => Value::Scalar(op::angular_laplacian(&s(self.eval(arg)))),
            Euler { arg } => match self.eval(arg) {
                Value::Scalar(f) => Value::Scalar(op::radial_euler(&f)),
                Value::Vector(v) => Value::Vector(vector_euler(&v)),
            },
            RPow { p, arg } => match self.eval(arg) {
                Value::Scalar(f) => Value::Scalar(op::multiply_r_power(&f, *p)),
                Value::Vector(v) => Value::Vector(vector_rpow(&v, *p)),
            },
            Coord { i, arg } => Value::Scalar(op::multiply_coordinate(&s(self.eval(arg)), *i)),
            Component { i, arg } => Value::Scalar(op::component(&self.eval(arg).vector(), *i)),
            LComp { i, arg } => Value::Scalar(op::component(&op::apply_l(&s(self.eval(arg))), *i)),
            NComp { i, arg } => Value::Scalar(op::component(&op::apply_n(&s(self.eval(arg))), *i)),
            MComp { i, arg } => Value::Scalar(op::component(&op::apply_m(&s(self.eval(arg))), *i)),
            GradComp { i, arg } => Value::Scalar(op::component(&op::gradient(&s(self.eval(arg))), *i)),
            DotR { arg } => Value::Scalar(op::dot_r(&self.eval(arg).vector())),
            CrossR { arg } => Value::Vector(op::cross_r(&self.eval(arg).vector())),
            DotL { arg } => Value::Scalar(dot_with(&self.eval(arg).vector(), op::apply_l)),
            DotM { arg } => Value::Scalar(dot_with(&self.eval(arg).vector(), op::apply_m)),
            CrossL { arg } => Value::Vector(cross_l(&self.eval(arg).vector())),
            Position { arg } => Value::Vector(op::times_position(&s(self.eval(arg)))),
            Scale { re, im, arg } => {
                let c = C64::new(*re, *im);
                match self.eval(arg) {
                    Value::Scalar(f) => Value::Scalar(f.scale(c)),
                    Value::Vector(v) => Value::Vector(v.scale(c)),
                }
            }
            Add { a, b } => match (self.eval(a), self.eval(b)) {
                (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x.add(&y).expect("same grid")),
                (Value::Vector(x), Value::Vector(y)) => Value::Vector(x.add(&y).expect("same grid")),
                _ => unreachable!("type-checked pipeline"),
            },
            Sub { a, b } => {
                let x = self.eval(a);
                let y = self.eval(b);
                x.sub(&y)
            }
        };
        self.peak = self.peak.max(v.norm());
        v
    }
}

/// Evaluates a pipeline on `input`, returning the result and the largest intermediate norm.
pub fn evaluate(e: &Expr, input: &Value) -> Result<(Value, f64)> {
    let kind = match input {
        Value::Scalar(_) => Kind::Scalar,
        Value::Vector(_) => Kind::Vector,
    };
    e.kind(kind)?;
    let grid = match input {
        Value::Scalar(f) => f.grid.clone(),
        Value::Vector(v) => v.grid.clone(),
    };
    let mut ev = Evaluator { grid: &grid, input, peak: 0.0 };
    let out = ev.eval(e);
    Ok((out, ev.peak))
}

/// One registered identity `lhs = rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentitySpec {
    pub name: String,
    pub lhs: Expr,
    pub rhs: Expr,
    pub kind: TrialKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl IdentitySpec {
    pub fn new(name: impl Into<String>, lhs: Expr, rhs: Expr, kind: TrialKind) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            kind,
            tags: Vec::new(),
            note: None,
        }
    }

    pub fn suspect(mut self, note: &str) -> Self {
        self.tags.push(SUSPECT.to_string());
        self.note = Some(note.to_string());
        self
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.to_string());
        self
    }

    pub fn is_suspect(&self) -> bool {
        self.tags.iter().any(|t| t == SUSPECT)
    }

    /// Checks that both sides type-check and agree in kind.
    pub fn validate(&self) -> Result<Kind> {
        let input = self.kind.input_kind();
        let a = self.lhs.kind(input)?;
        let b = self.rhs.kind(input)?;
        if a != b {
            return Err(Error::Spec(format!("{}: lhs is {a:?} but rhs is {b:?}", self.name)));
        }
        Ok(a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub max_rel_residual: f64,
    pub n_trials: usize,
    pub verdict: Verdict,
    pub suspect: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Trial configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub l_max: usize,
    pub n_r: usize,
    pub seed: u64,
    pub n_trials: usize,
    pub tol: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            l_max: 8,
            n_r: 28,
            seed: 42,
            n_trials: 20,
            tol: op::DEFAULT_TOL,
        }
    }
}

/// Grids used by the trials: a unit ball and an annulus `[1/4, 1]` for singular power laws.
pub struct TrialGrids {
    pub ball: Arc<SphericalGrid>,
    pub annulus: Arc<SphericalGrid>,
}

impl TrialGrids {
    pub fn new(config: &SuiteConfig) -> Result<Self> {
        if config.l_max < 3 {
            return Err(Error::Config("identity trials need l_max ≥ 3".into()));
        }
        Ok(Self {
            ball: GridSpec::ball(config.l_max, config.n_r, 1.0).build()?,
            annulus: GridSpec::ball(config.l_max, config.n_r + 16, 1.0).with_r_min(0.25).build()?,
        })
    }
}

fn trial_input(kind: TrialKind, grids: &TrialGrids, band: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Value {
    let poly = Envelope::Polynomial { degree: 3 };
    match kind {
        TrialKind::Scalar => Value::Scalar(random_scalar(&grids.ball, band, poly, false, rng)),
        TrialKind::Vector => Value::Vector(random_vector(&grids.ball, band, poly, false, rng)),
        TrialKind::PowerLaw { l, kappa } => {
            let grid = if kappa < 0 { &grids.annulus } else { &grids.ball };
            let mut f = ScalarField::zeros(grid);
            let nh = grid.n_h();
            for m in -(l as i64)..=l as i64 {
                let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let h = HarmonicIndex { l, m }.flat();
                for j in 0..grid.n_r() {
                    f.coef[j * nh + h] = c * grid.r_nodes[j].powi(kappa);
                }
            }
            Value::Scalar(f)
        }
    }
}

fn identity_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (index as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9)
}

fn verify_with(spec: &IdentitySpec, grids: &TrialGrids, config: &SuiteConfig, stream: u64) -> Result<IdentityReport> {
    spec.validate()?;
    let band = config.l_max.saturating_sub(2);
    if let TrialKind::PowerLaw { l, .. } = spec.kind {
        if l > band {
            return Err(Error::Config(format!("{}: degree {l} exceeds trial band {band}", spec.name)));
        }
    }
    let mut rng = rng(stream);
    let mut worst = 0.0_f64;
    for _ in 0..config.n_trials {
        let input = trial_input(spec.kind, grids, band, &mut rng);
        let (lhs, pl) = evaluate(&spec.lhs, &input)?;
        let (rhs, pr) = evaluate(&spec.rhs, &input)?;
        let denom = lhs.norm().max(rhs.norm()).max(pl).max(pr).max(f64::MIN_POSITIVE);
        worst = worst.max(lhs.sub(&rhs).norm() / denom);
    }
    let verdict = if worst < config.tol { Verdict::Pass } else { Verdict::Fail };
    let suspect = spec.is_suspect();
    let note = match (suspect, verdict) {
        (true, Verdict::Fail) => Some(format!("{} (fails as stated)", spec.note.as_deref().unwrap_or("suspect"))),
        (true, Verdict::Pass) => Some(format!("{} (holds numerically)", spec.note.as_deref().unwrap_or("suspect"))),
        _ => spec.note.clone(),
    };
    Ok(IdentityReport {
        name: spec.name.clone(),
        max_rel_residual: worst,
        n_trials: config.n_trials,
        verdict,
        suspect,
        note,
    })
}

/// Verifies one identity. Deterministic given `config.seed`.
pub fn verify_identity(spec: &IdentitySpec, config: &SuiteConfig) -> Result<IdentityReport> {
    let grids = TrialGrids::new(config)?;
    verify_with(spec, &grids, config, identity_seed(config.seed, 0))
}

/// Suite outcome with summary counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub reports: Vec<IdentityReport>,
    pub n_pass: usize,
    pub n_fail: usize,
    pub n_suspect_fail: usize,
}

impl SuiteReport {
    /// True when every identity not tagged suspect passes.
    pub fn ok(&self) -> bool {
        self.n_fail == 0
    }
}

/// Runs every identity in `registry`; the i-th identity draws from its own seeded stream.
pub fn run_suite(registry: &[IdentitySpec], config: &SuiteConfig) -> Result<SuiteReport> {
    let mut reports = Vec::with_capacity(registry.len());
    if !registry.is_empty() {
        let grids = TrialGrids::new(config)?;
        for (i, spec) in registry.iter().enumerate() {
            reports.push(verify_with(spec, &grids, config, identity_seed(config.seed, i + 1))?);
        }
    }
    let n_pass = reports.iter().filter(|r| r.verdict == Verdict::Pass).count();
    let n_fail = reports.iter().filter(|r| r.verdict == Verdict::Fail && !r.suspect).count();
    let n_suspect_fail = reports.iter().filter(|r| r.verdict == Verdict::Fail && r.suspect).count();
    Ok(SuiteReport {
        config: config.clone(),
        reports,
        n_pass,
        n_fail,
        n_suspect_fail,
    })
}

/// Registry as JSON.
pub fn registry_to_json(registry: &[IdentitySpec]) -> Result<String> {
    Ok(serde_json::to_string_pretty(registry)?)
}

/// Registry from JSON; every entry is type-checked.
pub fn registry_from_json(text: &str) -> Result<Vec<IdentitySpec>> {
    let reg: Vec<IdentitySpec> = serde_json::from_str(text)?;
    for s in &reg {
        s.validate()?;
    }
    Ok(reg)
}

const AXES: [&str; 3] = ["x", "y", "z"];

fn family(out: &mut Vec<IdentitySpec>, name: &str, make: impl Fn(usize, usize) -> (Expr, Expr), suspect: Option<&str>) {
    for i in 0..3 {
        for k in 0..3 {
            let (lhs, rhs) = make(i, k);
            let mut s = IdentitySpec::new(format!("{name} [{}{}]", AXES[i], AXES[k]), lhs, rhs, TrialKind::Scalar);
            if let Some(note) = suspect {
                s = s.suspect(note);
            }
            out.push(s);
        }
    }
}

/// Every identity of the operator list, with suspect forms paired with corrected twins.
pub fn standard_registry() -> Vec<IdentitySpec> {
    use build::*;
    use Kind::{Scalar as S, Vector as V};
    let sc = TrialKind::Scalar;
    let mut reg = vec![
        IdentitySpec::new("[L, r²] = 0", sub(l(rpow(2, input())), rpow(2, l(input()))), zero(V), sc),
        IdentitySpec::new("[L, p²] = 0", scale(-1.0, sub(l(lap(input())), vec_lap(l(input())))), zero(V), sc),
        IdentitySpec::new("[L, Δ] = 0", sub(l(lap(input())), vec_lap(l(input()))), zero(V), sc),
        IdentitySpec::new("[N, Δ] = 0", sub(n(lap(input())), vec_lap(n(input()))), zero(V), sc),
        IdentitySpec::new("r·L = 0", dot_r(l(input())), zero(S), sc),
        IdentitySpec::new("div L = 0", div(l(input())), zero(S), sc),
        IdentitySpec::new("L·N = 0", dot_l(n(input())), zero(S), sc),
        IdentitySpec::new("L·M = 0", dot_l(m(input())), zero(S), sc),
        IdentitySpec::new("M·L = 0", dot_m(l(input())), zero(S), sc),
        IdentitySpec::new("r·N = 0", dot_r(n(input())), zero(S), sc).suspect("listed among vanishing projections"),
        IdentitySpec::new("r·N = L²", dot_r(n(input())), l2(input()), sc).suspect("form implied by the r·V inversion line"),
        IdentitySpec::new("r·N = −L²", dot_r(n(input())), scale(-1.0, l2(input())), sc),
        IdentitySpec::new("curl N = −LΔ", curl(n(input())), scale(-1.0, l(lap(input()))), sc),
        IdentitySpec::new("[M, Δ] = −6∇", sub(m(lap(input())), vec_lap(m(input()))), scale(-6.0, grad(input())), sc)
            .suspect("stated commutator"),
        IdentitySpec::new(
            "[M, Δ] = −2rΔ + 2(r·∇)∇ + 4∇",
            sub(m(lap(input())), vec_lap(m(input()))),
            sum(
                vec![(-2.0, position(lap(input()))), (2.0, euler(grad(input()))), (4.0, grad(input()))],
                V,
            ),
            sc,
        ),
        IdentitySpec::new(
            "N = −rΔ + ∇(r·∇) + ∇",
            n(input()),
            sum(vec![(-1.0, position(lap(input()))), (1.0, grad(euler(input()))), (1.0, grad(input()))], V),
            sc,
        ),
        IdentitySpec::new("r×N = −(1 + r·∇)L", cross_r(n(input())), scale(-1.0, add(l(input()), euler(l(input())))), sc),
        IdentitySpec::new("r×N = −L(1 + r·∇)", cross_r(n(input())), scale(-1.0, l(add(input(), euler(input())))), sc),
        IdentitySpec::new("Δ = grad div − curl curl", vec_lap(input()), sub(grad(div(input())), curl(curl(input()))), TrialKind::Vector),
    ];
    for i in 0..3 {
        let lhs = commutator(l2, |e| coord(i, e));
        let printed = sub(
            scale_c(C64::new(0.0, 1.0), component(i, cross_r(l(input())))),
            scale_c(C64::new(0.0, 1.0), component(i, cross_l(position(input())))),
        );
        reg.push(
            IdentitySpec::new(format!("[L², r] = i r×L − i L×r [{}]", AXES[i]), lhs.clone(), printed, sc)
                .suspect("holds for the Hermitian ℓ = iL, not for real L"),
        );
        let twin = sum(vec![(2.0, component(i, cross_r(l(input())))), (-2.0, coord(i, input()))], S);
        reg.push(IdentitySpec::new(format!("[L², r] = 2 r×L − 2r [{}]", AXES[i]), lhs.clone(), twin, sc));
        let hermitian = sub(
            scale_c(C64::new(0.0, 1.0), component(i, cross_r(scale_c(C64::new(0.0, 1.0), l(input()))))),
            scale_c(C64::new(0.0, 1.0), component(i, cross_l(scale_c(C64::new(0.0, 1.0), position(input()))))),
        );
        reg.push(IdentitySpec::new(format!("[ℓ², r] = i r×ℓ − i ℓ×r, ℓ = iL [{}]", AXES[i]), scale(-1.0, lhs), hermitian, sc));
    }
    family(
        &mut reg,
        "[r_i, ∇_k] = −δ_ik",
        |i, k| (commutator(|e| coord(i, e), |e| grad_i(k, e)), sum(vec![(-delta(i, k), input())], S)),
        None,
    );
    let eps_sum = |i: usize, k: usize, sign: f64, f: &dyn Fn(usize) -> Expr| sum((0..3).map(|j| (sign * epsilon(i, k, j), f(j))).collect(), S);
    family(
        &mut reg,
        "[r_i, L_k] = −ε_ikj r_j",
        |i, k| (commutator(|e| coord(i, e), |e| l_i(k, e)), eps_sum(i, k, -1.0, &|j| coord(j, input()))),
        Some("stated sign"),
    );
    family(
        &mut reg,
        "[r_i, L_k] = ε_ikj r_j",
        |i, k| (commutator(|e| coord(i, e), |e| l_i(k, e)), eps_sum(i, k, 1.0, &|j| coord(j, input()))),
        None,
    );
    family(
        &mut reg,
        "[∇_i, L_k] = −ε_ikj ∇_j",
        |i, k| (commutator(|e| grad_i(i, e), |e| l_i(k, e)), eps_sum(i, k, -1.0, &|j| grad_i(j, input()))),
        Some("stated sign"),
    );
    family(
        &mut reg,
        "[∇_i, L_k] = ε_ikj ∇_j",
        |i, k| (commutator(|e| grad_i(i, e), |e| l_i(k, e)), eps_sum(i, k, 1.0, &|j| grad_i(j, input()))),
        None,
    );
    family(
        &mut reg,
        "[∇_i, N_k] = ∇_i∇_k − Δδ_ik",
        |i, k| {
            let rhs = sum(vec![(1.0, grad_i(i, grad_i(k, input()))), (-delta(i, k), lap(input()))], S);
            (commutator(|e| grad_i(i, e), |e| n_i(k, e)), rhs)
        },
        None,
    );
    family(
        &mut reg,
        "[r_i, M_k] = r_i r_k − r²δ_ik",
        |i, k| {
            let rhs = sum(vec![(1.0, coord(i, coord(k, input()))), (-delta(i, k), rpow(2, input()))], S);
            (commutator(|e| coord(i, e), |e| m_i(k, e)), rhs)
        },
        Some("stated sign"),
    );
    family(
        &mut reg,
        "[r_i, M_k] = −r_i r_k + r²δ_ik",
        |i, k| {
            let rhs = sum(vec![(-1.0, coord(i, coord(k, input()))), (delta(i, k), rpow(2, input()))], S);
            (commutator(|e| coord(i, e), |e| m_i(k, e)), rhs)
        },
        None,
    );
    family(
        &mut reg,
        "[L_i, M_k] = ε_ikj r_j − r²ε_ikj ∇_j",
        |i, k| {
            let rhs = eps_sum(i, k, 1.0, &|j| sub(coord(j, input()), rpow(2, grad_i(j, input()))));
            (commutator(|e| l_i(i, e), |e| m_i(k, e)), rhs)
        },
        Some("stated form lacks the Euler factor"),
    );
    family(
        &mut reg,
        "[L_i, M_k] = ε_ikj r_j(r·∇) − r²ε_ikj ∇_j",
        |i, k| {
            let rhs = eps_sum(i, k, 1.0, &|j| sub(coord(j, euler(input())), rpow(2, grad_i(j, input()))));
            (commutator(|e| l_i(i, e), |e| m_i(k, e)), rhs)
        },
        None,
    );
    family(
        &mut reg,
        "[L_i, L_j] = ε_ijk L_k",
        |i, j| (commutator(|e| l_i(i, e), |e| l_i(j, e)), eps_sum(i, j, 1.0, &|k| l_i(k, input()))),
        None,
    );
    family(
        &mut reg,
        "[L_i, N_j] = ε_ijk N_k",
        |i, j| (commutator(|e| l_i(i, e), |e| n_i(j, e)), eps_sum(i, j, 1.0, &|k| n_i(k, input()))),
        None,
    );
    family(
        &mut reg,
        "[N_i, N_j] = −ε_ijk L_k Δ",
        |i, j| (commutator(|e| n_i(i, e), |e| n_i(j, e)), eps_sum(i, j, -1.0, &|k| l_i(k, lap(input())))),
        None,
    );
    for deg in 1..=3usize {
        let li = deg as i32;
        for kappa in [li, -li - 1, li + 2] {
            let lhs = scale(-1.0, n(input()));
            let rhs = sum(
                vec![
                    (-(kappa as f64 + 1.0), grad(input())),
                    (((kappa - li) * (kappa + li + 1)) as f64, position(rpow(-2, input()))),
                ],
                V,
            );
            reg.push(IdentitySpec::new(
                format!("curl(r×∇) r^κY = −(κ+1)∇r^κY + (κ−l)(κ+l+1) r r^(κ−2)Y [l={deg}, κ={kappa}]"),
                lhs,
                rhs,
                TrialKind::PowerLaw { l: deg, kappa },
            ));
        }
    }
    reg
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;

    fn quick() -> SuiteConfig {
        SuiteConfig {
            n_trials: 3,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn type_errors_are_spec_errors() {
        let bad = IdentitySpec::new("bad", div(input()), zero(Kind::Scalar), TrialKind::Scalar);
        assert!(matches!(bad.validate(), Err(Error::Spec(_))));
        let mixed = IdentitySpec::new("mixed", grad(input()), input(), TrialKind::Scalar);
        assert!(matches!(verify_identity(&mixed, &quick()), Err(Error::Spec(_))));
        assert!(matches!(coord(3, input()).kind(Kind::Scalar), Err(Error::Spec(_))));
    }

    #[test]
    fn representative_identities() {
        let reg = standard_registry();
        let get = |n: &str| reg.iter().find(|s| s.name == n).unwrap();
        let r = verify_identity(get("curl N = −LΔ"), &quick()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert!(r.max_rel_residual < 1e-9);
        let r = verify_identity(get("div L = 0"), &quick()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        let r = verify_identity(get("[M, Δ] = −6∇"), &quick()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail, "{r:?}");
        assert!(r.suspect && r.note.as_deref().unwrap().contains("fails as stated"));
    }

    #[test]
    fn empty_registry_gives_empty_report() {
        let rep = run_suite(&[], &quick()).unwrap();
        assert!(rep.reports.is_empty() && rep.ok());
    }

    #[test]
    fn suspect_failure_does_not_fail_suite() {
        let reg = standard_registry();
        let pick: Vec<_> = reg.iter().filter(|s| s.name.starts_with("r·N")).cloned().collect();
        assert_eq!(pick.len(), 3);
        let rep = run_suite(&pick, &quick()).unwrap();
        assert!(rep.ok(), "{rep:?}");
        assert_eq!(rep.n_suspect_fail, 2);
        assert_eq!(rep.n_pass, 1);
    }

    #[test]
    fn registry_round_trips_through_json() {
        let reg = standard_registry();
        let text = registry_to_json(&reg).unwrap();
        assert_eq!(registry_from_json(&text).unwrap(), reg);
        for s in &reg {
            s.validate().unwrap();
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let reg: Vec<_> = standard_registry().into_iter().take(4).collect();
        let a = serde_json::to_string(&run_suite(&reg, &quick()).unwrap()).unwrap();
        let b = serde_json::to_string(&run_suite(&reg, &quick()).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
