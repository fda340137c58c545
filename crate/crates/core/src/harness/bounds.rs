//! Evaluatable right-hand sides checked row by row against a trace.

use crate::error::{Error, Result};
use crate::trace::Trace;
use evalexpr::{build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};
use serde::{Deserialize, Serialize, Serializer};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundTarget {
    /// Every seed's trace separately.
    #[default]
    Each,
    /// The per-`k` mean over seeds.
    Mean,
}

/// `metric ≤ rhs (+ tolerance)` on every selected row.
///
/// `rhs` is an arithmetic expression over trace columns, constants and `inf`. Integer
/// literals are read as floats, so `1/2` is `0.5`. `math::sqrt`, `math::ln` and `^` are available.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSpec {
    pub name: String,
    pub metric: String,
    pub rhs: String,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    /// Only rows whose first column is at least this value.
    #[serde(default)]
    pub from_k: f64,
    /// Only the final row.
    #[serde(default)]
    pub last: bool,
    #[serde(default)]
    pub tolerance: f64,
    #[serde(default)]
    pub target: BoundTarget,
}

impl BoundSpec {
    pub fn new(name: &str, metric: &str, rhs: &str) -> Self {
        BoundSpec {
            name: name.into(),
            metric: metric.into(),
            rhs: rhs.into(),
            constants: BTreeMap::new(),
            from_k: 0.0,
            last: false,
            tolerance: 0.0,
            target: BoundTarget::Each,
        }
    }
}

fn ser_margin<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&crate::trace::format_value(*v))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub metric: String,
    pub rhs: String,
    pub pass: bool,
    /// `max (metric − rhs)` over the checked rows; positive means violated.
    #[serde(serialize_with = "ser_margin")]
    pub max_margin: f64,
    pub worst_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_seed: Option<u64>,
    pub rows: usize,
    pub tolerance: f64,
}

/// Rewrites bare integer literals as floats.
fn float_literals(s: &str) -> String {
    let c: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len() + 8);
    let mut i = 0;
    while i < c.len() {
        let starts = c[i].is_ascii_digit() && (i == 0 || !(c[i - 1].is_alphanumeric() || c[i - 1] == '_' || c[i - 1] == '.'));
        if !starts {
            out.push(c[i]);
            i += 1;
            continue;
        }
        let digits = |i: &mut usize, out: &mut String| {
            while *i < c.len() && c[*i].is_ascii_digit() {
                out.push(c[*i]);
                *i += 1;
            }
        };
        digits(&mut i, &mut out);
        let mut float = false;
        if i < c.len() && c[i] == '.' {
            float = true;
            out.push('.');
            i += 1;
            digits(&mut i, &mut out);
        }
        if i < c.len() && (c[i] == 'e' || c[i] == 'E') {
            float = true;
            out.push(c[i]);
            i += 1;
            if i < c.len() && (c[i] == '+' || c[i] == '-') {
                out.push(c[i]);
                i += 1;
            }
            digits(&mut i, &mut out);
        }
        if !float {
            out.push_str(".0");
        }
    }
    out
}

pub fn parse_rhs(rhs: &str) -> Result<Node<DefaultNumericTypes>> {
    build_operator_tree(&float_literals(rhs)).map_err(|e| Error::Config(format!("bad bound expression `{rhs}`: {e}")))
}

/// Checks `spec` on `trace`; `constants` are overridden by the spec's own.
pub fn check_bound(trace: &Trace, spec: &BoundSpec, constants: &BTreeMap<String, f64>) -> Result<Verdict> {
    let j = trace
        .index_of(&spec.metric)
        .ok_or_else(|| Error::Config(format!("bound `{}`: metric `{}` is not logged", spec.name, spec.metric)))?;
    let node = parse_rhs(&spec.rhs)?;
    let mut consts = constants.clone();
    consts.extend(spec.constants.iter().map(|(k, v)| (k.clone(), *v)));
    consts.entry("inf".into()).or_insert(f64::INFINITY);
    for v in node.iter_variable_identifiers() {
        if trace.index_of(v).is_none() && !consts.contains_key(v) {
            return Err(Error::Config(format!("bound `{}`: unknown name `{v}`", spec.name)));
        }
    }
    let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
    for (k, v) in &consts {
        ctx.set_value(k.clone(), Value::Float(*v)).map_err(|e| Error::Config(e.to_string()))?;
    }
    let first = if spec.last { trace.len().saturating_sub(1) } else { 0 };
    let mut worst = f64::NEG_INFINITY;
    let mut worst_k = None;
    let mut rows = 0;
    for row in &trace.rows[first..] {
        if row[0] < spec.from_k {
            continue;
        }
        for (name, v) in trace.columns.iter().zip(row) {
            ctx.set_value(name.clone(), Value::Float(*v)).map_err(|e| Error::Config(e.to_string()))?;
        }
        let rhs = node
            .eval_number_with_context(&ctx)
            .map_err(|e| Error::Config(format!("bound `{}`: {e}", spec.name)))?;
        let m = row[j];
        let margin = if rhs == f64::INFINITY {
            f64::NEG_INFINITY
        } else if m.is_nan() || rhs.is_nan() {
            f64::INFINITY
        } else {
            m - rhs
        };
        rows += 1;
        if worst_k.is_none() || margin > worst {
            worst = margin;
            worst_k = Some(row[0]);
        }
    }
    Ok(Verdict {
        name: spec.name.clone(),
        metric: spec.metric.clone(),
        rhs: spec.rhs.clone(),
        pass: worst <= spec.tolerance,
        max_margin: worst,
        worst_k,
        worst_seed: None,
        rows,
        tolerance: spec.tolerance,
    })
}
