//! JSON-lines check records and the tolerance table they are judged against.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::Value;

use super::text::{fmt_f64, parse_f64};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Le,
    Ge,
    Gt,
    /// Passes for any finite value.
    Finite,
}

impl Op {
    fn name(self) -> &'static str {
        match self {
            Op::Le => "le",
            Op::Ge => "ge",
            Op::Gt => "gt",
            Op::Finite => "finite",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "le" => Op::Le,
            "ge" => Op::Ge,
            "gt" => Op::Gt,
            "finite" => Op::Finite,
            o => return Err(Error::Format(format!("unknown criterion '{o}'"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Criterion {
    pub op: Op,
    pub bound: f64,
}

impl Criterion {
    pub const fn new(op: Op, bound: f64) -> Self {
        Self { op, bound }
    }

    pub fn holds(&self, v: f64) -> bool {
        match self.op {
            Op::Le => v <= self.bound,
            Op::Ge => v >= self.bound,
            Op::Gt => v > self.bound,
            Op::Finite => v.is_finite(),
        }
    }
}

/// Tolerance for each `(check, quantity)` pair. This table, not the copy stored in a
/// record, decides pass or fail.
pub fn criterion_for(check: &str, quantity: &str) -> Option<Criterion> {
    use Op::*;
    let c = match (check, quantity) {
        ("energy_balance", "max_residual_per_time") => Criterion::new(Le, 1e-6),
        ("max_principle", "max_linf_increase") => Criterion::new(Le, 1e-4),
        ("l2_decay", "max_l2_increase") => Criterion::new(Le, 1e-4),
        ("linf_decay", "sup_normalized") => Criterion::new(Finite, 0.0),
        ("level_set_energy", "relative_slack") => Criterion::new(Ge, -1e-5),
        ("level_energy_sequence", "m_star_over_sup") => Criterion::new(Ge, 1.0),
        ("level_energy_sequence", "relative_u_increase") => Criterion::new(Le, 1e-12),
        ("interpolation", "max_ratio") => Criterion::new(Finite, 0.0),
        ("cordoba", "square_slack" | "positive_part_slack") => Criterion::new(Ge, -1e-8),
        ("local_energy", "relative_slack") => Criterion::new(Ge, -1e-5),
        ("isoperimetric", "implied_constant") => Criterion::new(Finite, 0.0),
        ("change_of_variables", "mismatch") => Criterion::new(Le, 1e-4),
        ("extension_identity", "max_relative_error") => Criterion::new(Le, 1e-3),
        ("barriers", "f1_margin") => Criterion::new(Gt, 0.0),
        ("barriers", "beta0_relative_error") => Criterion::new(Le, 0.02),
        ("barriers", "beta0") => Criterion::new(Finite, 0.0),
        ("scaling", "residual_ratio") => Criterion::new(Le, 10.0),
        ("holder", "delta") => Criterion::new(Gt, 0.0),
        ("holder", "fit_r2") => Criterion::new(Ge, 0.9),
        ("zoom", "contracting_levels") => Criterion::new(Ge, 3.0),
        _ => return None,
    };
    Some(c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub check: String,
    pub quantity: String,
    pub params: BTreeMap<String, f64>,
    pub value: f64,
    pub criterion: Criterion,
    pub grid: (usize, f64),
    pub seed: u64,
}

fn num(v: f64) -> String {
    if v.is_finite() {
        fmt_f64(v)
    } else {
        // JSON has no infinities; these are read back by `parse_f64`.
        format!("\"{v}\"").to_lowercase()
    }
}

fn str_lit(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

impl Record {
    /// Builds a record, looking its criterion up in the tolerance table.
    pub fn new(check: &str, quantity: &str, params: BTreeMap<String, f64>, value: f64, grid: (usize, f64), seed: u64) -> Result<Self> {
        let criterion = criterion_for(check, quantity)
            .ok_or_else(|| Error::Invalid(format!("no tolerance for {check}/{quantity}")))?;
        Ok(Self {
            check: check.into(),
            quantity: quantity.into(),
            params,
            value,
            criterion,
            grid,
            seed,
        })
    }

    pub fn pass(&self) -> bool {
        self.criterion.holds(self.value)
    }

    /// One line, keys in fixed order, floats with 17 significant digits.
    pub fn to_json_line(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{{\"check\":{},\"quantity\":{},\"params\":{{", str_lit(&self.check), str_lit(&self.quantity));
        for (i, (k, v)) in self.params.iter().enumerate() {
            let _ = write!(s, "{}{}:{}", if i > 0 { "," } else { "" }, str_lit(k), num(*v));
        }
        let _ = write!(
            s,
            "}},\"value\":{},\"criterion\":{},\"tolerance\":{},\"pass\":{},\"grid\":{{\"N\":{},\"L\":{}}},\"seed\":{}}}",
            num(self.value),
            str_lit(self.criterion.op.name()),
            num(self.criterion.bound),
            self.pass(),
            self.grid.0,
            num(self.grid.1),
            self.seed
        );
        s
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(line)?;
        let o = v.as_object().ok_or_else(|| Error::Format("record is not an object".into()))?;
        let field = |k: &str| o.get(k).ok_or_else(|| Error::Format(format!("record lacks '{k}'")));
        let string = |k: &str| -> Result<String> {
            field(k)?
                .as_str()
                .map(String::from)
                .ok_or_else(|| Error::Format(format!("'{k}' is not a string")))
        };
        let float = |v: &Value, k: &str| -> Result<f64> {
            match v {
                Value::Number(n) => n.as_f64().ok_or_else(|| Error::Format(format!("'{k}' out of range"))),
                Value::String(s) if matches!(s.as_str(), "inf" | "-inf" | "nan") => parse_f64(s),
                _ => Err(Error::Format(format!("'{k}' is not a number"))),
            }
        };
        let params = field("params")?
            .as_object()
            .ok_or_else(|| Error::Format("'params' is not an object".into()))?
            .iter()
            .map(|(k, v)| Ok((k.clone(), float(v, k)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let grid = field("grid")?;
        let n = grid
            .get("N")
            .and_then(Value::as_u64)
            .and_then(|n| usize::try_from(n).ok())
            .ok_or_else(|| Error::Format("bad grid.N".into()))?;
        let l = float(grid.get("L").ok_or_else(|| Error::Format("record lacks grid.L".into()))?, "L")?;
        let seed = field("seed")?
            .as_u64()
            .ok_or_else(|| Error::Format("bad seed".into()))?;
        field("pass")?
            .as_bool()
            .ok_or_else(|| Error::Format("'pass' is not a boolean".into()))?;
        Ok(Self {
            check: string("check")?,
            quantity: string("quantity")?,
            params,
            value: float(field("value")?, "value")?,
            criterion: Criterion::new(Op::parse(&string("criterion")?)?, float(field("tolerance")?, "tolerance")?),
            grid: (n, l),
            seed,
        })
    }
}
