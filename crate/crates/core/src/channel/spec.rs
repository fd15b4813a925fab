//! Channel specifications: JSON documents and the inline `family:key=val,...` form.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use super::{
    amplitude_damping, classical, depolarized_swap, depolarizing_bipartite, depolarizing_pp, replacer,
    tensor_power, werner_holevo, ChannelDims, ChoiOperator, Party,
};
use crate::error::{Error, Result};
use crate::tensor::{LabeledMatrix, C64};

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSpec {
    Family { family: String, params: Map<String, Value> },
    ExplicitChoi { matrix: LabeledMatrix, inputs: Option<Vec<String>>, ownership: Option<BTreeMap<String, Party>> },
    Parallel { of: Vec<ChannelSpec>, copies: usize },
}

const FAMILIES: &[&str] = &[
    "depol_bipartite",
    "depol_pp",
    "depol_swap",
    "werner_holevo_0",
    "werner_holevo_1",
    "amplitude_damping",
    "replacer",
    "classical",
];

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

impl ChannelSpec {
    pub fn family(family: &str, params: &[(&str, f64)]) -> Self {
        let params = params.iter().map(|&(k, v)| (k.to_string(), json!(v))).collect();
        ChannelSpec::Family { family: family.to_string(), params }
    }

    /// Parses `family:key=val,key=val`. A `copies=n` entry wraps the channel
    /// in an n-fold parallel composition.
    pub fn parse_inline(text: &str) -> Result<Self> {
        let text = text.trim();
        let (family, rest) = match text.split_once(':') {
            Some((f, r)) => (f.trim(), r.trim()),
            None => (text, ""),
        };
        if family.is_empty() {
            return Err(parse_err(format!("missing family name in `{text}`")));
        }
        let mut params = Map::new();
        let mut copies = None;
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected key=value, got `{item}`")))?;
            let (k, v) = (k.trim(), v.trim());
            let x: f64 = v.parse().map_err(|_| parse_err(format!("`{v}` is not a number (key `{k}`)")))?;
            if k == "copies" {
                copies = Some(as_count(x, "copies")?);
            } else if params.insert(k.to_string(), json!(x)).is_some() {
                return Err(parse_err(format!("key `{k}` given twice")));
            }
        }
        if !FAMILIES.contains(&family) {
            return Err(parse_err(format!("unknown channel family `{family}`")));
        }
        let base = ChannelSpec::Family { family: family.to_string(), params };
        Ok(match copies {
            Some(n) if n != 1 => ChannelSpec::Parallel { of: vec![base], copies: n },
            _ => base,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_value(&serde_json::from_str(text)?)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| parse_err("channel spec must be a JSON object"))?;
        let family = obj
            .get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| parse_err("channel spec needs a string `family`"))?;
        match family {
            "explicit_choi" => {
                let matrix: LabeledMatrix = serde_json::from_value(v.clone())?;
                let inputs = match obj.get("inputs") {
                    Some(x) => Some(serde_json::from_value(x.clone())?),
                    None => None,
                };
                let ownership = match obj.get("ownership") {
                    Some(x) => Some(serde_json::from_value(x.clone())?),
                    None => None,
                };
                Ok(ChannelSpec::ExplicitChoi { matrix, inputs, ownership })
            }
            "parallel" => {
                let of = obj
                    .get("of")
                    .and_then(Value::as_array)
                    .ok_or_else(|| parse_err("parallel spec needs an `of` array"))?
                    .iter()
                    .map(Self::from_value)
                    .collect::<Result<Vec<_>>>()?;
                let copies = match obj.get("copies") {
                    Some(c) => as_count(c.as_f64().ok_or_else(|| parse_err("`copies` must be a number"))?, "copies")?,
                    None => 1,
                };
                if of.is_empty() {
                    return Err(parse_err("parallel spec needs at least one channel"));
                }
                Ok(ChannelSpec::Parallel { of, copies })
            }
            f if FAMILIES.contains(&f) => {
                let params = match obj.get("params") {
                    Some(Value::Object(m)) => m.clone(),
                    None => Map::new(),
                    Some(_) => return Err(parse_err("`params` must be an object")),
                };
                Ok(ChannelSpec::Family { family: f.to_string(), params })
            }
            f => Err(parse_err(format!("unknown channel family `{f}`"))),
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            ChannelSpec::Family { family, params } => json!({ "family": family, "params": params }),
            ChannelSpec::ExplicitChoi { matrix, inputs, ownership } => {
                let mut v = serde_json::to_value(matrix).expect("matrices serialize");
                let o = v.as_object_mut().unwrap();
                o.insert("family".into(), json!("explicit_choi"));
                if let Some(i) = inputs {
                    o.insert("inputs".into(), json!(i));
                }
                if let Some(w) = ownership {
                    o.insert("ownership".into(), serde_json::to_value(w).unwrap());
                }
                v
            }
            ChannelSpec::Parallel { of, copies } => {
                json!({ "family": "parallel", "of": of.iter().map(Self::to_value).collect::<Vec<_>>(), "copies": copies })
            }
        }
    }

    pub fn build(&self) -> Result<ChoiOperator> {
        match self {
            ChannelSpec::Family { family, params } => build_family(family, params),
            ChannelSpec::ExplicitChoi { matrix, inputs, ownership } => {
                let labels = matrix.system().labels();
                if inputs.is_none() && ownership.is_none() {
                    return ChoiOperator::canonical(matrix.clone());
                }
                let inputs = match inputs {
                    Some(i) => i.clone(),
                    None if labels == ["A0", "B0", "A1", "B1"] => vec!["A0".into(), "B0".into()],
                    None => return Err(parse_err("explicit Choi with custom registers needs `inputs`")),
                };
                let outputs = labels.iter().filter(|l| !inputs.iter().any(|i| i == *l)).map(|s| s.to_string()).collect();
                let ownership = match ownership {
                    Some(o) => o.clone(),
                    None => return Err(parse_err("explicit Choi with custom registers needs `ownership`")),
                };
                ChoiOperator::new(matrix.clone(), inputs, outputs, ownership)
            }
            ChannelSpec::Parallel { of, copies } => {
                let mut parts = of.iter().map(Self::build).collect::<Result<Vec<_>>>()?.into_iter();
                let first = parts.next().expect("nonempty");
                let mut acc = parts.try_fold(first, |acc, c| super::parallel_compose(&acc, &c))?;
                if *copies != 1 {
                    acc = tensor_power(&acc, *copies)?;
                }
                Ok(acc)
            }
        }
    }
}

fn as_count(x: f64, key: &str) -> Result<usize> {
    if x.fract() != 0.0 || x < 1.0 {
        return Err(parse_err(format!("`{key}` must be a positive integer, got {x}")));
    }
    Ok(x as usize)
}

struct Params<'a> {
    family: &'a str,
    map: &'a Map<String, Value>,
    used: Vec<&'static str>,
}

impl<'a> Params<'a> {
    fn real(&mut self, key: &'static str) -> Result<f64> {
        self.used.push(key);
        self.map
            .get(key)
            .ok_or_else(|| parse_err(format!("{} needs parameter `{key}`", self.family)))?
            .as_f64()
            .ok_or_else(|| parse_err(format!("parameter `{key}` must be a number")))
    }

    fn real_or(&mut self, key: &'static str, default: f64) -> Result<f64> {
        if self.map.contains_key(key) {
            self.real(key)
        } else {
            self.used.push(key);
            Ok(default)
        }
    }

    fn dim(&mut self, key: &'static str) -> Result<usize> {
        let x = self.real(key)?;
        as_count(x, key)
    }

    fn dim_or(&mut self, key: &'static str, default: usize) -> Result<usize> {
        let x = self.real_or(key, default as f64)?;
        as_count(x, key)
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.push(key);
        self.map.get(key)
    }

    fn finish(self) -> Result<()> {
        for k in self.map.keys() {
            if !self.used.contains(&k.as_str()) {
                return Err(parse_err(format!("{} has no parameter `{k}`", self.family)));
            }
        }
        Ok(())
    }

    fn index_or(&mut self, key: &'static str, default: usize) -> Result<usize> {
        let x = self.real_or(key, default as f64)?;
        if x.fract() != 0.0 || x < 0.0 {
            return Err(parse_err(format!("`{key}` must be a non-negative integer, got {x}")));
        }
        Ok(x as usize)
    }

    fn dims(&mut self) -> Result<ChannelDims> {
        let d_in = self.dim_or("d_in", 1)?;
        let d_out = self.dim_or("d_out", 1)?;
        let a0 = self.dim_or("da0", d_in)?;
        let b0 = self.dim_or("db0", 1)?;
        let a1 = self.dim_or("da1", 1)?;
        let b1 = self.dim_or("db1", d_out)?;
        Ok(ChannelDims::bipartite(a0, b0, a1, b1))
    }
}

fn matrix_from_value(v: &Value, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    let arr = v.as_array().ok_or_else(|| parse_err("matrix must be an array of rows"))?;
    if arr.len() != rows {
        return Err(parse_err(format!("matrix needs {rows} rows")));
    }
    let mut m = DMatrix::zeros(rows, cols);
    for (i, row) in arr.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| parse_err("matrix rows must be arrays"))?;
        if row.len() != cols {
            return Err(parse_err(format!("matrix rows need {cols} entries")));
        }
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = x.as_f64().ok_or_else(|| parse_err("matrix entries must be numbers"))?;
        }
    }
    Ok(m)
}

fn build_family(family: &str, map: &Map<String, Value>) -> Result<ChoiOperator> {
    let mut p = Params { family, map, used: Vec::new() };
    let c = match family {
        "depol_bipartite" => {
            let (da, db, pr) = (p.dim("da")?, p.dim("db")?, p.real("p")?);
            depolarizing_bipartite(da, db, pr)?
        }
        "depol_pp" => {
            let (d, pr) = (p.dim("d")?, p.real("p")?);
            depolarizing_pp(d, pr)?
        }
        "depol_swap" => {
            let (d, pr) = (p.dim("d")?, p.real("p")?);
            depolarized_swap(d, pr)?
        }
        "werner_holevo_0" => werner_holevo(p.dim("d")?, 0)?,
        "werner_holevo_1" => werner_holevo(p.dim("d")?, 1)?,
        "amplitude_damping" => amplitude_damping(p.real("gamma")?)?,
        "replacer" => {
            let dims = p.dims()?;
            let n = dims.d_out();
            let state = if let Some(s) = p.raw("state") {
                let re: Vec<f64> = serde_json::from_value(s.get("re").cloned().unwrap_or(Value::Null))?;
                let im: Vec<f64> = match s.get("im") {
                    Some(x) => serde_json::from_value(x.clone())?,
                    None => vec![0.0; re.len()],
                };
                if re.len() != n * n || im.len() != n * n {
                    return Err(parse_err(format!("replacement state needs {} entries", n * n)));
                }
                DMatrix::from_fn(n, n, |i, j| C64::new(re[i * n + j], im[i * n + j]))
            } else {
                let b = p.index_or("basis", 0)?;
                if b >= n {
                    return Err(parse_err(format!("basis index {b} outside output dimension {n}")));
                }
                let mut m = DMatrix::zeros(n, n);
                m[(b, b)] = C64::new(1.0, 0.0);
                m
            };
            replacer(dims, &state)?
        }
        "classical" => {
            if p.map.contains_key("flip") {
                let f = p.real("flip")?;
                if !(0.0..=1.0).contains(&f) {
                    return Err(Error::param(format!("flip = {f} outside [0, 1]")));
                }
                let m = DMatrix::from_row_slice(2, 2, &[1.0 - f, f, f, 1.0 - f]);
                classical(ChannelDims::point_to_point(2, 2), &m)?
            } else {
                let dims = p.dims()?;
                let v = p.raw("matrix").ok_or_else(|| parse_err("classical needs `matrix` or `flip`"))?;
                let m = matrix_from_value(v, dims.d_out(), dims.d_in())?;
                classical(dims, &m)?
            }
        }
        f => return Err(parse_err(format!("unknown channel family `{f}`"))),
    };
    p.finish()?;
    Ok(c)
}
