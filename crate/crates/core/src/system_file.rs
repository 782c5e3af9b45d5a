//! JSON system files: `{ "n", "breakpoints", "values", "meta" }`, with every
//! rational written as a `"numerator/denominator"` string.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pwl::{MapError, PiecewiseLinearMap};
use crate::scalar::{format_scalar, parse_scalar, ScalarError};
use crate::template::SystemMeta;

#[derive(Debug, Error)]
pub enum SystemFileError {
    #[error("malformed system JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("structural error: {0}")]
    Map(#[from] MapError),
    #[error("n = {n} but values carry {components} components")]
    Dimension { n: usize, components: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SystemFile {
    n: usize,
    breakpoints: Vec<String>,
    values: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<SystemMeta>,
}

pub fn to_json(map: &PiecewiseLinearMap, meta: Option<&SystemMeta>) -> String {
    let file = SystemFile {
        n: map.components() - 1,
        breakpoints: map.breakpoints().iter().map(format_scalar).collect(),
        values: map.values().iter().map(|row| row.iter().map(format_scalar).collect()).collect(),
        meta: meta.cloned(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("system file serializes");
    text.push('\n');
    text
}

pub fn from_json(text: &str) -> Result<(PiecewiseLinearMap, Option<SystemMeta>), SystemFileError> {
    let file: SystemFile = serde_json::from_str(text)?;
    let breakpoints = file.breakpoints.iter().map(|s| parse_scalar(s)).collect::<Result<Vec<_>, _>>()?;
    let values = file
        .values
        .iter()
        .map(|row| row.iter().map(|s| parse_scalar(s)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let map = PiecewiseLinearMap::new(breakpoints, values)?;
    if map.components() != file.n + 1 {
        return Err(SystemFileError::Dimension { n: file.n, components: map.components() });
    }
    Ok((map, file.meta))
}
