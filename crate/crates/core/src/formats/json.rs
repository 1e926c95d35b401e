//! Path-tracking accessors over a decoded JSON tree.

use super::FormatError;
use crate::model::Extras;
use serde_json::Value;

pub(crate) fn decode(payload: &[u8]) -> Result<Value, FormatError> {
    if payload.is_empty() {
        return Err(FormatError::MalformedInput {
            offset: 0,
            message: "empty payload".into(),
        });
    }
    let text = std::str::from_utf8(payload).map_err(|e| FormatError::MalformedInput {
        offset: e.valid_up_to(),
        message: "invalid UTF-8".into(),
    })?;
    serde_json::from_str(text).map_err(|e| FormatError::MalformedInput {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })
}

/// Byte offset of a 1-based line/column position as reported by serde_json.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

#[derive(Clone, Copy)]
pub(crate) struct Obj<'a, 'p> {
    pub map: &'a serde_json::Map<String, Value>,
    pub path: &'p str,
}

impl<'a, 'p> Obj<'a, 'p> {
    pub fn new(value: &'a Value, path: &'p str) -> Result<Self, FormatError> {
        value
            .as_object()
            .map(|map| Obj { map, path })
            .ok_or_else(|| FormatError::schema(path, "expected an object"))
    }

    pub fn child_path(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn required(&self, key: &str) -> Result<&'a Value, FormatError> {
        self.map
            .get(key)
            .ok_or_else(|| FormatError::schema(self.child_path(key), "missing required field"))
    }

    pub fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Result<String, FormatError> {
        self.required(key)?
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| FormatError::schema(self.child_path(key), "expected a string"))
    }

    pub fn opt_str(&self, key: &str) -> Result<Option<String>, FormatError> {
        match self.map.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(_) => self.str(key).map(Some),
        }
    }

    pub fn int(&self, key: &str) -> Result<i64, FormatError> {
        let v = self.required(key)?;
        v.as_i64()
            .or_else(|| v.as_f64().filter(|f| f.fract() == 0.0).map(|f| f as i64))
            .ok_or_else(|| FormatError::schema(self.child_path(key), "expected an integer"))
    }

    pub fn opt_bool(&self, key: &str) -> Result<Option<bool>, FormatError> {
        match self.map.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(*b)),
            Some(_) => Err(FormatError::schema(self.child_path(key), "expected a boolean")),
        }
    }

    pub fn array(&self, key: &str) -> Result<&'a [Value], FormatError> {
        self.required(key)?
            .as_array()
            .map(Vec::as_slice)
            .ok_or_else(|| FormatError::schema(self.child_path(key), "expected an array"))
    }

    pub fn opt_array(&self, key: &str) -> Result<&'a [Value], FormatError> {
        match self.map.get(key) {
            None | Some(Value::Null) => Ok(&[]),
            Some(_) => self.array(key),
        }
    }

    /// Every field not named in `known`, in source order.
    pub fn extras(&self, known: &[&str]) -> Extras {
        self.map
            .iter()
            .filter(|(k, _)| !known.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

/// Append extras after the known fields, skipping keys already written.
pub(crate) fn extend(map: &mut serde_json::Map<String, Value>, extras: &Extras) {
    for (k, v) in extras {
        if !map.contains_key(k) {
            map.insert(k.clone(), v.clone());
        }
    }
}
