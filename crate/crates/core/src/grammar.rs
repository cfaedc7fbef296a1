//! `key=value` parameter lists shared by the model and weight grammars.

use crate::error::{Error, Result};

/// Parse `k1=v1,k2=v2,...` into ordered pairs. An empty string yields no pairs.
pub fn parse_params(s: &str) -> Result<Vec<(String, f64)>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let mut out: Vec<(String, f64)> = Vec::new();
    for part in s.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{part}`")))?;
        let k = k.trim().to_string();
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("`{v}` is not a number (key `{k}`)")))?;
        if out.iter().any(|(seen, _)| *seen == k) {
            return Err(Error::Parse(format!("duplicate key `{k}`")));
        }
        out.push((k, v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs() {
        let p = parse_params("c=2, gamma=1").unwrap();
        assert_eq!(p, vec![("c".into(), 2.0), ("gamma".into(), 1.0)]);
        assert!(parse_params("").unwrap().is_empty());
        assert!(parse_params("c").is_err());
        assert!(parse_params("c=x").is_err());
        assert!(parse_params("c=1,c=2").is_err());
    }
}
