use std::fmt::Write as _;
use std::path::Path;

use super::BlobEnsemble;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::kernel::BlobProfile;

/// Writes `# t=.. N=.. eps=.. profile=..` then one `x y gamma` line per blob.
pub fn write_blob_snapshot(path: &Path, e: &BlobEnsemble) -> Result<()> {
    let mut s = String::with_capacity(64 * (e.len() + 1));
    writeln!(s, "# t={:?} N={} eps={:?} profile={}", e.t, e.len(), e.eps(), e.profile()).expect("string write");
    for (p, g) in e.positions().iter().zip(e.circulations()) {
        writeln!(s, "{:?} {:?} {:?}", p.x, p.y, g).expect("string write");
    }
    std::fs::write(path, s).map_err(|err| Error::io(path, err))
}

fn header_field<'a>(header: &'a str, key: &str) -> Option<&'a str> {
    header
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

pub fn read_blob_snapshot(path: &Path) -> Result<BlobEnsemble> {
    let text = std::fs::read_to_string(path).map_err(|err| Error::io(path, err))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .ok_or_else(|| Error::parse(path, "missing `#` header line"))?;
    let num = |key: &str| -> Result<f64> {
        header_field(header, key)
            .ok_or_else(|| Error::parse(path, format!("header lacks `{key}`")))?
            .parse::<f64>()
            .map_err(|err| Error::parse(path, format!("bad `{key}`: {err}")))
    };
    let t = num("t")?;
    let eps = num("eps")?;
    let n = num("N")? as usize;
    let profile: BlobProfile = header_field(header, "profile")
        .ok_or_else(|| Error::parse(path, "header lacks `profile`"))?
        .parse()?;
    let mut pos = Vec::with_capacity(n);
    let mut gam = Vec::with_capacity(n);
    for (k, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let v: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|err| Error::parse(path, format!("line {}: {err}", k + 2)))?;
        if v.len() != 3 {
            return Err(Error::parse(path, format!("line {}: expected `x y gamma`", k + 2)));
        }
        pos.push(Vec2::new(v[0], v[1]));
        gam.push(v[2]);
    }
    if pos.len() != n {
        return Err(Error::parse(path, format!("header says N={n} but {} blobs follow", pos.len())));
    }
    let mut e = BlobEnsemble::new(pos, gam, eps, profile)?;
    e.t = t;
    Ok(e)
}
