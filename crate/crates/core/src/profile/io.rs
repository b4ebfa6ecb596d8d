//! CSV (`s,r,h`) and JSON serialization of profiles.

use std::io::{Read, Write};
use std::path::Path;

use super::ProfileCurve;
use crate::error::{Error, Result};

/// Parse CSV with header `s,r,h`. Axis flags are inferred from the end radii.
pub fn read_csv<R: Read>(reader: R) -> Result<ProfileCurve> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols != ["s", "r", "h"] {
        return Err(Error::Parse { line: 1, msg: format!("expected header `s,r,h`, found `{}`", cols.join(",")) });
    }
    let (mut s, mut r, mut h) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != 3 {
            return Err(Error::Parse { line, msg: format!("expected 3 fields, found {}", rec.len()) });
        }
        let mut vals = [0.0; 3];
        for (k, field) in rec.iter().enumerate() {
            vals[k] = field
                .parse::<f64>()
                .map_err(|e| Error::Parse { line, msg: format!("field {} `{field}`: {e}", k + 1) })?;
        }
        s.push(vals[0]);
        r.push(vals[1]);
        h.push(vals[2]);
    }
    ProfileCurve::detect(s, r, h)
}

/// Write CSV with header `s,r,h`, LF line endings, shortest round-trip floats.
pub fn write_csv<W: Write>(curve: &ProfileCurve, mut w: W) -> Result<()> {
    let mut out = String::with_capacity(curve.len() * 48);
    out.push_str("s,r,h\n");
    for i in 0..curve.len() {
        out.push_str(&format!("{:?},{:?},{:?}\n", curve.s[i], curve.r[i], curve.h[i]));
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_json<R: Read>(reader: R) -> Result<ProfileCurve> {
    let c: ProfileCurve = serde_json::from_reader(reader).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
    // re-run validation
    let breaks = c.breaks.clone();
    let jets = c.jets.clone();
    let break_jets = c.break_jets.clone();
    let meta = c.meta.clone();
    let mut v = ProfileCurve::new(c.s, c.r, c.h, c.closed_on_axis)?.with_breaks(breaks)?;
    if let Some(j) = jets {
        v = v.with_jets(j)?;
    }
    if !break_jets.is_empty() {
        v = v.with_break_jets(break_jets)?;
    }
    v.meta = meta;
    Ok(v)
}

pub fn write_json<W: Write>(curve: &ProfileCurve, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, curve)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Load a profile, choosing the format from the extension (`.json` or CSV).
pub fn load(path: &Path) -> Result<ProfileCurve> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let rd = std::io::BufReader::new(f);
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => read_json(rd),
        _ => read_csv(rd),
    }
}

/// Write `bytes` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
