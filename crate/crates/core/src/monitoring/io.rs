//! Columnar text format for paths.
//!
//! ```text
//! # band=1.358
//! # scaling=expected
//! t,component_1,component_2,kind,n
//! 0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,canonical,200
//! ...
//! ```
//!
//! Numbers carry 17 significant digits, so values read back bit for bit.
//! Lines starting with `#` are metadata; unknown keys are ignored.

use std::io::{BufRead, Write};

use super::{MonitoringPath, PathKind, Scaling, Standardizer, WeightTag, BRIDGE_BAND_95};
use crate::error::{Error, Result};

fn scaling_label(s: &Scaling) -> String {
    match s {
        Scaling::EigenRoot(which) => which.as_str().to_string(),
        Scaling::CustomRoot => "custom-root".into(),
        Scaling::InfluenceScale(tau) => format!("influence:{tau:.16e}"),
        Scaling::Unrecorded => "unrecorded".into(),
    }
}

fn parse_scaling(s: &str) -> Result<Scaling> {
    Ok(match s {
        "custom-root" => Scaling::CustomRoot,
        "unrecorded" => Scaling::Unrecorded,
        _ => match s.strip_prefix("influence:") {
            Some(tau) => Scaling::InfluenceScale(
                tau.parse()
                    .map_err(|_| Error::Parse(format!("bad influence scale `{tau}`")))?,
            ),
            None => Scaling::EigenRoot(
                s.parse::<Standardizer>()
                    .map_err(|e| Error::Parse(e.to_string()))?,
            ),
        },
    })
}

fn parse_weight(s: &str) -> Result<WeightTag> {
    Ok(match s {
        "constant" => WeightTag::Constant,
        "trend" => WeightTag::Trend,
        "custom" => WeightTag::Custom,
        _ => {
            let a = s
                .strip_prefix("jump(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|a| a.parse().ok())
                .ok_or_else(|| Error::Parse(format!("unknown weight tag `{s}`")))?;
            WeightTag::Jump(a)
        }
    })
}

impl MonitoringPath {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "# band={BRIDGE_BAND_95}")?;
        writeln!(out, "# scaling={}", scaling_label(self.scaling()))?;
        if let Some(tag) = self.weight() {
            writeln!(out, "# weight={tag}")?;
        }
        write!(out, "t")?;
        for j in 1..=self.p() {
            write!(out, ",component_{j}")?;
        }
        writeln!(out, ",kind,n")?;
        let kind = self.kind().as_str();
        for k in 0..=self.n() {
            write!(out, "{:.16e}", self.time(k))?;
            for v in self.row(k) {
                write!(out, ",{v:.16e}")?;
            }
            writeln!(out, ",{kind},{}", self.n())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("output is ASCII")
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<MonitoringPath> {
        let mut scaling = Scaling::Unrecorded;
        let mut weight = None;
        let mut header: Option<usize> = None;
        let mut kind = None;
        let mut declared_n = None;
        let mut values = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim_end();
            let at = |msg: String| Error::Parse(format!("line {}: {msg}", lineno + 1));
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((key, value)) = meta.trim().split_once('=') {
                    match key {
                        "scaling" => {
                            scaling = parse_scaling(value).map_err(|e| at(e.to_string()))?
                        }
                        "weight" => {
                            weight = Some(parse_weight(value).map_err(|e| at(e.to_string()))?)
                        }
                        _ => {}
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let Some(p) = header else {
                if fields.len() < 4
                    || fields[0] != "t"
                    || fields[fields.len() - 2..] != ["kind", "n"]
                {
                    return Err(at(format!("unexpected header `{line}`")));
                }
                header = Some(fields.len() - 3);
                continue;
            };
            if fields.len() != p + 3 {
                return Err(at(format!(
                    "expected {} fields, found {}",
                    p + 3,
                    fields.len()
                )));
            }
            for (col, cell) in fields[1..=p].iter().enumerate() {
                values
                    .push(cell.parse::<f64>().map_err(|_| {
                        at(format!("column {}: `{cell}` is not a number", col + 2))
                    })?);
            }
            let row_kind: PathKind = fields[p + 1]
                .parse()
                .map_err(|e: Error| at(e.to_string()))?;
            let row_n: usize = fields[p + 2]
                .parse()
                .map_err(|_| at(format!("`{}` is not a sample size", fields[p + 2])))?;
            if *kind.get_or_insert(row_kind) != row_kind
                || *declared_n.get_or_insert(row_n) != row_n
            {
                return Err(at("kind and n must be constant down the file".into()));
            }
        }
        let p = header.ok_or_else(|| Error::Parse("missing header row".into()))?;
        let kind = kind.ok_or_else(|| Error::Parse("path file has no rows".into()))?;
        let path = MonitoringPath::from_values(kind, p, values, scaling)?;
        if Some(path.n()) != declared_n {
            return Err(Error::Parse(format!(
                "file declares n = {} but holds {} increments",
                declared_n.unwrap_or(0),
                path.n()
            )));
        }
        Ok(match weight {
            Some(tag) => path.with_weight(tag),
            None => path,
        })
    }
}
