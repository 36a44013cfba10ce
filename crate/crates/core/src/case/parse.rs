use super::CaseError;

/// Matrices of a MATPOWER case, unconverted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawCase {
    pub name: Option<String>,
    pub base_mva: f64,
    pub bus: Vec<Vec<f64>>,
    pub gen: Vec<Vec<f64>>,
    pub branch: Vec<Vec<f64>>,
    pub gencost: Vec<Vec<f64>>,
}

fn strip_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let mut in_str = false;
        for ch in line.chars() {
            match ch {
                '\'' => in_str = !in_str,
                '%' | '#' if !in_str => break,
                _ => {}
            }
            out.push(ch);
        }
        out.push('\n');
    }
    out
}

/// Body of `mpc.<key> = <body>;`, with matrix brackets kept.
fn find_assignment<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    let pat = format!("mpc.{key}");
    let mut from = 0;
    while let Some(pos) = text[from..].find(&pat) {
        let start = from + pos + pat.len();
        let rest = &text[start..];
        let trimmed = rest.trim_start();
        // Reject longer keys sharing the prefix, e.g. `bus_name` for `bus`.
        if let Some(eq) = trimmed.strip_prefix('=') {
            let body = eq.trim_start();
            if body.starts_with('[') {
                let close = body.find(']')?;
                return Some(&body[..=close]);
            }
            let end = body.find(';').unwrap_or(body.len());
            return Some(body[..end].trim());
        }
        from = start;
    }
    None
}

fn parse_number(tok: &str, context: &str) -> Result<f64, CaseError> {
    let t = tok.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "+inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    t.parse::<f64>()
        .map_err(|_| CaseError::BadNumber { token: t.to_string(), context: context.to_string() })
}

fn parse_matrix(body: &str, name: &'static str) -> Result<Vec<Vec<f64>>, CaseError> {
    let inner = body.trim().trim_start_matches('[').trim_end_matches(']');
    let mut rows = Vec::new();
    for chunk in inner.split(|c| c == ';' || c == '\n') {
        let toks: Vec<&str> =
            chunk.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect();
        if toks.is_empty() {
            continue;
        }
        let ctx = format!("{name} row {}", rows.len() + 1);
        let row = toks.iter().map(|t| parse_number(t, &ctx)).collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CaseError::EmptyMatrix(name));
    }
    let expected = rows[0].len();
    for (k, r) in rows.iter().enumerate() {
        if r.len() != expected {
            return Err(CaseError::RaggedRow { matrix: name, row: k + 1, found: r.len(), expected });
        }
    }
    Ok(rows)
}

fn required(text: &str, name: &'static str, min_cols: usize) -> Result<Vec<Vec<f64>>, CaseError> {
    let body = find_assignment(text, name).ok_or(CaseError::MissingMatrix(name))?;
    let m = parse_matrix(body, name)?;
    if m[0].len() < min_cols {
        return Err(CaseError::TooFewColumns { matrix: name, found: m[0].len(), min: min_cols });
    }
    Ok(m)
}

/// Parses the `mpc.baseMVA`, `mpc.bus`, `mpc.gen`, `mpc.branch` and
/// `mpc.gencost` assignments of a MATPOWER version-2 case.
pub fn parse_matpower_case(text: &str) -> Result<RawCase, CaseError> {
    let text = strip_comments(text);
    let name = text.lines().find_map(|l| {
        let l = l.trim();
        let rest = l.strip_prefix("function")?;
        let (_, rhs) = rest.split_once('=')?;
        Some(rhs.trim().to_string())
    });
    let base_mva = match find_assignment(&text, "baseMVA") {
        Some(b) => parse_number(b, "baseMVA")?,
        None => return Err(CaseError::MissingMatrix("baseMVA")),
    };
    if !(base_mva > 0.0) {
        return Err(CaseError::Invalid(format!("baseMVA must be positive, got {base_mva}")));
    }
    let bus = required(&text, "bus", 13)?;
    let gen = required(&text, "gen", 10)?;
    let branch = required(&text, "branch", 13)?;
    let gencost = required(&text, "gencost", 5)?;
    Ok(RawCase { name, base_mva, bus, gen, branch, gencost })
}
