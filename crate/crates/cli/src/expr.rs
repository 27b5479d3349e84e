//! Tiny parser for tangent-vector expressions like `e1`, `e1+e3`,
//! `sqrt2*e1 + sqrt3*e3`, `-0.5e2 + 3/4 e4`.

use nalgebra::DVector;

/// Parses a linear combination of frame vectors e1..e<n> into coordinates.
pub fn parse_vector(input: &str, n: usize) -> Result<DVector<f64>, String> {
    let cleaned: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err("empty expression".into());
    }
    let mut out = DVector::zeros(n);
    let mut term = String::new();
    let mut terms: Vec<String> = Vec::new();
    for c in cleaned.chars() {
        match c {
            '+' | '-'
                if !term.is_empty()
                    && !term.ends_with('(')
                    && !term.ends_with('/')
                    && !term.ends_with('*') =>
            {
                terms.push(term.clone());
                term.clear();
                if c == '-' {
                    term.push('-');
                }
            }
            '+' => {}
            _ => term.push(c),
        }
    }
    if !term.is_empty() {
        terms.push(term);
    }
    for t in terms {
        let (coef, index) = parse_term(&t, n)?;
        out[index] += coef;
    }
    Ok(out)
}

fn parse_term(term: &str, n: usize) -> Result<(f64, usize), String> {
    let e_pos = term
        .find('e')
        .ok_or_else(|| format!("term `{term}` has no frame vector e<k>"))?;
    // guard against scientific notation like 1e3 being read as a coefficient:
    // the frame marker is the last `e` followed only by digits
    let e_pos = term
        .char_indices()
        .filter(|(_, c)| *c == 'e')
        .map(|(i, _)| i)
        .rev()
        .find(|&i| term[i + 1..].chars().all(|c| c.is_ascii_digit()) && !term[i + 1..].is_empty())
        .ok_or_else(|| format!("term `{term}` has no frame vector e<k>"))
        .unwrap_or(e_pos);
    let idx: usize = term[e_pos + 1..]
        .parse()
        .map_err(|_| format!("bad frame index in `{term}`"))?;
    if idx == 0 || idx > n {
        return Err(format!("frame index e{idx} out of range 1..={n}"));
    }
    let coef_str = term[..e_pos].trim_end_matches('*');
    let coef = parse_coefficient(coef_str)?;
    Ok((coef, idx - 1))
}

fn parse_coefficient(s: &str) -> Result<f64, String> {
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => {
            let (sign, body) = if let Some(rest) = s.strip_prefix('-') {
                (-1.0, rest)
            } else if let Some(rest) = s.strip_prefix('+') {
                (1.0, rest)
            } else {
                (1.0, s)
            };
            let value = if let Some(arg) = body.strip_prefix("sqrt") {
                let arg = arg.trim_start_matches('(').trim_end_matches(')');
                let x = parse_rational(arg)?;
                if x < 0.0 {
                    return Err(format!("sqrt of negative value in `{s}`"));
                }
                x.sqrt()
            } else {
                parse_rational(body)?
            };
            Ok(sign * value)
        }
    }
}

fn parse_rational(s: &str) -> Result<f64, String> {
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num.parse().map_err(|_| format!("bad number `{num}`"))?;
        let d: f64 = den.parse().map_err(|_| format!("bad number `{den}`"))?;
        if d == 0.0 {
            return Err("division by zero".into());
        }
        Ok(n / d)
    } else {
        s.parse().map_err(|_| format!("bad number `{s}`"))
    }
}

/// Parses a list of vector expressions separated by `;` or `,` at the top
/// level (commas inside a term never occur).
pub fn parse_vector_list(input: &str, n: usize) -> Result<Vec<DVector<f64>>, String> {
    input
        .split([';', ','])
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_vector(s, n))
        .collect()
}
