//! Naive token and sequence accuracy.

/// One token per `char`.
pub fn char_tokens(s: &str) -> Vec<String> {
    s.chars().map(|c| c.to_string()).collect()
}

/// Bracket atoms, `Cl`, `Br` and two-digit `%` ring labels as single tokens.
/// `None` when a bracket is never closed.
pub fn smiles_atom_tokens(s: &str) -> Option<Vec<String>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let mut end = i + 1;
        if c == '[' {
            end = i + 1 + chars[i + 1..].iter().position(|&x| x == ']')? + 1;
        } else if (c == 'C' && chars.get(i + 1) == Some(&'l')) || (c == 'B' && chars.get(i + 1) == Some(&'r')) {
            end = i + 2;
        } else if c == '%' && chars.len() >= i + 3 && chars[i + 1].is_ascii_digit() && chars[i + 2].is_ascii_digit() {
            end = i + 3;
        }
        out.push(chars[i..end].iter().collect());
        i = end;
    }
    Some(out)
}

/// Positional matches divided by truth length; `None` for an empty truth.
pub fn token_accuracy(truth: &[String], pred: &[String]) -> Option<f64> {
    if truth.is_empty() {
        return None;
    }
    let mut hits = 0;
    for k in 0..truth.len() {
        if k < pred.len() && truth[k] == pred[k] {
            hits += 1;
        }
    }
    Some(hits as f64 / truth.len() as f64)
}

/// Fraction of pairs judged equal by `same`; `None` for no pairs.
pub fn sequence_accuracy(pairs: &[(String, String)], same: &dyn Fn(&str, &str) -> bool) -> Option<f64> {
    if pairs.is_empty() {
        return None;
    }
    let hits = pairs.iter().filter(|(t, p)| same(t, p)).count();
    Some(hits as f64 / pairs.len() as f64)
}
