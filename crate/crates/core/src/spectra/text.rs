use thiserror::Error;

use super::{
    CarbonSpectrum, IonMode, MassPeak, MassSpectrum, Modality, Multiplicity, ProtonPeak, ProtonSpectrum, Spectrum,
    SpectrumError, WaveformModality, WaveformSpectrum,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("unknown tag '{0}'")]
    UnknownTag(String),
    #[error("opening tag <{open}> closed by '{close}'")]
    TagMismatch { open: String, close: String },
    #[error("<{0}> has an empty body")]
    EmptyBody(String),
    #[error("malformed header at byte {position}: {reason}")]
    MalformedHeader { position: usize, reason: String },
    #[error("malformed peak at byte {position}: {reason}")]
    MalformedPeak { position: usize, reason: String },
    #[error(transparent)]
    Invalid(#[from] SpectrumError),
}

const DELTA: &str = "δ";

/// Fixed-point formatting without a sign on values that round to zero.
fn fixed(v: f64, decimals: usize) -> String {
    let s = format!("{:.*}", decimals, v);
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

fn nmr_header(frequency: Option<f64>, solvent: Option<&str>) -> String {
    match (frequency, solvent) {
        (None, None) => "(unknown)".to_string(),
        (f, s) => {
            let f = f.map_or_else(|| "unknown".to_string(), |f| format!("{f} MHz"));
            format!("({}, {})", f, s.unwrap_or("unknown"))
        }
    }
}

fn proton_peak_text(p: &ProtonPeak) -> String {
    let mut s = format!("{} ({}, ", fixed(p.centroid(), 2), p.multiplicity());
    if !p.j_values().is_empty() {
        let js: Vec<String> = p.j_values().iter().map(|j| fixed(*j, 1)).collect();
        s.push_str(&format!("J = {} Hz, ", js.join(", ")));
    }
    s.push_str(&format!("{}H)", p.n_h()));
    s
}

/// Renders a spectrum in its tagged textual form.
pub fn serialize(spectrum: &Spectrum) -> String {
    let tag = spectrum.modality().tag();
    let body = match spectrum {
        Spectrum::Carbon(c) => {
            let shifts: Vec<String> = c.shifts().iter().map(|v| fixed(*v, 1)).collect();
            let head = nmr_header(c.frequency(), c.solvent());
            if shifts.is_empty() {
                format!("{head} {DELTA}")
            } else {
                format!("{head} {DELTA} {}", shifts.join(", "))
            }
        }
        Spectrum::Proton(h) => {
            let peaks: Vec<String> = h.peaks().iter().map(proton_peak_text).collect();
            format!("{} {DELTA} {}", nmr_header(h.frequency(), h.solvent()), peaks.join(", "))
        }
        Spectrum::Waveform(w) => {
            let (lo, hi) = w.axis_range();
            let points: Vec<String> =
                w.points().iter().map(|(p, i)| format!("{}({})", fixed(*p, 0), fixed(*i, 3))).collect();
            format!("({lo}~{hi}){}", points.join(" "))
        }
        Spectrum::Mass(m) => {
            let mut s = String::new();
            if let Some(ce) = m.collision_energy() {
                s.push_str(&format!("(CE={ce} eV)"));
            }
            let peaks: Vec<String> =
                m.peaks().iter().map(|p| format!("{}:{}", fixed(p.mz, 1), fixed(p.abundance, 1))).collect();
            s.push_str(&peaks.join(" "));
            s
        }
    };
    format!("<{tag}>{body}</{tag}>")
}

/// Plain decimal numbers only: no exponents, no `inf`/`nan`.
fn number(tok: &str) -> Option<f64> {
    let ok = !tok.is_empty()
        && tok.bytes().any(|b| b.is_ascii_digit())
        && tok
            .bytes()
            .enumerate()
            .all(|(i, b)| b.is_ascii_digit() || b == b'.' || (i == 0 && (b == b'-' || b == b'+')));
    if ok {
        tok.parse().ok()
    } else {
        None
    }
}

/// Splits on commas outside parentheses, returning trimmed pieces with their absolute offsets.
fn split_top_level(s: &str, base: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(trimmed(s, start, i, base));
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(trimmed(s, start, s.len(), base));
    out
}

fn trimmed(s: &str, start: usize, end: usize, base: usize) -> (usize, &str) {
    let piece = &s[start..end];
    let lead = piece.len() - piece.trim_start().len();
    (base + start + lead, piece.trim())
}

fn malformed(position: usize, reason: impl Into<String>) -> ParseError {
    ParseError::MalformedPeak { position, reason: reason.into() }
}

/// Splits a leading `( ... )` group off `body`, returning its contents and the remainder offset.
fn take_group(body: &str, base: usize) -> Result<Option<(&str, usize)>, ParseError> {
    if !body.starts_with('(') {
        return Ok(None);
    }
    match body.find(')') {
        Some(end) => Ok(Some((&body[1..end], end + 1))),
        None => Err(ParseError::MalformedHeader { position: base, reason: "unclosed '('".into() }),
    }
}

fn parse_nmr_header(inner: &str, position: usize) -> Result<(Option<f64>, Option<String>), ParseError> {
    if inner.trim() == "unknown" {
        return Ok((None, None));
    }
    let bad = |reason: &str| ParseError::MalformedHeader { position, reason: reason.to_string() };
    let (f, s) = inner.split_once(',').ok_or_else(|| bad("expected 'FREQ MHz, SOLVENT'"))?;
    let f = f.trim();
    let frequency = if f == "unknown" {
        None
    } else {
        let v = f.strip_suffix("MHz").map(str::trim_end).and_then(number).ok_or_else(|| bad("bad frequency"))?;
        Some(v)
    };
    let s = s.trim();
    let solvent = if s == "unknown" { None } else { Some(s.to_string()) };
    Ok((frequency, solvent))
}

/// NMR body prefix: optional header, then the δ marker. Returns the list text and its offset.
#[allow(clippy::type_complexity)]
fn nmr_prelude(body: &str, base: usize) -> Result<(Option<f64>, Option<String>, &str, usize), ParseError> {
    let (frequency, solvent, mut rest_at) = match take_group(body, base)? {
        Some((inner, consumed)) => {
            let (f, s) = parse_nmr_header(inner, base + 1)?;
            (f, s, consumed)
        }
        None => (None, None, 0),
    };
    let after = &body[rest_at..];
    rest_at += after.len() - after.trim_start().len();
    let Some(list) = body[rest_at..].strip_prefix(DELTA) else {
        return Err(ParseError::MalformedHeader { position: base + rest_at, reason: "expected 'δ'".into() });
    };
    rest_at += DELTA.len();
    Ok((frequency, solvent, list, base + rest_at))
}

fn parse_carbon(body: &str, base: usize) -> Result<Spectrum, ParseError> {
    let (frequency, solvent, list, at) = nmr_prelude(body, base)?;
    let mut shifts = Vec::new();
    if !list.trim().is_empty() {
        for (pos, tok) in split_top_level(list, at) {
            shifts.push(number(tok).ok_or_else(|| malformed(pos, format!("'{tok}' is not a shift")))?);
        }
    }
    Ok(CarbonSpectrum::new(shifts, frequency, solvent)?.into())
}

fn parse_proton_peak(tok: &str, pos: usize) -> Result<ProtonPeak, ParseError> {
    let open = tok.find('(').ok_or_else(|| malformed(pos, "expected '(' after the shift"))?;
    if !tok.ends_with(')') {
        return Err(malformed(pos, "expected ')' at the end of the peak"));
    }
    let centroid_tok = tok[..open].trim();
    let centroid = number(centroid_tok).ok_or_else(|| malformed(pos, format!("'{centroid_tok}' is not a shift")))?;
    let inner = &tok[open + 1..tok.len() - 1];
    let inner_at = pos + open + 1;

    let (shape, rest) = inner.split_once(',').ok_or_else(|| malformed(inner_at, "expected 'shape, nH'"))?;
    let multiplicity = Multiplicity::parse(shape.trim()).map_err(|e| malformed(inner_at, e.to_string()))?;
    let rest = rest.trim();
    let (j_values, count) = match rest.strip_prefix("J =") {
        Some(j) => {
            let (js, count) = j.rsplit_once("Hz,").ok_or_else(|| malformed(inner_at, "expected 'J = ... Hz,'"))?;
            let mut values = Vec::new();
            for v in js.split(',') {
                let v = v.trim();
                values.push(number(v).ok_or_else(|| malformed(inner_at, format!("'{v}' is not a coupling constant")))?);
            }
            (values, count.trim())
        }
        None => (Vec::new(), rest),
    };
    let n_h = count
        .strip_suffix('H')
        .filter(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|n| n.parse::<u32>().ok())
        .ok_or_else(|| malformed(inner_at, format!("'{count}' is not a proton count")))?;
    Ok(ProtonPeak::new(centroid, multiplicity, j_values, n_h)?)
}

fn parse_proton(body: &str, base: usize) -> Result<Spectrum, ParseError> {
    let (frequency, solvent, list, at) = nmr_prelude(body, base)?;
    let mut peaks = Vec::new();
    if !list.trim().is_empty() {
        for (pos, tok) in split_top_level(list, at) {
            peaks.push(parse_proton_peak(tok, pos)?);
        }
    }
    Ok(ProtonSpectrum::new(peaks, frequency, solvent)?.into())
}

fn parse_waveform(modality: WaveformModality, body: &str, base: usize) -> Result<Spectrum, ParseError> {
    let (inner, consumed) = take_group(body, base)?
        .ok_or_else(|| ParseError::MalformedHeader { position: base, reason: "expected '(LOW~HIGH)'".into() })?;
    let bad_range = || ParseError::MalformedHeader { position: base + 1, reason: format!("bad axis range '{inner}'") };
    let (lo, hi) = inner.split_once('~').ok_or_else(bad_range)?;
    let range = (number(lo.trim()).ok_or_else(bad_range)?, number(hi.trim()).ok_or_else(bad_range)?);

    let mut points = Vec::new();
    let rest = &body[consumed..];
    let mut offset = base + consumed;
    for tok in rest.split(' ') {
        let pos = offset;
        offset += tok.len() + 1;
        if tok.is_empty() {
            continue;
        }
        let point = tok
            .strip_suffix(')')
            .and_then(|t| t.split_once('('))
            .and_then(|(p, i)| Some((number(p)?, number(i)?)))
            .ok_or_else(|| malformed(pos, format!("expected 'position(intensity)', got '{tok}'")))?;
        points.push(point);
    }
    Ok(WaveformSpectrum::new(modality, range, points)?.into())
}

fn parse_mass(mode: IonMode, body: &str, base: usize) -> Result<Spectrum, ParseError> {
    let (collision_energy, consumed) = match take_group(body, base)? {
        Some((inner, consumed)) => {
            let ce = inner
                .strip_prefix("CE=")
                .and_then(|v| v.strip_suffix("eV"))
                .and_then(|v| number(v.trim()))
                .ok_or_else(|| ParseError::MalformedHeader {
                    position: base + 1,
                    reason: format!("expected 'CE=xx eV', got '{inner}'"),
                })?;
            (Some(ce), consumed)
        }
        None => (None, 0),
    };
    let mut peaks = Vec::new();
    let mut offset = base + consumed;
    for tok in body[consumed..].split(' ') {
        let pos = offset;
        offset += tok.len() + 1;
        if tok.is_empty() {
            continue;
        }
        let (mz, abundance) = tok
            .split_once(':')
            .and_then(|(m, a)| Some((number(m)?, number(a)?)))
            .ok_or_else(|| malformed(pos, format!("expected 'mz:abundance', got '{tok}'")))?;
        if abundance <= 0.0 {
            return Err(SpectrumError::BadAbundance(abundance).into());
        }
        peaks.push(MassPeak { mz, abundance });
    }
    // Text whose base peak is not printed as 100 is rescaled rather than rejected.
    Ok(MassSpectrum::normalized(mode, collision_energy, peaks)?.into())
}

/// Parses tagged spectrum text. Leading and trailing whitespace is ignored.
pub fn parse_spectrum(text: &str) -> Result<(Spectrum, Modality), ParseError> {
    let lead = text.len() - text.trim_start().len();
    let t = text.trim();
    let Some(after_lt) = t.strip_prefix('<') else {
        return Err(ParseError::UnknownTag(t.chars().take(16).collect()));
    };
    let gt = after_lt.find('>').ok_or_else(|| ParseError::UnknownTag(after_lt.chars().take(16).collect()))?;
    let tag = &after_lt[..gt];
    let modality = Modality::from_tag(tag).ok_or_else(|| ParseError::UnknownTag(tag.to_string()))?;

    let body_start = 1 + gt + 1;
    let rest = &t[body_start..];
    let closing = format!("</{tag}>");
    let body = match rest.strip_suffix(closing.as_str()) {
        Some(b) => b,
        None => {
            let close = rest.rfind("</").map_or_else(String::new, |i| rest[i..].to_string());
            return Err(ParseError::TagMismatch { open: tag.to_string(), close });
        }
    };
    if body.trim().is_empty() {
        return Err(ParseError::EmptyBody(tag.to_string()));
    }
    let base = lead + body_start;
    let spectrum = match modality {
        Modality::Carbon13 => parse_carbon(body, base)?,
        Modality::Proton1 => parse_proton(body, base)?,
        Modality::Ir => parse_waveform(WaveformModality::Ir, body, base)?,
        Modality::Raman => parse_waveform(WaveformModality::Raman, body, base)?,
        Modality::Uv => parse_waveform(WaveformModality::Uv, body, base)?,
        Modality::MsPositive => parse_mass(IonMode::Positive, body, base)?,
        Modality::MsNegative => parse_mass(IonMode::Negative, body, base)?,
    };
    Ok((spectrum, modality))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn carbon(shifts: &[f64], f: Option<f64>, s: Option<&str>) -> Spectrum {
        CarbonSpectrum::new(shifts.to_vec(), f, s.map(String::from)).unwrap().into()
    }

    #[test]
    fn carbon_text() {
        let s = carbon(&[21.0, 170.3, 128.1], Some(100.0), Some("CDCl3"));
        assert_eq!(serialize(&s), "<13C_NMR>(100 MHz, CDCl3) δ 170.3, 128.1, 21.0</13C_NMR>");
        assert_eq!(serialize(&carbon(&[], None, None)), "<13C_NMR>(unknown) δ</13C_NMR>");
        assert_eq!(serialize(&carbon(&[10.0], None, Some("DMSO-d6"))), "<13C_NMR>(unknown, DMSO-d6) δ 10.0</13C_NMR>");
        assert_eq!(serialize(&carbon(&[10.0], Some(125.77), None)), "<13C_NMR>(125.77 MHz, unknown) δ 10.0</13C_NMR>");
    }

    #[test]
    fn proton_text() {
        let h: Spectrum =
            ProtonSpectrum::new(vec![ProtonPeak::simple(7.26, 1).unwrap()], Some(400.0), Some("CDCl3".into()))
                .unwrap()
                .into();
        assert_eq!(serialize(&h), "<1H_NMR>(400 MHz, CDCl3) δ 7.26 (s, 1H)</1H_NMR>");

        let dd = ProtonPeak::new(7.1, Multiplicity::DoubletOfDoublets, vec![8.26, 2.0], 2).unwrap();
        let t = ProtonPeak::new(1.0, Multiplicity::Triplet, vec![7.1], 3).unwrap();
        let h: Spectrum = ProtonSpectrum::new(vec![t, dd], None, None).unwrap().into();
        let text = serialize(&h);
        assert_eq!(text, "<1H_NMR>(unknown) δ 7.10 (dd, J = 8.3, 2.0 Hz, 2H), 1.00 (t, J = 7.1 Hz, 3H)</1H_NMR>");
        let (back, m) = parse_spectrum(&text).unwrap();
        assert_eq!(m, Modality::Proton1);
        assert_eq!(serialize(&back), text);
    }

    #[test]
    fn mass_text() {
        let ms: Spectrum = MassSpectrum::new(
            IonMode::Positive,
            None,
            vec![MassPeak { mz: 55.0, abundance: 100.0 }, MassPeak { mz: 41.0, abundance: 12.0 }],
        )
        .unwrap()
        .into();
        assert_eq!(serialize(&ms), "<ms_positive>41.0:12.0 55.0:100.0</ms_positive>");
        let ce = "<ms_negative>(CE=20 eV)41.0:12.0 55.0:100.0</ms_negative>";
        let (back, m) = parse_spectrum(ce).unwrap();
        assert_eq!(m, Modality::MsNegative);
        assert_eq!(serialize(&back), ce);
    }

    #[test]
    fn mass_parse_rescales_to_base_peak() {
        let (s, _) = parse_spectrum("<ms_positive>41.0:6.0 55.0:50.0</ms_positive>").unwrap();
        let Spectrum::Mass(m) = s else { panic!() };
        assert_eq!(m.peaks()[1].abundance, 100.0);
        assert!((m.peaks()[0].abundance - 12.0).abs() < 1e-9);
    }

    #[test]
    fn waveform_text() {
        let (s, m) = parse_spectrum("<IR>(500~4000)</IR>").unwrap();
        assert_eq!(m, Modality::Ir);
        let Spectrum::Waveform(w) = &s else { panic!() };
        assert!(w.points().is_empty());
        assert_eq!(serialize(&s), "<IR>(500~4000)</IR>");

        let uv = "<UV>(200~400)254(1.000) 310(0.125)</UV>";
        let (s, m) = parse_spectrum(uv).unwrap();
        assert_eq!(m, Modality::Uv);
        assert_eq!(serialize(&s), uv);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_spectrum("<13C_NMR>δ abc</13C_NMR>"),
            Err(ParseError::MalformedPeak { position: 12, .. })
        ));
        assert_eq!(parse_spectrum("<NMR>δ 1</NMR>"), Err(ParseError::UnknownTag("NMR".into())));
        assert_eq!(
            parse_spectrum("<13C_NMR>δ 1.0</1H_NMR>"),
            Err(ParseError::TagMismatch { open: "13C_NMR".into(), close: "</1H_NMR>".into() })
        );
        assert_eq!(parse_spectrum("<IR>  </IR>"), Err(ParseError::EmptyBody("IR".into())));
        assert!(matches!(parse_spectrum("<IR>1700(1.0)</IR>"), Err(ParseError::MalformedHeader { .. })));
        assert!(matches!(parse_spectrum("<13C_NMR>δ 10.0, inf</13C_NMR>"), Err(ParseError::MalformedPeak { .. })));
        assert!(matches!(
            parse_spectrum("<1H_NMR>δ 7.26 (s, 0H)</1H_NMR>"),
            Err(ParseError::Invalid(SpectrumError::ZeroProtons))
        ));
        assert!(matches!(parse_spectrum("<1H_NMR>δ 7.26 (s)</1H_NMR>"), Err(ParseError::MalformedPeak { .. })));
        assert!(matches!(
            parse_spectrum("<ms_positive>41.0:0.0 55.0:100.0</ms_positive>"),
            Err(ParseError::Invalid(_))
        ));
        assert!(matches!(parse_spectrum("<IR>(500~4000)1700(1.0) junk</IR>"), Err(ParseError::MalformedPeak { .. })));
    }

    #[test]
    fn parser_accepts_any_order() {
        let (s, _) = parse_spectrum("<13C_NMR>(unknown) δ 21.0, 170.3</13C_NMR>").unwrap();
        assert_eq!(serialize(&s), "<13C_NMR>(unknown) δ 170.3, 21.0</13C_NMR>");
    }

    #[test]
    fn no_negative_zero() {
        assert_eq!(fixed(-0.04, 1), "0.0");
        assert_eq!(fixed(-0.05, 2), "-0.05");
        assert_eq!(fixed(-0.2, 0), "0");
    }
}
