//! Minimal XML well-formedness checker for test assertions: balanced
//! tags, quoted attributes, and properly escaped text. Deliberately
//! independent of the production serializer.

pub fn assert_well_formed(xml: &str) {
    check(xml).unwrap_or_else(|e| panic!("malformed XML: {e}\n---\n{xml}"));
}

pub fn check(xml: &str) -> Result<(), String> {
    let chars: Vec<char> = xml.chars().collect();
    let mut i = 0;
    let mut stack: Vec<String> = Vec::new();
    let mut seen_element = false;

    while i < chars.len() {
        match chars[i] {
            '<' => {
                if chars.get(i + 1) == Some(&'?') {
                    // Prolog: scan to '?>'.
                    i += 2;
                    while i < chars.len() && !(chars[i] == '?' && chars.get(i + 1) == Some(&'>')) {
                        i += 1;
                    }
                    if i >= chars.len() {
                        return Err("unterminated prolog".into());
                    }
                    i += 2;
                } else if chars.get(i + 1) == Some(&'/') {
                    i += 2;
                    let name = read_name(&chars, &mut i)?;
                    skip_ws(&chars, &mut i);
                    if chars.get(i) != Some(&'>') {
                        return Err(format!("closing tag '{name}' not terminated"));
                    }
                    i += 1;
                    match stack.pop() {
                        Some(open) if open == name => {}
                        Some(open) => return Err(format!("</{name}> closes <{open}>")),
                        None => return Err(format!("</{name}> without opener")),
                    }
                } else {
                    i += 1;
                    let name = read_name(&chars, &mut i)?;
                    let self_closing = read_attributes(&chars, &mut i)?;
                    if !self_closing {
                        stack.push(name);
                    }
                    seen_element = true;
                }
            }
            '&' => {
                read_entity(&chars, &mut i)?;
            }
            '>' => return Err("raw '>' outside a tag".into()),
            _ => i += 1,
        }
    }
    if !stack.is_empty() {
        return Err(format!("unclosed elements: {stack:?}"));
    }
    if !seen_element {
        return Err("no root element".into());
    }
    Ok(())
}

fn skip_ws(chars: &[char], i: &mut usize) {
    while *i < chars.len() && chars[*i].is_whitespace() {
        *i += 1;
    }
}

fn read_name(chars: &[char], i: &mut usize) -> Result<String, String> {
    let start = *i;
    while *i < chars.len() && (chars[*i].is_alphanumeric() || matches!(chars[*i], '_' | '-' | ':' | '.')) {
        *i += 1;
    }
    if *i == start {
        return Err("expected a tag name".into());
    }
    Ok(chars[start..*i].iter().collect())
}

/// Scan attributes up to '>' or '/>'. Returns true for self-closing tags.
fn read_attributes(chars: &[char], i: &mut usize) -> Result<bool, String> {
    loop {
        skip_ws(chars, i);
        match chars.get(*i) {
            Some('>') => {
                *i += 1;
                return Ok(false);
            }
            Some('/') => {
                if chars.get(*i + 1) == Some(&'>') {
                    *i += 2;
                    return Ok(true);
                }
                return Err("stray '/' in tag".into());
            }
            Some(_) => {
                read_name(chars, i)?;
                skip_ws(chars, i);
                if chars.get(*i) != Some(&'=') {
                    return Err("attribute without '='".into());
                }
                *i += 1;
                skip_ws(chars, i);
                let quote = match chars.get(*i) {
                    Some('"') => '"',
                    Some('\'') => '\'',
                    _ => return Err("attribute value not quoted".into()),
                };
                *i += 1;
                while *i < chars.len() && chars[*i] != quote {
                    match chars[*i] {
                        '<' => return Err("raw '<' in attribute value".into()),
                        '&' => read_entity(chars, i)?,
                        _ => *i += 1,
                    }
                }
                if chars.get(*i) != Some(&quote) {
                    return Err("unterminated attribute value".into());
                }
                *i += 1;
            }
            None => return Err("unterminated tag".into()),
        }
    }
}

fn read_entity(chars: &[char], i: &mut usize) -> Result<(), String> {
    let start = *i;
    *i += 1;
    while *i < chars.len() && chars[*i] != ';' && *i - start < 8 {
        *i += 1;
    }
    if chars.get(*i) != Some(&';') {
        return Err("unterminated entity".into());
    }
    let entity: String = chars[start + 1..*i].iter().collect();
    *i += 1;
    match entity.as_str() {
        "amp" | "lt" | "gt" | "quot" | "apos" => Ok(()),
        other if other.starts_with('#') => Ok(()),
        other => Err(format!("unknown entity '&{other};'")),
    }
}

#[cfg(test)]
mod tests {
    use super::check;

    #[test]
    fn accepts_simple_document() {
        assert!(check("<?xml version=\"1.0\"?>\n<a x=\"1\"><b/>text &amp; more</a>").is_ok());
    }

    #[test]
    fn rejects_mismatched_and_raw_specials() {
        assert!(check("<a></b>").is_err());
        assert!(check("<a>").is_err());
        assert!(check("<a>1 & 2</a>").is_err());
        assert!(check("<a x=unquoted></a>").is_err());
    }
}
