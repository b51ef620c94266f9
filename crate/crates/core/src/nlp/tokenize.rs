/// Splits on whitespace, then splits every punctuation character into its
/// own token. Case is preserved.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let mut word = String::new();
        for ch in chunk.chars() {
            if ch.is_alphanumeric() {
                word.push(ch);
            } else {
                if !word.is_empty() {
                    tokens.push(std::mem::take(&mut word));
                }
                tokens.push(ch.to_string());
            }
        }
        if !word.is_empty() {
            tokens.push(word);
        }
    }
    tokens
}

/// A token without any alphanumeric character.
pub fn is_punctuation(token: &str) -> bool {
    !token.is_empty() && !token.chars().any(char::is_alphanumeric)
}

/// Index form of a word.
pub fn normalize_word(word: &str) -> String {
    word.to_lowercase()
}

/// Byte ranges of `tokens` within `text`, found left to right. Tokens that
/// cannot be located (e.g. normalized by an external tokenizer) are `None`.
pub fn align_tokens(text: &str, tokens: &[String]) -> Vec<Option<(usize, usize)>> {
    let mut cursor = 0;
    tokens
        .iter()
        .map(|tok| {
            let surface = unescape_bracket(tok);
            if surface.is_empty() {
                return None;
            }
            let found = text[cursor..].find(surface.as_str())?;
            let start = cursor + found;
            // Don't skip over more than a little text to match a token.
            if text[cursor..start].chars().any(|c| !c.is_whitespace()) && found > 16 {
                return None;
            }
            cursor = start + surface.len();
            Some((start, cursor))
        })
        .collect()
}

pub(crate) fn unescape_bracket(token: &str) -> String {
    match token {
        "-LRB-" => "(".into(),
        "-RRB-" => ")".into(),
        "-LSB-" => "[".into(),
        "-RSB-" => "]".into(),
        "-LCB-" => "{".into(),
        "-RCB-" => "}".into(),
        other => other.to_string(),
    }
}
