/// Words that end in a period without ending a sentence.
const ABBREVIATIONS: &[&str] = &[
    "approx", "apr", "aug", "ave", "co", "corp", "dec", "dept", "dr", "e.g", "est", "feb", "fig",
    "i.e", "inc", "jan", "jr", "jul", "jun", "lb", "lbs", "ltd", "mar", "max", "min", "mr", "mrs",
    "ms", "nov", "oct", "oz", "prof", "sep", "sept", "sr", "st", "vol", "vs",
];

const TERMINATORS: &[char] = &['.', '!', '?'];
const CLOSERS: &[char] = &['"', '\'', ')', ']', '\u{201d}', '\u{2019}'];

/// Splits text into sentences at `.`, `!`, `?` and newlines.
///
/// A terminator run only ends a sentence when followed by whitespace or the
/// end of input, so decimals and URLs stay intact. A lone period after a
/// guarded abbreviation (`vs.`, `e.g.`, `Dr.`) does not split.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;

    let push = |from: usize, to: usize, out: &mut Vec<String>| {
        let s: String = chars[from..to].iter().collect();
        let s = s.trim();
        if !s.is_empty() {
            out.push(s.to_string());
        }
    };

    while i < n {
        let c = chars[i];
        if c == '\n' {
            push(start, i, &mut out);
            start = i + 1;
            i += 1;
            continue;
        }
        if TERMINATORS.contains(&c) {
            let mut j = i;
            while j + 1 < n && TERMINATORS.contains(&chars[j + 1]) {
                j += 1;
            }
            let lone_period = c == '.' && j == i;
            while j + 1 < n && CLOSERS.contains(&chars[j + 1]) {
                j += 1;
            }
            let at_gap = j + 1 >= n || chars[j + 1].is_whitespace();
            if at_gap && !(lone_period && is_guarded(&chars[start..i])) {
                push(start, j + 1, &mut out);
                start = j + 1;
            }
            i = j + 1;
            continue;
        }
        i += 1;
    }
    push(start, n, &mut out);
    out
}

fn is_guarded(before: &[char]) -> bool {
    let word_start = before
        .iter()
        .rposition(|c| c.is_whitespace())
        .map_or(0, |p| p + 1);
    let word: String = before[word_start..]
        .iter()
        .skip_while(|c| !c.is_alphanumeric())
        .collect::<String>()
        .to_lowercase();
    !word.is_empty() && ABBREVIATIONS.contains(&word.as_str())
}
