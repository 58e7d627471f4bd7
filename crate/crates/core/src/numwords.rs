//! English long-form rendering of cardinal and ordinal numbers.
//!
//! Output words are space separated with no hyphens and no "and":
//! `2020` renders as `two thousand twenty`, `21st` as `twenty first`.

const ONES: [&str; 20] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
    "nineteen",
];

const TENS: [&str; 10] = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];

const SCALES: [&str; 12] = [
    "",
    "thousand",
    "million",
    "billion",
    "trillion",
    "quadrillion",
    "quintillion",
    "sextillion",
    "septillion",
    "octillion",
    "nonillion",
    "decillion",
];

fn push_below_thousand(n: u32, out: &mut Vec<&'static str>) {
    let hundreds = n / 100;
    let rest = n % 100;
    if hundreds > 0 {
        out.push(ONES[hundreds as usize]);
        out.push("hundred");
    }
    if rest >= 20 {
        out.push(TENS[(rest / 10) as usize]);
        if !rest.is_multiple_of(10) {
            out.push(ONES[(rest % 10) as usize]);
        }
    } else if rest > 0 {
        out.push(ONES[rest as usize]);
    }
}

/// Renders a string of ASCII digits as cardinal words.
///
/// Values too large for the scale table are read digit by digit.
pub fn cardinal_words(digits: &str) -> Vec<String> {
    let trimmed = digits.trim_start_matches('0');
    if trimmed.is_empty() {
        return vec![ONES[0].to_string()];
    }
    if trimmed.len() > 3 * SCALES.len() {
        return trimmed
            .bytes()
            .map(|b| ONES[(b - b'0') as usize].to_string())
            .collect();
    }
    // Group into thousands from the right.
    let bytes = trimmed.as_bytes();
    let mut groups = Vec::new();
    let mut end = bytes.len();
    while end > 0 {
        let start = end.saturating_sub(3);
        let g = bytes[start..end]
            .iter()
            .fold(0u32, |acc, b| acc * 10 + u32::from(b - b'0'));
        groups.push(g);
        end = start;
    }
    let mut out = Vec::new();
    for (scale, &g) in groups.iter().enumerate().rev() {
        if g == 0 {
            continue;
        }
        push_below_thousand(g, &mut out);
        if scale > 0 {
            out.push(SCALES[scale]);
        }
    }
    out.into_iter().map(str::to_string).collect()
}

fn ordinalize(word: &str) -> String {
    match word {
        "one" => "first".into(),
        "two" => "second".into(),
        "three" => "third".into(),
        "five" => "fifth".into(),
        "eight" => "eighth".into(),
        "nine" => "ninth".into(),
        "twelve" => "twelfth".into(),
        w if w.ends_with('y') => format!("{}ieth", &w[..w.len() - 1]),
        w => format!("{w}th"),
    }
}

/// Renders a string of ASCII digits as ordinal words (`3` -> `third`).
pub fn ordinal_words(digits: &str) -> Vec<String> {
    let mut words = cardinal_words(digits);
    if let Some(last) = words.last_mut() {
        *last = ordinalize(last);
    }
    words
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> String {
        cardinal_words(s).join(" ")
    }

    fn o(s: &str) -> String {
        ordinal_words(s).join(" ")
    }

    #[test]
    fn cardinals() {
        assert_eq!(c("0"), "zero");
        assert_eq!(c("3"), "three");
        assert_eq!(c("13"), "thirteen");
        assert_eq!(c("40"), "forty");
        assert_eq!(c("105"), "one hundred five");
        assert_eq!(c("2020"), "two thousand twenty");
        assert_eq!(c("1000000"), "one million");
        assert_eq!(c("1234567"), "one million two hundred thirty four thousand five hundred sixty seven");
        assert_eq!(c("007"), "seven");
    }

    #[test]
    fn ordinals() {
        assert_eq!(o("1"), "first");
        assert_eq!(o("2"), "second");
        assert_eq!(o("3"), "third");
        assert_eq!(o("4"), "fourth");
        assert_eq!(o("12"), "twelfth");
        assert_eq!(o("20"), "twentieth");
        assert_eq!(o("21"), "twenty first");
        assert_eq!(o("100"), "one hundredth");
    }

    #[test]
    fn very_long_numbers_read_digitwise() {
        let s = "1".repeat(40);
        assert_eq!(cardinal_words(&s).len(), 40);
    }
}
