/// Edit distance with unit insert, delete and substitute costs.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = (up + 1).min(row[j] + 1).min(diag + usize::from(x != y));
            diag = up;
        }
    }
    row[b.len()]
}

/// Levenshtein distance over event-type symbols divided by the longer
/// length; 0 for two empty signatures.
///
/// Note this normalisation is symmetric and bounded but not a metric:
/// `ab`, `aba`, `ba` break the triangle inequality.
pub fn signature_distance<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    levenshtein(a, b) as f64 / longest as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(signature_distance(&["a", "b", "c"], &["a", "b", "c"]), 0.0);
        assert_eq!(signature_distance(&["a", "b", "c"], &["a", "b", "d"]), 1.0 / 3.0);
        assert_eq!(signature_distance(&["a", "b"], &[]), 1.0);
        assert_eq!(signature_distance::<&str>(&[], &[]), 0.0);
    }

    #[test]
    fn normalised_distance_is_not_a_metric() {
        let (x, y, z) = (["a", "b"].as_slice(), ["a", "b", "a"].as_slice(), ["b", "a"].as_slice());
        assert_eq!(signature_distance(x, z), 1.0);
        assert!(signature_distance(x, z) > signature_distance(x, y) + signature_distance(y, z));
        // The raw edit distance still is one.
        assert!(levenshtein(x, z) <= levenshtein(x, y) + levenshtein(y, z));
    }

    #[test]
    fn known_distances() {
        let s = |t: &str| t.chars().collect::<Vec<_>>();
        assert_eq!(levenshtein(&s("kitten"), &s("sitting")), 3);
        assert_eq!(levenshtein(&s("flaw"), &s("lawn")), 2);
        assert_eq!(levenshtein(&s(""), &s("abc")), 3);
    }
}
