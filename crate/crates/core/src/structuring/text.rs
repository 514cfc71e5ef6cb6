/// Edit distance over Unicode scalar values, two-row DP.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Best `(name, distance)` over all word/name pairs within `max_dist`.
/// Ties go to the lower name index, then the lower word index.
pub fn match_name(words: &[String], names: &[String], max_dist: usize) -> Option<(String, usize)> {
    let mut best: Option<(usize, usize, usize)> = None;
    for (ni, name) in names.iter().enumerate() {
        for (wi, word) in words.iter().enumerate() {
            let d = levenshtein(word, name);
            if d > max_dist {
                continue;
            }
            let key = (d, ni, wi);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
    }
    best.map(|(d, ni, _)| (names[ni].clone(), d))
}

/// Product whose keyword set has the most matches among `words`; ties go
/// to the smaller summed distance, then to dictionary order.
pub fn match_keywords(words: &[String], dictionaries: &[(String, Vec<String>)], max_dist: usize) -> Option<String> {
    let mut best: Option<(usize, usize, usize)> = None;
    for (pi, (_, keywords)) in dictionaries.iter().enumerate() {
        let mut count = 0;
        let mut total = 0;
        for kw in keywords {
            if let Some(d) = words
                .iter()
                .map(|w| levenshtein(w, kw))
                .filter(|&d| d <= max_dist)
                .min()
            {
                count += 1;
                total += d;
            }
        }
        if count == 0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((bc, bt, _)) => count > bc || (count == bc && total < bt),
        };
        if better {
            best = Some((count, total, pi));
        }
    }
    best.map(|(_, _, pi)| dictionaries[pi].0.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn distances() {
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", "abc"), 0);
        assert_eq!(levenshtein("flour", "floor"), 1);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
    }

    #[test]
    fn names() {
        let names = s(&["MUELLER", "MEIER"]);
        assert_eq!(match_name(&s(&["MUELLER"]), &names, 2), Some(("MUELLER".into(), 0)));
        assert_eq!(match_name(&s(&["MUELER"]), &names, 2), Some(("MUELLER".into(), 1)));
        assert_eq!(match_name(&s(&["XYZ"]), &names, 2), None);
    }

    #[test]
    fn keywords() {
        let dict = vec![("A".to_string(), s(&["chamomile"])), ("B".to_string(), s(&["mint"]))];
        assert_eq!(match_keywords(&s(&["chamomile", "tea"]), &dict, 2), Some("A".into()));
        assert_eq!(match_keywords(&s(&["chamomila"]), &dict, 2), Some("A".into()));
        assert_eq!(match_keywords(&s(&["zzz"]), &dict, 2), None);
    }

    #[test]
    fn keyword_ties_use_distance_then_order() {
        let dict = vec![("A".to_string(), s(&["tea"])), ("B".to_string(), s(&["tee"]))];
        assert_eq!(match_keywords(&s(&["tee"]), &dict, 2), Some("B".into()));
        let dict = vec![("A".to_string(), s(&["tea"])), ("B".to_string(), s(&["tea"]))];
        assert_eq!(match_keywords(&s(&["tea"]), &dict, 2), Some("A".into()));
    }
}
