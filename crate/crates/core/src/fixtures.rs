//! Worked example phrases: the four shipped data files plus the two
//! parametrized families.

use crate::error::PhraseError;
use crate::phrase::{parse_nanophrase, Nanophrase};

const FILES: [(&str, &str); 4] = [
    ("ex32", include_str!("../fixtures/ex32.nano")),
    ("borromean", include_str!("../fixtures/borromean.nano")),
    ("ex4", include_str!("../fixtures/ex4.nano")),
    ("ex5", include_str!("../fixtures/ex5.nano")),
];

/// Names accepted by [`fixture_text`]; `torus` and `vlink` take `:n`.
pub const FIXTURE_NAMES: [&str; 6] = ["ex32", "borromean", "torus:n", "vlink:n", "ex4", "ex5"];

/// `A_1 B_1 ... A_n B_n | A_1 B_1 ... A_n B_n`, `|A_j| = b+`, `|B_j| = a+`.
pub fn torus_text(n: usize) -> String {
    let letters: Vec<String> = (1..=n).flat_map(|j| [format!("A_{j}:b+"), format!("B_{j}:a+")]).collect();
    let word: Vec<String> = (1..=n).flat_map(|j| [format!("A_{j}"), format!("B_{j}")]).collect();
    let word = word.join(" ");
    format!("letters: {}\nphrase: {word} | {word}\n", letters.join(" "))
}

/// `A_1 ... A_n | A_1 ... A_n`, `|A_j| = b+`.
pub fn vlink_text(n: usize) -> String {
    let letters: Vec<String> = (1..=n).map(|j| format!("A_{j}:b+")).collect();
    let word: Vec<String> = (1..=n).map(|j| format!("A_{j}")).collect();
    let word = word.join(" ");
    format!("letters: {}\nphrase: {word} | {word}\n", letters.join(" "))
}

/// Phrase file text for a fixture name, or `None` if unknown.
pub fn fixture_text(name: &str) -> Option<String> {
    if let Some((_, text)) = FILES.iter().find(|(n, _)| *n == name) {
        return Some(text.to_string());
    }
    let (family, n) = name.split_once(':')?;
    let n: usize = n.parse().ok().filter(|&n| n >= 1)?;
    match family {
        "torus" => Some(torus_text(n)),
        "vlink" => Some(vlink_text(n)),
        _ => None,
    }
}

pub fn fixture(name: &str) -> Option<Result<Nanophrase, PhraseError>> {
    fixture_text(name).map(|t| parse_nanophrase(&t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phrase::isomorphic;

    #[test]
    fn every_fixture_parses() {
        for name in ["ex32", "borromean", "ex4", "ex5", "torus:3", "vlink:2"] {
            assert!(fixture(name).unwrap().is_ok(), "{name}");
        }
        assert!(fixture("torus:0").is_none());
        assert!(fixture("nope").is_none());
    }

    #[test]
    fn small_members_of_families() {
        let t1 = fixture("torus:1").unwrap().unwrap();
        let ab = parse_nanophrase("letters: A:b+ B:a+\nphrase: AB|AB").unwrap();
        assert!(isomorphic(&t1, &ab));
        let ex5 = fixture("ex5").unwrap().unwrap();
        assert_eq!(ex5.component_count(), 4);
        assert!(ex5.component(4).unwrap().is_empty());
    }
}
