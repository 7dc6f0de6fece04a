use proptest::prelude::*;

use spokenir::corpus::{DefaultTokenizer, Document, Stoplist};
use spokenir::index::{build_index, IndexOptions, InvertedIndex};

fn collection() -> impl Strategy<Value = Vec<Vec<String>>> {
    let word = prop::sample::select(vec![
        "alpha", "beta", "gamma", "delta", "eps", "zeta", "eta",
    ]);
    prop::collection::vec(
        prop::collection::vec(word.prop_map(String::from), 1..12),
        1..10,
    )
}

fn docs(texts: &[Vec<String>]) -> Vec<Document> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut d = Document::new(format!("d{i:02}"));
            d.title = t.join(" ");
            d
        })
        .collect()
}

fn index(docs: &[Document]) -> InvertedIndex {
    build_index(
        docs,
        &IndexOptions::default(),
        &DefaultTokenizer,
        &Stoplist::empty(),
    )
    .unwrap()
}

fn query() -> impl Strategy<Value = Vec<String>> {
    let word = prop::sample::select(vec!["alpha", "beta", "gamma", "delta", "eps", "omega"]);
    prop::collection::vec(word.prop_map(String::from), 1..5)
}

proptest! {
    #[test]
    fn index_tables_are_consistent(texts in collection()) {
        let ds = docs(&texts);
        let idx = index(&ds);
        prop_assert_eq!(idx.n_docs(), ds.len());
        for t in idx.terms() {
            prop_assert_eq!(idx.df(t), idx.postings(t).len());
            prop_assert!(idx.postings(t).iter().all(|p| p.tf >= 1));
        }
        let mean = (0..ds.len()).map(|i| idx.doc_len(i).unwrap()).sum::<u64>() as f64 / ds.len() as f64;
        prop_assert_eq!(idx.avglen(), mean);
    }

    #[test]
    fn retrieval_is_the_sorted_prefix(texts in collection(), q in query(), cutoff in 1usize..12) {
        let ds = docs(&texts);
        let idx = index(&ds);
        let list = idx.retrieve("q", &q, cutoff);
        let mut all: Vec<(String, f64)> = (0..ds.len())
            .map(|i| (ds[i].id.clone(), idx.score_document(&q, i).unwrap()))
            .filter(|e| e.1 > 0.0)
            .collect();
        all.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        all.truncate(cutoff);
        prop_assert_eq!(list.len(), all.len());
        for (a, b) in list.entries.iter().zip(&all) {
            prop_assert_eq!(&a.0, &b.0);
            prop_assert!((a.1 - b.1).abs() < 1e-12);
        }
        prop_assert!(list.entries.windows(2).all(|w| w[0].1 >= w[1].1));
    }

    #[test]
    fn document_order_does_not_matter(texts in collection(), q in query(), seed in any::<u64>()) {
        let ds = docs(&texts);
        let mut shuffled = ds.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            shuffled.swap(i, (seed as usize ^ i.wrapping_mul(2654435761)) % (i + 1));
        }
        prop_assert_eq!(index(&ds).retrieve("q", &q, 1000), index(&shuffled).retrieve("q", &q, 1000));
    }

    #[test]
    fn scaling_all_lengths_keeps_scores(texts in collection(), q in query()) {
        // punctuation adds characters but no tokens, doubling every length
        let ds = docs(&texts);
        let padded: Vec<Document> = ds
            .iter()
            .map(|d| {
                let mut p = d.clone();
                let len = p.title.chars().count();
                p.title.push_str(&"-".repeat(len));
                p
            })
            .collect();
        let (a, b) = (index(&ds), index(&padded));
        prop_assert!((b.avglen() - 2.0 * a.avglen()).abs() < 1e-9);
        for i in 0..ds.len() {
            let (x, y) = (a.score_document(&q, i).unwrap(), b.score_document(&q, i).unwrap());
            prop_assert!((x - y).abs() < 1e-9, "{} vs {}", x, y);
        }
    }

    #[test]
    fn score_rises_with_tf_and_falls_with_df(texts in even_collection(), extra in 1usize..4) {
        // all words have five letters, so swapping words keeps every length
        let q = vec!["targt".to_string()];
        let mut base = texts.clone();
        base[0][0] = "targt".into();
        let score = |t: &[Vec<String>]| index(&docs(t)).score_document(&q, 0).unwrap();
        let a = score(&base);

        let mut more_tf = base.clone();
        for k in 1..=extra.min(base[0].len() - 1) {
            more_tf[0][k] = "targt".into();
        }
        if more_tf != base {
            prop_assert!(score(&more_tf) > a);
        }

        if base.len() >= 3 {
            let mut more_df = base.clone();
            let last = more_df.len() - 1;
            more_df[last][0] = "targt".into();
            prop_assert!(score(&more_df) < a);
        }
    }
}

fn even_collection() -> impl Strategy<Value = Vec<Vec<String>>> {
    let word = prop::sample::select(vec!["alpha", "betas", "gamma", "delta", "epsil"]);
    prop::collection::vec(
        prop::collection::vec(word.prop_map(String::from), 2..10),
        2..8,
    )
}
