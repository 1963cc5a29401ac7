use dnatok::bpe::{bpe_encode, bpe_train, oracle, MergeTable, TrainConfig};
use proptest::prelude::*;

// Mixes uniform sequences with low-entropy ones so merges chain several levels deep.
fn sequence() -> impl Strategy<Value = String> {
    prop_oneof![
        proptest::string::string_regex("[ACGT]{1,300}").unwrap(),
        proptest::string::string_regex("[AC]{1,200}").unwrap(),
        proptest::string::string_regex("(ACG|TTA|GG){1,60}").unwrap(),
    ]
}

fn corpus() -> impl Strategy<Value = Vec<String>> {
    proptest::collection::vec(sequence(), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fast_trainer_matches_oracle(corpus in corpus(), cycles in 0usize..30, min in 1u64..4) {
        let config = TrainConfig { cycles, min_pair_count: min };
        let fast = bpe_train(&corpus, config).unwrap();
        let slow = oracle::train(&corpus, config).unwrap();
        prop_assert_eq!(fast.rules(), slow.rules());
        prop_assert_eq!(fast.early_stop(), slow.early_stop());
        prop_assert_eq!(fast.digest().unwrap(), slow.digest().unwrap());
    }

    #[test]
    fn encode_matches_rank_replay(corpus in corpus(), probe in sequence(), cycles in 0usize..30) {
        let table = bpe_train(&corpus, TrainConfig { cycles, min_pair_count: 1 }).unwrap();
        prop_assert_eq!(bpe_encode(&probe, &table), oracle::encode(&probe, &table));
    }

    #[test]
    fn encoding_round_trips(corpus in corpus(), probe in sequence()) {
        let table = bpe_train(&corpus, TrainConfig::new(25)).unwrap();
        let tokens = bpe_encode(&probe, &table);
        prop_assert_eq!(tokens.concat(), probe);
        prop_assert!(tokens.iter().all(|t| table.token_id(t).is_some()));
    }

    #[test]
    fn more_rules_never_lengthen_encoding(corpus in corpus(), probe in sequence()) {
        let table = bpe_train(&corpus, TrainConfig { cycles: 25, min_pair_count: 1 }).unwrap();
        let mut prev = usize::MAX;
        for n in 0..=table.cycles() {
            let len = bpe_encode(&probe, &table.prefix(n)).len();
            prop_assert!(len <= prev, "prefix {} gave {} tokens after {}", n, len, prev);
            prev = len;
        }
    }

    #[test]
    fn every_rule_shortens_the_training_corpus(corpus in corpus()) {
        // Encoding replays training, and each merge fires at least once.
        let table = bpe_train(&corpus, TrainConfig::new(20)).unwrap();
        let before: usize = corpus.iter().map(String::len).sum();
        let after: usize = corpus.iter().map(|s| bpe_encode(s, &table).len()).sum();
        prop_assert!(after + table.cycles() <= before);
    }

    #[test]
    fn serialization_round_trips(corpus in corpus(), cycles in 0usize..20) {
        let table = bpe_train(&corpus, TrainConfig::new(cycles)).unwrap();
        let back = MergeTable::from_json(&table.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &table);
        prop_assert_eq!(back.to_json().unwrap(), table.to_json().unwrap());
    }
}

#[test]
fn oracle_refuses_large_corpora() {
    let big = vec!["ACGT".repeat(2_600)];
    assert!(matches!(
        oracle::train(&big, TrainConfig::new(1)),
        Err(dnatok::Error::CorpusTooLarge { .. })
    ));
}

#[test]
fn rules_are_derivable_from_earlier_tokens() {
    let corpus = ["ACGTACGTTTACGACGACGGGA".repeat(5)];
    let table = bpe_train(&corpus, TrainConfig::new(15)).unwrap();
    let mut known: Vec<String> = ["A", "C", "G", "T"].map(String::from).to_vec();
    for (i, r) in table.rules().iter().enumerate() {
        assert_eq!(r.rank, i);
        assert!(known.contains(&r.left) && known.contains(&r.right));
        assert_eq!(r.result, format!("{}{}", r.left, r.right));
        known.push(r.result.clone());
    }
}
