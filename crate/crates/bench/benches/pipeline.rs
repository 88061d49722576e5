use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use traitstat_bench::{synthetic_rows, synthetic_tsv};
use traitstat_core::analysis::build_analysis_rows;
use traitstat_core::chaid::{grow_tree, ChaidParams};
use traitstat_core::ingest::{parse_dataset, DatasetManifest};
use traitstat_core::regress::{fit_factor_model, MissingPolicy};
use traitstat_core::scoring::{score_trait, Key, KeyTable};
use traitstat_core::types::{FactorSet, Trait};

const MANIFEST: &str = "
dataset_id = sample1
delimiter = tab
key_table = markers.codebook
country_column = country
items.E = E1 E2 E3 E4 E5 E6 E7 E8 E9 E10
items.N = N1 N2 N3 N4 N5 N6 N7 N8 N9 N10
items.A = A1 A2 A3 A4 A5 A6 A7 A8 A9 A10
items.C = C1 C2 C3 C4 C5 C6 C7 C8 C9 C10
items.O = O1 O2 O3 O4 O5 O6 O7 O8 O9 O10
demographic.growth = age
demographic.gender = gender
demographic.hand = hand
demographic.engnat = engnat
recode.gender = 1:1 2:2 3:3
recode.hand = 1:1 2:2 3:3
recode.engnat = 1:1 2:2
";

const KEYS: &str = "
key_table_id = markers.codebook
keys.E = E1:+ E2:- E3:+ E4:- E5:+ E6:- E7:+ E8:- E9:+ E10:-
keys.N = N1:+ N2:- N3:+ N4:- N5:+ N6:+ N7:+ N8:+ N9:+ N10:+
keys.A = A1:- A2:+ A3:- A4:+ A5:- A6:+ A7:- A8:+ A9:+ A10:+
keys.C = C1:+ C2:- C3:+ C4:- C5:+ C6:- C7:+ C8:- C9:+ C10:+
keys.O = O1:+ O2:- O3:+ O4:- O5:+ O6:- O7:+ O8:+ O9:+ O10:+
";

fn bench_scoring(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let vectors: Vec<([i64; 10], [Key; 10])> = (0..10_000)
        .map(|_| {
            let items = std::array::from_fn(|_| rng.gen_range(1..=5));
            let keys = std::array::from_fn(|_| if rng.gen() { Key::Plus } else { Key::Minus });
            (items, keys)
        })
        .collect();
    let mut g = c.benchmark_group("scoring");
    g.throughput(Throughput::Elements(vectors.len() as u64));
    g.bench_function("score_trait_10k", |b| {
        b.iter(|| {
            vectors
                .iter()
                .filter_map(|(items, keys)| score_trait(items, keys))
                .map(|s| s as u64)
                .sum::<u64>()
        })
    });
    g.finish();
}

fn bench_ingest(c: &mut Criterion) {
    let manifest = DatasetManifest::parse(MANIFEST).unwrap();
    let key_table = KeyTable::parse(KEYS).unwrap();
    let text = synthetic_tsv(11, 5_000);
    let mut g = c.benchmark_group("ingest");
    g.throughput(Throughput::Elements(5_000));
    g.bench_function("parse_5k_rows", |b| {
        b.iter(|| parse_dataset(&manifest, &text).unwrap().n_rows())
    });
    let table = parse_dataset(&manifest, &text).unwrap();
    g.bench_function("build_rows_5k", |b| {
        b.iter(|| build_analysis_rows(&table, &manifest, &key_table).unwrap().len())
    });
    g.finish();
}

fn bench_regress(c: &mut Criterion) {
    let rows = synthetic_rows(5, 10_000);
    let mut g = c.benchmark_group("regress");
    g.bench_function("family_model_10k_rows", |b| {
        b.iter(|| {
            fit_factor_model(&rows, FactorSet::Family, Trait::C, MissingPolicy::ZeroInclude)
                .unwrap()
                .r2
        })
    });
    g.finish();
}

fn bench_tree(c: &mut Criterion) {
    let rows = synthetic_rows(9, 10_000);
    let params = ChaidParams::default();
    let mut g = c.benchmark_group("tree");
    g.sample_size(20);
    g.bench_function("grow_family_10k_rows", |b| {
        b.iter_batched(
            || (),
            |_| {
                grow_tree(&rows, Trait::E, FactorSet::Family.predictors(), &params)
                    .unwrap()
                    .nodes
                    .len()
            },
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

criterion_group!(benches, bench_scoring, bench_ingest, bench_regress, bench_tree);
criterion_main!(benches);
