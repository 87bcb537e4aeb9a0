use asmcap_core::cam::{read_array_image, write_array_image, ArrayConfig, ArrayImage, NoiseModel};
use asmcap_core::eval::{build_dataset, DatasetSpec, EvalPlan, Evaluator, Strategy};
use asmcap_core::genome::{load_fasta, read_reads_file, segment_reference, write_fasta, write_reads_file, Condition};
use asmcap_core::oracle::edit_distance;

fn spec() -> DatasetSpec {
    DatasetSpec {
        condition: Condition::B,
        n_reads: 48,
        n_rows: 96,
        read_length: 128,
        seed: 21,
        ..Default::default()
    }
}

#[test]
fn files_roundtrip_into_identical_report() {
    let (store, reads) = build_dataset(&spec()).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let fa = dir.path().join("ref.fa");
    let mut buf = Vec::new();
    write_fasta(&mut buf, "ref", store.reference(), 60).unwrap();
    std::fs::write(&fa, buf).unwrap();
    let loaded = load_fasta(&fa).unwrap();
    assert_eq!(&loaded.sequence, store.reference());
    let store2 = segment_reference(loaded.sequence, 128).unwrap();

    let image = ArrayImage::from_store(&store2, ArrayConfig::default());
    write_array_image(dir.path().join("a.img"), &image).unwrap();
    let image2 = read_array_image(dir.path().join("a.img")).unwrap();
    assert_eq!(image2.segments(), image.segments());

    write_reads_file(dir.path().join("r.tsv"), &reads).unwrap();
    let reads2 = read_reads_file(dir.path().join("r.tsv"), image2.segments()).unwrap();
    assert_eq!(reads2.reads, reads.reads);
    assert_eq!(reads2.meta, reads.meta);

    let plan = EvalPlan {
        thresholds: (0..=9).collect(),
        seed: 4,
        ..Default::default()
    };
    let a = Evaluator::new(&image, &reads, &plan).unwrap().run().unwrap();
    let b = Evaluator::new(&image2, &reads2, &plan).unwrap().run().unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn report_independent_of_thread_count() {
    let (store, reads) = build_dataset(&spec()).unwrap();
    let image = ArrayImage::from_store(&store, ArrayConfig::default());
    let plan = EvalPlan {
        thresholds: vec![1, 4, 7],
        noise: NoiseModel {
            mode: asmcap_core::cam::NoiseMode::MonteCarloCaps,
            ..Default::default()
        },
        seed: 8,
        ..Default::default()
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| Evaluator::new(&image, &reads, &plan).unwrap().run().unwrap().to_csv())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn ground_truth_labels_include_origin_when_within_threshold() {
    let (store, reads) = build_dataset(&spec()).unwrap();
    for r in &reads.reads {
        let ed = edit_distance(store.segments()[r.origin_row].bases.bases(), r.read.bases());
        assert_eq!(ed, r.true_ed_to_origin);
        assert!(ed <= r.edit_ledger.len() + r.length_adjustment());
    }
    let image = ArrayImage::from_store(&store, ArrayConfig::default());
    let plan = EvalPlan {
        thresholds: vec![40],
        strategies: vec![Strategy::HdOnly],
        noise: NoiseModel::ideal(),
        ..Default::default()
    };
    let report = Evaluator::new(&image, &reads, &plan).unwrap().run().unwrap();
    let row = &report.rows[0];
    // every read is within 40 edits of its origin, and random rows are not
    assert_eq!(row.counts.tp + row.counts.fn_, 48);
}
