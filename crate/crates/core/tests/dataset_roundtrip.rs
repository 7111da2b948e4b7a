mod common;

use std::fs;
use std::path::{Path, PathBuf};

use wavedge::batch::{run_batch, BatchOptions, ChunkEvent, Method};
use wavedge::dataset::{
    self, label_histogram, read_cifar_bin, read_idx, read_image_dir, write_enhanced, Codec,
    DatasetFormat, ProvenanceManifest, MANIFEST_FILE,
};
use wavedge::mm::MmConfig;
use wavedge::naive::NaiveConfig;
use wavedge::Error;

/// IDX pair with `n` images of `cols x rows`; pixel bytes follow a fixed
/// arithmetic pattern and labels cycle through 0..10.
fn write_idx(dir: &Path, n: usize, rows: usize, cols: usize) -> (PathBuf, PathBuf) {
    let mut images = Vec::new();
    for v in [0x0803u32, n as u32, rows as u32, cols as u32] {
        images.extend_from_slice(&v.to_be_bytes());
    }
    for i in 0..n * rows * cols {
        images.push((i * 31 % 256) as u8);
    }
    let mut labels = Vec::new();
    for v in [0x0801u32, n as u32] {
        labels.extend_from_slice(&v.to_be_bytes());
    }
    labels.extend((0..n).map(|i| (i * 7 % 10) as u8));
    let ip = dir.join("t10k-images-idx3-ubyte");
    let lp = dir.join("t10k-labels-idx1-ubyte");
    fs::write(&ip, images).unwrap();
    fs::write(&lp, labels).unwrap();
    (ip, lp)
}

fn write_cifar(path: &Path, labels: &[u8]) {
    let mut bytes = Vec::new();
    for (k, &label) in labels.iter().enumerate() {
        bytes.push(label);
        bytes.extend((0..3072).map(|i| ((i * 13 + k * 101) % 256) as u8));
    }
    fs::write(path, bytes).unwrap();
}

fn same_bytes(a: &Path, b: &Path) {
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap(), "{a:?} vs {b:?}");
}

#[test]
fn idx_identity_round_trip_is_byte_exact() {
    let src = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let (ip, lp) = write_idx(src.path(), 2, 28, 28);
    let (m, stream) = read_idx(&ip, &lp).unwrap();
    let prov = write_enhanced(
        stream,
        &m,
        out.path(),
        Codec::Same,
        Method::Identity.record(),
    )
    .unwrap();
    same_bytes(&ip, &out.path().join("t10k-images-idx3-ubyte"));
    same_bytes(&lp, &out.path().join("t10k-labels-idx1-ubyte"));
    assert_eq!(prov.count, 2);
    assert_eq!(prov.format, DatasetFormat::Idx);
    assert!(out.path().join(MANIFEST_FILE).exists());
}

#[test]
fn cifar_identity_round_trip_is_byte_exact() {
    let src = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let a = src.path().join("data_batch_1.bin");
    let b = src.path().join("data_batch_2.bin");
    write_cifar(&a, &[6]);
    write_cifar(&b, &[0, 9, 3]);
    let (m, stream) = read_cifar_bin(&[a.clone(), b.clone()]).unwrap();
    assert_eq!(m.num_items, 4);
    let opts = BatchOptions {
        workers: 2,
        chunk_size: 3,
        ..Default::default()
    };
    let (prov, _) = run_batch(&m, stream, &Method::Identity, out.path(), &opts, |_| {}).unwrap();
    same_bytes(&a, &out.path().join("data_batch_1.bin"));
    same_bytes(&b, &out.path().join("data_batch_2.bin"));
    assert_eq!(prov.files, vec!["data_batch_1.bin", "data_batch_2.bin"]);
    assert_eq!(prov.classes[6], "frog");
}

#[test]
fn naive_run_records_provenance() {
    let src = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let (ip, lp) = write_idx(src.path(), 2, 28, 28);
    let (m, stream) = read_idx(&ip, &lp).unwrap();
    let method = Method::Naive(NaiveConfig {
        levels: 3,
        ..Default::default()
    });
    run_batch(
        &m,
        stream,
        &method,
        out.path(),
        &BatchOptions::default(),
        |_| {},
    )
    .unwrap();
    let prov = ProvenanceManifest::read(&out.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(prov.enhancement.method, "naive");
    assert_eq!(prov.enhancement.params["levels"], 3);
    assert_eq!(prov.shape, [28, 28, 1]);
    assert!(prov.tool_version.starts_with("wavedge "));
    let raw: serde_json::Value =
        serde_json::from_slice(&fs::read(out.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    for key in [
        "format",
        "shape",
        "count",
        "classes",
        "enhancement",
        "tool_version",
    ] {
        assert!(raw.get(key).is_some(), "manifest lacks {key}");
    }
    // The enhanced images differ from the source but the labels do not.
    assert_ne!(
        fs::read(&ip).unwrap(),
        fs::read(out.path().join("t10k-images-idx3-ubyte")).unwrap()
    );
    same_bytes(&lp, &out.path().join("t10k-labels-idx1-ubyte"));
}

#[test]
fn labels_survive_and_memory_is_bounded() {
    let src = tempfile::tempdir().unwrap();
    let (ip, lp) = write_idx(src.path(), 500, 8, 8);
    let (m, stream) = read_idx(&ip, &lp).unwrap();
    let before: Vec<usize> = stream.map(|r| r.unwrap().label).collect();

    for (n_items, chunk) in [(500, 16), (500, 7)] {
        let out = tempfile::tempdir().unwrap();
        let (_, stream) = read_idx(&ip, &lp).unwrap();
        let mut events: Vec<ChunkEvent> = Vec::new();
        let opts = BatchOptions {
            workers: 3,
            chunk_size: chunk,
            ..Default::default()
        };
        let method = Method::Mm(MmConfig::default());
        let (prov, summary) =
            run_batch(&m, stream, &method, out.path(), &opts, |e| events.push(e)).unwrap();
        assert_eq!(prov.count, n_items);
        assert!(summary.max_in_flight <= chunk);
        assert!(events.iter().all(|e| e.len <= chunk));
        assert_eq!(events.iter().map(|e| e.len).sum::<usize>(), n_items);

        let outs = out.path();
        let (_, stream) = read_idx(
            &outs.join("t10k-images-idx3-ubyte"),
            &outs.join("t10k-labels-idx1-ubyte"),
        )
        .unwrap();
        let after: Vec<usize> = stream.map(|r| r.unwrap().label).collect();
        assert_eq!(after, before);
        assert_eq!(
            label_histogram(after, 10),
            label_histogram(before.clone(), 10)
        );
    }
}

#[test]
fn worker_count_does_not_change_output() {
    let src = tempfile::tempdir().unwrap();
    let (ip, lp) = write_idx(src.path(), 300, 16, 16);
    let mut outputs = Vec::new();
    for workers in [1, 2, 8] {
        let out = tempfile::tempdir().unwrap();
        let (m, stream) = read_idx(&ip, &lp).unwrap();
        let opts = BatchOptions {
            workers,
            ..Default::default()
        };
        run_batch(
            &m,
            stream,
            &Method::Mm(MmConfig::default()),
            out.path(),
            &opts,
            |_| {},
        )
        .unwrap();
        let bytes: Vec<Vec<u8>> = [
            "t10k-images-idx3-ubyte",
            "t10k-labels-idx1-ubyte",
            MANIFEST_FILE,
        ]
        .iter()
        .map(|f| fs::read(out.path().join(f)).unwrap())
        .collect();
        outputs.push(bytes);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn image_dir_codec_round_trip() {
    let src = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let a = src.path().join("test_batch.bin");
    write_cifar(&a, &[2, 2, 5]);
    let (m, stream) = dataset::open(DatasetFormat::CifarBin, std::slice::from_ref(&a)).unwrap();
    let originals: Vec<_> = read_cifar_bin(&[a])
        .unwrap()
        .1
        .map(|r| r.unwrap())
        .collect();
    let opts = BatchOptions {
        codec: Codec::ImageDir,
        ..Default::default()
    };
    let (prov, _) = run_batch(&m, stream, &Method::Identity, out.path(), &opts, |_| {}).unwrap();
    assert_eq!(prov.format, DatasetFormat::ImageDir);
    assert!(prov.files.contains(&"bird/000000.ppm".to_string()));

    fs::remove_file(out.path().join(MANIFEST_FILE)).unwrap();
    // Remove the empty class directories so the reader accepts the tree.
    for name in &m.label_names {
        let _ = fs::remove_dir(out.path().join(name));
    }
    let (m2, stream) = read_image_dir(out.path()).unwrap();
    assert_eq!(m2.label_names, vec!["bird", "dog"]);
    assert_eq!(m2.num_items, 3);
    let back: Vec<_> = stream.map(|r| r.unwrap()).collect();
    for (b, o) in back.iter().zip(&originals) {
        assert_eq!(b.image, o.image);
    }
}

#[test]
fn failing_record_reports_its_index() {
    let src = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    // 1-pixel-wide images cannot take a 2D Haar level.
    let (ip, lp) = write_idx(src.path(), 3, 5, 1);
    let (m, stream) = read_idx(&ip, &lp).unwrap();
    let err = run_batch(
        &m,
        stream,
        &Method::Mm(MmConfig::default()),
        out.path(),
        &BatchOptions::default(),
        |_| {},
    )
    .unwrap_err();
    assert!(err.to_string().contains("record 0"), "{err}");
    assert!(!out.path().join(MANIFEST_FILE).exists());
}

#[test]
fn open_validates_path_count() {
    assert!(matches!(
        dataset::open(DatasetFormat::Idx, &[PathBuf::from("a")]),
        Err(Error::Param(_))
    ));
    assert!(matches!(
        dataset::open(DatasetFormat::ImageDir, &[]),
        Err(Error::Param(_))
    ));
}
