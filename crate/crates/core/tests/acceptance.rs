//! End-to-end acceptance suite. Each test prints one PASS line for its
//! criterion; run with `cargo test --test acceptance -- --nocapture` to
//! see them.

use std::collections::HashSet;
use std::time::Instant;

use depth_layering::linking::{run_layering, LayeringParams, LayeringResult};
use depth_layering::oracle::{
    compare_partitions, oracle_object_layers, oracle_objects, PixelPartition,
};
use depth_layering::synthgen::{
    gen_office, gen_random_plateaus, gen_rings, OfficeConfig, OfficeObject, OfficeShape,
    PlateauConfig, RingsConfig,
};
use depth_layering::thresholding::{estimate_threshold, ThresholdConfig};
use depth_layering::{DepthMap, Px};

fn object_partition(result: &LayeringResult<Px>) -> PixelPartition {
    let width = result.label_map.width;
    let mut labels = vec![0u32; width * result.label_map.height];
    for seg in result.labeled.rows.iter_segments() {
        let on = seg.object_number.unwrap();
        let base = seg.row * width;
        labels[base + seg.start..=base + seg.end].fill(on);
    }
    PixelPartition::from_labels(width, result.label_map.height, &labels)
}

fn plateau_config(seed: u64, jitter: u64) -> PlateauConfig {
    PlateauConfig {
        size: 64,
        plateau_count: 1 + (seed % 3) as usize,
        min_step: 10,
        jitter,
        max_level: 255,
    }
}

fn check_coverage(result: &LayeringResult<Px>) {
    let m = result.object_layers.len() as u32;
    assert!(m >= 1);
    for &id in &result.label_map.labels {
        assert!(id >= 1 && id <= m, "pixel label {id} outside 1..={m}");
    }
    let total: usize = result.object_layers.iter().map(|o| o.pixel_count).sum();
    assert_eq!(total, result.label_map.width * result.label_map.height);
}

#[test]
fn ac1_rings_scene() {
    let scene = gen_rings(&RingsConfig::default()).unwrap();
    let started = Instant::now();
    let result = run_layering(&scene.depth, &LayeringParams::default()).unwrap();
    let elapsed = started.elapsed();

    assert_eq!(result.object_layers.len(), 4, "background + three rings");
    let ours = PixelPartition::from(&result.label_map);
    assert!(compare_partitions(&ours, &scene.truth).unwrap().equivalent);

    // Occluded rings (the two farther ones) are split into several object
    // numbers before linking and land in exactly one object-layer after.
    let config = RingsConfig::default();
    let on_partition = object_partition(&result);
    for &ring_depth in &config.depths[..config.depths.len() - 1] {
        let members: Vec<usize> = scene
            .depth
            .values()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == ring_depth)
            .map(|(i, _)| i)
            .collect();
        let objects: HashSet<u32> = members.iter().map(|&i| on_partition.class_of[i]).collect();
        assert!(
            objects.len() >= 2,
            "ring at depth {ring_depth} should be occlusion-split"
        );
        let layers: HashSet<u32> = members
            .iter()
            .map(|&i| result.label_map.labels[i])
            .collect();
        assert_eq!(layers.len(), 1, "ring parts reunify into one object-layer");
    }

    assert!(
        elapsed.as_secs_f64() < 1.0,
        "512x512 run took {elapsed:?}, expected < 1 s"
    );
    check_coverage(&result);
    println!(
        "AC-1 PASS rings 512x512: 4 object-layers, truth-equivalent, {} ms",
        elapsed.as_millis()
    );
}

#[test]
fn ac2_oracle_equivalence_object_layers() {
    for seed in 0..200 {
        let scene = gen_random_plateaus(seed, &plateau_config(seed, 0)).unwrap();
        let result = run_layering(&scene.depth, &LayeringParams::default()).unwrap();
        let oracle = oracle_object_layers(&scene.depth, result.diagnostics.connectivity_used);
        let ours = PixelPartition::from(&result.label_map);
        let cmp = compare_partitions(&ours, &oracle).unwrap();
        assert!(
            cmp.equivalent,
            "seed {seed}: {} mismatched pairs (T={}, conn={})",
            cmp.mismatched_pixel_pairs,
            result.diagnostics.threshold_used,
            result.diagnostics.connectivity_used
        );
        check_coverage(&result);
    }
    println!("AC-2 PASS object-layer partition matches oracle on 200/200 plateau scenes");
}

#[test]
fn ac3_oracle_equivalence_objects() {
    for seed in 0..200 {
        let scene = gen_random_plateaus(seed, &plateau_config(seed, 0)).unwrap();
        let result = run_layering(&scene.depth, &LayeringParams::default()).unwrap();
        let oracle = oracle_objects(&scene.depth, result.diagnostics.connectivity_used);
        let ours = object_partition(&result);
        let cmp = compare_partitions(&ours, &oracle).unwrap();
        assert!(
            cmp.equivalent,
            "seed {seed}: {} mismatched pairs",
            cmp.mismatched_pixel_pairs
        );
    }
    println!("AC-3 PASS canonical object partition matches flood fill on 200/200 scenes");
}

#[test]
fn ac4_pixel_coverage_and_conservation() {
    let mut fixtures: Vec<DepthMap<Px>> = vec![
        gen_rings(&RingsConfig::default()).unwrap().depth,
        gen_office(&OfficeConfig::default()).unwrap().depth,
        DepthMap::new(1, 1, 255, vec![5]).unwrap(),
        DepthMap::new(4, 3, 255, vec![9; 12]).unwrap(),
    ];
    for seed in 0..50 {
        fixtures.push(
            gen_random_plateaus(seed, &plateau_config(seed, 0))
                .unwrap()
                .depth,
        );
    }
    for depth in &fixtures {
        let result = run_layering(depth, &LayeringParams::default()).unwrap();
        check_coverage(&result);
    }
    println!(
        "AC-4 PASS full pixel coverage and area conservation on {} fixtures",
        fixtures.len()
    );
}

#[test]
fn ac5_threshold_estimator_on_jittered_plateaus() {
    for seed in 0..100 {
        let scene = gen_random_plateaus(seed, &plateau_config(seed, 1)).unwrap();
        let est = estimate_threshold(&scene.depth, &ThresholdConfig::default()).unwrap();
        for t in [est.row_threshold, est.column_threshold] {
            assert!(
                (1..10).contains(&t),
                "seed {seed}: estimated T={t} outside [1, 10)"
            );
        }
    }
    println!("AC-5 PASS percentile estimate within [j, s) on 100/100 jittered scenes");
}

#[test]
fn ac6_determinism() {
    use depth_layering::imgio;
    use sha2::{Digest, Sha256};

    let scene = gen_rings(&RingsConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut hashes = Vec::new();
    for run in 0..2 {
        let result = run_layering(&scene.depth, &LayeringParams::default()).unwrap();
        let out = dir.path().join(format!("run{run}"));
        imgio::write_label_map(&result.label_map, &out.join("labels.pgm")).unwrap();
        imgio::write_viz(&result.label_map, &out.join("viz.png")).unwrap();
        imgio::write_report(&imgio::build_report(&result), &out.join("report.json")).unwrap();
        let mut digest = Sha256::new();
        for file in ["labels.pgm", "viz.png", "report.json"] {
            digest.update(std::fs::read(out.join(file)).unwrap());
        }
        hashes.push(digest.finalize());
    }
    assert_eq!(hashes[0], hashes[1]);
    println!("AC-6 PASS label map, viz and report byte-identical across runs");
}

#[test]
fn ac7_office_scene() {
    let config = OfficeConfig::default();
    let scene = gen_office(&config).unwrap();
    let result = run_layering(&scene.depth, &LayeringParams::default()).unwrap();
    assert_eq!(result.object_layers.len(), config.objects.len() + 1);
    let ours = PixelPartition::from(&result.label_map);
    assert!(compare_partitions(&ours, &scene.truth).unwrap().equivalent);

    // Two extra mugs at one shared depth collapse into one object-layer.
    let mut shared = config.clone();
    shared.objects.push(OfficeObject {
        shape: OfficeShape::Ellipse,
        x: 20,
        y: 20,
        width: 60,
        height: 60,
        depth: 60,
    });
    let scene = gen_office(&shared).unwrap();
    let result = run_layering(&scene.depth, &LayeringParams::default()).unwrap();
    assert_eq!(result.object_layers.len(), shared.objects.len()); // k+1 objects, two share a depth
    let ours = PixelPartition::from(&result.label_map);
    assert!(compare_partitions(&ours, &scene.truth).unwrap().equivalent);
    println!("AC-7 PASS office clutter: k+1 object-layers, shared depths collapse");
}

#[test]
fn ac8_u_shape_merge() {
    let depth = DepthMap::new(3, 3, 255u16, vec![10, 99, 10, 10, 99, 10, 10, 10, 10]).unwrap();
    let params = LayeringParams {
        threshold: Some(2),
        connectivity: Some(2),
        ..Default::default()
    };
    let result = run_layering(&depth, &params).unwrap();
    assert_eq!(result.diagnostics.object_count, 2);
    assert_eq!(result.object_layers.len(), 2);
    assert!(result.diagnostics.raw_object_count > 2, "a union happened");
    println!("AC-8 PASS U-shape map yields 2 objects and 2 object-layers");
}
