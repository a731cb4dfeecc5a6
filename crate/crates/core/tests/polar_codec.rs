use polarvos_core::polar::{cast_rays, encode_contours, ray_angle_deg};
use polarvos_core::synth::StarShape;
use polarvos_core::{
    decode, encode, encode_at_mass_center, extract_contours, merge_contours,
    sample_center_candidates, BinaryMask, CenterSampleConfig, Contour, MergeConfig, PolarMask,
    SENTINEL,
};
use proptest::prelude::*;

/// Farthest crossing of a ray with closed polylines, found by bisecting the
/// side-of-ray function along each segment.
fn bisect_ray(polylines: &[Vec<(f64, f64)>], c: (f64, f64), theta_deg: f64) -> Option<f64> {
    let (s, co) = theta_deg.to_radians().sin_cos();
    let side = |p: (f64, f64)| co * (p.1 - c.1) - s * (p.0 - c.0);
    let along = |p: (f64, f64)| co * (p.0 - c.0) + s * (p.1 - c.1);
    let mut best: Option<f64> = None;
    for pts in polylines {
        for k in 0..pts.len() {
            let a = pts[k];
            let b = pts[(k + 1) % pts.len()];
            let (fa, fb) = (side(a), side(b));
            if fa * fb > 0.0 || (fa == 0.0 && fb == 0.0) {
                continue;
            }
            let lerp = |t: f64| (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if side(lerp(mid)) * fa > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let q = lerp(0.5 * (lo + hi));
            if along(q) >= 0.0 {
                let d = (q.0 - c.0).hypot(q.1 - c.1);
                best = Some(best.map_or(d, |b: f64| b.max(d)));
            }
        }
    }
    best
}

fn star(seed: [f64; 8], size: f64) -> StarShape {
    let base = size * (0.25 + 0.1 * seed[2].abs());
    StarShape {
        center: (size / 2.0 + seed[0] * 3.0, size / 2.0 + seed[1] * 3.0),
        base,
        harmonics: vec![
            (2, seed[3] * 0.1, seed[4] * 3.0),
            (3, seed[5] * 0.066, seed[6] * 3.0),
            (4, seed[7] * 0.05, 1.0),
        ],
    }
}

fn discs_mask(discs: &[(f64, f64, f64)], w: usize, h: usize) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| {
        discs
            .iter()
            .any(|&(cx, cy, r)| (x as f64 - cx).hypot(y as f64 - cy) <= r)
    })
    .unwrap()
}

#[test]
fn disc_distances_near_radius() {
    let mask = StarShape::disc((50.0, 50.0), 20.0)
        .rasterize(101, 101)
        .unwrap();
    let p = encode(&mask, (50.0, 50.0), 36, &MergeConfig::default()).unwrap();
    assert_eq!(p.ray_count(), 36);
    for &d in p.distances() {
        assert!((19.0..=21.0).contains(&d), "distance {d}");
    }
}

#[test]
fn half_plane_marks_missing_rays() {
    // Foreground strictly right of the center: rays pointing left cross nothing.
    let mask = BinaryMask::from_fn(41, 41, |x, y| x >= 22 && (5..=35).contains(&y)).unwrap();
    let p = encode(&mask, (20.0, 20.0), 36, &MergeConfig::default()).unwrap();
    for (i, &d) in p.distances().iter().enumerate() {
        let a = ray_angle_deg(i, 36);
        if a > 100.0 && a < 260.0 {
            assert_eq!(d, SENTINEL, "ray at {a}");
        }
        assert!(d >= SENTINEL);
    }
    assert!(p.distances()[35] > 2.0);
}

#[test]
fn decoded_disc_matches_pixels() {
    let mask = StarShape::disc((64.0, 64.0), 30.0)
        .rasterize(128, 128)
        .unwrap();
    let p = encode(&mask, (64.0, 64.0), 72, &MergeConfig::default()).unwrap();
    assert!(decode(&p, 128, 128).unwrap().iou(&mask).unwrap() >= 0.95);
}

#[test]
fn reversed_input_order_keeps_biggest_first() {
    let mask = discs_mask(
        &[(20.0, 20.0, 8.0), (34.0, 20.0, 3.0), (60.0, 60.0, 2.0)],
        80,
        80,
    );
    let contours = extract_contours(&mask);
    let mut reversed = contours.clone();
    reversed.reverse();
    let a = merge_contours(&contours, &MergeConfig::default()).unwrap();
    let b = merge_contours(&reversed, &MergeConfig::default()).unwrap();
    assert_eq!(a[0], contours[0]);
    assert_eq!(b[0], contours[0]);
    assert_eq!(a.len(), 2);
    assert_eq!(b.len(), 2);
}

fn polylines(contours: &[Contour]) -> Vec<Vec<(f64, f64)>> {
    contours.iter().map(Contour::to_f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ray_casting_matches_bisection(
        seed in prop::array::uniform8(-1.0f64..1.0),
        jitter in (-2.0f64..2.0, -2.0f64..2.0),
        n in prop::sample::select(vec![8usize, 36, 90]),
    ) {
        let mask = star(seed, 64.0).rasterize(64, 64).unwrap();
        let contours = extract_contours(&mask);
        let c = (32.0 + jitter.0, 32.0 + jitter.1);
        let lines = polylines(&contours);
        for (i, hit) in cast_rays(&contours, c, n).into_iter().enumerate() {
            let oracle = bisect_ray(&lines, c, ray_angle_deg(i, n));
            match (hit, oracle) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-6, "ray {}: {} vs {}", i, a, b),
                (None, None) => {}
                (a, b) => prop_assert!(false, "ray {}: {:?} vs {:?}", i, a, b),
            }
        }
    }

    #[test]
    fn missing_rays_use_vertex_fallback(
        discs in prop::collection::vec((8.0f64..56.0, 8.0f64..56.0, 1.0f64..5.0), 1..4),
        n in prop::sample::select(vec![8usize, 36]),
    ) {
        let mask = discs_mask(&discs, 64, 64);
        let contours = extract_contours(&mask);
        prop_assume!(!contours.is_empty());
        let c = (2.0, 2.0);
        let p = encode_contours(&contours, c, n).unwrap();
        let hits = cast_rays(&contours, c, n);
        let delta = 180.0 / n as f64;
        for (i, &d) in p.distances().iter().enumerate() {
            prop_assert!(d >= SENTINEL);
            if hits[i].is_some() {
                continue;
            }
            let theta = ray_angle_deg(i, n);
            let mut expect = SENTINEL;
            for q in contours.iter().flat_map(|c| c.to_f64()) {
                let (dx, dy) = (q.0 - c.0, q.1 - c.1);
                let mut a = dy.atan2(dx).to_degrees();
                if a <= 0.0 { a += 360.0; }
                let diff = (a - theta).rem_euclid(360.0);
                if diff.min(360.0 - diff) <= delta {
                    expect = expect.max(dx.hypot(dy));
                }
            }
            prop_assert_eq!(d, expect);
        }
    }

    #[test]
    fn encode_is_deterministic(seed in prop::array::uniform8(-1.0f64..1.0)) {
        let mask = star(seed, 64.0).rasterize(64, 64).unwrap();
        let cfg = MergeConfig::default();
        let a = encode_at_mass_center(&mask, 36, &cfg).unwrap();
        let b = encode_at_mass_center(&mask, 36, &cfg).unwrap();
        prop_assert_eq!(a.to_json_line(), b.to_json_line());
        prop_assert_eq!(PolarMask::from_json_line(&a.to_json_line()).unwrap(), a);
    }

    #[test]
    fn larger_mu_merges_superset(
        discs in prop::collection::vec((6.0f64..58.0, 6.0f64..58.0, 1.5f64..7.0), 2..6),
        mu in 0.05f64..1.0,
        extra in 0.0f64..1.0,
    ) {
        let mask = discs_mask(&discs, 64, 64);
        let contours = extract_contours(&mask);
        prop_assume!(!contours.is_empty());
        let small = merge_contours(&contours, &MergeConfig::new(mu).unwrap()).unwrap();
        let large = merge_contours(&contours, &MergeConfig::new(mu + extra).unwrap()).unwrap();
        for c in &small {
            prop_assert!(large.contains(c));
        }
    }

    #[test]
    fn convex_round_trip(seed in prop::array::uniform8(-1.0f64..1.0)) {
        let shape = StarShape { harmonics: vec![(2, seed[3] * 0.08, seed[4])], ..star(seed, 96.0) };
        let mask = shape.rasterize(96, 96).unwrap();
        let p = encode(&mask, shape.center, 36, &MergeConfig::default()).unwrap();
        prop_assert!(decode(&p, 96, 96).unwrap().iou(&mask).unwrap() >= 0.90);
    }

    #[test]
    fn candidate_lattice_is_symmetric(
        pixels in prop::collection::vec((0usize..30, 0usize..30), 1..50),
        stride in 0.1f64..3.0,
        grid in prop::sample::select(vec![3usize, 4]),
        cell in 0.5f64..8.0,
    ) {
        let mask = BinaryMask::from_pixels(30, 30, &pixels).unwrap();
        let (mx, my) = polarvos_core::mass_center(&mask).unwrap();
        let cands = sample_center_candidates(&mask, &CenterSampleConfig::new(stride, grid).unwrap(), cell).unwrap();
        prop_assert_eq!(cands.len(), grid * grid);
        let sx: f64 = cands.iter().map(|c| c.x - mx).sum();
        let sy: f64 = cands.iter().map(|c| c.y - my).sum();
        prop_assert!(sx.abs() < 1e-9 && sy.abs() < 1e-9);
        for (i, c) in cands.iter().enumerate() {
            let mirror = cands[grid * grid - 1 - i];
            prop_assert_eq!(c.positive, mirror.positive);
        }
    }
}
