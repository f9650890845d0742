//! Acceptance gate: one PASS/FAIL line per criterion. Runs with a custom
//! harness so the lines always print; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::time::{Duration, Instant};

use coopsim::bus::MessageBus;
use coopsim::cli;
use coopsim::pace::{pace_round, Assignment, PaceParams};
use coopsim::projection::{estimate_distance, localize, AngularConvention, LocalizedDetection};
use coopsim::scenario::{parse_scenario, preset, Override};
use coopsim::scene::{CameraModel, KnownLocation, Point, Pose, TrueObject};
use coopsim::sensor::{inverse_project, pixel_quantum_bound, BoundingBox, RawDetection};
use coopsim::sim::{complexity_probe, linear_fit, run, run_baseline};
use coopsim::vote::{
    score_oracle, update_reputation, visibility, visibility_from, VisibilityMode, VoteEdge,
    VoteParams, VoteReport, VoteTally, REPUTATION_CEILING, REPUTATION_FLOOR,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn within(limit_s: f64, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    if t > Duration::from_secs_f64(limit_s) {
        Err(format!("took {:.2} s, limit {limit_s} s", t.as_secs_f64()))
    } else {
        Ok(())
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_pace_directional() -> Result<String, String> {
    let start = Instant::now();
    let config = preset("parking").unwrap();
    let pace = run(&config).map_err(|e| e.to_string())?;
    let base = run_baseline(&config).map_err(|e| e.to_string())?;
    within(5.0, start)?;
    let s = &pace.summary;
    ensure(s.rounds == 200, || {
        format!("{} rounds, expected 200", s.rounds)
    })?;
    ensure(s.accuracy == 1.0, || {
        format!("PACE accuracy {}", s.accuracy)
    })?;
    let best = base.summary.best_cav_accuracy;
    ensure(best <= 0.5, || format!("best single-CAV accuracy {best}"))?;
    let diff = s.accuracy - best;
    ensure(diff >= 0.5, || format!("difference {diff}"))?;
    Ok(format!(
        "PACE {:.1}%, best single CAV {:.1}%, difference {:+.1} points",
        100.0 * s.accuracy,
        100.0 * best,
        100.0 * diff
    ))
}

/// One object, four on-axis CAVs at equal range, two labels, no confidence
/// noise: every report carries the same visibility and reputation weight.
const REDUCTION: &str = r#"
name = "two-label"
[scene]
grid = { width = 60.0, height = 40.0 }
camera = { fov = 64.0, image_width = 640, d_max = 60.0 }
[[scene.locations]]
id = "obj"
label = "A"
size = 3.0
x = 30.0
y = 20.0
[[scene.cavs]]
id = "w"
x = 15.0
y = 20.0
theta = 0.0
[[scene.cavs]]
id = "e"
x = 45.0
y = 20.0
theta = 180.0
[[scene.cavs]]
id = "s"
x = 30.0
y = 5.0
theta = 90.0
[[scene.cavs]]
id = "n"
x = 30.0
y = 35.0
theta = 270.0
[sensor]
label_confusion_rate = 0.55
confidence_mean_correct = 0.85
confidence_mean_wrong = 0.55
confidence_std = 0.0
confusion_table = { A = [{ label = "B", weight = 1.0 }] }
size_catalog = { A = 3.0, B = 3.0 }
[vote]
eta = 1e-12
[run]
mode = "vote"
cycles = 4000
verdicts_target = 1000
seed = 5
"#;

/// Probability that the true label wins, by enumerating every correct/wrong
/// pattern of `n` equally weighted reports. Ties go to "A" < "B".
fn enumerated_majority(n: u32, eps: f64, c_right: f64, c_wrong: f64) -> f64 {
    let mut p = 0.0;
    for mask in 0u32..(1 << n) {
        let right = mask.count_ones();
        let wrong = n - right;
        let prob = (1.0 - eps).powi(right as i32) * eps.powi(wrong as i32);
        if c_right * f64::from(right) >= c_wrong * f64::from(wrong) {
            p += prob;
        }
    }
    p
}

fn c2_vote_directional() -> Result<String, String> {
    let start = Instant::now();
    let base = preset("intersection").unwrap();
    let (mut vote, mut single) = (0.0, 0.0);
    let seeds = 20;
    for i in 0..seeds {
        let mut c = base.clone();
        c.run.seed = base.run.seed + i;
        vote += run(&c).map_err(|e| e.to_string())?.accuracy();
        single += run_baseline(&c).map_err(|e| e.to_string())?.accuracy();
    }
    let (vote, single) = (vote / seeds as f64, single / seeds as f64);
    let gap = vote - single;
    ensure(gap >= 0.15, || {
        format!("VOTE {vote:.4} vs single {single:.4}")
    })?;

    let reduction = parse_scenario(REDUCTION, &[]).map_err(|e| e.to_string())?;
    let m = run(&reduction).map_err(|e| e.to_string())?;
    ensure(m.summary.rounds == 1000, || {
        format!("{} rounds", m.summary.rounds)
    })?;
    let reports_per_round = 4 * 4;
    let expected = enumerated_majority(reports_per_round, 0.55, 0.85, 0.55);
    let observed = m.accuracy();
    ensure((observed - expected).abs() <= 0.03, || {
        format!("reduction accuracy {observed:.4} vs enumerated {expected:.4}")
    })?;
    within(30.0, start)?;
    Ok(format!(
        "20 seeds: VOTE {:.1}% vs single CAV {:.1}% ({:+.1} points); reduction {:.4} vs enumerated {:.4}",
        100.0 * vote,
        100.0 * single,
        100.0 * gap,
        observed,
        expected
    ))
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn tallies_match(a: &VoteTally, b: &VoteTally) -> Result<(), String> {
    let rhos: std::collections::BTreeSet<&String> =
        a.scores.keys().chain(b.scores.keys()).collect();
    for rho in rhos {
        let empty = BTreeMap::new();
        let (x, y) = (
            a.scores.get(rho).unwrap_or(&empty),
            b.scores.get(rho).unwrap_or(&empty),
        );
        for l in x.keys().chain(y.keys()) {
            let (u, v) = (
                x.get(l).copied().unwrap_or(0.0),
                y.get(l).copied().unwrap_or(0.0),
            );
            if !close(u, v, 1e-9) {
                return Err(format!("S[{rho}][{l}]: incremental {u} vs oracle {v}"));
            }
        }
    }
    Ok(())
}

fn random_reports(
    rng: &mut ChaCha8Rng,
    cavs: &[String],
    locations: &[KnownLocation],
    labels: &[String],
) -> BTreeMap<String, Vec<VoteReport>> {
    cavs.iter()
        .map(|cav| {
            let n = rng.random_range(0..20);
            let reports = (0..n)
                .map(|cycle| {
                    let location_id = if rng.random_bool(0.05) {
                        "ghost".to_owned()
                    } else {
                        locations[rng.random_range(0..locations.len())].id.clone()
                    };
                    VoteReport {
                        location_id,
                        label: labels[rng.random_range(0..labels.len())].clone(),
                        confidence: rng.random_range(0.0..=1.0),
                        position: Point::new(0.0, 0.0),
                        source_cav: cav.clone(),
                        cycle,
                    }
                })
                .collect();
            (cav.clone(), reports)
        })
        .collect()
}

fn c3_tally_oracle() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for instance in 0..200 {
        let n_cav = rng.random_range(1..=5);
        let n_loc = rng.random_range(1..=10);
        let n_lab = rng.random_range(1..=6);
        let cavs: Vec<String> = (0..n_cav).map(|i| format!("v{i}")).collect();
        let labels: Vec<String> = (0..n_lab).map(|i| format!("l{i}")).collect();
        let locations: Vec<KnownLocation> = (0..n_loc)
            .map(|i| KnownLocation {
                id: format!("r{i}"),
                position: Point::new(rng.random_range(0.0..60.0), rng.random_range(0.0..40.0)),
            })
            .collect();
        let poses: BTreeMap<String, Pose> = cavs
            .iter()
            .map(|c| {
                let p = Pose::new(
                    rng.random_range(0.0..60.0),
                    rng.random_range(0.0..40.0),
                    rng.random_range(0.0..360.0),
                );
                (c.clone(), p)
            })
            .collect();
        let params = VoteParams {
            p_d: rng.random_range(0.0..=1.0),
            d_max: rng.random_range(30.0..80.0),
            visibility_mode: if rng.random_bool(0.5) {
                VisibilityMode::Literal
            } else {
                VisibilityMode::Corrected
            },
            ..VoteParams::default()
        };
        let mut edge = VoteEdge::new(params.clone(), locations.clone(), poses.clone());
        let mut bus = MessageBus::new(Default::default());
        let truth: BTreeMap<String, String> = locations
            .iter()
            .map(|l| (l.id.clone(), labels[rng.random_range(0..n_lab)].clone()))
            .collect();
        // a few earlier rounds so reputations differ between CAVs
        let warmup = rng.random_range(0..4u64);
        for round in 1..=warmup {
            for r in random_reports(&mut rng, &cavs, &locations, &labels)
                .values()
                .flatten()
            {
                edge.ingest(r);
            }
            edge.poll(round * params.tau_ms, &mut bus, &truth)
                .map_err(|e| e.to_string())?;
        }
        let reps: BTreeMap<String, f64> = edge
            .reputations()
            .iter()
            .map(|(k, r)| (k.clone(), r.value))
            .collect();
        let reports = random_reports(&mut rng, &cavs, &locations, &labels);
        for r in reports.values().flatten() {
            edge.ingest(r);
        }
        let oracle = score_oracle(&reports, &reps, &poses, &locations, &params);
        tallies_match(edge.tally(), &oracle).map_err(|e| format!("instance {instance}: {e}"))?;
    }
    within(2.0, start)?;
    Ok("200 instances agree within 1e-9 relative".into())
}

struct RefEntry {
    label: Option<String>,
    confidence: f64,
    position: Option<Point>,
}

/// Straight-line restatement of the fusion round: every location looks at
/// every detection of every batch.
fn pace_reference(
    batches: &[Vec<LocalizedDetection>],
    locations: &[KnownLocation],
    delta: f64,
    exclusive: bool,
) -> Vec<RefEntry> {
    let all: Vec<&LocalizedDetection> = batches.iter().flatten().collect();
    let owner = |d: &LocalizedDetection| -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, l) in locations.iter().enumerate() {
            let dist = ((d.position.x - l.position.x).powi(2)
                + (d.position.y - l.position.y).powi(2))
            .sqrt();
            if dist <= delta && best.is_none_or(|(_, b)| dist < b) {
                best = Some((i, dist));
            }
        }
        best.map(|(i, _)| i)
    };
    locations
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let group: Vec<&LocalizedDetection> = all
                .iter()
                .copied()
                .filter(|d| {
                    if exclusive {
                        owner(d) == Some(i)
                    } else {
                        ((d.position.x - l.position.x).powi(2)
                            + (d.position.y - l.position.y).powi(2))
                        .sqrt()
                            <= delta
                    }
                })
                .collect();
            if group.is_empty() {
                return RefEntry {
                    label: None,
                    confidence: 0.0,
                    position: None,
                };
            }
            let (mut sx, mut sy, mut sc, mut sc2) = (0.0, 0.0, 0.0, 0.0);
            let mut sums: Vec<(String, f64)> = Vec::new();
            for d in &group {
                sx += d.position.x;
                sy += d.position.y;
                sc += d.confidence;
                sc2 += d.confidence * d.confidence;
                match sums.iter_mut().find(|(l, _)| *l == d.label) {
                    Some(e) => e.1 += d.confidence,
                    None => sums.push((d.label.clone(), d.confidence)),
                }
            }
            let n = group.len() as f64;
            let position = Some(Point::new(sx / n, sy / n));
            if sc == 0.0 {
                return RefEntry {
                    label: None,
                    confidence: 0.0,
                    position,
                };
            }
            sums.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            RefEntry {
                label: Some(sums[0].0.clone()),
                confidence: sc2 / sc,
                position,
            }
        })
        .collect()
}

fn c4_pace_oracle() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for instance in 0..200 {
        let exclusive = instance % 2 == 1;
        let delta = rng.random_range(0.5..5.0);
        let locations: Vec<KnownLocation> = (0..rng.random_range(0..=10))
            .map(|i| KnownLocation {
                id: format!("r{i}"),
                position: Point::new(rng.random_range(0.0..60.0), rng.random_range(0.0..40.0)),
            })
            .collect();
        let batches: Vec<Vec<LocalizedDetection>> = (0..rng.random_range(0..=6))
            .map(|v| {
                (0..rng.random_range(0..15))
                    .map(|cycle| {
                        let position = match locations.len() {
                            n if n > 0 && rng.random_bool(0.7) => {
                                let l = &locations[rng.random_range(0..n)];
                                Point::new(
                                    l.position.x + rng.random_range(-delta..delta),
                                    l.position.y + rng.random_range(-delta..delta),
                                )
                            }
                            _ => {
                                Point::new(rng.random_range(0.0..60.0), rng.random_range(0.0..40.0))
                            }
                        };
                        // coarse confidences make label ties common
                        let confidence = if rng.random_bool(0.5) {
                            f64::from(rng.random_range(0..=4u8)) / 4.0
                        } else {
                            rng.random_range(0.0..=1.0)
                        };
                        LocalizedDetection {
                            label: format!("l{}", rng.random_range(0..4)),
                            confidence,
                            position,
                            source_cav: format!("v{v}"),
                            cycle,
                        }
                    })
                    .collect()
            })
            .collect();
        let params = PaceParams {
            delta,
            assignment: if exclusive {
                Assignment::ExclusiveNearest
            } else {
                Assignment::AllInRange
            },
            ..PaceParams::default()
        };
        let got = pace_round(batches.iter().map(Vec::as_slice), &locations, &params);
        let want = pace_reference(&batches, &locations, delta, exclusive);
        for (g, w) in got.entries.iter().zip(&want) {
            let fail =
                |what: &str| format!("instance {instance}, {}: {what} differs", g.location_id);
            ensure(g.label == w.label, || fail("label"))?;
            ensure(g.position == w.position, || fail("position"))?;
            ensure((g.confidence - w.confidence).abs() <= 1e-9, || {
                fail("confidence")
            })?;
        }
        ensure(got.entries.len() == want.len(), || {
            format!("instance {instance}: entry count")
        })?;
    }
    within(2.0, start)?;
    Ok("200 instances: labels and positions exact, confidence within 1e-9".into())
}

fn c5_geometry() -> Result<String, String> {
    let cam = CameraModel::new(64.0, 640, 60.0).unwrap();
    let d = estimate_distance(&BoundingBox::new(0.0, 0.0, 50.0, 50.0), 0.5, &cam)
        .map_err(|e| e.to_string())?;
    ensure((d - 5.71503).abs() <= 1e-5, || {
        format!("worked distance {d}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 1000 {
        let pose = Pose::new(
            rng.random_range(0.0..60.0),
            rng.random_range(0.0..40.0),
            rng.random_range(0.0..360.0),
        );
        let range = rng.random_range(2.0..cam.d_max());
        let dev = rng.random_range(-0.9..0.9) * cam.fov() / 2.0;
        let bearing = (pose.theta + dev).to_radians();
        let obj = TrueObject {
            location_id: "o".into(),
            true_label: "x".into(),
            physical_size: rng.random_range(0.5..4.0),
            position: Point::new(
                pose.x + range * bearing.cos(),
                pose.y + range * bearing.sin(),
            ),
        };
        // the bound covers pixel snapping only, so the whole object must
        // project inside the frame (a clipped box shifts its center)
        let half_extent = (obj.physical_size / range).atan().to_degrees() / 2.0;
        if dev.abs() + half_extent >= cam.fov() / 2.0 - cam.gamma() {
            continue;
        }
        let Ok(bbox) = inverse_project(&obj, &pose, &cam) else {
            continue;
        };
        let bound = pixel_quantum_bound(&bbox, obj.physical_size, &cam);
        let raw = RawDetection {
            label: "x".into(),
            confidence: 1.0,
            bbox,
            assumed_size: obj.physical_size,
        };
        for conv in [
            AngularConvention::LeftEdge,
            AngularConvention::CenterRelative,
        ] {
            let reported = conv.reported_pose(&pose, &cam);
            let det = localize(&raw, &reported, &cam, conv, "v", 0).map_err(|e| e.to_string())?;
            let err = det.position.distance(obj.position);
            ensure(err <= bound, || {
                format!("{conv:?}: error {err} > bound {bound} for {obj:?} from {pose:?}")
            })?;
            worst = worst.max(err / bound);
        }
        checked += 1;
    }
    Ok(format!(
        "d = {d:.5}; 1000 objects x 2 conventions within bound (worst {:.0}% of bound)",
        100.0 * worst
    ))
}

fn c6_visibility() -> Result<String, String> {
    let worked = visibility_from(
        5.0,
        36.0,
        &VoteParams {
            p_d: 0.7,
            d_max: 10.0,
            ..VoteParams::default()
        },
    )
    .map_err(|e| e.to_string())?;
    ensure((worked - 0.38).abs() <= 1e-9, || {
        format!("worked value {worked}")
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for mode in [VisibilityMode::Literal, VisibilityMode::Corrected] {
        for i in 0..100_000 {
            let params = VoteParams {
                p_d: rng.random_range(0.0..=1.0),
                d_max: rng.random_range(1.0..100.0),
                visibility_mode: mode,
                ..VoteParams::default()
            };
            let k = if i % 2 == 0 {
                let d = rng.random_range(0.0..=params.d_max);
                visibility_from(d, rng.random_range(0.0..=180.0), &params)
            } else {
                let pose = Pose::new(0.0, 0.0, rng.random_range(0.0..360.0));
                let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let r = rng.random_range(0.0..=params.d_max);
                visibility(Point::new(r * a.cos(), r * a.sin()), &pose, &params)
            }
            .map_err(|e| e.to_string())?;
            ensure((0.0..=1.0).contains(&k), || format!("{mode:?}: k = {k}"))?;
        }
    }
    Ok("worked value 0.38; 2 x 10^5 samples in [0, 1]".into())
}

fn c7_reputation() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let eta = rng.random_range(0.001..=0.5);
        let mut r = rng.random_range(REPUTATION_FLOOR..=REPUTATION_CEILING);
        for _ in 0..rng.random_range(1..40) {
            let objects = rng.random_range(0..6u32);
            let correct = if objects == 0 {
                0
            } else {
                rng.random_range(0..=objects)
            };
            r = update_reputation(r, correct, objects - correct, objects, eta);
            ensure((REPUTATION_FLOOR..=REPUTATION_CEILING).contains(&r), || {
                format!("r = {r}")
            })?;
        }
    }

    let loc = KnownLocation {
        id: "r".into(),
        position: Point::new(10.0, 0.0),
    };
    let poses = BTreeMap::from([("v".to_owned(), Pose::new(0.0, 0.0, 0.0))]);
    let mut edge = VoteEdge::new(VoteParams::default(), vec![loc], poses);
    let mut bus = MessageBus::new(Default::default());
    let truth = BTreeMap::from([("r".to_owned(), "right".to_owned())]);
    let mut trajectory = Vec::new();
    for round in 1..=6u64 {
        edge.ingest(&VoteReport {
            location_id: "r".into(),
            label: "wrong".into(),
            confidence: 0.9,
            position: Point::new(10.0, 0.0),
            source_cav: "v".into(),
            cycle: round,
        });
        edge.poll(round * 120, &mut bus, &truth)
            .map_err(|e| e.to_string())?;
        trajectory.push(edge.reputations()["v"].value);
    }
    let first = trajectory
        .iter()
        .position(|&r| r == REPUTATION_FLOOR)
        .map(|i| i + 1);
    ensure(first == Some(4), || {
        format!("floor reached at round {first:?}: {trajectory:?}")
    })?;
    Ok(format!(
        "10^4 sequences stay in band; always-wrong CAV floors at round 4 {trajectory:?}"
    ))
}

fn c8_complexity() -> Result<String, String> {
    let cavs = [2, 4, 8, 16, 32];
    let objects = [5, 10, 20, 40];
    let rows = complexity_probe(&cavs, &objects);
    let xs: Vec<f64> = rows.iter().map(|r| r.work() as f64).collect();
    let pace = linear_fit(
        &xs,
        &rows.iter().map(|r| r.pace_ops as f64).collect::<Vec<_>>(),
    );
    let vote = linear_fit(
        &xs,
        &rows.iter().map(|r| r.vote_ops as f64).collect::<Vec<_>>(),
    );
    ensure(pace.r2 >= 0.99 && vote.r2 >= 0.99, || {
        format!("R^2 pace {} vote {}", pace.r2, vote.r2)
    })?;
    for w in rows.windows(objects.len() + 1) {
        let (a, b) = (w[0], w[objects.len()]);
        for ratio in [
            b.pace_ops as f64 / a.pace_ops as f64,
            b.vote_ops as f64 / a.vote_ops as f64,
        ] {
            ensure((1.8..=2.2).contains(&ratio), || {
                format!("doubling {a:?} -> {b:?}: ratio {ratio}")
            })?;
        }
    }
    Ok(format!("R^2 pace {:.6}, vote {:.6}", pace.r2, vote.r2))
}

fn c9_determinism() -> Result<String, String> {
    let overrides: Vec<Override> = [
        "run.seed=7",
        "bus.latency_mean_ms=20",
        "bus.latency_jitter_ms=15",
        "bus.drop_probability=0.1",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        cli::cmd_run("intersection", &overrides, d.path()).map_err(|e| e.to_string())?;
    }
    let mut names: Vec<_> = fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    ensure(names.len() == 2, || format!("files: {names:?}"))?;
    for n in &names {
        let (a, b) = (
            fs::read(dirs[0].path().join(n)).unwrap(),
            fs::read(dirs[1].path().join(n)),
        );
        ensure(b.as_ref().is_ok_and(|b| *b == a), || {
            format!("{n:?} differs")
        })?;
    }
    let config = cli::load_scenario("intersection", &overrides).map_err(|e| e.to_string())?;
    let digests: Vec<u64> = (0..2)
        .map(|_| run(&config).map(|m| m.summary.messages.schedule_digest))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(digests[0] == digests[1], || {
        format!("schedule digests {digests:?}")
    })?;
    Ok(format!(
        "{} files byte-identical; schedule digest {:016x}",
        names.len(),
        digests[0]
    ))
}

fn c10_cadence() -> Result<String, String> {
    let mut checked = Vec::new();
    for (name, latency) in [
        ("parking", 0),
        ("parking", 45),
        ("intersection", 0),
        ("intersection", 25),
    ] {
        let overrides: Vec<Override> = [
            format!("bus.latency_mean_ms={latency}"),
            "bus.latency_jitter_ms=0".into(),
            "pace.tau_ms=120".into(),
            "vote.tau_ms=120".into(),
        ]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
        let config = cli::load_scenario(name, &overrides).map_err(|e| e.to_string())?;
        let m = run(&config).map_err(|e| e.to_string())?;
        let times = &m.summary.round_times_ms;
        ensure(times.len() >= 2, || {
            format!("{name}: only {} rounds", times.len())
        })?;
        if let Some(w) = times.windows(2).find(|w| w[1] - w[0] != 120) {
            return Err(format!(
                "{name} latency {latency}: spacing {} ms",
                w[1] - w[0]
            ));
        }
        checked.push(format!("{name}/{latency}ms: {} rounds", times.len()));
    }
    Ok(format!("all spacings 120 ms ({})", checked.join(", ")))
}

fn main() {
    let checks: [(&str, Check); 10] = [
        ("1 directional PACE", c1_pace_directional),
        ("2 directional VOTE", c2_vote_directional),
        ("3 tally oracle", c3_tally_oracle),
        ("4 fusion oracle", c4_pace_oracle),
        ("5 geometry", c5_geometry),
        ("6 visibility bounds", c6_visibility),
        ("7 reputation dynamics", c7_reputation),
        ("8 complexity", c8_complexity),
        ("9 determinism", c9_determinism),
        ("10 cadence", c10_cadence),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail} [{secs:.2} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail} [{secs:.2} s]");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        checks.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
