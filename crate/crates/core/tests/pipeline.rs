use std::sync::Arc;

use proptest::prelude::*;
use speejis_core::pipeline::chunk_at;
use speejis_core::render::{render_svg, RenderOptions};
use speejis_core::{
    color_for, decode_wav, AudioClip, AugmentationDescriptor, BackendConfig, BaselineBackend, DescriptorStatus,
    EmojiTable, Error, HttpSerBackend, HttpTranscriber, Pipeline, PipelineConfig, SerBackend, Transcriber, VadPoint,
};
use speejis_testkit::{request_spans, unreachable_url, wav, AsrBehavior, FakeServer, SerBehavior};

fn baseline() -> Pipeline {
    Pipeline::new(
        Arc::new(EmojiTable::builtin()),
        PipelineConfig::default(),
        Arc::new(BaselineBackend),
        None,
    )
    .unwrap()
}

fn external(url: &str, asr_url: Option<&str>) -> Pipeline {
    let ser: Arc<dyn SerBackend> = Arc::new(HttpSerBackend::new(&BackendConfig::external(url)).unwrap());
    let asr =
        asr_url.map(|u| Arc::new(HttpTranscriber::new(&BackendConfig::external(u)).unwrap()) as Arc<dyn Transcriber>);
    Pipeline::new(Arc::new(EmojiTable::builtin()), PipelineConfig::default(), ser, asr).unwrap()
}

/// Whole message is the second-to-last span, ending the last.
fn two_emoji_script() -> SerBehavior {
    SerBehavior::per_span(|i, n, _, _| {
        if i + 2 == n {
            [0.95, 0.9, 0.5]
        } else if i + 1 == n {
            [0.1, 0.4, 0.5]
        } else {
            [0.5, 0.5, 0.5]
        }
    })
}

#[tokio::test]
async fn headline_emojis_follow_whole_and_ending_points() {
    let server = FakeServer::start(two_emoji_script()).await;
    let clip = decode_wav(&wav::speechish(10.0, 2)).unwrap();
    let d = external(&server.url(), None).augment("m", &clip).await;
    let table = EmojiTable::builtin();

    assert_eq!(d.status, DescriptorStatus::Done);
    let overall = VadPoint::new(0.9, 0.8, 0.0).unwrap();
    let ending = VadPoint::new(-0.8, -0.2, 0.0).unwrap();
    assert_eq!(d.overall, Some(overall));
    assert_eq!(d.ending, Some(ending));
    assert_eq!(d.overall_emoji.as_ref(), Some(table.nearest(&overall)));
    assert_eq!(d.ending_emoji.as_ref(), Some(table.nearest(&ending)));
    assert_ne!(d.overall_emoji, d.ending_emoji);

    let reqs = server.analyze_requests();
    assert_eq!(reqs.len(), 1, "one backend call per message");
    let spans = request_spans(&reqs[0]);
    assert_eq!(spans.len(), d.chunks.len() + 2);
    assert_eq!(spans[d.chunks.len()], (0.0, 10.0));
    assert_eq!(spans[d.chunks.len() + 1], (8.0, 10.0));
}

#[tokio::test]
async fn unreachable_backend_fails_softly() {
    let clip = decode_wav(&wav::speechish(3.0, 3)).unwrap();
    let d = external(&unreachable_url(), None).augment("m", &clip).await;
    assert_eq!(d.status, DescriptorStatus::AugmentationFailed);
    assert!(d.overall_emoji.is_none() && d.ending_emoji.is_none());
    assert_eq!(d.bars.len(), 30);
    assert!(d.bars.iter().all(|b| b.color.is_none()));
    let svg = render_svg(&d, 400.0, 64.0, RenderOptions { segments: true }).unwrap();
    assert_eq!(svg.matches("class=\"speeji").count(), 0);
    assert_eq!(svg.matches("<rect").count(), 30);
}

#[tokio::test]
async fn transcript_is_aligned_to_interest_segments() {
    let segs = vec![(0.0, 2.0, "hello there".to_owned()), (2.0, 5.0, "see you".to_owned())];
    // chunks 3..=5 (1.5 s .. 3.0 s) are salient
    let ser = SerBehavior::per_span(|i, n, _, _| {
        if (3..=5).contains(&i) && i + 2 < n {
            [0.9, 0.9, 0.5]
        } else {
            [0.5; 3]
        }
    });
    let server = FakeServer::start_with(ser, AsrBehavior::Segments(segs)).await;
    let clip = decode_wav(&wav::speechish(5.0, 4)).unwrap();
    let d = external(&server.url(), Some(&server.url())).augment("m", &clip).await;
    assert_eq!(d.status, DescriptorStatus::Done);
    assert_eq!(d.transcript.len(), 2);
    assert_eq!(d.interest_segments.len(), 1);
    let s = &d.interest_segments[0];
    assert_eq!((s.start_s, s.end_s), (1.5, 3.0));
    assert_eq!(s.text, "hello there see you");
}

#[tokio::test]
async fn transcription_failure_keeps_augmentation() {
    let server = FakeServer::start_with(SerBehavior::Constant([0.8, 0.8, 0.5]), AsrBehavior::Status(500)).await;
    let clip = decode_wav(&wav::speechish(2.0, 5)).unwrap();
    let d = external(&server.url(), Some(&server.url())).augment("m", &clip).await;
    assert_eq!(d.status, DescriptorStatus::Done);
    assert!(d.transcript.is_empty());
    assert!(d.overall_emoji.is_some());
}

#[tokio::test]
async fn baseline_descriptor_is_deterministic() {
    let clip = decode_wav(&wav::speechish(10.0, 6)).unwrap();
    let a = baseline().augment("m", &clip).await;
    let b = baseline().augment("m", &clip).await;
    assert_eq!(a.to_pretty_json(), b.to_pretty_json());
    let opts = RenderOptions { segments: true };
    assert_eq!(
        render_svg(&a, 400.0, 64.0, opts).unwrap(),
        render_svg(&b, 400.0, 64.0, opts).unwrap()
    );
}

#[tokio::test]
async fn descriptor_invariants_hold() {
    let clip = decode_wav(&wav::speechish(7.3, 7)).unwrap();
    let p = baseline();
    let d = p.augment("m", &clip).await;
    d.validate().unwrap();
    for bar in &d.bars {
        let owners = d.chunks.iter().filter(|c| c.span.contains(bar.midpoint_s())).count();
        assert_eq!(owners, 1);
        let chunk = chunk_at(&d.chunks, bar.midpoint_s()).unwrap();
        // equal at descriptor precision (six decimals)
        let want = Some(color_for(&chunk.vad, p.config().neutral_tau));
        assert_eq!(
            serde_json::to_string(&bar.color).unwrap(),
            serde_json::to_string(&want).unwrap()
        );
    }
    assert_eq!(
        d.overall_emoji.as_ref(),
        Some(p.table().nearest(d.overall.as_ref().unwrap()))
    );
    assert_eq!(
        d.ending_emoji.as_ref(),
        Some(p.table().nearest(d.ending.as_ref().unwrap()))
    );
}

#[tokio::test]
async fn scaling_audio_keeps_bars_and_scripted_emojis() {
    let server = FakeServer::start(two_emoji_script()).await;
    let pipeline = external(&server.url(), None);
    let clip = decode_wav(&wav::speechish(4.0, 8)).unwrap();
    let base = pipeline.augment("m", &clip).await;
    for c in [0.55f32, 0.8, 1.0] {
        let scaled = AudioClip::new(clip.samples().iter().map(|x| x * c).collect(), clip.sample_rate())
            .unwrap()
            .quantized();
        let d = pipeline.augment("m", &scaled).await;
        assert_eq!(d.overall_emoji, base.overall_emoji);
        assert_eq!(d.ending_emoji, base.ending_emoji);
        for (x, y) in d.bars.iter().zip(&base.bars) {
            // PCM16 requantization of the scaled signal bounds the deviation
            assert!(
                (x.height - y.height).abs() < 1e-4,
                "c={c}: {} vs {}",
                x.height,
                y.height
            );
        }
    }
}

#[tokio::test]
async fn render_layout_rules() {
    let clip = decode_wav(&wav::speechish(10.0, 9)).unwrap();
    let d = baseline().augment("m", &clip).await;
    assert_eq!(d.bars.len(), 100);
    let svg = render_svg(&d, 400.0, 64.0, RenderOptions::default()).unwrap();
    let xs: Vec<f64> = svg
        .lines()
        .filter(|l| l.contains("<rect"))
        .map(|l| {
            l.split("x=\"")
                .nth(1)
                .unwrap()
                .split('"')
                .next()
                .unwrap()
                .parse()
                .unwrap()
        })
        .collect();
    assert_eq!(xs.len(), 100);
    assert!(xs.windows(2).all(|w| w[0] < w[1]));
    // overall emoji precedes the waveform, ending emoji follows it
    let overall = svg.find("speeji-overall").unwrap();
    let wave = svg.find("class=\"waveform\"").unwrap();
    let ending = svg.find("speeji-ending").unwrap();
    assert!(overall < wave && wave < ending);
    assert_eq!(svg.matches("data-generated-by=\"ai\"").count(), 2);
}

#[tokio::test]
async fn segment_emojis_are_opt_in() {
    let ser = SerBehavior::per_span(|i, n, _, _| {
        if i + 2 >= n {
            [0.5; 3]
        } else if i == 1 || i == 5 {
            [0.95, 0.95, 0.5]
        } else {
            [0.5; 3]
        }
    });
    let server = FakeServer::start(ser).await;
    let clip = decode_wav(&wav::speechish(4.0, 10)).unwrap();
    let d = external(&server.url(), None).augment("m", &clip).await;
    assert_eq!(d.interest_segments.len(), 2);
    let plain = render_svg(&d, 400.0, 64.0, RenderOptions { segments: false }).unwrap();
    let with = render_svg(&d, 400.0, 64.0, RenderOptions { segments: true }).unwrap();
    assert_eq!(plain.matches("class=\"speeji").count(), 2);
    assert_eq!(with.matches("class=\"speeji").count(), 4);
}

#[tokio::test]
async fn render_rejects_bad_dimensions() {
    let clip = decode_wav(&wav::silence(1.0)).unwrap();
    let d = baseline().augment("m", &clip).await;
    assert!(matches!(
        render_svg(&d, 0.0, 64.0, RenderOptions::default()),
        Err(Error::Input(_))
    ));
    assert!(matches!(
        render_svg(&d, 400.0, -1.0, RenderOptions::default()),
        Err(Error::Input(_))
    ));
}

#[tokio::test]
async fn schema_violations_name_the_path() {
    let clip = decode_wav(&wav::speechish(2.0, 11)).unwrap();
    let d = baseline().augment("m", &clip).await;
    let mut v: serde_json::Value = serde_json::from_str(&d.to_json()).unwrap();

    v.as_object_mut().unwrap().remove("bars");
    match AugmentationDescriptor::from_json(&v.to_string()) {
        Err(Error::Schema { path, .. }) => assert_eq!(path, "/bars"),
        other => panic!("{other:?}"),
    }

    let mut v: serde_json::Value = serde_json::from_str(&d.to_json()).unwrap();
    v["bars"][3]["height"] = serde_json::json!("tall");
    match AugmentationDescriptor::from_json(&v.to_string()) {
        Err(Error::Schema { path, .. }) => assert_eq!(path, "/bars/3/height"),
        other => panic!("{other:?}"),
    }

    let mut v: serde_json::Value = serde_json::from_str(&d.to_json()).unwrap();
    v["overall_emoji"] = serde_json::Value::Null;
    match AugmentationDescriptor::from_json(&v.to_string()) {
        Err(Error::Schema { path, .. }) => assert_eq!(path, "/overall_emoji"),
        other => panic!("{other:?}"),
    }

    let mut v: serde_json::Value = serde_json::from_str(&d.to_json()).unwrap();
    v["generated_by"] = serde_json::json!("user");
    assert!(AugmentationDescriptor::from_json(&v.to_string()).is_err());
}

#[tokio::test]
async fn silent_two_seconds_with_baseline() {
    let clip = decode_wav(&wav::silence(2.0)).unwrap();
    let p = baseline();
    let d = p.augment("m", &clip).await;
    let minus = VadPoint::new(-1.0, -1.0, -1.0).unwrap();
    assert!(d.chunks.iter().all(|c| c.vad == minus));
    assert!(d.bars.iter().all(|b| {
        let c = b.color.unwrap();
        c.hue == 0.0 && c.saturation == 35.0 && !c.neutral
    }));
    assert_eq!(d.overall_emoji.as_ref(), Some(p.table().nearest(&minus)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn descriptor_json_round_trips(seconds in 0.2f64..20.0, seed in 0u32..50) {
        let rt = tokio::runtime::Builder::new_current_thread().build().unwrap();
        let clip = decode_wav(&wav::speechish(seconds, seed)).unwrap();
        let d = rt.block_on(baseline().augment("m", &clip));
        let json = d.to_json();
        let back = AugmentationDescriptor::from_json(&json).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(back.to_json(), json);
        prop_assert!(d.ending_span.start_s >= 0.0 && d.ending_span.end_s <= d.duration_s);
        prop_assert!(d.ending_span.end_s > d.ending_span.start_s);
    }
}
