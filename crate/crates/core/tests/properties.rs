use coughscope::features::{
    flux_between, spectral_bandwidth, spectral_centroid, spectral_entropy, spectral_flatness, spectral_rolloff,
    Descriptor, FluxNormalization,
};
use coughscope::spectrum::PowerSpectrum;
use coughscope::{build_histogram, extract_all, AudioClip, FeatureConfig};
use proptest::prelude::*;

const CASES: u32 = 500;

/// Clips built from noise, tones and silent runs so every code path gets exercised.
fn clip_strategy() -> impl Strategy<Value = AudioClip> {
    let segment = prop_oneof![
        prop::collection::vec(-0.5f64..0.5, 64..600),
        (50.0f64..10_000.0, 64usize..600, 0.01f64..0.5).prop_map(|(f, n, a)| {
            (0..n)
                .map(|i| a * (2.0 * std::f64::consts::PI * f * i as f64 / 22050.0).sin())
                .collect()
        }),
        (64usize..700).prop_map(|n| vec![0.0; n]),
    ];
    prop::collection::vec(segment, 1..6).prop_map(|parts| {
        let mut samples: Vec<f64> = parts.concat();
        if samples.len() < 600 {
            samples.resize(600, 0.0);
        }
        AudioClip::new(22050, samples, "prop").unwrap()
    })
}

fn power_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![3 => 0.0f64..100.0, 1 => Just(0.0)],
        257,
    )
    .prop_filter("needs some power", |p| p.iter().sum::<f64>() > 0.0)
}

fn spec(power: Vec<f64>) -> PowerSpectrum {
    PowerSpectrum::from_power(power, 22050)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn amplitude_scale_invariance(clip in clip_strategy(), gain in 0.05f64..1.9) {
        let config = FeatureConfig { flux_normalization: FluxNormalization::Raw, ..Default::default() };
        let a = extract_all(&clip, &config).unwrap();
        let b = extract_all(&clip.scaled(gain), &config).unwrap();
        prop_assert_eq!(&a.silent, &b.silent);
        prop_assert_eq!(a.values(Descriptor::Zcr), b.values(Descriptor::Zcr));
        for d in Descriptor::ALL {
            for (x, y) in a.values(d).iter().zip(b.values(d)) {
                let tol = if d.unit() == "Hz" { 1e-9 * x.abs().max(1.0) } else { 1e-9 };
                prop_assert!((x - y).abs() <= tol, "{} {} vs {}", d, x, y);
            }
        }
    }

    #[test]
    fn rolloff_monotone_in_roll_percent(power in power_strategy(), p1 in 0.01f64..1.0, p2 in 0.01f64..1.0) {
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        let s = spec(power);
        prop_assert!(spectral_rolloff(&s, lo).unwrap() <= spectral_rolloff(&s, hi).unwrap());
    }

    #[test]
    fn descriptor_ranges(clip in clip_strategy()) {
        let raw_cfg = FeatureConfig { flux_normalization: FluxNormalization::Raw, ..Default::default() };
        let raw = extract_all(&clip, &raw_cfg).unwrap();
        let set = extract_all(&clip, &FeatureConfig::default()).unwrap();
        let nyquist = 11025.0;
        let zcr_max = 511.0 / 512.0;
        let within = |d: Descriptor, lo: f64, hi: f64, values: &[f64]| {
            values.iter().all(|v| v.is_finite() && *v >= lo && *v <= hi) || {
                eprintln!("{d} out of [{lo}, {hi}]: {values:?}");
                false
            }
        };
        prop_assert!(within(Descriptor::Rolloff, 0.0, nyquist, set.values(Descriptor::Rolloff)));
        prop_assert!(within(Descriptor::Centroid, 0.0, nyquist, set.values(Descriptor::Centroid)));
        prop_assert!(within(Descriptor::Bandwidth, 0.0, nyquist, set.values(Descriptor::Bandwidth)));
        prop_assert!(within(Descriptor::Flatness, 0.0, 1.0, set.values(Descriptor::Flatness)));
        prop_assert!(within(Descriptor::Entropy, 0.0, 1.0, set.values(Descriptor::Entropy)));
        prop_assert!(within(Descriptor::Flux, 0.0, 1.0, set.values(Descriptor::Flux)));
        prop_assert!(within(Descriptor::Flux, 0.0, 2.0, raw.values(Descriptor::Flux)));
        prop_assert!(within(Descriptor::Zcr, 0.0, zcr_max, set.values(Descriptor::Zcr)));
        for (c, bw) in set.values(Descriptor::Centroid).iter().zip(set.values(Descriptor::Bandwidth)) {
            prop_assert!(*bw <= c.max(nyquist - c) + 1e-9);
        }
    }

    #[test]
    fn spectrum_level_bounds(power in power_strategy()) {
        let s = spec(power);
        let c = spectral_centroid(&s).unwrap();
        let bw = spectral_bandwidth(&s, c).unwrap();
        prop_assert!((0.0..=11025.0).contains(&c));
        prop_assert!(bw >= 0.0 && bw <= c.max(11025.0 - c) + 1e-9);
        let e = spectral_entropy(&s, true).unwrap();
        prop_assert!((0.0..=1.0).contains(&e));
        let f = spectral_flatness(&s, 1e-12).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn flux_symmetric_and_zero_on_identical(a in power_strategy(), b in power_strategy()) {
        let (sa, sb) = (spec(a), spec(b));
        prop_assert_eq!(flux_between(&sa, &sb), flux_between(&sb, &sa));
        prop_assert_eq!(flux_between(&sa, &sa), 0.0);
        let f = flux_between(&sa, &sb);
        prop_assert!((0.0..=2.0).contains(&f));
    }

    #[test]
    fn histogram_conservation(values in prop::collection::vec(-1e4f64..1e4, 1..400), bins in 1usize..64) {
        let h = build_histogram(&values, bins, None).unwrap();
        prop_assert_eq!(h.total as usize, values.len());
        prop_assert_eq!(h.counts.iter().sum::<u64>(), h.total);
        prop_assert_eq!(h.bin_edges.len(), bins + 1);
    }
}
