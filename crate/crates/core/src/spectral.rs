//! Signal synthesis and exact discrete Fourier transforms.
//!
//! Conventions: synthesis uses `e^{+j2πkn/N}` so that a component declared at
//! bin `k` lands at index `k` of the forward transform, which uses
//! `e^{-j2πkn/N}` and is unnormalized (a component of amplitude `A` shows up
//! as `N·A`). The inverse carries the `1/N`.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Sparse frequency-domain description of a multicomponent signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    length_n: usize,
    components: Vec<(usize, Complex64)>,
}

impl SignalSpec {
    /// Components are kept sorted by bin. Bins must be distinct and below
    /// `length_n`.
    pub fn new(length_n: usize, components: Vec<(usize, Complex64)>) -> Result<Self> {
        if length_n == 0 {
            return Err(Error::InvalidSpec("length must be positive".into()));
        }
        let mut seen = HashSet::with_capacity(components.len());
        for &(bin, amp) in &components {
            if bin >= length_n {
                return Err(Error::InvalidSpec(format!(
                    "bin {bin} out of range for length {length_n}"
                )));
            }
            if !seen.insert(bin) {
                return Err(Error::InvalidSpec(format!("duplicate bin {bin}")));
            }
            if !(amp.re.is_finite() && amp.im.is_finite()) {
                return Err(Error::InvalidSpec(format!("non-finite amplitude at bin {bin}")));
            }
        }
        let mut components = components;
        components.sort_by_key(|&(bin, _)| bin);
        Ok(Self {
            length_n,
            components,
        })
    }

    /// The seven-tone test signal used throughout the benchmarks: bins
    /// {32, 38, 130, 148, 272, 415, 435} with real amplitudes
    /// {3.5, 3, 1.75, 2.5, 3.75, 2.3, 3.3} at length 512.
    pub fn seven_tone() -> Self {
        const BINS: [usize; 7] = [32, 38, 130, 148, 272, 415, 435];
        const AMPS: [f64; 7] = [3.5, 3.0, 1.75, 2.5, 3.75, 2.3, 3.3];
        let components = BINS
            .iter()
            .zip(AMPS)
            .map(|(&b, a)| (b, Complex64::new(a, 0.0)))
            .collect();
        Self::new(512, components).expect("seven-tone spec is valid")
    }

    pub fn length_n(&self) -> usize {
        self.length_n
    }

    pub fn components(&self) -> &[(usize, Complex64)] {
        &self.components
    }

    /// Number of components, K.
    pub fn sparsity(&self) -> usize {
        self.components.len()
    }

    /// Sorted component bins.
    pub fn bins(&self) -> Vec<usize> {
        self.components.iter().map(|&(b, _)| b).collect()
    }

    /// Σ|A_k|², the total component energy.
    pub fn energy(&self) -> f64 {
        self.components.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Length-N amplitude-scale spectrum: `A_k` at each bin, zero elsewhere.
    pub fn amplitude_vector(&self) -> Vec<Complex64> {
        let mut p = vec![Complex64::new(0.0, 0.0); self.length_n];
        for &(bin, amp) in &self.components {
            p[bin] = amp;
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    samples: Vec<Complex64>,
}

impl TimeSignal {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        Ok(Self { samples })
    }

    pub fn length_n(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumScale {
    /// Forward-DFT units (a component of amplitude A reads N·A).
    Raw,
    /// Raw divided by N.
    Amplitude,
}

impl fmt::Display for SpectrumScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl SpectrumScale {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectrumScale::Raw => "raw",
            SpectrumScale::Amplitude => "amplitude",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bins: Vec<Complex64>,
    scale: SpectrumScale,
}

impl Spectrum {
    pub fn new(bins: Vec<Complex64>, scale: SpectrumScale) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::EmptySignal);
        }
        Ok(Self { bins, scale })
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn scale(&self) -> SpectrumScale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.bins.iter().map(|c| c.norm()).collect()
    }

    /// Rescale a raw spectrum to amplitude units; amplitude spectra pass
    /// through unchanged.
    pub fn to_amplitude(&self) -> Spectrum {
        match self.scale {
            SpectrumScale::Amplitude => self.clone(),
            SpectrumScale::Raw => {
                let inv_n = 1.0 / self.bins.len() as f64;
                Spectrum {
                    bins: self.bins.iter().map(|c| c * inv_n).collect(),
                    scale: SpectrumScale::Amplitude,
                }
            }
        }
    }
}

/// Synthesizes `x[n] = Σ_k A_k e^{+j2π·bin_k·n/N}`.
///
/// Phases are reduced modulo N in integer arithmetic before the complex
/// exponential is evaluated, so large `bin·n` products lose no precision.
pub fn generate_signal(spec: &SignalSpec) -> TimeSignal {
    let n = spec.length_n();
    let roots = unit_roots(n);
    let mut samples = vec![Complex64::new(0.0, 0.0); n];
    for &(bin, amp) in spec.components() {
        for (t, s) in samples.iter_mut().enumerate() {
            *s += amp * roots[(bin * t) % n];
        }
    }
    TimeSignal { samples }
}

/// Unnormalized forward DFT, `X[k] = Σ_n x[n] e^{-j2πkn/N}`.
pub fn dft(signal: &TimeSignal) -> Result<Spectrum> {
    let mut buf = signal.samples().to_vec();
    forward_in_place(&mut buf)?;
    Ok(Spectrum {
        bins: buf,
        scale: SpectrumScale::Raw,
    })
}

/// Inverse of [`dft`]; requires a raw-scale spectrum.
pub fn idft(spectrum: &Spectrum) -> Result<TimeSignal> {
    if spectrum.scale != SpectrumScale::Raw {
        return Err(Error::ScaleMismatch {
            expected: SpectrumScale::Raw.as_str(),
            found: spectrum.scale.as_str(),
        });
    }
    let mut buf = spectrum.bins.clone();
    if buf.is_empty() {
        return Err(Error::EmptySignal);
    }
    let n = buf.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let inv_n = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= inv_n);
    Ok(TimeSignal { samples: buf })
}

pub(crate) fn forward_in_place(buf: &mut [Complex64]) -> Result<()> {
    if buf.is_empty() {
        return Err(Error::EmptySignal);
    }
    FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
    Ok(())
}

/// `e^{+j2πt/N}` for t = 0…N−1.
pub(crate) fn unit_roots(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|t| x[t] * Complex64::from_polar(1.0, -2.0 * PI * (k * t) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    fn naive_idft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|t| {
                (0..n)
                    .map(|k| x[k] * Complex64::from_polar(1.0, 2.0 * PI * (k * t) as f64 / n as f64))
                    .sum::<Complex64>()
                    / n as f64
            })
            .collect()
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn max_rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
    }

    #[test]
    fn seven_tone_first_sample_is_amplitude_sum() {
        let x = generate_signal(&SignalSpec::seven_tone());
        assert_eq!(x.length_n(), 512);
        assert!((x.samples()[0] - c(20.1, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn empty_spec_is_zero_signal() {
        let spec = SignalSpec::new(8, vec![]).unwrap();
        let x = generate_signal(&spec);
        assert!(x.samples().iter().all(|s| *s == c(0.0, 0.0)));
    }

    #[test]
    fn single_tone_matches_pointwise_exponential() {
        let spec = SignalSpec::new(8, vec![(2, c(1.0, 0.0))]).unwrap();
        let x = generate_signal(&spec);
        for (t, s) in x.samples().iter().enumerate() {
            let expect = Complex64::from_polar(1.0, 2.0 * PI * (2 * t) as f64 / 8.0);
            assert!((s - expect).norm() < 1e-15, "n={t}");
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(matches!(
            SignalSpec::new(8, vec![(8, c(1.0, 0.0))]),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            SignalSpec::new(8, vec![(1, c(1.0, 0.0)), (1, c(2.0, 0.0))]),
            Err(Error::InvalidSpec(_))
        ));
        assert!(SignalSpec::new(0, vec![]).is_err());
    }

    #[test]
    fn dft_of_seven_tone_is_sparse() {
        let spec = SignalSpec::seven_tone();
        let x = dft(&generate_signal(&spec)).unwrap();
        assert_eq!(x.scale(), SpectrumScale::Raw);
        assert!((x.bins()[32] - c(1792.0, 0.0)).norm() < 1e-9);
        let bins = spec.bins();
        for (k, v) in x.bins().iter().enumerate() {
            if !bins.contains(&k) {
                assert!(v.norm() < 1e-9, "bin {k} = {v}");
            }
        }
        let amp = x.to_amplitude();
        assert!((amp.bins()[130] - c(1.75, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn dft_of_zero_is_zero() {
        let x = TimeSignal::new(vec![c(0.0, 0.0); 16]).unwrap();
        assert!(dft(&x).unwrap().bins().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn dft_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_vec(&mut rng, 8);
        let fast = dft(&TimeSignal::new(x.clone()).unwrap()).unwrap();
        assert!(max_rel_err(fast.bins(), &naive_dft(&x)) < 1e-12);
    }

    #[test]
    fn idft_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_vec(&mut rng, 16);
        let spec = Spectrum::new(x.clone(), SpectrumScale::Raw).unwrap();
        let t = idft(&spec).unwrap();
        assert!(max_rel_err(t.samples(), &naive_idft(&x)) < 1e-12);
    }

    #[test]
    fn idft_single_dc_bin_is_ones() {
        let mut bins = vec![c(0.0, 0.0); 8];
        bins[0] = c(8.0, 0.0);
        let t = idft(&Spectrum::new(bins, SpectrumScale::Raw).unwrap()).unwrap();
        assert!(t.samples().iter().all(|s| (s - c(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn idft_rejects_amplitude_scale() {
        let s = Spectrum::new(vec![c(1.0, 0.0); 4], SpectrumScale::Amplitude).unwrap();
        assert!(matches!(idft(&s), Err(Error::ScaleMismatch { .. })));
    }

    #[test]
    fn seven_tone_round_trip() {
        let x = generate_signal(&SignalSpec::seven_tone());
        let back = idft(&dft(&x).unwrap()).unwrap();
        assert!(max_rel_err(back.samples(), x.samples()) < 1e-10);
    }

    #[test]
    fn empty_signal_rejected() {
        assert_eq!(TimeSignal::new(vec![]), Err(Error::EmptySignal));
    }

    fn arb_signal() -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..=1024)
            .prop_map(|v| v.into_iter().map(|(re, im)| c(re, im)).collect())
    }

    fn arb_spec_pair() -> impl Strategy<Value = (usize, Vec<(usize, Complex64)>, Vec<(usize, Complex64)>)> {
        (2usize..=128).prop_flat_map(|n| {
            (
                Just(n),
                prop::sample::subsequence((0..n).collect::<Vec<_>>(), 0..=n),
                prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), n),
                any::<u64>(),
            )
                .prop_map(|(n, bins, amps, split)| {
                    let mut a = Vec::new();
                    let mut b = Vec::new();
                    for (i, bin) in bins.into_iter().enumerate() {
                        let amp = c(amps[i].0, amps[i].1);
                        if (split >> (i % 64)) & 1 == 0 {
                            a.push((bin, amp));
                        } else {
                            b.push((bin, amp));
                        }
                    }
                    (n, a, b)
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn round_trip_within_tolerance(x in arb_signal()) {
            let sig = TimeSignal::new(x.clone()).unwrap();
            let back = idft(&dft(&sig).unwrap()).unwrap();
            let max = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let err = back.samples().iter().zip(&x).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(err <= 1e-10 * max.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn parseval(x in arb_signal()) {
            let n = x.len() as f64;
            let time: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            let freq: f64 = dft(&TimeSignal::new(x).unwrap()).unwrap().bins().iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
            prop_assert!((time - freq).abs() <= 1e-9 * time.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn synthesis_is_linear_and_sparse((n, a, b) in arb_spec_pair()) {
            let sa = SignalSpec::new(n, a.clone()).unwrap();
            let sb = SignalSpec::new(n, b.clone()).unwrap();
            let mut all = a.clone();
            all.extend(b.iter().copied());
            let su = SignalSpec::new(n, all).unwrap();
            let (xa, xb, xu) = (generate_signal(&sa), generate_signal(&sb), generate_signal(&su));
            let scale = xu.samples().iter().map(|z| z.norm()).fold(1.0, f64::max);
            for i in 0..n {
                prop_assert!((xa.samples()[i] + xb.samples()[i] - xu.samples()[i]).norm() <= 1e-12 * scale);
            }
            // Components with |A| below the 1e-6 floor are indistinguishable from zero.
            let spectrum = dft(&xu).unwrap();
            let floor = 1e-6 * n as f64;
            let detected: Vec<usize> = spectrum.bins().iter().enumerate()
                .filter(|(_, v)| v.norm() > floor).map(|(k, _)| k).collect();
            let expected: Vec<usize> = su.components().iter()
                .filter(|(_, a)| a.norm() > 1e-6).map(|&(k, _)| k).collect();
            prop_assert_eq!(detected, expected);
        }
    }
}
