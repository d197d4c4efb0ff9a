//! Phonetic network: timed linguistic representation to 10 ms vocoder
//! frames, with the network's own previous outputs fed back as input.

use std::io::{Read, Write};
use std::path::Path;

use crate::corpus::Utterance;
use crate::error::{Error, Result};
use crate::lingnets::PhoneCoder;
use crate::nn::{self, Activation, Loss, NetSpec, Network, OutputActivation, Sample, TrainConfig, TrainReport};
use crate::phonology::{boundary_distances, FeatureSystem, LinguisticRep};
use crate::vocoder::{self, AudioBuffer, FrameParams, VocoderConfig, FRAME_VALUES, MIN_F0, MAX_F0, NYQUIST, ORDER, SILENCE_DB};

pub const FRAME_MS: f64 = 10.0;
pub const ACOUSTIC_RADIUS: usize = 2;
/// Previous output frames fed back into the network.
pub const FEEDBACK_FRAMES: usize = 4;
/// Minimum LSF separation after clamping, in radians.
pub const LSF_MIN_GAP: f64 = 1e-3;

const CACHE_MAGIC: &[u8; 4] = b"NTFD";
const CACHE_VERSION: u32 = 1;

/// Maps frame values to roughly unit range: f0/400, (power + 100)/100,
/// boundary/8000, lsf/π.
pub fn normalize(f: &FrameParams) -> [f64; FRAME_VALUES] {
    let mut v = [0.0; FRAME_VALUES];
    v[0] = f.f0 / MAX_F0;
    v[1] = (f.power - SILENCE_DB) / -SILENCE_DB;
    v[2] = f.boundary / NYQUIST;
    for k in 0..ORDER {
        v[3 + k] = f.lsf[k] / std::f64::consts::PI;
    }
    v
}

/// Inverse of [`normalize`] followed by [`clamp_frame`].
pub fn denormalize(v: &[f64]) -> FrameParams {
    let mut lsf = [0.0; ORDER];
    for k in 0..ORDER {
        lsf[k] = v[3 + k] * std::f64::consts::PI;
    }
    clamp_frame(FrameParams {
        f0: v[0] * MAX_F0,
        power: v[1] * -SILENCE_DB + SILENCE_DB,
        boundary: v[2] * NYQUIST,
        lsf,
    })
}

/// Forces a frame into the valid range. f0 below 50 Hz means unvoiced (f0
/// and boundary both 0); LSFs are sorted and spread to a 1e-3 rad gap
/// inside (0, π).
pub fn clamp_frame(mut f: FrameParams) -> FrameParams {
    let fin = |x: f64, d: f64| if x.is_finite() { x } else { d };
    f.f0 = fin(f.f0, 0.0);
    f.power = fin(f.power, SILENCE_DB).clamp(SILENCE_DB, 0.0);
    f.boundary = fin(f.boundary, 0.0).clamp(0.0, NYQUIST);
    if f.f0 < MIN_F0 {
        f.f0 = 0.0;
        f.boundary = 0.0;
    } else {
        f.f0 = f.f0.min(MAX_F0);
    }
    let uniform = vocoder::uniform_lsf();
    for (k, x) in f.lsf.iter_mut().enumerate() {
        *x = fin(*x, uniform[k]);
    }
    f.lsf.sort_by(f64::total_cmp);
    let pi = std::f64::consts::PI;
    let mut lo = 0.0;
    for x in f.lsf.iter_mut() {
        *x = x.max(lo + LSF_MIN_GAP);
        lo = *x;
    }
    let mut hi = pi;
    for x in f.lsf.iter_mut().rev() {
        *x = x.min(hi - LSF_MIN_GAP);
        hi = *x;
    }
    f
}

/// Number of 10 ms frames for the given phone durations.
pub fn frame_count(durations: &[f64]) -> usize {
    (durations.iter().sum::<f64>() / FRAME_MS).round() as usize
}

/// Encodes frames for the phonetic network.
///
/// Frame `i` is centred at `10 i + 5` ms and belongs to the phone whose
/// interval contains that time (the last phone past the end). Its base
/// input is a ±2 phone window of identity and features, the fractional
/// position of the centre inside the phone, ln(duration)/6, the stress
/// of the phone's syllable (3 bits), and the phone's previous/next
/// distances to word, phrase, clause and sentence boundaries coded
/// 1/(1 + d). The 4 previous normalized output frames follow, oldest
/// first; positions before the utterance hold the normalized silence
/// frame.
#[derive(Debug, Clone)]
pub struct AcousticEncoder {
    coder: PhoneCoder,
}

/// Per-utterance quantities shared by all frames.
struct Timing<'a> {
    starts: Vec<f64>,
    durations: &'a [f64],
    phones: Vec<Vec<f64>>,
    dist: crate::phonology::BoundaryDistances,
    stress: Vec<u8>,
}

impl AcousticEncoder {
    pub fn new(fs: &FeatureSystem) -> Self {
        AcousticEncoder {
            coder: PhoneCoder::new(fs),
        }
    }

    pub fn base_width(&self) -> usize {
        (2 * ACOUSTIC_RADIUS + 1) * self.coder.width() + 1 + 1 + 3 + 8
    }

    pub fn input_width(&self) -> usize {
        self.base_width() + FEEDBACK_FRAMES * FRAME_VALUES
    }

    /// Normalized silence, used for feedback before the first frame.
    pub fn feedback_pad() -> [f64; FRAME_VALUES] {
        normalize(&FrameParams::silence())
    }

    fn timing<'a>(&self, rep: &'a LinguisticRep, durations: &'a [f64]) -> Result<Timing<'a>> {
        let n = rep.phone_count();
        if durations.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: durations.len(),
            });
        }
        if n == 0 {
            return Err(Error::invalid("utterance has no phones"));
        }
        if let Some(d) = durations.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(Error::invalid(format!("phone duration {d} is not positive")));
        }
        let mut starts = Vec::with_capacity(n);
        let mut t = 0.0;
        for d in durations {
            starts.push(t);
            t += d;
        }
        let slots = rep.phone_slots();
        let phones = slots
            .iter()
            .map(|s| {
                let mut v = Vec::with_capacity(self.coder.width());
                self.coder.push(Some(rep.symbol(s)), &mut v);
                v
            })
            .collect();
        let stress = slots.iter().map(|s| rep.syllable(s).stress.min(2)).collect();
        Ok(Timing {
            starts,
            durations,
            phones,
            dist: boundary_distances(rep),
            stress,
        })
    }

    fn base(&self, t: &Timing, frame: usize, pad: &[f64]) -> Vec<f64> {
        let centre = frame as f64 * FRAME_MS + FRAME_MS / 2.0;
        let j = t.starts.partition_point(|&s| s <= centre).saturating_sub(1);
        let mut x = nn::assemble_window(&t.phones, j, ACOUSTIC_RADIUS, pad);
        x.push(((centre - t.starts[j]) / t.durations[j]).clamp(0.0, 1.0));
        x.push(t.durations[j].ln() / 6.0);
        let mut stress = [0.0; 3];
        stress[t.stress[j] as usize] = 1.0;
        x.extend_from_slice(&stress);
        for l in 0..4 {
            x.push(1.0 / (1.0 + t.dist.prev[j][l] as f64));
            x.push(1.0 / (1.0 + t.dist.next[j][l] as f64));
        }
        x
    }

    fn coder_pad(&self) -> Vec<f64> {
        let mut pad = Vec::with_capacity(self.coder.width());
        self.coder.push(None, &mut pad);
        pad
    }

    fn push_feedback(x: &mut Vec<f64>, history: &[[f64; FRAME_VALUES]], frame: usize) {
        for back in (1..=FEEDBACK_FRAMES).rev() {
            match frame.checked_sub(back) {
                Some(k) => x.extend_from_slice(&history[k]),
                None => x.extend_from_slice(&Self::feedback_pad()),
            }
        }
    }

    /// Input for `frame` given the normalized outputs of all earlier frames
    /// (`history[k]` for frame `k`; only the last four are used).
    pub fn encode_frame(
        &self,
        rep: &LinguisticRep,
        durations: &[f64],
        frame: usize,
        history: &[[f64; FRAME_VALUES]],
    ) -> Result<Vec<f64>> {
        let n = frame_count(durations);
        if frame >= n {
            return Err(Error::invalid(format!("frame {frame} out of range for {n} frames")));
        }
        if history.len() < frame {
            return Err(Error::invalid(format!("frame {frame} needs {frame} previous outputs, got {}", history.len())));
        }
        let t = self.timing(rep, durations)?;
        let mut x = self.base(&t, frame, &self.coder_pad());
        Self::push_feedback(&mut x, history, frame);
        Ok(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcousticConfig {
    pub hidden: usize,
    /// Teacher-forced training.
    pub train: TrainConfig,
    /// Rounds in which the feedback inputs are regenerated from the
    /// network's own free-running outputs before training further.
    pub refine_rounds: usize,
    pub refine_epochs: usize,
}

impl Default for AcousticConfig {
    fn default() -> Self {
        AcousticConfig {
            hidden: 64,
            train: TrainConfig {
                learning_rate: 0.02,
                momentum: 0.9,
                epochs: 30,
                batch_size: 16,
                seed: 4,
                init_scale: 1.0,
                loss: Loss::Mse,
            },
            refine_rounds: 2,
            refine_epochs: 8,
        }
    }
}

/// Teacher-forced training pairs: one per 10 ms frame, targets from
/// analysing the audio, feedback from the previous targets.
pub fn build_frame_dataset(
    rep: &LinguisticRep,
    durations: &[f64],
    audio: &AudioBuffer,
    enc: &AcousticEncoder,
    vcfg: &VocoderConfig,
) -> Result<Vec<Sample>> {
    let total_ms: f64 = durations.iter().sum();
    let audio_ms = audio.duration_ms();
    let needed = (total_ms * audio.sample_rate as f64 / 1000.0).round() as usize;
    if needed > audio.samples.len() {
        return Err(Error::invalid(format!(
            "segmentation covers {total_ms:.1} ms but the audio is {audio_ms:.1} ms"
        )));
    }
    let analysed = vocoder::analyze(audio, vcfg)?;
    let targets: Vec<[f64; FRAME_VALUES]> = analysed.iter().map(normalize).collect();
    let t = enc.timing(rep, durations)?;
    let pad = enc.coder_pad();
    let n = frame_count(durations);
    let mut history = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let target = targets[i.min(targets.len() - 1)];
        let mut x = enc.base(&t, i, &pad);
        AcousticEncoder::push_feedback(&mut x, &history, i);
        out.push(Sample::new(x, target.to_vec()));
        history.push(target);
    }
    Ok(out)
}

/// Frame datasets, one per utterance, for every utterance with durations, reading audio from
/// `wav=` paths resolved against `base`.
pub fn corpus_frame_dataset(
    utts: &[Utterance],
    base: &Path,
    fs: &FeatureSystem,
    vcfg: &VocoderConfig,
) -> Result<Vec<Vec<Sample>>> {
    let enc = AcousticEncoder::new(fs);
    let mut out = Vec::new();
    for u in utts {
        let (Some(wav), Some(d)) = (&u.wav, &u.durations) else {
            return Err(Error::invalid(format!("utterance {} needs wav= and dur= fields", u.id)));
        };
        let audio = vocoder::read_wav(&base.join(wav))?;
        out.push(build_frame_dataset(&u.rep, d, &audio, &enc, vcfg)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Frame dataset cache: "NTFD", version u32, input width u64, target width
// u64, utterance count u64; then per utterance a frame count u64 followed
// by each frame's inputs and targets. Everything little-endian, values f64.

pub fn write_frame_cache(utterances: &[Vec<Sample>], path: &Path) -> Result<()> {
    let width = utterances.iter().flatten().next().map_or(0, |s| s.input.len());
    let frames: usize = utterances.iter().map(Vec::len).sum();
    let mut buf = Vec::with_capacity(32 + 8 * utterances.len() + frames * (width + FRAME_VALUES) * 8);
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    buf.extend_from_slice(&(width as u64).to_le_bytes());
    buf.extend_from_slice(&(FRAME_VALUES as u64).to_le_bytes());
    buf.extend_from_slice(&(utterances.len() as u64).to_le_bytes());
    for utt in utterances {
        buf.extend_from_slice(&(utt.len() as u64).to_le_bytes());
        for s in utt {
            if s.input.len() != width || s.target.len() != FRAME_VALUES {
                return Err(Error::Dimension {
                    expected: width + FRAME_VALUES,
                    got: s.input.len() + s.target.len(),
                });
            }
            for v in s.input.iter().chain(&s.target) {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn read_frame_cache(path: &Path) -> Result<Vec<Vec<Sample>>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let bad = |m: &str| Error::Model(format!("{}: {m}", path.display()));
    if bytes.len() < 32 || &bytes[..4] != CACHE_MAGIC {
        return Err(bad("not a frame cache"));
    }
    let u64_at = |o: usize| -> Result<usize> {
        bytes
            .get(o..o + 8)
            .map(|b| u64::from_le_bytes(b.try_into().unwrap()) as usize)
            .ok_or_else(|| bad("truncated"))
    };
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != CACHE_VERSION {
        return Err(bad(&format!("unsupported cache version {version}")));
    }
    let (width, tw, count) = (u64_at(8)?, u64_at(16)?, u64_at(24)?);
    if tw != FRAME_VALUES {
        return Err(bad(&format!("{tw} target values per frame, expected {FRAME_VALUES}")));
    }
    let per = (width + tw) * 8;
    let mut at = 32;
    let mut out = Vec::new();
    for _ in 0..count {
        let n = u64_at(at)?;
        at += 8;
        let body = bytes.get(at..at + n * per).ok_or_else(|| bad("truncated"))?;
        at += n * per;
        let utt = body
            .chunks_exact(per)
            .map(|c| {
                let v: Vec<f64> = c.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
                Sample::new(v[..width].to_vec(), v[width..].to_vec())
            })
            .collect();
        out.push(utt);
    }
    if at != bytes.len() {
        return Err(bad("trailing bytes"));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct AcousticModel {
    pub net: Network,
    encoder: AcousticEncoder,
}

impl AcousticModel {
    pub fn new(net: Network, fs: &FeatureSystem) -> Result<Self> {
        let encoder = AcousticEncoder::new(fs);
        if net.input_size() != encoder.input_width() || net.output_size() != FRAME_VALUES {
            return Err(Error::Model(format!(
                "acoustic network is {}→{}, expected {}→{FRAME_VALUES}",
                net.input_size(),
                net.output_size(),
                encoder.input_width()
            )));
        }
        Ok(AcousticModel { net, encoder })
    }

    pub fn spec(fs: &FeatureSystem, hidden: usize) -> NetSpec {
        let base = AcousticEncoder::new(fs).base_width();
        NetSpec::new(&[base, hidden, FRAME_VALUES], Activation::Tanh, OutputActivation::Linear)
            .with_feedback(FEEDBACK_FRAMES)
    }

    /// Trains with teacher forcing, then refines: each round replaces the
    /// feedback part of every input with the network's own free-running
    /// outputs on that utterance and trains `refine_epochs` more epochs, so
    /// generation sees the kind of history it produces itself.
    pub fn train(utterances: &[Vec<Sample>], fs: &FeatureSystem, cfg: &AcousticConfig) -> Result<(Self, TrainReport)> {
        let mut net = Self::spec(fs, cfg.hidden).build(cfg.train.seed, cfg.train.init_scale)?;
        let flat: Vec<Sample> = utterances.iter().flatten().cloned().collect();
        let mut report = nn::train(&mut net, &flat, &cfg.train)?;
        let base = net.base_input_size();
        for round in 0..cfg.refine_rounds {
            let mut data = Vec::with_capacity(flat.len());
            for utt in utterances {
                let mut history: Vec<[f64; FRAME_VALUES]> = Vec::with_capacity(utt.len());
                for (i, s) in utt.iter().enumerate() {
                    let mut x = s.input[..base].to_vec();
                    AcousticEncoder::push_feedback(&mut x, &history, i);
                    history.push(normalize(&denormalize(&net.forward(&x)?)));
                    data.push(Sample::new(x, s.target.clone()));
                }
            }
            let rcfg = TrainConfig {
                epochs: cfg.refine_epochs,
                seed: cfg.train.seed.wrapping_add(round as u64 + 1),
                ..cfg.train.clone()
            };
            report.loss_curve.extend(nn::train(&mut net, &data, &rcfg)?.loss_curve);
        }
        Ok((Self::new(net, fs)?, report))
    }

    pub fn encoder(&self) -> &AcousticEncoder {
        &self.encoder
    }

    /// Generates `round(Σ durations / 10)` frames, feeding back the
    /// clamped outputs.
    pub fn generate(&self, rep: &LinguisticRep, durations: &[f64]) -> Result<Vec<FrameParams>> {
        let t = self.encoder.timing(rep, durations)?;
        let pad = self.encoder.coder_pad();
        let n = frame_count(durations);
        let mut history: Vec<[f64; FRAME_VALUES]> = Vec::with_capacity(n);
        let mut frames = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = self.encoder.base(&t, i, &pad);
            AcousticEncoder::push_feedback(&mut x, &history, i);
            let y = self.net.forward(&x)?;
            let f = denormalize(&y);
            history.push(normalize(&f));
            frames.push(f);
        }
        Ok(frames)
    }
}

pub fn generate_frames(rep: &LinguisticRep, durations: &[f64], model: &AcousticModel) -> Result<Vec<FrameParams>> {
    model.generate(rep, durations)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_repairs_any_frame() {
        let f = clamp_frame(FrameParams {
            f0: 30.0,
            power: 12.0,
            boundary: 9000.0,
            lsf: [3.0, 0.1, 0.1, 0.1, -1.0, f64::NAN, 4.0, 2.0, 2.0, 0.5],
        });
        assert!(f.validate().is_ok(), "{f:?}");
        assert_eq!((f.f0, f.boundary, f.power), (0.0, 0.0, 0.0));
        for w in f.lsf.windows(2) {
            assert!(w[1] - w[0] >= LSF_MIN_GAP - 1e-12);
        }
    }

    #[test]
    fn normalize_round_trip() {
        let mut f = FrameParams::silence();
        f.f0 = 120.0;
        f.boundary = 3000.0;
        f.power = -30.0;
        let g = denormalize(&normalize(&f));
        assert!((g.f0 - 120.0).abs() < 1e-9 && (g.power + 30.0).abs() < 1e-9);
        for k in 0..ORDER {
            assert!((g.lsf[k] - f.lsf[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_count_rounds() {
        assert_eq!(frame_count(&[100.0, 250.0, 150.0]), 50);
        assert_eq!(frame_count(&[104.0]), 10);
        assert_eq!(frame_count(&[106.0]), 11);
    }
}
