//! Parametric vocoder with a mixed pulse/noise excitation split at a
//! voicing boundary frequency, and an all-pole vocal tract filter carried as
//! ten line spectral frequencies.
//!
//! Frame `i` describes samples `[160 i, 160 i + 160)`; its analysis windows
//! are centred on sample `160 i + 80`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const SAMPLE_RATE: u32 = 16_000;
pub const NYQUIST: f64 = SAMPLE_RATE as f64 / 2.0;
pub const ORDER: usize = 10;
/// 10 ms hop.
pub const HOP: usize = 160;
/// 25 ms analysis window.
pub const WINDOW: usize = 400;
pub const SUBFRAMES: usize = 4;
pub const SILENCE_DB: f64 = -100.0;
pub const MIN_F0: f64 = 50.0;
pub const MAX_F0: f64 = 400.0;
pub const BANDS: usize = 4;
pub const FIR_TAPS: usize = 65;
/// Filters are redesigned when the boundary moves by more than this.
pub const FIR_REDESIGN_HZ: f64 = 50.0;
pub const CLIP_KNEE: f64 = 0.9;
/// Values per frame in dumps and caches: f0, power, boundary, 10 LSFs.
pub const FRAME_VALUES: usize = 3 + ORDER;

const PITCH_WINDOW: usize = 960;
const PITCH_FFT: usize = 2048;
const MIN_LAG: usize = (SAMPLE_RATE as f64 / MAX_F0) as usize;
const MAX_LAG: usize = (SAMPLE_RATE as f64 / MIN_F0) as usize;
const LAG_WINDOW_HZ: f64 = 60.0;
const NOISE_FLOOR_CORRECTION: f64 = 1.0001;

#[derive(Debug, Clone, PartialEq)]
pub struct VocoderConfig {
    /// Normalized autocorrelation needed to call a frame or band periodic.
    pub voicing_threshold: f64,
    /// Among autocorrelation peaks, the shortest lag within this fraction of
    /// the best one wins (guards against picking a multiple of the period).
    pub octave_ratio: f64,
    pub noise_seed: u64,
}

impl Default for VocoderConfig {
    fn default() -> Self {
        VocoderConfig {
            voicing_threshold: 0.5,
            octave_ratio: 0.9,
            noise_seed: 0x6e6f_6973_65,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameParams {
    pub f0: f64,
    /// dB relative to full scale, mean square of the frame.
    pub power: f64,
    pub boundary: f64,
    pub lsf: [f64; ORDER],
}

impl FrameParams {
    pub fn silence() -> Self {
        FrameParams {
            f0: 0.0,
            power: SILENCE_DB,
            boundary: 0.0,
            lsf: uniform_lsf(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.f0, self.power, self.boundary];
        if all.iter().chain(&self.lsf).any(|v| !v.is_finite()) {
            return Err(Error::invalid("frame has a non-finite parameter"));
        }
        if self.f0 < 0.0 || self.f0 >= NYQUIST {
            return Err(Error::invalid(format!("f0 {} out of range", self.f0)));
        }
        if !(0.0..=NYQUIST).contains(&self.boundary) {
            return Err(Error::invalid(format!("boundary {} out of range", self.boundary)));
        }
        if self.f0 == 0.0 && self.boundary != 0.0 {
            return Err(Error::invalid("unvoiced frame must have boundary 0"));
        }
        check_lsf(&self.lsf)
    }

    pub fn to_array(&self) -> [f64; FRAME_VALUES] {
        let mut v = [0.0; FRAME_VALUES];
        v[0] = self.f0;
        v[1] = self.power;
        v[2] = self.boundary;
        v[3..].copy_from_slice(&self.lsf);
        v
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != FRAME_VALUES {
            return Err(Error::Dimension {
                expected: FRAME_VALUES,
                got: v.len(),
            });
        }
        let mut lsf = [0.0; ORDER];
        lsf.copy_from_slice(&v[3..]);
        Ok(FrameParams {
            f0: v[0],
            power: v[1],
            boundary: v[2],
            lsf,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub sample_rate: u32,
    pub samples: Vec<f64>,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>) -> Self {
        AudioBuffer {
            sample_rate: SAMPLE_RATE,
            samples,
        }
    }

    pub fn duration_ms(&self) -> f64 {
        self.samples.len() as f64 * 1000.0 / self.sample_rate as f64
    }
}

/// LSFs of A(z) = 1: (k + 1)π/11.
pub fn uniform_lsf() -> [f64; ORDER] {
    std::array::from_fn(|k| (k + 1) as f64 * PI / (ORDER + 1) as f64)
}

fn check_lsf(lsf: &[f64]) -> Result<()> {
    if lsf.len() != ORDER {
        return Err(Error::Dimension {
            expected: ORDER,
            got: lsf.len(),
        });
    }
    let mut prev = 0.0;
    for (k, &w) in lsf.iter().enumerate() {
        if !(w > prev) {
            return Err(Error::invalid(format!("lsf[{k}] = {w} is not above {prev}")));
        }
        prev = w;
    }
    if !(prev < PI) {
        return Err(Error::invalid(format!("lsf[9] = {prev} is not below pi")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// LPC <-> LSF

/// Autocorrelation method with Levinson-Durbin. Returns a₁..a₁₀ of
/// A(z) = 1 + Σ aₖ z⁻ᵏ.
pub fn levinson(r: &[f64; ORDER + 1]) -> Result<[f64; ORDER]> {
    let mut a = [0.0; ORDER + 1];
    a[0] = 1.0;
    if r[0] <= 0.0 {
        return Ok([0.0; ORDER]);
    }
    let mut err = r[0];
    for i in 1..=ORDER {
        let mut acc = r[i];
        for j in 1..i {
            acc += a[j] * r[i - j];
        }
        let k = -acc / err;
        if !(k.abs() < 1.0) {
            return Err(Error::Unstable(format!("reflection coefficient {k} at order {i}")));
        }
        let prev = a;
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
    }
    Ok(std::array::from_fn(|k| a[k + 1]))
}

/// Sum and difference polynomials with their trivial roots at z = −1 and
/// z = +1 divided out. Both are symmetric of degree 10.
fn deflated_polynomials(a: &[f64; ORDER]) -> ([f64; ORDER + 1], [f64; ORDER + 1]) {
    let mut full = [0.0; ORDER + 2];
    full[0] = 1.0;
    full[1..=ORDER].copy_from_slice(a);
    let mut p = [0.0; ORDER + 1];
    let mut q = [0.0; ORDER + 1];
    for k in 0..=ORDER {
        let pk = full[k] + full[ORDER + 1 - k];
        let qk = full[k] - full[ORDER + 1 - k];
        p[k] = pk - if k > 0 { p[k - 1] } else { 0.0 };
        q[k] = qk + if k > 0 { q[k - 1] } else { 0.0 };
    }
    (p, q)
}

/// Real-valued e^{j5ω}·F(e^{jω}) for a symmetric degree-10 polynomial, as a
/// Chebyshev series in x = cos ω, evaluated with Clenshaw's recurrence.
fn chebyshev_eval(c: &[f64; ORDER + 1], x: f64) -> f64 {
    let half = ORDER / 2;
    // F = c[5] + 2 Σ_{m=1..5} c[5-m] T_m(x)
    let coef = |m: usize| if m == 0 { c[half] } else { 2.0 * c[half - m] };
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for m in (1..=half).rev() {
        let b0 = coef(m) + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coef(0) + x * b1 - b2
}

fn roots_on_grid(c: &[f64; ORDER + 1], grid: usize) -> Vec<f64> {
    let f = |w: f64| chebyshev_eval(c, w.cos());
    let mut roots = Vec::with_capacity(ORDER / 2);
    let mut w0 = 0.0;
    let mut f0 = f(w0);
    for i in 1..=grid {
        let w1 = PI * i as f64 / grid as f64;
        let f1 = f(w1);
        if f0 == 0.0 && i > 1 {
            // counted when it was the right end of the previous cell
        } else if f1 == 0.0 {
            if i < grid {
                roots.push(w1);
            }
        } else if f0 * f1 < 0.0 {
            let (mut lo, mut hi, mut flo) = (w0, w1, f0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if hi - lo <= f64::EPSILON * hi {
                    break;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        w0 = w1;
        f0 = f1;
    }
    roots
}

/// Converts LPC coefficients to line spectral frequencies. The roots of the
/// sum and difference polynomials are bracketed on a 512-point grid in ω and
/// refined by bisection; finer grids are tried if close roots were missed.
pub fn lpc_to_lsf(a: &[f64]) -> Result<[f64; ORDER]> {
    if a.len() != ORDER {
        return Err(Error::Dimension {
            expected: ORDER,
            got: a.len(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite LPC coefficient"));
    }
    let a: [f64; ORDER] = a.try_into().unwrap();
    let (p, q) = deflated_polynomials(&a);
    for grid in [512, 4096, 32768] {
        let rp = roots_on_grid(&p, grid);
        let rq = roots_on_grid(&q, grid);
        if rp.len() != ORDER / 2 || rq.len() != ORDER / 2 {
            continue;
        }
        let mut lsf = [0.0; ORDER];
        for k in 0..ORDER / 2 {
            lsf[2 * k] = rp[k];
            lsf[2 * k + 1] = rq[k];
        }
        if check_lsf(&lsf).is_ok() {
            return Ok(lsf);
        }
    }
    Err(Error::Unstable(
        "sum/difference polynomial roots are not interleaved on the unit circle".into(),
    ))
}

/// Rebuilds A(z) from the product form of the sum and difference
/// polynomials.
pub fn lsf_to_lpc(lsf: &[f64]) -> Result<[f64; ORDER]> {
    check_lsf(lsf)?;
    let mut p = vec![1.0];
    let mut q = vec![1.0];
    for (k, &w) in lsf.iter().enumerate() {
        let target = if k % 2 == 0 { &mut p } else { &mut q };
        let c = -2.0 * w.cos();
        let mut next = vec![0.0; target.len() + 2];
        for (i, &v) in target.iter().enumerate() {
            next[i] += v;
            next[i + 1] += c * v;
            next[i + 2] += v;
        }
        *target = next;
    }
    // multiply back the trivial factors (1 + z⁻¹) and (1 − z⁻¹)
    let mut a = [0.0; ORDER];
    for (k, ak) in a.iter_mut().enumerate() {
        let i = k + 1;
        let pi = p.get(i).copied().unwrap_or(0.0) + p[i - 1];
        let qi = q.get(i).copied().unwrap_or(0.0) - q[i - 1];
        *ak = 0.5 * (pi + qi);
    }
    Ok(a)
}

/// 20·log10 |1/A(e^{jω})| at frequency `hz`.
pub fn envelope_db(a: &[f64; ORDER], hz: f64) -> f64 {
    let w = 2.0 * PI * hz / SAMPLE_RATE as f64;
    let mut re = 1.0;
    let mut im = 0.0;
    for (k, &ak) in a.iter().enumerate() {
        let ph = w * (k + 1) as f64;
        re += ak * ph.cos();
        im -= ak * ph.sin();
    }
    -10.0 * (re * re + im * im).log10()
}

/// RMS difference in dB between two all-pole envelopes sampled uniformly
/// over `[0, max_hz]`. Gain is not part of the envelope.
pub fn log_spectral_distance(a: &[f64; ORDER], b: &[f64; ORDER], max_hz: f64) -> f64 {
    const POINTS: usize = 256;
    let mut acc = 0.0;
    for i in 0..=POINTS {
        let hz = max_hz * i as f64 / POINTS as f64;
        let d = envelope_db(a, hz) - envelope_db(b, hz);
        acc += d * d;
    }
    (acc / (POINTS + 1) as f64).sqrt()
}

// ---------------------------------------------------------------------------
// Analysis

fn hamming(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * (i as f64 + 0.5) / n as f64).cos())
        .collect()
}

struct Analyzer<'a> {
    cfg: &'a VocoderConfig,
    hamming: Vec<f64>,
    hamming_energy: f64,
    hann: Vec<f64>,
    /// Normalized autocorrelation of the pitch window itself.
    hann_ac: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    lag_window: [f64; ORDER + 1],
}

impl<'a> Analyzer<'a> {
    fn new(cfg: &'a VocoderConfig) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(PITCH_FFT);
        let inv = planner.plan_fft_inverse(PITCH_FFT);
        let hamming = hamming(WINDOW);
        let hamming_energy = hamming.iter().map(|w| w * w).sum();
        let hann = hann(PITCH_WINDOW);
        let mut hann_ac = vec![0.0; MAX_LAG + 2];
        for (lag, v) in hann_ac.iter_mut().enumerate() {
            *v = (0..PITCH_WINDOW - lag).map(|i| hann[i] * hann[i + lag]).sum();
        }
        let r0 = hann_ac[0];
        hann_ac.iter_mut().for_each(|v| *v /= r0);
        let lag_window = std::array::from_fn(|k| {
            let x = 2.0 * PI * LAG_WINDOW_HZ * k as f64 / SAMPLE_RATE as f64;
            (-0.5 * x * x).exp()
        });
        Analyzer {
            cfg,
            hamming,
            hamming_energy,
            hann,
            hann_ac,
            fwd,
            inv,
            lag_window,
        }
    }

    fn segment(x: &[f64], center: usize, win: &[f64], out: &mut [f64]) {
        let half = win.len() / 2;
        for (i, (o, w)) in out.iter_mut().zip(win).enumerate() {
            let pos = center as isize + i as isize - half as isize;
            *o = if pos >= 0 && (pos as usize) < x.len() {
                x[pos as usize] * w
            } else {
                0.0
            };
        }
    }

    fn frame(&self, x: &[f64], index: usize, spectral: &mut [f64], pitch_buf: &mut Vec<Complex<f64>>) -> Result<FrameParams> {
        let center = index * HOP + HOP / 2;
        Self::segment(x, center, &self.hamming, spectral);
        let energy: f64 = spectral.iter().map(|v| v * v).sum();
        let power = if energy > 0.0 {
            (10.0 * (energy / self.hamming_energy).log10()).max(SILENCE_DB)
        } else {
            SILENCE_DB
        };

        let mut r = [0.0; ORDER + 1];
        for (k, rk) in r.iter_mut().enumerate() {
            *rk = spectral[..WINDOW - k]
                .iter()
                .zip(&spectral[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                * self.lag_window[k];
        }
        r[0] *= NOISE_FLOOR_CORRECTION;
        let a = if r[0] > 1e-20 { levinson(&r)? } else { [0.0; ORDER] };
        let lsf = lpc_to_lsf(&a)?;

        let (f0, boundary) = self.periodicity(x, center, pitch_buf);
        Ok(FrameParams {
            f0,
            power,
            boundary,
            lsf,
        })
    }

    /// Pitch from the windowed autocorrelation divided by the window's own
    /// autocorrelation, then the voicing boundary from the same quantity
    /// computed on each sub-band.
    fn periodicity(&self, x: &[f64], center: usize, buf: &mut Vec<Complex<f64>>) -> (f64, f64) {
        buf.clear();
        buf.resize(PITCH_FFT, Complex::new(0.0, 0.0));
        let mut seg = vec![0.0; PITCH_WINDOW];
        Self::segment(x, center, &self.hann, &mut seg);
        for (b, s) in buf.iter_mut().zip(&seg) {
            b.re = *s;
        }
        self.fwd.process(buf);
        let spectrum: Vec<f64> = buf.iter().map(|c| c.norm_sqr()).collect();

        let ac = self.autocorrelation(&spectrum, 0, PITCH_FFT / 2, buf);
        let Some(ac) = ac else { return (0.0, 0.0) };

        let mut peaks = Vec::new();
        for lag in MIN_LAG..=MAX_LAG {
            if ac[lag] >= ac[lag - 1] && ac[lag] >= ac[lag + 1] {
                peaks.push(lag);
            }
        }
        let Some(best) = peaks.iter().map(|&l| ac[l]).reduce(f64::max) else {
            return (0.0, 0.0);
        };
        if best < self.cfg.voicing_threshold {
            return (0.0, 0.0);
        }
        let lag = *peaks
            .iter()
            .find(|&&l| ac[l] >= self.cfg.octave_ratio * best)
            .unwrap();
        let (ym, y0, yp) = (ac[lag - 1], ac[lag], ac[lag + 1]);
        let denom = ym - 2.0 * y0 + yp;
        let shift = if denom < 0.0 { (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5) } else { 0.0 };
        let f0 = SAMPLE_RATE as f64 / (lag as f64 + shift);

        let bins_per_band = PITCH_FFT / 2 / BANDS;
        let mut boundary = 0.0;
        for band in (0..BANDS).rev() {
            let lo = band * bins_per_band;
            let hi = lo + bins_per_band;
            let Some(bac) = self.autocorrelation(&spectrum, lo, hi, buf) else {
                continue;
            };
            let score = (lag - 1..=lag + 1).map(|l| bac[l]).fold(f64::MIN, f64::max);
            if score > self.cfg.voicing_threshold {
                boundary = (band + 1) as f64 * NYQUIST / BANDS as f64;
                break;
            }
        }
        if boundary == 0.0 {
            return (0.0, 0.0);
        }
        (f0, boundary)
    }

    /// Normalized autocorrelation of the signal restricted to FFT bins
    /// `[lo, hi)` (and their mirror images), corrected for the window.
    fn autocorrelation(&self, spectrum: &[f64], lo: usize, hi: usize, buf: &mut [Complex<f64>]) -> Option<Vec<f64>> {
        let n = PITCH_FFT;
        for (k, b) in buf.iter_mut().enumerate() {
            let bin = if k <= n / 2 { k } else { n - k };
            let inside = bin >= lo && (bin < hi || (hi == n / 2 && bin == n / 2));
            *b = Complex::new(if inside { spectrum[k] } else { 0.0 }, 0.0);
        }
        self.inv.process(buf);
        let r0 = buf[0].re;
        if !(r0 > 1e-18) {
            return None;
        }
        Some(
            (0..=MAX_LAG + 1)
                .map(|l| buf[l].re / r0 / self.hann_ac[l])
                .collect(),
        )
    }
}

/// Analyzes audio into one frame per 10 ms hop.
pub fn analyze(audio: &AudioBuffer, cfg: &VocoderConfig) -> Result<Vec<FrameParams>> {
    if audio.sample_rate != SAMPLE_RATE {
        return Err(Error::UnsupportedFormat(format!(
            "sample rate {} (expected {SAMPLE_RATE})",
            audio.sample_rate
        )));
    }
    if audio.samples.len() < WINDOW {
        return Err(Error::invalid(format!(
            "{} samples is shorter than one {WINDOW}-sample analysis window",
            audio.samples.len()
        )));
    }
    if audio.samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("audio contains non-finite samples"));
    }
    let an = Analyzer::new(cfg);
    let n = audio.samples.len() / HOP;
    let mut spectral = vec![0.0; WINDOW];
    let mut buf = Vec::with_capacity(PITCH_FFT);
    (0..n)
        .map(|i| an.frame(&audio.samples, i, &mut spectral, &mut buf))
        .collect()
}

// ---------------------------------------------------------------------------
// Synthesis

/// Windowed-sinc lowpass with cutoff `fc`. At fc = 0 every tap is zero and
/// at the Nyquist frequency the filter is a pure delay of 32 samples.
pub fn lowpass_taps(fc: f64) -> [f64; FIR_TAPS] {
    let c = (FIR_TAPS - 1) / 2;
    let nu = fc / SAMPLE_RATE as f64;
    std::array::from_fn(|i| {
        let m = i as f64 - c as f64;
        let sinc = if i == c {
            2.0 * nu
        } else {
            (2.0 * PI * nu * m).sin() / (PI * m)
        };
        let w = 0.54 + 0.46 * (PI * m / c as f64).cos();
        sinc * w
    })
}

struct BandSplit {
    fc: f64,
    lp: [f64; FIR_TAPS],
    pulses: [f64; FIR_TAPS],
    noise: [f64; FIR_TAPS],
    pos: usize,
}

impl BandSplit {
    fn new() -> Self {
        BandSplit {
            fc: -1.0,
            lp: [0.0; FIR_TAPS],
            pulses: [0.0; FIR_TAPS],
            noise: [0.0; FIR_TAPS],
            pos: 0,
        }
    }

    fn set_boundary(&mut self, fc: f64) {
        let edge = fc <= 0.0 || fc >= NYQUIST;
        let moved = (fc - self.fc).abs() > FIR_REDESIGN_HZ;
        if self.fc < 0.0 || moved || (edge && fc != self.fc) {
            self.fc = fc;
            self.lp = lowpass_taps(fc);
        }
    }

    /// Pushes one pulse and one noise sample; returns lowpass(pulses) +
    /// highpass(noise), the highpass being a delay minus the lowpass.
    fn step(&mut self, pulse: f64, noise: f64) -> f64 {
        self.pulses[self.pos] = pulse;
        self.noise[self.pos] = noise;
        let c = (FIR_TAPS - 1) / 2;
        let newest = self.pos;
        self.pos = (self.pos + 1) % FIR_TAPS;
        let at = |k: usize| (newest + FIR_TAPS - k) % FIR_TAPS;
        let delayed_noise = self.noise[at(c)];
        if self.fc >= NYQUIST {
            return self.pulses[at(c)];
        }
        if self.fc <= 0.0 {
            return delayed_noise;
        }
        let mut lp_p = 0.0;
        let mut lp_n = 0.0;
        for (k, h) in self.lp.iter().enumerate() {
            let j = at(k);
            lp_p += h * self.pulses[j];
            lp_n += h * self.noise[j];
        }
        lp_p + delayed_noise - lp_n
    }
}

fn all_pole(a: &[f64; ORDER], x: &[f64], state: &mut [f64; ORDER], out: &mut [f64]) {
    // state[0] is y[n-1]
    for (o, &xn) in out.iter_mut().zip(x) {
        let mut y = xn;
        for k in 0..ORDER {
            y -= a[k] * state[k];
        }
        state.copy_within(0..ORDER - 1, 1);
        state[0] = y;
        *o = y;
    }
}

fn soft_clip(y: f64) -> f64 {
    let m = y.abs();
    if m <= CLIP_KNEE {
        y
    } else {
        let room = 1.0 - CLIP_KNEE;
        y.signum() * (CLIP_KNEE + room * ((m - CLIP_KNEE) / room).tanh())
    }
}

/// Synthesizes 160 samples per frame. Within a frame the LSFs, f0 and power
/// move linearly from the previous frame's values over four 2.5 ms
/// sub-frames. One gain per frame is solved so that the frame's mean square
/// equals the power parameter, taking the filter ringing carried over from
/// the previous frame into account.
pub fn synthesize(frames: &[FrameParams], cfg: &VocoderConfig) -> Result<AudioBuffer> {
    for (i, f) in frames.iter().enumerate() {
        f.validate()
            .map_err(|e| Error::invalid(format!("frame {i}: {e}")))?;
    }
    let sub = HOP / SUBFRAMES;
    let mut out = Vec::with_capacity(frames.len() * HOP);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise_seed);
    let mut split = BandSplit::new();
    let mut state = [0.0; ORDER];
    let mut since_pulse = f64::INFINITY;
    let mut prev = frames.first().copied().unwrap_or_else(FrameParams::silence);

    let mut excitation = vec![0.0; HOP];
    let mut zir = vec![0.0; HOP];
    let mut zsr = vec![0.0; HOP];
    let mut filters = [[0.0; ORDER]; SUBFRAMES];

    for frame in frames {
        split.set_boundary(frame.boundary);
        for (s, filt) in filters.iter_mut().enumerate() {
            let t = (s + 1) as f64 / SUBFRAMES as f64;
            let lsf: [f64; ORDER] = std::array::from_fn(|k| prev.lsf[k] + t * (frame.lsf[k] - prev.lsf[k]));
            *filt = lsf_to_lpc(&lsf)?;
            let f0 = if prev.f0 > 0.0 && frame.f0 > 0.0 {
                prev.f0 + t * (frame.f0 - prev.f0)
            } else {
                frame.f0
            };
            let p = prev.power + t * (frame.power - prev.power);
            let shape = 10f64.powf((p - frame.power) / 20.0);
            for n in 0..sub {
                let mut pulse = 0.0;
                if f0 > 0.0 {
                    let period = SAMPLE_RATE as f64 / f0;
                    if since_pulse >= period {
                        pulse = period.sqrt();
                        since_pulse = if since_pulse.is_finite() { since_pulse - period } else { 0.0 };
                    }
                    since_pulse += 1.0;
                } else {
                    since_pulse = f64::INFINITY;
                }
                let noise: f64 = StandardNormal.sample(&mut rng);
                excitation[s * sub + n] = shape * split.step(pulse, noise);
            }
        }

        let zeros = [0.0; HOP / SUBFRAMES];
        let mut zi_state = state;
        let mut zs_state = [0.0; ORDER];
        for s in 0..SUBFRAMES {
            let r = s * sub..(s + 1) * sub;
            all_pole(&filters[s], &zeros, &mut zi_state, &mut zir[r.clone()]);
            all_pole(&filters[s], &excitation[r.clone()], &mut zs_state, &mut zsr[r]);
        }
        let target = HOP as f64 * 10f64.powf(frame.power / 10.0);
        let a: f64 = zsr.iter().map(|v| v * v).sum();
        let b: f64 = 2.0 * zir.iter().zip(&zsr).map(|(x, y)| x * y).sum::<f64>();
        let c: f64 = zir.iter().map(|v| v * v).sum::<f64>() - target;
        let mut gain = if a > 0.0 {
            let disc = b * b - 4.0 * a * c;
            if disc >= 0.0 {
                ((-b + disc.sqrt()) / (2.0 * a)).max(0.0)
            } else {
                (-b / (2.0 * a)).max(0.0)
            }
        } else {
            0.0
        };
        if !gain.is_finite() {
            gain = 0.0;
        }
        let mut y: Vec<f64> = zir.iter().zip(&zsr).map(|(i, s)| i + gain * s).collect();
        let e: f64 = y.iter().map(|v| v * v).sum();
        if e > 0.0 && ((e / target).log10() * 10.0).abs() > 0.01 {
            // ringing alone overshoots, or there is no excitation at all
            let k = (target / e).sqrt();
            y.iter_mut().for_each(|v| *v *= k);
        }
        for k in 0..ORDER {
            state[k] = y[HOP - 1 - k];
        }
        out.extend(y.into_iter().map(soft_clip));
        prev = *frame;
    }
    Ok(AudioBuffer::new(out))
}

// ---------------------------------------------------------------------------
// WAV

pub fn wav_bytes(audio: &AudioBuffer) -> Vec<u8> {
    let data_len = (audio.samples.len() * 2) as u32;
    let mut b = Vec::with_capacity(44 + data_len as usize);
    b.extend_from_slice(b"RIFF");
    b.extend_from_slice(&(36 + data_len).to_le_bytes());
    b.extend_from_slice(b"WAVE");
    b.extend_from_slice(b"fmt ");
    b.extend_from_slice(&16u32.to_le_bytes());
    b.extend_from_slice(&1u16.to_le_bytes());
    b.extend_from_slice(&1u16.to_le_bytes());
    b.extend_from_slice(&audio.sample_rate.to_le_bytes());
    b.extend_from_slice(&(audio.sample_rate * 2).to_le_bytes());
    b.extend_from_slice(&2u16.to_le_bytes());
    b.extend_from_slice(&16u16.to_le_bytes());
    b.extend_from_slice(b"data");
    b.extend_from_slice(&data_len.to_le_bytes());
    for &s in &audio.samples {
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        b.extend_from_slice(&q.to_le_bytes());
    }
    b
}

pub fn write_wav(audio: &AudioBuffer, path: &Path) -> Result<()> {
    std::fs::write(path, wav_bytes(audio)).map_err(|e| Error::io(path, e))
}

pub fn read_wav(path: &Path) -> Result<AudioBuffer> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_wav(&bytes)
}

pub fn parse_wav(bytes: &[u8]) -> Result<AudioBuffer> {
    let unsupported = |chunk: &str, msg: String| Error::UnsupportedFormat(format!("chunk {chunk:?}: {msg}"));
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(unsupported("RIFF", "not a RIFF/WAVE file".into()));
    }
    let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let mut pos = 12;
    let mut rate = None;
    while pos + 8 <= bytes.len() {
        let id = String::from_utf8_lossy(&bytes[pos..pos + 4]).into_owned();
        let len = u32_at(pos + 4) as usize;
        let body = pos + 8;
        if body + len > bytes.len() {
            return Err(unsupported(&id, "chunk runs past the end of the file".into()));
        }
        match id.as_str() {
            "fmt " => {
                if len < 16 {
                    return Err(unsupported(&id, format!("{len}-byte format chunk")));
                }
                let format = u16_at(body);
                let channels = u16_at(body + 2);
                let sr = u32_at(body + 4);
                let bits = u16_at(body + 14);
                if format != 1 {
                    return Err(unsupported(&id, format!("format tag {format:#06x} is not PCM")));
                }
                if channels != 1 {
                    return Err(unsupported(&id, format!("{channels} channels")));
                }
                if bits != 16 {
                    return Err(unsupported(&id, format!("{bits} bits per sample")));
                }
                if sr != SAMPLE_RATE {
                    return Err(unsupported(&id, format!("sample rate {sr}")));
                }
                rate = Some(sr);
            }
            "data" => {
                let Some(sr) = rate else {
                    return Err(unsupported(&id, "data chunk before fmt chunk".into()));
                };
                if len % 2 != 0 {
                    return Err(unsupported(&id, "odd data length for 16-bit samples".into()));
                }
                let samples = bytes[body..body + len]
                    .chunks_exact(2)
                    .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / 32768.0)
                    .collect();
                return Ok(AudioBuffer {
                    sample_rate: sr,
                    samples,
                });
            }
            _ => {}
        }
        pos = body + len + (len & 1);
    }
    Err(unsupported("data", "missing".into()))
}

// ---------------------------------------------------------------------------
// Frame dumps

/// Text dump, one frame per line: the frame's start time in ms followed by
/// the 13 frame values. The time column is informational and ignored on read.
pub fn format_frames(frames: &[FrameParams]) -> String {
    let mut s = String::from("# time_ms f0 power boundary lsf1 lsf2 lsf3 lsf4 lsf5 lsf6 lsf7 lsf8 lsf9 lsf10\n");
    for (i, f) in frames.iter().enumerate() {
        let v = f.to_array();
        let line: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "{} {}", i * 10, line.join(" "));
    }
    s
}

pub fn parse_frames(text: &str, path: impl AsRef<Path>) -> Result<Vec<FrameParams>> {
    let path = path.as_ref();
    let mut frames = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
        let vals = vals.map_err(|e| Error::parse(path, i + 1, format!("bad number: {e}")))?;
        if vals.len() != FRAME_VALUES + 1 {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected {} fields, found {}", FRAME_VALUES + 1, vals.len()),
            ));
        }
        let f = FrameParams::from_slice(&vals[1..]).unwrap();
        f.validate().map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        frames.push(f);
    }
    Ok(frames)
}

pub fn write_frames(frames: &[FrameParams], path: &Path) -> Result<()> {
    std::fs::write(path, format_frames(frames)).map_err(|e| Error::io(path, e))
}

pub fn read_frames(path: &Path) -> Result<Vec<FrameParams>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_frames(&text, path)
}

/// Mean square of output samples `[160 i, 160 i + 160)` in dB.
pub fn frame_power_db(samples: &[f64], i: usize) -> f64 {
    let seg = &samples[i * HOP..((i + 1) * HOP).min(samples.len())];
    let ms = seg.iter().map(|v| v * v).sum::<f64>() / seg.len() as f64;
    if ms > 0.0 {
        10.0 * ms.log10()
    } else {
        f64::NEG_INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_filter_has_uniform_lsfs() {
        let lsf = lpc_to_lsf(&[0.0; ORDER]).unwrap();
        for (k, w) in lsf.iter().enumerate() {
            assert!((w - (k + 1) as f64 * PI / 11.0).abs() < 1e-9);
        }
        let a = lsf_to_lpc(&uniform_lsf()).unwrap();
        assert!(a.iter().all(|v| v.abs() < 1e-12), "{a:?}");
    }

    #[test]
    fn non_monotonic_lsf_is_rejected() {
        let mut l = uniform_lsf();
        l.swap(2, 3);
        assert!(lsf_to_lpc(&l).is_err());
        let mut l = uniform_lsf();
        l[9] = PI;
        assert!(lsf_to_lpc(&l).is_err());
    }

    #[test]
    fn unstable_filter_is_rejected() {
        // pole at z = 1.2
        let mut a = [0.0; ORDER];
        a[0] = -1.2;
        assert!(matches!(lpc_to_lsf(&a), Err(Error::Unstable(_))));
    }

    #[test]
    fn levinson_on_first_order_process() {
        // r[k] = ρ^k is the autocorrelation of an AR(1) process
        let rho: f64 = 0.8;
        let r: [f64; ORDER + 1] = std::array::from_fn(|k| rho.powi(k as i32));
        let a = levinson(&r).unwrap();
        assert!((a[0] + rho).abs() < 1e-12);
        assert!(a[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn lowpass_edges() {
        let nyq = lowpass_taps(NYQUIST);
        for (i, h) in nyq.iter().enumerate() {
            let expect = if i == 32 { 1.0 } else { 0.0 };
            assert!((h - expect).abs() < 1e-12, "tap {i} = {h}");
        }
        assert!(lowpass_taps(0.0).iter().all(|&h| h == 0.0));
        let dc: f64 = lowpass_taps(2000.0).iter().sum();
        assert!((dc - 1.0).abs() < 0.01);
    }

    #[test]
    fn silence_analysis() {
        let frames = analyze(&AudioBuffer::new(vec![0.0; 1600]), &VocoderConfig::default()).unwrap();
        assert_eq!(frames.len(), 10);
        for f in frames {
            assert_eq!(f.power, SILENCE_DB);
            assert_eq!(f.boundary, 0.0);
            assert_eq!(f.f0, 0.0);
        }
    }

    #[test]
    fn short_input_is_an_error() {
        assert!(analyze(&AudioBuffer::new(vec![0.0; WINDOW - 1]), &VocoderConfig::default()).is_err());
    }

    #[test]
    fn one_second_gives_one_hundred_frames() {
        let x: Vec<f64> = (0..16000).map(|i| (i as f64 * 0.05).sin() * 0.1).collect();
        assert_eq!(analyze(&AudioBuffer::new(x), &VocoderConfig::default()).unwrap().len(), 100);
    }

    #[test]
    fn invalid_frame_rejected_by_synthesis() {
        let mut f = FrameParams::silence();
        f.boundary = 1000.0;
        assert!(synthesize(&[f], &VocoderConfig::default()).is_err());
    }

    #[test]
    fn frame_dump_round_trip() {
        let mut f = FrameParams::silence();
        f.f0 = 123.456789;
        f.boundary = 4000.0;
        f.power = -23.25;
        let text = format_frames(&[f, FrameParams::silence()]);
        assert_eq!(parse_frames(&text, "x").unwrap(), vec![f, FrameParams::silence()]);
        let err = parse_frames("1 2 3\n", "dump.txt").unwrap_err();
        assert!(err.to_string().contains("dump.txt:1"));
    }

    #[test]
    fn wav_header_matches_hand_built_fixture() {
        let audio = AudioBuffer::new(vec![0.0, 0.5, -1.0]);
        let b = wav_bytes(&audio);
        let mut fixture: Vec<u8> = Vec::new();
        fixture.extend(b"RIFF");
        fixture.extend([42, 0, 0, 0]); // 36 + 6 data bytes
        fixture.extend(b"WAVEfmt ");
        fixture.extend([16, 0, 0, 0, 1, 0, 1, 0]);
        fixture.extend([0x80, 0x3e, 0, 0]); // 16000
        fixture.extend([0x00, 0x7d, 0, 0]); // 32000 bytes/s
        fixture.extend([2, 0, 16, 0]);
        fixture.extend(b"data");
        fixture.extend([6, 0, 0, 0]);
        fixture.extend([0, 0, 0x00, 0x40, 0x00, 0x80]);
        assert_eq!(b.len(), 44 + 6);
        assert_eq!(b, fixture);
    }

    #[test]
    fn stereo_is_unsupported() {
        let mut b = wav_bytes(&AudioBuffer::new(vec![0.0; 4]));
        b[22] = 2;
        let err = parse_wav(&b).unwrap_err();
        assert!(matches!(&err, Error::UnsupportedFormat(m) if m.contains("fmt ") && m.contains("2 channels")), "{err}");
    }
}
