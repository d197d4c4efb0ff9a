//! Small fully connected networks trained by backpropagation with SGD and
//! momentum. All four learned stages of the pipeline use this engine.
//!
//! Weights of a layer are stored input-major (`weights[i * outputs + j]` is
//! the weight from input `i` to output `j`) so that zero inputs, which make
//! up most of the one-hot windows fed to the first layer, can be skipped.
//!
//! Recurrent stages use output feedback: the previous `k` output frames are
//! appended to the base input. The network only records the feedback depth;
//! callers assemble the inputs (teacher forcing while training, own outputs
//! while generating).

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"NTTSNNW\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Logistic,
    Tanh,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Logistic => 1.0 / (1.0 + (-x).exp()),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the activation value.
    fn derivative(self, y: f64) -> f64 {
        match self {
            Activation::Logistic => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Linear,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// ½ Σ (y − t)²
    Mse,
    /// −Σ t ln y, softmax outputs only.
    CrossEntropy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    pub fn weight(&self, input: usize, output: usize) -> f64 {
        self.weights[input * self.outputs + output]
    }

    pub fn set_weight(&mut self, input: usize, output: usize, w: f64) {
        self.weights[input * self.outputs + output] = w;
    }

    fn affine(&self, x: &[f64], z: &mut [f64]) {
        z.copy_from_slice(&self.bias);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = &self.weights[i * self.outputs..(i + 1) * self.outputs];
            for (zj, &w) in z.iter_mut().zip(row) {
                *zj += xi * w;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<Layer>,
    pub hidden: Activation,
    pub output: OutputActivation,
    /// Number of previous output frames appended to the base input.
    pub feedback: usize,
}

/// Architecture description.
#[derive(Debug, Clone, PartialEq)]
pub struct NetSpec {
    /// Layer widths including input and output, e.g. `[9, 32, 4]`.
    pub sizes: Vec<usize>,
    pub hidden: Activation,
    pub output: OutputActivation,
    pub feedback: usize,
}

impl NetSpec {
    pub fn new(sizes: &[usize], hidden: Activation, output: OutputActivation) -> Self {
        NetSpec {
            sizes: sizes.to_vec(),
            hidden,
            output,
            feedback: 0,
        }
    }

    /// Adds `frames` previous outputs to the given base input width.
    pub fn with_feedback(mut self, frames: usize) -> Self {
        let out = *self.sizes.last().unwrap();
        self.sizes[0] += frames * out;
        self.feedback = frames;
        self
    }

    /// Uniform weights in ±scale/√fan-in, zero biases.
    pub fn build(&self, seed: u64, scale: f64) -> Result<Network> {
        let mut net = Network::zeros(self)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &mut net.layers {
            let bound = scale / (layer.inputs as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-bound..=bound);
            }
        }
        Ok(net)
    }
}

impl Network {
    pub fn zeros(spec: &NetSpec) -> Result<Self> {
        if spec.sizes.len() < 2 || spec.sizes.contains(&0) {
            return Err(Error::invalid(format!("bad layer sizes {:?}", spec.sizes)));
        }
        let out = *spec.sizes.last().unwrap();
        if spec.feedback * out > spec.sizes[0] {
            return Err(Error::invalid("feedback frames exceed the input width"));
        }
        let layers = spec
            .sizes
            .windows(2)
            .map(|w| Layer::zeros(w[0], w[1]))
            .collect();
        Ok(Network {
            layers,
            hidden: spec.hidden,
            output: spec.output,
            feedback: spec.feedback,
        })
    }

    pub fn spec(&self) -> NetSpec {
        let mut sizes = vec![self.input_size()];
        sizes.extend(self.layers.iter().map(|l| l.outputs));
        NetSpec {
            sizes,
            hidden: self.hidden,
            output: self.output,
            feedback: self.feedback,
        }
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().unwrap().outputs
    }

    /// Input width without the feedback frames.
    pub fn base_input_size(&self) -> usize {
        self.input_size() - self.feedback * self.output_size()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_size() {
            return Err(Error::Dimension {
                expected: self.input_size(),
                got: input.len(),
            });
        }
        Ok(self.activations(input).pop().unwrap())
    }

    /// Index of the largest output.
    pub fn classify(&self, input: &[f64]) -> Result<usize> {
        Ok(argmax(&self.forward(input)?))
    }

    /// Output of every layer, last entry is the network output.
    fn activations(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let x = if k == 0 { input } else { &acts[k - 1] };
            let mut z = vec![0.0; layer.outputs];
            layer.affine(x, &mut z);
            if k < last {
                for v in &mut z {
                    *v = self.hidden.apply(*v);
                }
            } else if self.output == OutputActivation::Softmax {
                softmax_in_place(&mut z);
            }
            acts.push(z);
        }
        acts
    }

    pub fn loss(&self, sample: &Sample, loss: Loss) -> Result<f64> {
        let y = self.forward(&sample.input)?;
        check_target(self, sample)?;
        Ok(loss_value(&y, &sample.target, loss))
    }

    /// Analytic gradient of the loss for one sample.
    pub fn grad(&self, sample: &Sample, loss: Loss) -> Result<Gradient> {
        let mut g = Gradient::zeros_like(self);
        self.accumulate_grad(sample, loss, &mut g)?;
        Ok(g)
    }

    /// Adds the gradient for `sample` into `g` and returns the loss value.
    fn accumulate_grad(&self, sample: &Sample, loss: Loss, g: &mut Gradient) -> Result<f64> {
        if sample.input.len() != self.input_size() {
            return Err(Error::Dimension {
                expected: self.input_size(),
                got: sample.input.len(),
            });
        }
        check_target(self, sample)?;
        if loss == Loss::CrossEntropy && self.output != OutputActivation::Softmax {
            return Err(Error::invalid("cross-entropy loss needs a softmax output"));
        }
        let acts = self.activations(&sample.input);
        let y = acts.last().unwrap();
        let t = &sample.target;
        let value = loss_value(y, t, loss);

        let mut delta: Vec<f64> = match (loss, self.output) {
            (Loss::Mse, OutputActivation::Linear) | (Loss::CrossEntropy, OutputActivation::Softmax) => {
                y.iter().zip(t).map(|(a, b)| a - b).collect()
            }
            (Loss::Mse, OutputActivation::Softmax) => {
                let e: Vec<f64> = y.iter().zip(t).map(|(a, b)| a - b).collect();
                let dot: f64 = y.iter().zip(&e).map(|(a, b)| a * b).sum();
                y.iter().zip(&e).map(|(yj, ej)| yj * (ej - dot)).collect()
            }
            (Loss::CrossEntropy, OutputActivation::Linear) => unreachable!(),
        };

        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let x: &[f64] = if k == 0 { &sample.input } else { &acts[k - 1] };
            let (gw, gb) = &mut g.layers[k];
            for (gbj, dj) in gb.iter_mut().zip(&delta) {
                *gbj += dj;
            }
            for (i, &xi) in x.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let row = &mut gw[i * layer.outputs..(i + 1) * layer.outputs];
                for (r, dj) in row.iter_mut().zip(&delta) {
                    *r += xi * dj;
                }
            }
            if k > 0 {
                let mut prev = vec![0.0; layer.inputs];
                for (i, p) in prev.iter_mut().enumerate() {
                    let row = &layer.weights[i * layer.outputs..(i + 1) * layer.outputs];
                    let s: f64 = row.iter().zip(&delta).map(|(w, d)| w * d).sum();
                    *p = s * self.hidden.derivative(x[i]);
                }
                delta = prev;
            }
        }
        Ok(value)
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes();
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Model(m) => Error::Model(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    /// Binary layout, little-endian:
    /// magic (8) | version u32 | hidden u8 | output u8 | reserved u16 |
    /// feedback u32 | size count u32 | sizes u64… | per layer: weights f64…, bias f64…
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(32 + self.parameter_count() * 8);
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        b.push(match self.hidden {
            Activation::Logistic => 0,
            Activation::Tanh => 1,
        });
        b.push(match self.output {
            OutputActivation::Linear => 0,
            OutputActivation::Softmax => 1,
        });
        b.extend_from_slice(&0u16.to_le_bytes());
        b.extend_from_slice(&(self.feedback as u32).to_le_bytes());
        let sizes = self.spec().sizes;
        b.extend_from_slice(&(sizes.len() as u32).to_le_bytes());
        for s in sizes {
            b.extend_from_slice(&(s as u64).to_le_bytes());
        }
        for l in &self.layers {
            for w in l.weights.iter().chain(&l.bias) {
                b.extend_from_slice(&w.to_le_bytes());
            }
        }
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Model("not a network weight file".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Model(format!(
                "weight file version {version}, expected {FORMAT_VERSION}"
            )));
        }
        let hidden = match r.take(1)?[0] {
            0 => Activation::Logistic,
            1 => Activation::Tanh,
            x => return Err(Error::Model(format!("unknown hidden activation {x}"))),
        };
        let output = match r.take(1)?[0] {
            0 => OutputActivation::Linear,
            1 => OutputActivation::Softmax,
            x => return Err(Error::Model(format!("unknown output activation {x}"))),
        };
        r.take(2)?;
        let feedback = r.u32()? as usize;
        let count = r.u32()? as usize;
        if !(2..=64).contains(&count) {
            return Err(Error::Model(format!("implausible layer count {count}")));
        }
        let mut sizes = Vec::with_capacity(count);
        for _ in 0..count {
            let s = r.u64()?;
            if s == 0 || s > 1 << 24 {
                return Err(Error::Model(format!("implausible layer size {s}")));
            }
            sizes.push(s as usize);
        }
        let spec = NetSpec {
            sizes,
            hidden,
            output,
            feedback,
        };
        let mut net = Network::zeros(&spec).map_err(|e| Error::Model(e.to_string()))?;
        for p in net.params_mut() {
            *p = r.f64()?;
        }
        if r.pos != bytes.len() {
            return Err(Error::Model(format!(
                "{} trailing bytes after weights",
                bytes.len() - r.pos
            )));
        }
        Ok(net)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Model("weight file is truncated".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn check_target(net: &Network, sample: &Sample) -> Result<()> {
    if sample.target.len() != net.output_size() {
        return Err(Error::Dimension {
            expected: net.output_size(),
            got: sample.target.len(),
        });
    }
    Ok(())
}

fn loss_value(y: &[f64], t: &[f64], loss: Loss) -> f64 {
    match loss {
        Loss::Mse => 0.5 * y.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(),
        Loss::CrossEntropy => -y
            .iter()
            .zip(t)
            .filter(|(_, &tj)| tj != 0.0)
            .map(|(yj, tj)| tj * yj.max(1e-300).ln())
            .sum::<f64>(),
    }
}

pub fn softmax_in_place(z: &mut [f64]) {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in z.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    for v in z.iter_mut() {
        *v /= s;
    }
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// One-hot vector of length `n`.
pub fn one_hot(index: usize, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[index] = 1.0;
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

impl Sample {
    pub fn new(input: Vec<f64>, target: Vec<f64>) -> Self {
        Sample { input, target }
    }
}

/// Gradient with the same shape as the network: (weights, bias) per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Gradient {
    pub fn zeros_like(net: &Network) -> Self {
        Gradient {
            layers: net
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
                .collect(),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|(w, b)| w.iter().chain(b).copied())
            .collect()
    }

    fn clear(&mut self) {
        for (w, b) in &mut self.layers {
            w.iter_mut().for_each(|v| *v = 0.0);
            b.iter_mut().for_each(|v| *v = 0.0);
        }
    }
}

/// Largest component-wise relative error between the analytic gradient and
/// central differences with step `eps`. The relative error of a component is
/// |a − n| / max(|a| + |n|, 1e-6); the floor keeps round-off on near-zero
/// components from dominating.
pub fn gradient_check(net: &Network, sample: &Sample, loss: Loss, eps: f64) -> Result<f64> {
    if eps <= 0.0 {
        return Err(Error::invalid("gradient check step must be positive"));
    }
    let analytic = net.grad(sample, loss)?.flatten();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    let n = analytic.len();
    for k in 0..n {
        let original = *probe.params_mut().nth(k).unwrap();
        *probe.params_mut().nth(k).unwrap() = original + eps;
        let plus = probe.loss(sample, loss)?;
        *probe.params_mut().nth(k).unwrap() = original - eps;
        let minus = probe.loss(sample, loss)?;
        *probe.params_mut().nth(k).unwrap() = original;
        let numeric = (plus - minus) / (2.0 * eps);
        let a = analytic[k];
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub init_scale: f64,
    pub loss: Loss,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            momentum: 0.9,
            epochs: 20,
            batch_size: 16,
            seed: 1,
            init_scale: 1.0,
            loss: Loss::Mse,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) {
            return Err(Error::invalid("learning rate must be non-negative"));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::invalid("epochs and batch size must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid("momentum must be in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean per-sample loss of each epoch, measured before each update.
    pub loss_curve: Vec<f64>,
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        *self.loss_curve.last().unwrap_or(&f64::NAN)
    }
}

/// Minibatch SGD with momentum. The shuffle order is drawn from `cfg.seed`,
/// so equal inputs give bit-identical weights.
pub fn train(net: &mut Network, data: &[Sample], cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_5eed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut g = Gradient::zeros_like(net);
    let mut velocity = Gradient::zeros_like(net);
    let mut curve = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            g.clear();
            for &i in batch {
                total += net.accumulate_grad(&data[i], cfg.loss, &mut g)?;
            }
            let step = cfg.learning_rate / batch.len() as f64;
            for ((layer, (gw, gb)), (vw, vb)) in net
                .layers
                .iter_mut()
                .zip(&g.layers)
                .zip(velocity.layers.iter_mut())
            {
                for ((w, v), d) in layer.weights.iter_mut().zip(vw.iter_mut()).zip(gw) {
                    *v = cfg.momentum * *v - step * d;
                    *w += *v;
                }
                for ((w, v), d) in layer.bias.iter_mut().zip(vb.iter_mut()).zip(gb) {
                    *v = cfg.momentum * *v - step * d;
                    *w += *v;
                }
            }
        }
        let mean = total / data.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Diverged { epoch, loss: mean });
        }
        curve.push(mean);
    }
    Ok(TrainReport { loss_curve: curve })
}

/// Concatenates `frames[center - radius ..= center + radius]`, substituting
/// `pad` for positions outside the sequence.
pub fn assemble_window<F: AsRef<[f64]>>(frames: &[F], center: usize, radius: usize, pad: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..=2 * radius {
        let pos = center as isize + k as isize - radius as isize;
        if pos >= 0 && (pos as usize) < frames.len() {
            out.extend_from_slice(frames[pos as usize].as_ref());
        } else {
            out.extend_from_slice(pad);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_zero_output() {
        let net = Network::zeros(&NetSpec::new(&[3, 2], Activation::Tanh, OutputActivation::Linear)).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn identity_layer_returns_input() {
        let mut net = Network::zeros(&NetSpec::new(&[3, 3], Activation::Tanh, OutputActivation::Linear)).unwrap();
        for i in 0..3 {
            net.layers[0].set_weight(i, i, 1.0);
        }
        assert_eq!(net.forward(&[0.5, -1.5, 2.0]).unwrap(), [0.5, -1.5, 2.0]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let net = Network::zeros(&NetSpec::new(&[3, 2], Activation::Tanh, OutputActivation::Linear)).unwrap();
        assert!(matches!(net.forward(&[1.0]), Err(Error::Dimension { expected: 3, got: 1 })));
    }

    #[test]
    fn linear_layer_gradient_is_outer_product() {
        let mut net = NetSpec::new(&[2, 1], Activation::Tanh, OutputActivation::Linear)
            .build(3, 1.0)
            .unwrap();
        net.layers[0].bias[0] = 0.25;
        let x = [0.5, -2.0];
        let s = Sample::new(x.to_vec(), vec![1.0]);
        let y = net.forward(&x).unwrap()[0];
        let err = y - 1.0;
        let g = net.grad(&s, Loss::Mse).unwrap();
        assert!((g.layers[0].0[0] - x[0] * err).abs() < 1e-15);
        assert!((g.layers[0].0[1] - x[1] * err).abs() < 1e-15);
        assert!((g.layers[0].1[0] - err).abs() < 1e-15);
    }

    #[test]
    fn zero_error_gives_zero_gradient() {
        let net = NetSpec::new(&[3, 4, 2], Activation::Logistic, OutputActivation::Linear)
            .build(5, 1.0)
            .unwrap();
        let x = vec![0.1, 0.2, -0.3];
        let y = net.forward(&x).unwrap();
        let g = net.grad(&Sample::new(x, y), Loss::Mse).unwrap();
        assert!(g.flatten().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cross_entropy_needs_softmax() {
        let net = NetSpec::new(&[2, 2], Activation::Tanh, OutputActivation::Linear).build(1, 1.0).unwrap();
        assert!(net.grad(&Sample::new(vec![1.0, 0.0], vec![1.0, 0.0]), Loss::CrossEntropy).is_err());
    }

    #[test]
    fn window_assembly() {
        let frames = vec![vec![1.0], vec![2.0], vec![3.0]];
        assert_eq!(assemble_window(&frames, 1, 0, &[0.0]), [2.0]);
        assert_eq!(assemble_window(&frames, 0, 1, &[-1.0]), [-1.0, 1.0, 2.0]);
        let nine: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64, 10.0 * i as f64]).collect();
        let w = assemble_window(&nine, 4, 4, &[0.0, 0.0]);
        assert_eq!(w, nine.concat());
    }

    #[test]
    fn zero_learning_rate_keeps_weights() {
        let mut net = NetSpec::new(&[2, 3, 1], Activation::Tanh, OutputActivation::Linear)
            .build(9, 1.0)
            .unwrap();
        let before = net.clone();
        let data = vec![Sample::new(vec![1.0, 0.0], vec![1.0])];
        let cfg = TrainConfig {
            learning_rate: 0.0,
            epochs: 3,
            ..TrainConfig::default()
        };
        train(&mut net, &data, &cfg).unwrap();
        assert_eq!(net, before);
    }

    #[test]
    fn divergence_is_reported() {
        let mut net = NetSpec::new(&[1, 1], Activation::Tanh, OutputActivation::Linear).build(1, 1.0).unwrap();
        let data = vec![Sample::new(vec![1e3], vec![1e3])];
        let cfg = TrainConfig {
            learning_rate: 10.0,
            momentum: 0.0,
            epochs: 200,
            batch_size: 1,
            ..TrainConfig::default()
        };
        assert!(matches!(train(&mut net, &data, &cfg), Err(Error::Diverged { .. })));
    }

    #[test]
    fn truncated_weight_file_fails() {
        let net = NetSpec::new(&[3, 4, 2], Activation::Tanh, OutputActivation::Softmax)
            .with_feedback(1)
            .build(2, 1.0)
            .unwrap();
        let bytes = net.to_bytes();
        assert_eq!(Network::from_bytes(&bytes).unwrap(), net);
        assert!(Network::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        let mut bad = bytes.clone();
        bad[8] = 9;
        assert!(matches!(Network::from_bytes(&bad), Err(Error::Model(m)) if m.contains("version")));
    }

    #[test]
    fn header_matches_constructor() {
        let net = NetSpec::new(&[3, 4, 2], Activation::Logistic, OutputActivation::Softmax)
            .with_feedback(2)
            .build(2, 1.0)
            .unwrap();
        let b = net.to_bytes();
        assert_eq!(&b[..8], MAGIC);
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), FORMAT_VERSION);
        assert_eq!(b[12], 0);
        assert_eq!(b[13], 1);
        assert_eq!(u32::from_le_bytes(b[16..20].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(b[20..24].try_into().unwrap()), 3);
        assert_eq!(u64::from_le_bytes(b[24..32].try_into().unwrap()), 7);
        assert_eq!(net.base_input_size(), 3);
        assert_eq!(b.len(), 48 + 8 * net.parameter_count());
    }
}
