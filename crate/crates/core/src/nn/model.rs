use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::tensor::Tensor2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    #[inline]
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Identity => 1,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// A dense layer `y = act(x Wᵀ + b)` with `W` of shape `(out, in)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weight: Tensor2,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    layers: Vec<Dense>,
    input_dim: usize,
    class_count: usize,
}

/// Activations kept from a forward pass for use in backprop.
///
/// `inputs[l]` is the input to layer `l`; `pre[l]` its pre-activation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    inputs: Vec<Tensor2>,
    pre: Vec<Tensor2>,
    logits: Tensor2,
}

impl ForwardCache {
    pub fn logits(&self) -> &Tensor2 {
        &self.logits
    }

    pub fn into_logits(self) -> Tensor2 {
        self.logits
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weight: Tensor2,
    pub bias: Vec<f64>,
}

/// Parameter gradients, one entry per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

impl Gradients {
    pub fn zeros_like(model: &Model) -> Self {
        Self {
            layers: model
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weight: Tensor2::zeros(l.out_dim(), l.in_dim()),
                    bias: vec![0.0; l.out_dim()],
                })
                .collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.for_each_mut(|g| *g *= factor);
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &Gradients, factor: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weight.data_mut().iter_mut().zip(b.weight.data()) {
                *x += factor * y;
            }
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += factor * y;
            }
        }
    }

    /// Flattened view in the same order as [`Model::params`].
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weight.data().iter().chain(&l.bias).copied())
            .collect()
    }

    /// Index of the first layer holding a non-finite entry.
    pub fn first_non_finite_layer(&self) -> Option<usize> {
        self.layers
            .iter()
            .position(|l| !l.weight.all_finite() || l.bias.iter().any(|v| !v.is_finite()))
    }

    fn for_each_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for l in &mut self.layers {
            l.weight.data_mut().iter_mut().for_each(&mut f);
            l.bias.iter_mut().for_each(&mut f);
        }
    }
}

/// Builds a network. `arch[0]` is the input dimension and the remaining
/// entries are hidden widths; a final linear layer maps to `class_count`.
///
/// Weights are drawn from `N(0, 2 / fan_in)`, biases start at zero.
pub fn init_model(arch: &[usize], class_count: usize, seed: u64) -> Result<Model> {
    if arch.is_empty() {
        return Err(Error::Config("architecture must be nonempty".into()));
    }
    if let Some(pos) = arch.iter().position(|&w| w == 0) {
        return Err(Error::Config(format!(
            "layer width at position {pos} is zero"
        )));
    }
    if class_count < 2 {
        return Err(Error::Config(format!(
            "class_count must be at least 2, got {class_count}"
        )));
    }
    let mut rng = seed::rng(seed);
    let mut dims = arch.to_vec();
    dims.push(class_count);
    let last = dims.len() - 2;
    let layers = dims
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive scale");
            let data = (0..fan_in * fan_out)
                .map(|_| normal.sample(&mut rng))
                .collect();
            Dense {
                weight: Tensor2::new(fan_out, fan_in, data).expect("finite init"),
                bias: vec![0.0; fan_out],
                activation: if i == last {
                    Activation::Identity
                } else {
                    Activation::Relu
                },
            }
        })
        .collect();
    Ok(Model {
        layers,
        input_dim: arch[0],
        class_count,
    })
}

impl Model {
    /// Assembles a model from explicit layers, checking that dimensions chain.
    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        let first = layers
            .first()
            .ok_or_else(|| Error::Config("model needs at least one layer".into()))?;
        let input_dim = first.in_dim();
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::Shape(format!(
                    "layer {i} outputs {} but layer {} expects {}",
                    pair[0].out_dim(),
                    i + 1,
                    pair[1].in_dim()
                )));
            }
        }
        for (i, l) in layers.iter().enumerate() {
            if l.bias.len() != l.out_dim() {
                return Err(Error::Shape(format!(
                    "layer {i} bias length {} != output dim {}",
                    l.bias.len(),
                    l.out_dim()
                )));
            }
            if !l.weight.all_finite() || l.bias.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric {
                    msg: "non-finite parameter".into(),
                    layer: Some(i),
                });
            }
        }
        let class_count = layers.last().map(Dense::out_dim).unwrap_or_default();
        if class_count < 2 {
            return Err(Error::Config(format!(
                "final layer must output at least 2 classes, got {class_count}"
            )));
        }
        Ok(Self {
            layers,
            input_dim,
            class_count,
        })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.data().len() + l.bias.len())
            .sum()
    }

    /// All parameters flattened layer by layer: weights (row-major) then bias.
    pub fn params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weight.data().iter().chain(&l.bias).copied())
            .collect()
    }

    pub(crate) fn param_mut(&mut self, mut flat: usize) -> &mut f64 {
        for l in &mut self.layers {
            let nw = l.weight.data().len();
            if flat < nw {
                return &mut l.weight.data_mut()[flat];
            }
            flat -= nw;
            if flat < l.bias.len() {
                return &mut l.bias[flat];
            }
            flat -= l.bias.len();
        }
        panic!("parameter index out of range");
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    fn check_batch(&self, batch: &Tensor2) -> Result<()> {
        if batch.cols() != self.input_dim {
            return Err(Error::Shape(format!(
                "batch has {} features, model expects {}",
                batch.cols(),
                self.input_dim
            )));
        }
        Ok(())
    }

    pub fn forward(&self, batch: &Tensor2) -> Result<Tensor2> {
        self.check_batch(batch)?;
        let mut x = batch.clone();
        for layer in &self.layers {
            let mut z = x.matmul_t(&layer.weight);
            add_bias_and_activate(&mut z, layer);
            x = z;
        }
        finite_logits(x)
    }

    pub fn forward_cached(&self, batch: &Tensor2) -> Result<ForwardCache> {
        self.check_batch(batch)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut x = batch.clone();
        for layer in &self.layers {
            let mut z = x.matmul_t(&layer.weight);
            for r in 0..z.rows() {
                for (v, b) in z.row_mut(r).iter_mut().zip(&layer.bias) {
                    *v += b;
                }
            }
            let mut a = z.clone();
            a.data_mut()
                .iter_mut()
                .for_each(|v| *v = layer.activation.apply(*v));
            inputs.push(x);
            pre.push(z);
            x = a;
        }
        Ok(ForwardCache {
            inputs,
            pre,
            logits: finite_logits(x)?,
        })
    }

    /// Backpropagates `dlogits` through a cached forward pass.
    pub fn backward(&self, cache: &ForwardCache, dlogits: &Tensor2) -> Result<Gradients> {
        let logits = &cache.logits;
        if dlogits.rows() != logits.rows() || dlogits.cols() != logits.cols() {
            return Err(Error::Shape(format!(
                "dlogits is {}x{}, logits are {}x{}",
                dlogits.rows(),
                dlogits.cols(),
                logits.rows(),
                logits.cols()
            )));
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        // gradient w.r.t. the current layer's output activation
        let mut upstream = dlogits.clone();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let z = &cache.pre[l];
            let mut dz = upstream;
            for (d, &zv) in dz.data_mut().iter_mut().zip(z.data()) {
                *d *= layer.activation.derivative(zv);
            }
            let dw = dz.t_matmul(&cache.inputs[l]);
            let mut db = vec![0.0; layer.out_dim()];
            for r in dz.iter_rows() {
                for (b, v) in db.iter_mut().zip(r) {
                    *b += v;
                }
            }
            if !dw.all_finite() || db.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric {
                    msg: "non-finite gradient".into(),
                    layer: Some(l),
                });
            }
            upstream = if l > 0 {
                dz.matmul(&layer.weight)
            } else {
                Tensor2::zeros(0, 0)
            };
            grads.push(LayerGrad {
                weight: dw,
                bias: db,
            });
        }
        grads.reverse();
        Ok(Gradients { layers: grads })
    }

    /// Backpropagates and applies one optimizer step.
    pub fn backward_apply(
        &mut self,
        batch: &Tensor2,
        dlogits: &Tensor2,
        opt: &mut super::OptimState,
    ) -> Result<()> {
        let cache = self.forward_cached(batch)?;
        let grads = self.backward(&cache, dlogits)?;
        opt.apply(self, &grads)
    }
}

fn add_bias_and_activate(z: &mut Tensor2, layer: &Dense) {
    for r in 0..z.rows() {
        for (v, b) in z.row_mut(r).iter_mut().zip(&layer.bias) {
            *v = layer.activation.apply(*v + b);
        }
    }
}

fn finite_logits(x: Tensor2) -> Result<Tensor2> {
    if !x.all_finite() {
        return Err(Error::Numeric {
            msg: "forward pass produced non-finite logits".into(),
            layer: None,
        });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(w: &[&[f64]], b: &[f64], act: Activation) -> Dense {
        Dense {
            weight: Tensor2::from_rows(w).unwrap(),
            bias: b.to_vec(),
            activation: act,
        }
    }

    #[test]
    fn init_is_deterministic_and_chains_shapes() {
        let a = init_model(&[2, 8], 2, 7).unwrap();
        let b = init_model(&[2, 8], 2, 7).unwrap();
        assert_eq!(a, b);
        let shapes: Vec<_> = a
            .layers()
            .iter()
            .map(|l| (l.weight.rows(), l.weight.cols()))
            .collect();
        assert_eq!(shapes, vec![(8, 2), (2, 8)]);
        assert!(a.layers().iter().all(|l| l.bias.iter().all(|&v| v == 0.0)));
        let c = init_model(&[2, 8], 2, 8).unwrap();
        assert_ne!(a.params(), c.params());
    }

    #[test]
    fn init_rejects_bad_config() {
        assert!(matches!(init_model(&[], 2, 0), Err(Error::Config(_))));
        assert!(matches!(init_model(&[2, 0], 2, 0), Err(Error::Config(_))));
        assert!(matches!(init_model(&[2], 1, 0), Err(Error::Config(_))));
    }

    #[test]
    fn init_scale_tracks_fan_in() {
        let m = init_model(&[400, 300], 2, 1).unwrap();
        let w = m.layers()[0].weight.data();
        let var = w.iter().map(|v| v * v).sum::<f64>() / w.len() as f64;
        assert!((var - 2.0 / 400.0).abs() < 0.05 * 2.0 / 400.0, "var {var}");
    }

    #[test]
    fn zero_weights_give_zero_logits() {
        let mut m = init_model(&[3, 4], 2, 1).unwrap();
        for l in m.layers_mut() {
            l.weight.data_mut().fill(0.0);
        }
        let x = Tensor2::from_rows(&[[1.0, -2.0, 3.0], [0.5, 0.5, 0.5]]).unwrap();
        assert!(m.forward(&x).unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn relu_clamps_negative_preactivations() {
        let hidden = dense(&[&[1.0], &[-1.0]], &[0.0, -0.5], Activation::Relu);
        let out = dense(
            &[&[1.0, 1.0], &[0.0, 1.0]],
            &[0.0, 0.0],
            Activation::Identity,
        );
        let m = Model::from_layers(vec![hidden, out]).unwrap();
        let x = Tensor2::from_rows(&[[-2.0]]).unwrap();
        // hidden pre-activations: -2 and 1.5; only the second survives
        assert_eq!(m.forward(&x).unwrap().data(), &[1.5, 1.5]);
        let x = Tensor2::from_rows(&[[-0.25]]).unwrap();
        // both pre-activations negative -> zero activations -> zero logits
        assert_eq!(m.forward(&x).unwrap().data(), &[0.0, 0.0]);
    }

    #[test]
    fn forward_matches_scalar_loop() {
        let m = init_model(&[3, 4], 3, 11).unwrap();
        let x =
            Tensor2::from_rows(&[[0.3, -1.2, 2.0], [1.0, 0.0, -0.5], [-0.7, 0.4, 0.1]]).unwrap();
        let logits = m.forward(&x).unwrap();
        for s in 0..3 {
            let mut a: Vec<f64> = x.row(s).to_vec();
            for layer in m.layers() {
                let mut next = Vec::new();
                for o in 0..layer.out_dim() {
                    let mut acc = layer.bias[o];
                    for (i, ai) in a.iter().enumerate() {
                        acc += layer.weight.get(o, i) * ai;
                    }
                    next.push(match layer.activation {
                        Activation::Relu => acc.max(0.0),
                        Activation::Identity => acc,
                    });
                }
                a = next;
            }
            for (c, v) in a.iter().enumerate() {
                assert!((logits.get(s, c) - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn forward_rejects_dim_mismatch() {
        let m = init_model(&[3, 4], 2, 1).unwrap();
        let x = Tensor2::zeros(2, 2);
        assert!(matches!(m.forward(&x), Err(Error::Shape(_))));
    }

    #[test]
    fn from_layers_rejects_broken_chain() {
        let a = dense(&[&[1.0, 0.0]], &[0.0], Activation::Relu);
        let b = dense(
            &[&[1.0, 0.0], &[0.0, 1.0]],
            &[0.0, 0.0],
            Activation::Identity,
        );
        assert!(matches!(
            Model::from_layers(vec![a, b]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn non_finite_gradient_names_layer() {
        let m = init_model(&[2, 3], 2, 4).unwrap();
        let x = Tensor2::from_rows(&[[1.0, 1.0]]).unwrap();
        let cache = m.forward_cached(&x).unwrap();
        let mut d = Tensor2::zeros(1, 2);
        d.data_mut()[0] = f64::INFINITY;
        match m.backward(&cache, &d) {
            Err(Error::Numeric { layer: Some(1), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
