//! Channel importance scoring, one-shot structured pruning, fine-tuning.
//!
//! Importance of channel j in a layer is the min-max normalized l2 norm of
//! its vectorized weights; pruning keeps the top-scoring channels at a
//! per-layer uniform ratio and physically shrinks the model, removing the
//! matching input slices of the next layer. The readout layer is never
//! channel-pruned.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{evaluate_accuracy, Arch, ClassifierObjective, Objective, TinyModel};
use crate::tensor::{l2_norm, Dims, LayerSet, Tensor4};

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelImportance {
    /// per layer: (name, score per output channel, each in [0,1])
    pub layers: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneMask {
    /// per layer: (name, keep flag per output channel)
    pub layers: Vec<(String, Vec<bool>)>,
    pub ratio: f64,
}

/// Names of layers whose output channels may be pruned (everything except
/// the class readout).
pub fn prunable_layer_names(arch: &Arch) -> Vec<&'static str> {
    match arch {
        Arch::Softmax { .. } => vec![],
        Arch::Mlp { .. } => vec!["fc1"],
        Arch::Cnn { .. } => vec!["conv1", "conv2"],
    }
}

/// Min-max normalized channel magnitudes per layer. A layer whose channels
/// all have the same magnitude gets 0.5 everywhere.
pub fn importance_scores(weights: &LayerSet) -> Result<ChannelImportance> {
    if weights.is_empty() {
        return Err(Error::InvalidParam("no layers to score".into()));
    }
    let mut layers = Vec::new();
    for (name, t) in weights.iter() {
        let mags: Vec<f64> = (0..t.dims().c_out)
            .map(|j| l2_norm(t.channel_vec(j).unwrap()))
            .collect();
        let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = mags.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let scores = if max == min {
            vec![0.5; mags.len()]
        } else {
            mags.iter().map(|&m| (m - min) / (max - min)).collect()
        };
        layers.push((name.to_string(), scores));
    }
    Ok(ChannelImportance { layers })
}

pub fn kept_count(c_out: usize, ratio: f64) -> usize {
    (((1.0 - ratio) * c_out as f64).round() as usize).max(1)
}

/// Keep the top `max(1, round((1 - ratio) * c_out))` channels per layer by
/// score; ties keep the lower channel index first.
pub fn build_mask(scores: &ChannelImportance, ratio: f64) -> Result<PruneMask> {
    if !(0.0..1.0).contains(&ratio) || ratio == 0.0 {
        return Err(Error::InvalidParam(format!("ratio must be in (0,1), got {ratio}")));
    }
    let mut layers = Vec::new();
    for (name, sc) in &scores.layers {
        let keep_n = kept_count(sc.len(), ratio);
        let mut order: Vec<usize> = (0..sc.len()).collect();
        // stable by construction: equal scores keep ascending index order
        order.sort_by(|&a, &b| sc[b].partial_cmp(&sc[a]).unwrap().then(a.cmp(&b)));
        let mut keep = vec![false; sc.len()];
        for &j in order.iter().take(keep_n) {
            keep[j] = true;
        }
        layers.push((name.clone(), keep));
    }
    Ok(PruneMask { layers, ratio })
}

impl PruneMask {
    pub fn kept_indices(&self, layer: &str) -> Option<Vec<usize>> {
        self.layers.iter().find(|(n, _)| n == layer).map(|(_, keep)| {
            keep.iter()
                .enumerate()
                .filter(|(_, &k)| k)
                .map(|(j, _)| j)
                .collect()
        })
    }

    /// Text form: one `layer: i0 i1 ...` line per layer.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, _) in &self.layers {
            let kept = self.kept_indices(name).unwrap();
            let idx: Vec<String> = kept.iter().map(|i| i.to_string()).collect();
            out.push_str(&format!("{name}: {}\n", idx.join(" ")));
        }
        out
    }

    pub fn from_text(text: &str, channel_counts: &[(String, usize)], ratio: f64) -> Result<PruneMask> {
        let mut layers = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (name, rest) = line.split_once(':').ok_or(Error::Malformed {
                line: lineno + 1,
                msg: "expected `layer: indices`".into(),
            })?;
            let name = name.trim();
            let &(_, c_out) = channel_counts
                .iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| Error::InvalidParam(format!("unknown layer {name}")))?;
            let mut keep = vec![false; c_out];
            for tok in rest.split_whitespace() {
                let j: usize = tok.parse().map_err(|e| Error::Malformed {
                    line: lineno + 1,
                    msg: format!("bad index: {e}"),
                })?;
                if j >= c_out {
                    return Err(Error::ChannelOutOfRange { index: j, n_channels: c_out });
                }
                keep[j] = true;
            }
            layers.push((name.to_string(), keep));
        }
        Ok(PruneMask { layers, ratio })
    }
}

fn keep_of<'a>(mask: &'a PruneMask, layer: &str) -> Result<&'a [bool]> {
    mask.layers
        .iter()
        .find(|(n, _)| n == layer)
        .map(|(_, k)| k.as_slice())
        .ok_or_else(|| Error::InvalidParam(format!("mask missing layer {layer}")))
}

fn check_not_empty(keep: &[bool], layer: &str) -> Result<usize> {
    let n = keep.iter().filter(|&&k| k).count();
    if n == 0 {
        return Err(Error::InvalidParam(format!("mask empties layer {layer}")));
    }
    Ok(n)
}

/// Select output channels of `t` by `keep_out` and input slices by
/// `keep_in` (conv input channels or dense input rows).
fn shrink_tensor(t: &Tensor4, keep_in: &[bool], keep_out: &[bool]) -> Tensor4 {
    let d = t.dims();
    debug_assert_eq!(keep_in.len(), d.c_in);
    debug_assert_eq!(keep_out.len(), d.c_out);
    let new_in = keep_in.iter().filter(|&&k| k).count();
    let new_out = keep_out.iter().filter(|&&k| k).count();
    let mut data = Vec::with_capacity(new_in * new_out * d.kh * d.kw);
    for (j, &ko) in keep_out.iter().enumerate() {
        if !ko {
            continue;
        }
        let chan = t.channel_vec(j).unwrap();
        for (i, &ki) in keep_in.iter().enumerate() {
            if !ki {
                continue;
            }
            data.extend_from_slice(&chan[i * d.kh * d.kw..(i + 1) * d.kh * d.kw]);
        }
    }
    Tensor4::from_vec(Dims::new(new_in, new_out, d.kh, d.kw), data).unwrap()
}

/// Physically remove pruned channels: the channel disappears from its layer
/// and the corresponding input slices disappear from the next layer.
pub fn apply_mask(model: &TinyModel, mask: &PruneMask) -> Result<TinyModel> {
    match model.arch {
        Arch::Softmax { .. } => {
            if mask.layers.is_empty() {
                Ok(model.clone())
            } else {
                Err(Error::InvalidParam("softmax regression has no prunable layers".into()))
            }
        }
        Arch::Mlp { dim, hidden, n_classes } => {
            let keep = keep_of(mask, "fc1")?;
            if keep.len() != hidden {
                return Err(Error::ShapeMismatch("mask length != hidden width".into()));
            }
            let new_hidden = check_not_empty(keep, "fc1")?;
            let all_in = vec![true; dim];
            let all_out = vec![true; n_classes];
            let fc1 = shrink_tensor(model.params.by_name("fc1").unwrap(), &all_in, keep);
            let fc2 = shrink_tensor(model.params.by_name("fc2").unwrap(), keep, &all_out);
            let mut params = LayerSet::new();
            params.push("fc1", fc1)?;
            params.push("fc2", fc2)?;
            Ok(TinyModel {
                arch: Arch::Mlp { dim, hidden: new_hidden, n_classes },
                params,
            })
        }
        Arch::Cnn { side, c1, c2, n_classes } => {
            let keep1 = keep_of(mask, "conv1")?;
            let keep2 = keep_of(mask, "conv2")?;
            if keep1.len() != c1 || keep2.len() != c2 {
                return Err(Error::ShapeMismatch("mask lengths != conv widths".into()));
            }
            let new_c1 = check_not_empty(keep1, "conv1")?;
            let new_c2 = check_not_empty(keep2, "conv2")?;
            let (_, _, s2) = Arch::cnn_spatial(side)?;
            let conv1 = shrink_tensor(model.params.by_name("conv1").unwrap(), &[true], keep1);
            let conv2 = shrink_tensor(model.params.by_name("conv2").unwrap(), keep1, keep2);
            // dense input rows are channel-major blocks of s2*s2 positions
            let mut keep_fc_in = Vec::with_capacity(c2 * s2 * s2);
            for &k in keep2 {
                keep_fc_in.extend(std::iter::repeat(k).take(s2 * s2));
            }
            let all_classes = vec![true; n_classes];
            let fc = shrink_tensor(model.params.by_name("fc").unwrap(), &keep_fc_in, &all_classes);
            let mut params = LayerSet::new();
            params.push("conv1", conv1)?;
            params.push("conv2", conv2)?;
            params.push("fc", fc)?;
            Ok(TinyModel {
                arch: Arch::Cnn { side, c1: new_c1, c2: new_c2, n_classes },
                params,
            })
        }
    }
}

/// Plain SGD fine-tuning of a (pruned) classifier; no sparsity term, just
/// cross-entropy plus weight decay. Returns the tuned model and per-epoch
/// accuracy on `eval`.
pub fn finetune(
    model: &TinyModel,
    train: &Dataset,
    eval: &Dataset,
    epochs: usize,
    eta: f64,
    alpha: f64,
    batch_size: usize,
    seed: u64,
) -> Result<(TinyModel, Vec<f64>)> {
    let obj = ClassifierObjective::new(model.arch, train, alpha)?;
    let mut params = model.params.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc_trace = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        let mut idx: Vec<usize> = (0..train.len()).collect();
        idx.shuffle(&mut rng);
        for batch in idx.chunks(batch_size) {
            let (loss, grad) = obj.loss_and_grad(&params, batch);
            if !loss.is_finite() {
                return Err(Error::NonFinite("fine-tune loss".into()));
            }
            params.scale_add(1.0, &grad, -(eta as f32))?;
        }
        let snapshot = TinyModel { arch: model.arch, params: params.clone() };
        acc_trace.push(evaluate_accuracy(&snapshot, eval)?);
    }
    Ok((TinyModel { arch: model.arch, params }, acc_trace))
}
