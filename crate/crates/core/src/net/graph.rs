use super::{NetworkSpec, ParameterSet};
use crate::kinetic::{kitinet_forward, kitinet_vjp, CollisionReport, KitiConfig};
use crate::{rng, Error, Result};

/// Whether operator layers collide and, if so, which random streams they use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardMode {
    Inference,
    /// Row `r` of operator layer `l` draws from the stream
    /// `(kiti.seed, step, l, r)`.
    Training { step: u64 },
}

/// Everything the reverse pass needs from one forward pass.
#[derive(Debug, Clone)]
pub struct Tape {
    spec: NetworkSpec,
    shapes: Vec<(usize, usize)>,
    batch: usize,
    training: bool,
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
    reports: Vec<Option<Vec<CollisionReport>>>,
}

impl Tape {
    pub fn batch(&self) -> usize {
        self.batch
    }

    /// Per-row collision reports of operator layer `layer` (training mode only).
    pub fn reports(&self, layer: usize) -> Option<&[CollisionReport]> {
        self.reports.get(layer)?.as_deref()
    }
}

fn affine(h: &[f64], batch: usize, w: &super::Layer) -> Vec<f64> {
    let mut z = Vec::with_capacity(batch * w.out_dim);
    for row in h.chunks_exact(w.in_dim) {
        for o in 0..w.out_dim {
            let dot: f64 = w.row(o).iter().zip(row).map(|(a, b)| a * b).sum();
            z.push(w.bias[o] + dot);
        }
    }
    z
}

/// Runs the network on `inputs` (`batch x input_dim`, row-major).
pub fn forward(
    params: &ParameterSet,
    spec: &NetworkSpec,
    inputs: &[f64],
    mode: ForwardMode,
) -> Result<(Vec<f64>, Tape)> {
    spec.validate()?;
    let shapes = spec.layer_shapes();
    if params.shapes() != shapes {
        return Err(Error::Shape(format!(
            "parameters have shapes {:?}, network expects {:?}",
            params.shapes(),
            shapes
        )));
    }
    if inputs.len() % spec.input_dim != 0 {
        return Err(Error::Shape(format!(
            "input length {} is not a multiple of input_dim {}",
            inputs.len(),
            spec.input_dim
        )));
    }
    let batch = inputs.len() / spec.input_dim;
    let training = matches!(mode, ForwardMode::Training { .. });
    let kiti = KitiConfig { training, ..spec.kiti };

    let mut tape = Tape {
        spec: spec.clone(),
        shapes: shapes.clone(),
        batch,
        training,
        inputs: Vec::with_capacity(spec.depth),
        pre: Vec::with_capacity(spec.depth),
        post: Vec::with_capacity(spec.depth),
        reports: vec![None; spec.depth],
    };
    let mut h = inputs.to_vec();
    let last = spec.depth - 1;
    for (l, layer) in params.layers.iter().enumerate() {
        let z = affine(&h, batch, layer);
        if l == last {
            tape.inputs.push(h);
            tape.post.push(z.clone());
            tape.pre.push(z.clone());
            return Ok((z, tape));
        }
        let a: Vec<f64> = z.iter().map(|&v| spec.activation.apply(v)).collect();
        let next = if l > 0 && spec.kiti_layers.contains(&l) {
            let width = spec.hidden_dim;
            let mut out = Vec::with_capacity(batch * width);
            let mut reports = Vec::with_capacity(if training { batch } else { 0 });
            for (r, (x, v)) in h.chunks_exact(width).zip(a.chunks_exact(width)).enumerate() {
                let mut stream = match mode {
                    ForwardMode::Training { step } => {
                        rng::derive(spec.kiti.seed, &[rng::tag::NET_KITI, step, l as u64, r as u64])
                    }
                    ForwardMode::Inference => rng::root(0),
                };
                let (xo, rep) = kitinet_forward(x, v, &kiti, &mut stream)?;
                out.extend_from_slice(&xo);
                reports.extend(rep);
            }
            if training {
                tape.reports[l] = Some(reports);
            }
            out
        } else if l > 0 && spec.skip_connections {
            h.iter().zip(&a).map(|(x, y)| x + y).collect()
        } else {
            a.clone()
        };
        tape.inputs.push(std::mem::replace(&mut h, next));
        tape.pre.push(z);
        tape.post.push(a);
    }
    unreachable!("depth >= 2 guarantees a final layer")
}

/// Mean squared error over all outputs and its gradient.
pub fn mse(outputs: &[f64], targets: &[f64]) -> (f64, Vec<f64>) {
    let n = outputs.len().max(1) as f64;
    let mut loss = 0.0;
    let grad = outputs
        .iter()
        .zip(targets)
        .map(|(y, t)| {
            let d = y - t;
            loss += d * d;
            2.0 * d / n
        })
        .collect();
    (loss / n, grad)
}

/// Reverse pass: gradients of the loss for every parameter, given
/// `loss_grad = dL/d(output)` for the taped forward. Operator layers are
/// differentiated with their recorded masks and scatter directions held fixed.
pub fn backward(tape: &Tape, params: &ParameterSet, loss_grad: &[f64]) -> Result<ParameterSet> {
    if params.shapes() != tape.shapes {
        return Err(Error::StaleTape(format!(
            "tape recorded shapes {:?}, parameters have {:?}",
            tape.shapes,
            params.shapes()
        )));
    }
    let depth = tape.shapes.len();
    let out_dim = tape.shapes[depth - 1].0;
    if loss_grad.len() != tape.batch * out_dim {
        return Err(Error::StaleTape(format!(
            "loss gradient has {} entries, tape batch needs {}",
            loss_grad.len(),
            tape.batch * out_dim
        )));
    }
    let spec = &tape.spec;
    let kiti = KitiConfig { training: tape.training, ..spec.kiti };
    let mut grads = params.zeros_like();
    let mut g = loss_grad.to_vec();
    let mut non_differentiable = false;

    for l in (0..depth).rev() {
        let layer = &params.layers[l];
        let (o_dim, i_dim) = tape.shapes[l];
        let h = &tape.inputs[l];
        let mut dh_direct: Option<Vec<f64>> = None;
        let dz: Vec<f64> = if l == depth - 1 {
            g.clone()
        } else {
            let da = if l > 0 && spec.kiti_layers.contains(&l) {
                let mut dx = Vec::with_capacity(g.len());
                let mut dv = Vec::with_capacity(g.len());
                let a = &tape.post[l];
                for r in 0..tape.batch {
                    let span = r * o_dim..(r + 1) * o_dim;
                    match &tape.reports[l] {
                        Some(reps) => {
                            let rep = reps.get(r).ok_or_else(|| {
                                Error::StaleTape(format!("layer {l} has no report for row {r}"))
                            })?;
                            let vjp = kitinet_vjp(&h[span.clone()], &a[span.clone()], &kiti, rep, &g[span.clone()])
                                .map_err(|e| Error::StaleTape(e.to_string()))?;
                            non_differentiable |= vjp.non_differentiable;
                            dx.extend(vjp.grad_x);
                            dv.extend(vjp.grad_v);
                        }
                        None => {
                            dx.extend_from_slice(&g[span.clone()]);
                            dv.extend(g[span].iter().map(|x| kiti.dt * x));
                        }
                    }
                }
                dh_direct = Some(dx);
                dv
            } else {
                if l > 0 && spec.skip_connections {
                    dh_direct = Some(g.clone());
                }
                g.clone()
            };
            da.iter()
                .zip(tape.pre[l].iter().zip(&tape.post[l]))
                .map(|(d, (&z, &a))| d * spec.activation.derivative(z, a))
                .collect()
        };

        let gl = &mut grads.layers[l];
        for (dz_row, h_row) in dz.chunks_exact(o_dim).zip(h.chunks_exact(i_dim)) {
            for o in 0..o_dim {
                let d = dz_row[o];
                gl.bias[o] += d;
                if d != 0.0 {
                    let w = &mut gl.weights[o * i_dim..(o + 1) * i_dim];
                    w.iter_mut().zip(h_row).for_each(|(gw, x)| *gw += d * x);
                }
            }
        }

        if l > 0 {
            let mut dh = dh_direct.unwrap_or_else(|| vec![0.0; tape.batch * i_dim]);
            for (dz_row, dh_row) in dz.chunks_exact(o_dim).zip(dh.chunks_exact_mut(i_dim)) {
                for o in 0..o_dim {
                    let d = dz_row[o];
                    if d != 0.0 {
                        dh_row.iter_mut().zip(layer.row(o)).for_each(|(x, w)| *x += d * w);
                    }
                }
            }
            g = dh;
        }
    }
    if non_differentiable {
        log::warn!("operator layer hit a pair with zero relative speed; used d|u|/du = 0");
    }
    Ok(grads)
}
