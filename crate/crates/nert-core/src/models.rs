//! The factored INR architecture and the SIREN / FFN baselines behind one
//! model interface.
//!
//! The factored model encodes a coordinate three ways (plain MLP over the
//! temporal components, embedding MLP over the one-hot feature vector, and a
//! learnable Fourier mapping), then decodes a bounded periodic factor with a
//! sine-activated MLP and an unbounded scale factor with a ReLU MLP. The
//! prediction is their product, and both factors are first-class outputs.

use serde::{Deserialize, Serialize};

use crate::adam::{BoundParams, ParamId, ParamSet};
use crate::dataset::CoordBatch;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::{Tape, Tensor, Var};

// ── Layers ──────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy)]
enum Init {
    /// Uniform +-sqrt(6 / fan_in), for ReLU layers.
    Kaiming,
    /// Uniform +-1 / fan_in, for the first sine layer of a SIREN stack.
    SirenFirst,
    /// Uniform +-sqrt(6 / fan_in) / omega, for later sine layers.
    SirenHidden { omega: f64 },
}

#[derive(Debug, Clone)]
struct Linear {
    w: ParamId,
    b: ParamId,
}

impl Linear {
    fn init(
        params: &mut ParamSet,
        name: &str,
        in_dim: usize,
        out_dim: usize,
        init: Init,
        rng: &mut Rng,
    ) -> Self {
        let limit = match init {
            Init::Kaiming => (6.0 / in_dim as f64).sqrt(),
            Init::SirenFirst => 1.0 / in_dim as f64,
            Init::SirenHidden { omega } => (6.0 / in_dim as f64).sqrt() / omega,
        };
        let data: Vec<f64> = (0..in_dim * out_dim)
            .map(|_| rng.uniform_in(-limit, limit))
            .collect();
        let w = params.add(
            format!("{name}.w"),
            Tensor::from_vec(vec![in_dim, out_dim], data).expect("finite init"),
            true,
        );
        let b = params.add(format!("{name}.b"), Tensor::zeros(vec![1, out_dim]), true);
        Linear { w, b }
    }

    fn forward(&self, tape: &mut Tape, bound: &BoundParams, x: Var) -> Result<Var> {
        self.forward_shifted(tape, bound, x, None)
    }

    /// Forward with an optional additive bias shift (latent modulation).
    fn forward_shifted(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        x: Var,
        shift: Option<Var>,
    ) -> Result<Var> {
        let y = tape.matmul(x, bound.var(self.w))?;
        let y = tape.add(y, bound.var(self.b))?;
        match shift {
            Some(s) => tape.add(y, s),
            None => Ok(y),
        }
    }
}

/// Plain MLP with ReLU between layers and a linear output.
#[derive(Debug, Clone)]
struct ReluMlp {
    layers: Vec<Linear>,
}

impl ReluMlp {
    fn init(
        params: &mut ParamSet,
        name: &str,
        in_dim: usize,
        hidden: usize,
        out_dim: usize,
        n_layers: usize,
        rng: &mut Rng,
    ) -> Self {
        assert!(n_layers >= 1);
        let mut layers = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let i = if l == 0 { in_dim } else { hidden };
            let o = if l == n_layers - 1 { out_dim } else { hidden };
            layers.push(Linear::init(params, &format!("{name}.{l}"), i, o, Init::Kaiming, rng));
        }
        ReluMlp { layers }
    }

    fn forward(&self, tape: &mut Tape, bound: &BoundParams, x: Var) -> Result<Var> {
        self.forward_with_shifts(tape, bound, x, None)
    }

    fn forward_with_shifts(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        x: Var,
        shifts: Option<&[Var]>,
    ) -> Result<Var> {
        let mut h = x;
        for (l, layer) in self.layers.iter().enumerate() {
            let shift = shifts.map(|s| s[l]);
            h = layer.forward_shifted(tape, bound, h, shift)?;
            if l + 1 < self.layers.len() {
                h = tape.relu(h);
            }
        }
        Ok(h)
    }
}

/// MLP with sin(omega_inner * z) after every layer, including the last, so
/// the output is bounded in [-1, 1] by construction.
#[derive(Debug, Clone)]
struct SineMlp {
    layers: Vec<Linear>,
    omega_inner: f64,
}

impl SineMlp {
    fn init(
        params: &mut ParamSet,
        name: &str,
        in_dim: usize,
        hidden: usize,
        n_layers: usize,
        omega_inner: f64,
        rng: &mut Rng,
    ) -> Self {
        assert!(n_layers >= 1);
        let mut layers = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let i = if l == 0 { in_dim } else { hidden };
            let o = if l == n_layers - 1 { 1 } else { hidden };
            layers.push(Linear::init(
                params,
                &format!("{name}.{l}"),
                i,
                o,
                Init::SirenHidden { omega: omega_inner },
                rng,
            ));
        }
        SineMlp { layers, omega_inner }
    }

    fn forward_with_shifts(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        x: Var,
        shifts: Option<&[Var]>,
    ) -> Result<Var> {
        let mut h = x;
        for (l, layer) in self.layers.iter().enumerate() {
            let shift = shifts.map(|s| s[l]);
            h = layer.forward_shifted(tape, bound, h, shift)?;
            h = tape.scale(h, self.omega_inner);
            h = tape.sin(h);
        }
        Ok(h)
    }
}

/// Learnable Fourier mapping: per temporal component m, the row
/// A_m * sin(omega_m * c_m + delta_m) + B_m, rows concatenated. Frequencies
/// are sampled once from U[-omega_init, omega_init] and stay fixed unless
/// `learn_frequencies` is set; amplitudes start at 1, phases and biases at 0,
/// so at init the map is exactly sin(omega * c).
///
/// Internally a frequency is stored as omega_init * w with w in [-1, 1], so
/// that when frequencies do learn, the optimizer's per-parameter step moves
/// them proportionally to the frequency band instead of one absolute unit.
#[derive(Debug, Clone)]
struct FourierLayer {
    freq_factor: Vec<ParamId>,
    amp: Vec<ParamId>,
    phase: Vec<ParamId>,
    bias: Vec<ParamId>,
    omega_scale: f64,
}

impl FourierLayer {
    fn init(
        params: &mut ParamSet,
        name: &str,
        d_ct: usize,
        width: usize,
        omega_init: f64,
        learn_frequencies: bool,
        rng: &mut Rng,
    ) -> Self {
        let mut freq_factor = Vec::with_capacity(d_ct);
        let mut amp = Vec::with_capacity(d_ct);
        let mut phase = Vec::with_capacity(d_ct);
        let mut bias = Vec::with_capacity(d_ct);
        for m in 0..d_ct {
            // Stratified uniform draw over [-1, 1]: one sample per stratum,
            // so the band is covered without clumps or gaps.
            let w: Vec<f64> = (0..width)
                .map(|k| ((k as f64 + rng.uniform()) / width as f64) * 2.0 - 1.0)
                .collect();
            freq_factor.push(params.add(
                format!("{name}.omega.{m}"),
                Tensor::from_vec(vec![1, width], w).expect("finite init"),
                learn_frequencies,
            ));
            amp.push(params.add(
                format!("{name}.amp.{m}"),
                Tensor::full(vec![1, width], 1.0),
                true,
            ));
            phase.push(params.add(
                format!("{name}.phase.{m}"),
                Tensor::zeros(vec![1, width]),
                true,
            ));
            bias.push(params.add(
                format!("{name}.bias.{m}"),
                Tensor::zeros(vec![1, width]),
                true,
            ));
        }
        FourierLayer { freq_factor, amp, phase, bias, omega_scale: omega_init }
    }

    /// Realized frequencies omega = omega_init * w for one component.
    fn frequencies(&self, params: &ParamSet, m: usize) -> Vec<f64> {
        params
            .get(self.freq_factor[m])
            .data()
            .iter()
            .map(|w| w * self.omega_scale)
            .collect()
    }

    /// `ct` is the raw B x D batch; each component broadcasts against its
    /// own frequency row.
    fn forward(&self, tape: &mut Tape, bound: &BoundParams, ct: &[f64], rows: usize, d: usize) -> Result<Var> {
        let mut parts = Vec::with_capacity(d);
        for m in 0..d {
            let col: Vec<f64> = (0..rows).map(|r| ct[r * d + m]).collect();
            let col = tape.constant_from(vec![rows, 1], col);
            let u = tape.mul(col, bound.var(self.freq_factor[m]))?;
            let u = tape.scale(u, self.omega_scale);
            let u = tape.add(u, bound.var(self.phase[m]))?;
            let s = tape.sin(u);
            let s = tape.mul(s, bound.var(self.amp[m]))?;
            parts.push(tape.add(s, bound.var(self.bias[m]))?);
        }
        tape.concat(&parts, 1)
    }
}

// ── Model specs ─────────────────────────────────────────────────────

fn default_layers_tf() -> usize {
    2
}
fn default_layers_period() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NertSpec {
    /// Temporal coordinate dimensionality D_ct.
    pub d_ct: usize,
    /// Feature count M.
    pub m: usize,
    pub dim_psi_t: usize,
    pub dim_psi_f: usize,
    /// Fourier width per temporal component.
    pub dim_psi_fourier: usize,
    pub dim_hidden_period: usize,
    pub dim_hidden_scale: usize,
    #[serde(default = "default_layers_tf")]
    pub layers_t: usize,
    #[serde(default = "default_layers_tf")]
    pub layers_f: usize,
    #[serde(default = "default_layers_period")]
    pub layers_period: usize,
    #[serde(default = "default_layers_tf")]
    pub layers_scale: usize,
    /// Frequency sampling bound b; frequencies are drawn from U[-b, b].
    pub omega_init: f64,
    /// Sine activation frequency of the periodic decoder.
    pub omega_inner: f64,
    /// Optional FC layer compressing the Fourier embedding back to
    /// `dim_psi_fourier` columns.
    #[serde(default)]
    pub use_compress_fc: bool,
    /// Ablation switch; frequencies stay fixed after init by default.
    #[serde(default)]
    pub learn_frequencies: bool,
    /// Divides the periodic decoder's initial weights. Values above 1 start
    /// the decoder in its near-linear regime, which favors locking onto
    /// dictionary frequencies over in-window aliasing.
    #[serde(default = "default_period_init_gain")]
    pub period_init_gain: f64,
    pub seed: u64,
}

fn default_period_init_gain() -> f64 {
    1.0
}

impl Default for NertSpec {
    fn default() -> Self {
        NertSpec {
            d_ct: 1,
            m: 1,
            dim_psi_t: 30,
            dim_psi_f: 30,
            dim_psi_fourier: 30,
            dim_hidden_period: 10,
            dim_hidden_scale: 30,
            layers_t: 2,
            layers_f: 2,
            layers_period: 5,
            layers_scale: 2,
            omega_init: 5.0,
            omega_inner: 1.0,
            use_compress_fc: false,
            learn_frequencies: false,
            period_init_gain: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirenSpec {
    pub input_dim: usize,
    pub hidden: usize,
    /// Total FC count; the last one is linear, the rest are sine layers.
    pub layers: usize,
    pub omega0: f64,
    pub seed: u64,
}

impl Default for SirenSpec {
    fn default() -> Self {
        SirenSpec { input_dim: 2, hidden: 64, layers: 5, omega0: 30.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FfnSpec {
    pub input_dim: usize,
    /// Number of random Gaussian frequencies; the feature vector has twice
    /// this length (sin and cos branches).
    pub n_freq: usize,
    pub sigma: f64,
    pub hidden: usize,
    pub layers: usize,
    pub seed: u64,
}

impl Default for FfnSpec {
    fn default() -> Self {
        FfnSpec { input_dim: 2, n_freq: 64, sigma: 10.0, hidden: 64, layers: 4, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    Nert(NertSpec),
    Siren(SirenSpec),
    Ffn(FfnSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Nert,
    Siren,
    Ffn,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nert" => Ok(ModelKind::Nert),
            "siren" => Ok(ModelKind::Siren),
            "ffn" => Ok(ModelKind::Ffn),
            other => Err(Error::config(format!("unknown model kind '{other}'"))),
        }
    }
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Nert(_) => ModelKind::Nert,
            ModelSpec::Siren(_) => ModelKind::Siren,
            ModelSpec::Ffn(_) => ModelKind::Ffn,
        }
    }

    pub fn build(&self) -> Result<Model> {
        match self {
            ModelSpec::Nert(s) => Ok(Model::Nert(NertModel::new(s.clone())?)),
            ModelSpec::Siren(s) => Ok(Model::Siren(SirenModel::new(s.clone())?)),
            ModelSpec::Ffn(s) => Ok(Model::Ffn(FfnModel::new(s.clone())?)),
        }
    }
}

// ── NeRT ────────────────────────────────────────────────────────────

pub struct NertModel {
    pub spec: NertSpec,
    params: ParamSet,
    psi_t: ReluMlp,
    psi_f: ReluMlp,
    fourier: FourierLayer,
    compress: Option<Linear>,
    period: SineMlp,
    scale: ReluMlp,
}

/// Forward outputs; the periodic and scale factors are present for the
/// factored model only.
pub struct ModelOutput {
    pub pred: Var,
    pub period: Option<Var>,
    pub scale: Option<Var>,
}

impl NertModel {
    pub fn new(spec: NertSpec) -> Result<Self> {
        if spec.d_ct == 0 || spec.m == 0 {
            return Err(Error::config("model needs d_ct >= 1 and m >= 1"));
        }
        let mut params = ParamSet::new();
        let mut rng = Rng::new(spec.seed).derive("nert-init");
        let psi_t = ReluMlp::init(
            &mut params,
            "psi_t",
            spec.d_ct,
            spec.dim_psi_t,
            spec.dim_psi_t,
            spec.layers_t,
            &mut rng,
        );
        let psi_f = ReluMlp::init(
            &mut params,
            "psi_f",
            spec.m,
            spec.dim_psi_f,
            spec.dim_psi_f,
            spec.layers_f,
            &mut rng,
        );
        let fourier = FourierLayer::init(
            &mut params,
            "fourier",
            spec.d_ct,
            spec.dim_psi_fourier,
            spec.omega_init,
            spec.learn_frequencies,
            &mut rng,
        );
        let fourier_out = if spec.use_compress_fc {
            spec.dim_psi_fourier
        } else {
            spec.d_ct * spec.dim_psi_fourier
        };
        let compress = spec.use_compress_fc.then(|| {
            Linear::init(
                &mut params,
                "compress",
                spec.d_ct * spec.dim_psi_fourier,
                spec.dim_psi_fourier,
                Init::Kaiming,
                &mut rng,
            )
        });
        let period = SineMlp::init(
            &mut params,
            "period",
            fourier_out + spec.dim_psi_f,
            spec.dim_hidden_period,
            spec.layers_period,
            spec.omega_inner,
            &mut rng,
        );
        if spec.period_init_gain <= 0.0 {
            return Err(Error::config("period_init_gain must be positive"));
        }
        if spec.period_init_gain != 1.0 {
            for layer in &period.layers {
                for v in params.get_mut(layer.w).data_mut() {
                    *v /= spec.period_init_gain;
                }
            }
        }
        let scale = ReluMlp::init(
            &mut params,
            "scale",
            fourier_out + spec.dim_psi_f + spec.dim_psi_t,
            spec.dim_hidden_scale,
            1,
            spec.layers_scale,
            &mut rng,
        );
        Ok(NertModel { spec, params, psi_t, psi_f, fourier, compress, period, scale })
    }

    fn check_batch(&self, batch: &CoordBatch) -> Result<()> {
        if batch.d_ct != self.spec.d_ct {
            return Err(Error::dim(format!(
                "batch has d_ct {} but model expects {}",
                batch.d_ct, self.spec.d_ct
            )));
        }
        if batch.m != self.spec.m {
            return Err(Error::dim(format!(
                "batch has {} features but model expects {}",
                batch.m, self.spec.m
            )));
        }
        // Feature coordinates must be one-hot rows.
        for row in 0..batch.len() {
            let r = &batch.cf[row * batch.m..(row + 1) * batch.m];
            let ones = r.iter().filter(|&&v| v == 1.0).count();
            let zeros = r.iter().filter(|&&v| v == 0.0).count();
            if ones != 1 || ones + zeros != batch.m {
                return Err(Error::contract(format!("feature coordinate row {row} is not one-hot")));
            }
        }
        Ok(())
    }

    /// Fourier embedding (optionally compressed) shared by both decoders.
    fn embed(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        batch: &CoordBatch,
    ) -> Result<(Var, Var, Var)> {
        let b = batch.len();
        let ct = tape.constant_from(vec![b, batch.d_ct], batch.ct.clone());
        let cf = tape.constant_from(vec![b, batch.m], batch.cf.clone());
        let psi_t = self.psi_t.forward(tape, bound, ct)?;
        let psi_f = self.psi_f.forward(tape, bound, cf)?;
        let mut psi_fourier = self.fourier.forward(tape, bound, &batch.ct, b, batch.d_ct)?;
        if let Some(compress) = &self.compress {
            psi_fourier = compress.forward(tape, bound, psi_fourier)?;
        }
        Ok((psi_fourier, psi_f, psi_t))
    }

    pub fn forward(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        batch: &CoordBatch,
    ) -> Result<ModelOutput> {
        self.forward_modulated(tape, bound, batch, None, None)
    }

    /// Forward with optional per-layer additive bias shifts on the decoders
    /// (latent modulation). `None` reproduces the shared model exactly.
    pub fn forward_modulated(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        batch: &CoordBatch,
        period_shifts: Option<&[Var]>,
        scale_shifts: Option<&[Var]>,
    ) -> Result<ModelOutput> {
        self.check_batch(batch)?;
        let (psi_fourier, psi_f, psi_t) = self.embed(tape, bound, batch)?;
        let period_in = tape.concat(&[psi_fourier, psi_f], 1)?;
        let period = self.period.forward_with_shifts(tape, bound, period_in, period_shifts)?;
        let scale_in = tape.concat(&[psi_fourier, psi_f, psi_t], 1)?;
        let scale = self.scale.forward_with_shifts(tape, bound, scale_in, scale_shifts)?;
        let pred = tape.mul(period, scale)?;
        Ok(ModelOutput { pred, period: Some(period), scale: Some(scale) })
    }

    /// Realized Fourier frequencies (omega_init * w) for one temporal
    /// component.
    pub fn fourier_frequencies(&self, component: usize) -> Vec<f64> {
        self.fourier.frequencies(&self.params, component)
    }

    /// The raw Fourier embedding of a single temporal coordinate, before
    /// the optional compression layer.
    pub fn fourier_map(&self, ct: &[f64]) -> Result<Vec<f64>> {
        if ct.len() != self.spec.d_ct {
            return Err(Error::dim(format!(
                "expected {} components, got {}",
                self.spec.d_ct,
                ct.len()
            )));
        }
        let mut tape = Tape::new();
        let bound = self.params.bind_frozen(&mut tape);
        let v = self.fourier.forward(&mut tape, &bound, ct, 1, self.spec.d_ct)?;
        Ok(tape.value(v).to_vec())
    }

    /// Output width of each periodic-decoder layer, for sizing latent maps.
    pub fn period_layer_widths(&self) -> Vec<usize> {
        self.period
            .layers
            .iter()
            .map(|l| self.params.get(l.w).shape()[1])
            .collect()
    }

    pub fn scale_layer_widths(&self) -> Vec<usize> {
        self.scale
            .layers
            .iter()
            .map(|l| self.params.get(l.w).shape()[1])
            .collect()
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    /// Scale-factor-only path (the derivative penalty probes this).
    pub fn forward_scale(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        batch: &CoordBatch,
    ) -> Result<Var> {
        self.check_batch(batch)?;
        let (psi_fourier, psi_f, psi_t) = self.embed(tape, bound, batch)?;
        let scale_in = tape.concat(&[psi_fourier, psi_f, psi_t], 1)?;
        self.scale.forward(tape, bound, scale_in)
    }

    /// Scale path with the encoder embeddings detached, so a smoothness
    /// penalty on the scale regularizes the scale decoder without grinding
    /// down the shared Fourier dictionary the periodic decoder relies on.
    pub fn forward_scale_detached(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        batch: &CoordBatch,
    ) -> Result<Var> {
        self.check_batch(batch)?;
        let (psi_fourier, psi_f, psi_t) = self.embed(tape, bound, batch)?;
        let scale_in = tape.concat(&[psi_fourier, psi_f, psi_t], 1)?;
        let scale_in = tape.detach(scale_in);
        self.scale.forward(tape, bound, scale_in)
    }
}

// ── SIREN baseline ──────────────────────────────────────────────────

pub struct SirenModel {
    pub spec: SirenSpec,
    params: ParamSet,
    layers: Vec<Linear>,
}

impl SirenModel {
    pub fn new(spec: SirenSpec) -> Result<Self> {
        if spec.layers < 2 {
            return Err(Error::config("siren needs at least two layers"));
        }
        let mut params = ParamSet::new();
        let mut rng = Rng::new(spec.seed).derive("siren-init");
        let mut layers = Vec::with_capacity(spec.layers);
        for l in 0..spec.layers {
            let i = if l == 0 { spec.input_dim } else { spec.hidden };
            let o = if l == spec.layers - 1 { 1 } else { spec.hidden };
            let init = if l == 0 {
                Init::SirenFirst
            } else {
                Init::SirenHidden { omega: spec.omega0 }
            };
            layers.push(Linear::init(&mut params, &format!("siren.{l}"), i, o, init, &mut rng));
        }
        Ok(SirenModel { spec, params, layers })
    }

    pub fn forward(&self, tape: &mut Tape, bound: &BoundParams, batch: &CoordBatch) -> Result<Var> {
        let x = baseline_input(tape, batch);
        let mut h = x;
        for (l, layer) in self.layers.iter().enumerate() {
            h = layer.forward(tape, bound, h)?;
            if l + 1 < self.layers.len() {
                h = tape.scale(h, self.spec.omega0);
                h = tape.sin(h);
            }
        }
        Ok(h)
    }
}

// ── FFN baseline ────────────────────────────────────────────────────

pub struct FfnModel {
    pub spec: FfnSpec,
    params: ParamSet,
    freq: ParamId,
    mlp: ReluMlp,
}

impl FfnModel {
    pub fn new(spec: FfnSpec) -> Result<Self> {
        let mut params = ParamSet::new();
        let mut rng = Rng::new(spec.seed).derive("ffn-init");
        let data: Vec<f64> = (0..spec.input_dim * spec.n_freq)
            .map(|_| rng.normal() * spec.sigma)
            .collect();
        // Fixed random Gaussian frequency matrix.
        let freq = params.add(
            "ffn.freq",
            Tensor::from_vec(vec![spec.input_dim, spec.n_freq], data)
                .expect("finite init"),
            false,
        );
        let mlp = ReluMlp::init(
            &mut params,
            "ffn.mlp",
            2 * spec.n_freq,
            spec.hidden,
            1,
            spec.layers,
            &mut rng,
        );
        Ok(FfnModel { spec, params, freq, mlp })
    }

    pub fn forward(&self, tape: &mut Tape, bound: &BoundParams, batch: &CoordBatch) -> Result<Var> {
        let x = baseline_input(tape, batch);
        let proj = tape.matmul(x, bound.var(self.freq))?;
        let proj = tape.scale(proj, 2.0 * std::f64::consts::PI);
        let sin_part = tape.sin(proj);
        // cos(z) = sin(z + pi/2)
        let shifted = tape.add_const(proj, std::f64::consts::FRAC_PI_2);
        let cos_part = tape.sin(shifted);
        let feats = tape.concat(&[sin_part, cos_part], 1)?;
        self.mlp.forward(tape, bound, feats)
    }
}

/// Baselines consume the same spatio-temporal coordinates as the factored
/// model: temporal components concatenated with the one-hot feature vector.
fn baseline_input(tape: &mut Tape, batch: &CoordBatch) -> Var {
    let b = batch.len();
    let mut data = Vec::with_capacity(b * (batch.d_ct + batch.m));
    for row in 0..b {
        data.extend_from_slice(&batch.ct[row * batch.d_ct..(row + 1) * batch.d_ct]);
        data.extend_from_slice(&batch.cf[row * batch.m..(row + 1) * batch.m]);
    }
    tape.constant_from(vec![b, batch.d_ct + batch.m], data)
}

pub fn baseline_input_dim(d_ct: usize, m: usize) -> usize {
    d_ct + m
}

// ── Unified model ───────────────────────────────────────────────────

pub enum Model {
    Nert(NertModel),
    Siren(SirenModel),
    Ffn(FfnModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Nert(_) => ModelKind::Nert,
            Model::Siren(_) => ModelKind::Siren,
            Model::Ffn(_) => ModelKind::Ffn,
        }
    }

    pub fn spec(&self) -> ModelSpec {
        match self {
            Model::Nert(m) => ModelSpec::Nert(m.spec.clone()),
            Model::Siren(m) => ModelSpec::Siren(m.spec.clone()),
            Model::Ffn(m) => ModelSpec::Ffn(m.spec.clone()),
        }
    }

    pub fn params(&self) -> &ParamSet {
        match self {
            Model::Nert(m) => &m.params,
            Model::Siren(m) => &m.params,
            Model::Ffn(m) => &m.params,
        }
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        match self {
            Model::Nert(m) => &mut m.params,
            Model::Siren(m) => &mut m.params,
            Model::Ffn(m) => &mut m.params,
        }
    }

    /// Trainable scalar parameter count (frozen frequency banks excluded).
    pub fn param_count(&self) -> usize {
        self.params().trainable_count()
    }

    pub fn forward(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        batch: &CoordBatch,
    ) -> Result<ModelOutput> {
        match self {
            Model::Nert(m) => m.forward(tape, bound, batch),
            Model::Siren(m) => {
                let pred = m.forward(tape, bound, batch)?;
                Ok(ModelOutput { pred, period: None, scale: None })
            }
            Model::Ffn(m) => {
                let pred = m.forward(tape, bound, batch)?;
                Ok(ModelOutput { pred, period: None, scale: None })
            }
        }
    }

    /// Scale factor as a function of the coordinates; contract error for
    /// models without a factored decoder.
    pub fn forward_scale(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        batch: &CoordBatch,
    ) -> Result<Var> {
        match self {
            Model::Nert(m) => m.forward_scale(tape, bound, batch),
            _ => Err(Error::contract(
                "scale factor is only exposed by the factored model",
            )),
        }
    }

    /// Scale path with detached encoder embeddings (penalty evaluation).
    pub fn forward_scale_detached(
        &self,
        tape: &mut Tape,
        bound: &BoundParams,
        batch: &CoordBatch,
    ) -> Result<Var> {
        match self {
            Model::Nert(m) => m.forward_scale_detached(tape, bound, batch),
            _ => Err(Error::contract(
                "scale factor is only exposed by the factored model",
            )),
        }
    }

    /// Plain forward pass without gradient bookkeeping; returns predictions
    /// plus factors (empty vectors for baselines).
    pub fn predict(&self, batch: &CoordBatch) -> Result<Prediction> {
        let mut tape = Tape::new();
        let bound = self.params().bind_frozen(&mut tape);
        let out = self.forward(&mut tape, &bound, batch)?;
        Ok(Prediction {
            pred: tape.value(out.pred).to_vec(),
            period: out.period.map(|v| tape.value(v).to_vec()),
            scale: out.scale.map(|v| tape.value(v).to_vec()),
        })
    }
}

pub struct Prediction {
    pub pred: Vec<f64>,
    pub period: Option<Vec<f64>>,
    pub scale: Option<Vec<f64>>,
}

// ── Size matching ───────────────────────────────────────────────────

/// Pick the hidden width that brings a baseline's trainable parameter count
/// closest to `target`; the experiments keep all models within +-10% of each
/// other.
pub fn match_siren_width(spec: &SirenSpec, target: usize) -> SirenSpec {
    let mut best = spec.clone();
    let mut best_gap = usize::MAX;
    for hidden in 2..=512 {
        let candidate = SirenSpec { hidden, ..spec.clone() };
        let count = siren_param_count(&candidate);
        let gap = count.abs_diff(target);
        if gap < best_gap {
            best_gap = gap;
            best = candidate;
        }
    }
    best
}

pub fn match_ffn_width(spec: &FfnSpec, target: usize) -> FfnSpec {
    let mut best = spec.clone();
    let mut best_gap = usize::MAX;
    for hidden in 2..=512 {
        let candidate = FfnSpec { hidden, ..spec.clone() };
        let count = ffn_param_count(&candidate);
        let gap = count.abs_diff(target);
        if gap < best_gap {
            best_gap = gap;
            best = candidate;
        }
    }
    best
}

pub fn siren_param_count(spec: &SirenSpec) -> usize {
    let mut total = 0;
    for l in 0..spec.layers {
        let i = if l == 0 { spec.input_dim } else { spec.hidden };
        let o = if l == spec.layers - 1 { 1 } else { spec.hidden };
        total += i * o + o;
    }
    total
}

pub fn ffn_param_count(spec: &FfnSpec) -> usize {
    // The Gaussian frequency matrix is fixed, so it does not count.
    let mut total = 0;
    for l in 0..spec.layers {
        let i = if l == 0 { 2 * spec.n_freq } else { spec.hidden };
        let o = if l == spec.layers - 1 { 1 } else { spec.hidden };
        total += i * o + o;
    }
    total
}

// ── Checkpoints ─────────────────────────────────────────────────────

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointEntry {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
    trainable: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub spec: ModelSpec,
    entries: Vec<CheckpointEntry>,
}

impl Model {
    pub fn to_checkpoint(&self) -> Checkpoint {
        let entries = self
            .params()
            .iter()
            .map(|(name, tensor, trainable)| CheckpointEntry {
                name: name.to_string(),
                shape: tensor.shape().to_vec(),
                data: tensor.data().to_vec(),
                trainable,
            })
            .collect();
        Checkpoint { version: 1, spec: self.spec(), entries }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Model> {
        if ck.version != 1 {
            return Err(Error::config(format!("unsupported checkpoint version {}", ck.version)));
        }
        let mut model = ck.spec.build()?;
        {
            let params = model.params_mut();
            if params.len() != ck.entries.len() {
                return Err(Error::config(
                    "checkpoint parameter layout differs from spec",
                ));
            }
            for (idx, entry) in ck.entries.iter().enumerate() {
                let current = params.tensor(idx);
                if params.name(crate::adam::ParamId(idx)) != entry.name
                    || current.shape() != entry.shape.as_slice()
                {
                    return Err(Error::config(format!(
                        "checkpoint entry '{}' does not match the spec layout",
                        entry.name
                    )));
                }
                params.tensor_mut(idx).data_mut().copy_from_slice(&entry.data);
            }
        }
        Ok(model)
    }

    pub fn save_checkpoint(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string(&self.to_checkpoint())?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load_checkpoint(path: &std::path::Path) -> Result<Model> {
        let text = std::fs::read_to_string(path)?;
        let ck: Checkpoint = serde_json::from_str(&text)?;
        Model::from_checkpoint(&ck)
    }
}
