//! The domination energy, the quadratic Liapunov function, and the
//! compiler that turns the former into Hopfield weights and biases.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::Graph;
use crate::poly::Polynomial;

/// Sigmoid slope used when none is given.
pub const DEFAULT_LAMBDA: f64 = 50.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("component {index} = {value} lies outside the open interval (0, 1)")]
    Domain { index: usize, value: f64 },
    #[error("invalid penalty gains ({ga}, {gb})")]
    InvalidGain { ga: f64, gb: f64 },
    #[error("weight matrix is not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("weight matrix has nonzero diagonal entry at {0}")]
    NonzeroDiagonal(usize),
    #[error("sigmoid slope must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Penalty gains of the domination energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyConfig {
    ga: f64,
    gb: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self { ga: 1.0, gb: 1.0 }
    }
}

impl EnergyConfig {
    /// Both gains strictly positive.
    pub fn new(ga: f64, gb: f64) -> Result<Self, EnergyError> {
        if ga > 0.0 && gb > 0.0 && ga.is_finite() && gb.is_finite() {
            Ok(Self { ga, gb })
        } else {
            Err(EnergyError::InvalidGain { ga, gb })
        }
    }

    /// Gains that may switch one penalty off (zero), for isolating a term.
    pub fn ablation(ga: f64, gb: f64) -> Result<Self, EnergyError> {
        if ga >= 0.0 && gb >= 0.0 && ga.is_finite() && gb.is_finite() && ga + gb > 0.0 {
            Ok(Self { ga, gb })
        } else {
            Err(EnergyError::InvalidGain { ga, gb })
        }
    }

    pub fn ga(&self) -> f64 {
        self.ga
    }

    pub fn gb(&self) -> f64 {
        self.gb
    }
}

/// Adjacency access used by the energy kernels. Implemented by [`Graph`]
/// and by a mote's local view of its two-hop neighborhood.
pub trait Neighborhood {
    fn neighbors(&self, v: usize) -> &[usize];
}

impl Neighborhood for Graph {
    fn neighbors(&self, v: usize) -> &[usize] {
        Graph::neighbors(self, v)
    }
}

fn check_dim(expected: usize, got: usize) -> Result<(), EnergyError> {
    if expected == got {
        Ok(())
    } else {
        Err(EnergyError::Dimension { expected, got })
    }
}

/// Sum of active-neighbor outputs `s_v = sum_j e_vj z_j`.
#[inline]
pub fn neighbor_sum<N: Neighborhood + ?Sized>(nbhd: &N, v: usize, z: impl Fn(usize) -> f64) -> f64 {
    nbhd.neighbors(v).iter().map(|&j| z(j)).sum()
}

/// `dE/dz_i` given the neighbor sums. Shared by the centralized gradient
/// and the per-mote computation so both round identically.
#[inline]
pub fn mcds_partial_from_sums(
    cfg: &EnergyConfig,
    neighbors_of_i: &[usize],
    s_i: f64,
    s: impl Fn(usize) -> f64,
    z: impl Fn(usize) -> f64,
) -> f64 {
    let coupling: f64 = neighbors_of_i
        .iter()
        .map(|&j| (1.0 - s(j)) * (1.0 - z(j)))
        .sum();
    cfg.ga * s_i - 0.5 * cfg.gb * (1.0 - s_i) * (1.0 - s_i) - cfg.gb * coupling
}

/// `dE/dz_i` for a single neuron. Needs outputs within two hops of `i`.
pub fn mcds_partial<N: Neighborhood + ?Sized>(
    nbhd: &N,
    cfg: &EnergyConfig,
    i: usize,
    z: impl Fn(usize) -> f64 + Copy,
) -> f64 {
    let s_i = neighbor_sum(nbhd, i, z);
    mcds_partial_from_sums(cfg, nbhd.neighbors(i), s_i, |j| neighbor_sum(nbhd, j, z), z)
}

/// Domination energy
/// `1/2 ga sum_i sum_{j!=i} e_ij z_i z_j + 1/2 gb sum_i (1 - sum_{j!=i} e_ij z_j)^2 (1 - z_i)`.
pub fn mcds_energy(g: &Graph, z: &[f64], cfg: &EnergyConfig) -> Result<f64, EnergyError> {
    check_dim(g.n(), z.len())?;
    let mut independence = 0.0;
    let mut cover = 0.0;
    for i in 0..g.n() {
        let s = neighbor_sum(g, i, |j| z[j]);
        independence += z[i] * s;
        cover += (1.0 - s) * (1.0 - s) * (1.0 - z[i]);
    }
    Ok(0.5 * cfg.ga * independence + 0.5 * cfg.gb * cover)
}

/// Exact gradient of [`mcds_energy`].
pub fn mcds_energy_gradient(
    g: &Graph,
    z: &[f64],
    cfg: &EnergyConfig,
) -> Result<Vec<f64>, EnergyError> {
    check_dim(g.n(), z.len())?;
    let sums: Vec<f64> = (0..g.n()).map(|v| neighbor_sum(g, v, |j| z[j])).collect();
    Ok((0..g.n())
        .map(|i| mcds_partial_from_sums(cfg, g.neighbors(i), sums[i], |j| sums[j], |j| z[j]))
        .collect())
}

/// Symmetric zero-diagonal weights, biases and sigmoid slope.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfieldParams {
    k: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    lambda: f64,
}

impl HopfieldParams {
    /// `weights` is row-major `k x k`.
    pub fn new(weights: Vec<f64>, bias: Vec<f64>, lambda: f64) -> Result<Self, EnergyError> {
        let k = bias.len();
        check_dim(k * k, weights.len())?;
        for i in 0..k {
            if weights[i * k + i] != 0.0 {
                return Err(EnergyError::NonzeroDiagonal(i));
            }
            for j in i + 1..k {
                if weights[i * k + j] != weights[j * k + i] {
                    return Err(EnergyError::Asymmetric { i, j });
                }
            }
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(EnergyError::InvalidLambda(lambda));
        }
        Ok(Self {
            k,
            weights,
            bias,
            lambda,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], bias: Vec<f64>, lambda: f64) -> Result<Self, EnergyError> {
        let k = bias.len();
        check_dim(k, rows.len())?;
        let mut flat = Vec::with_capacity(k * k);
        for row in rows {
            check_dim(k, row.len())?;
            flat.extend_from_slice(row);
        }
        Self::new(flat, bias, lambda)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.k..(i + 1) * self.k]
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self, EnergyError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(EnergyError::InvalidLambda(lambda));
        }
        self.lambda = lambda;
        Ok(self)
    }

    /// Net input `sum_j w_ij z_j + b_i`, accumulated in ascending `j`.
    #[inline]
    pub fn local_field(&self, i: usize, z: &[f64]) -> f64 {
        let dot: f64 = self.row(i).iter().zip(z).map(|(w, v)| w * v).sum();
        dot + self.bias[i]
    }

    /// Number of nonzero off-diagonal entries.
    pub fn nonzero_count(&self) -> usize {
        self.weights.iter().filter(|&&w| w != 0.0).count()
    }

    /// `-1/2 z^T W z - b^T z`: the Liapunov value without the integral term,
    /// defined on all of `R^K` (binary states included).
    pub fn quadratic_form(&self, z: &[f64]) -> Result<f64, EnergyError> {
        check_dim(self.k, z.len())?;
        let mut pair = 0.0;
        let mut linear = 0.0;
        for i in 0..self.k {
            let dot: f64 = self.row(i).iter().zip(z).map(|(w, v)| w * v).sum();
            pair += z[i] * dot;
            linear += self.bias[i] * z[i];
        }
        Ok(-0.5 * pair - linear)
    }

    /// Flat text: `K <k> lambda <l> ga <ga|none> gb <gb|none>`, then
    /// `b <b_0> ... <b_k-1>`, then one `w i j value` line per nonzero
    /// upper-triangle entry.
    pub fn to_text(&self, gains: Option<&EnergyConfig>) -> String {
        let (ga, gb) = match gains {
            Some(c) => (c.ga.to_string(), c.gb.to_string()),
            None => ("none".into(), "none".into()),
        };
        let mut out = format!("K {} lambda {} ga {} gb {}\nb", self.k, self.lambda, ga, gb);
        for b in &self.bias {
            let _ = write!(out, " {b}");
        }
        out.push('\n');
        for i in 0..self.k {
            for j in i + 1..self.k {
                let w = self.weight(i, j);
                if w != 0.0 {
                    let _ = writeln!(out, "w {i} {j} {w}");
                }
            }
        }
        out
    }

    /// Parses [`HopfieldParams::to_text`] output.
    pub fn parse_text(text: &str) -> Result<(Self, Option<EnergyConfig>), EnergyError> {
        let err = |line: usize, message: String| EnergyError::Parse { line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let num = |line: usize, s: &str| {
            s.parse::<f64>()
                .map_err(|e| err(line, format!("bad number `{s}`: {e}")))
        };

        let (hl, header) = lines
            .next()
            .ok_or_else(|| err(1, "missing header".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let ["K", k, "lambda", lambda, "ga", ga, "gb", gb] = h.as_slice() else {
            return Err(err(hl, format!("malformed header `{header}`")));
        };
        let k: usize = k.parse().map_err(|e| err(hl, format!("bad K: {e}")))?;
        let lambda = num(hl, lambda)?;
        let gains = match (*ga, *gb) {
            ("none", "none") => None,
            (a, b) => Some(EnergyConfig::ablation(num(hl, a)?, num(hl, b)?)?),
        };

        let (bl, bias_line) = lines
            .next()
            .ok_or_else(|| err(hl + 1, "missing bias line".into()))?;
        let mut fields = bias_line.split_whitespace();
        if fields.next() != Some("b") {
            return Err(err(bl, "expected `b` line".into()));
        }
        let bias = fields.map(|s| num(bl, s)).collect::<Result<Vec<_>, _>>()?;
        check_dim(k, bias.len())?;

        let mut weights = vec![0.0; k * k];
        for (line, content) in lines {
            let f: Vec<&str> = content.split_whitespace().collect();
            let ["w", i, j, w] = f.as_slice() else {
                return Err(err(
                    line,
                    format!("expected `w i j value`, got `{content}`"),
                ));
            };
            let idx = |s: &str| match s.parse::<usize>() {
                Ok(v) if v < k => Ok(v),
                _ => Err(err(line, format!("bad neuron index `{s}`"))),
            };
            let (i, j, w) = (idx(i)?, idx(j)?, num(line, w)?);
            weights[i * k + j] = w;
            weights[j * k + i] = w;
        }
        Ok((Self::new(weights, bias, lambda)?, gains))
    }
}

/// Integral term of the Liapunov function: `int_{1/2}^{z} logit(s) ds`,
/// which is zero at the sigmoid midpoint.
pub fn logit_integral(z: f64) -> f64 {
    z * z.ln() + (1.0 - z) * (1.0 - z).ln() + std::f64::consts::LN_2
}

/// [`logit_integral`] extended continuously to the closed interval
/// (`ln 2` at both endpoints).
pub fn logit_integral_closed(z: f64) -> f64 {
    let xlogx = |x: f64| if x <= 0.0 { 0.0 } else { x * x.ln() };
    xlogx(z) + xlogx(1.0 - z) + std::f64::consts::LN_2
}

/// Hopfield Liapunov function
/// `-1/2 sum w_ij z_i z_j + (1/lambda) sum int f^-1 - sum b_i z_i`.
pub fn quadratic_liapunov(p: &HopfieldParams, z: &[f64]) -> Result<f64, EnergyError> {
    check_dim(p.k, z.len())?;
    if let Some((index, &value)) = z.iter().enumerate().find(|(_, &v)| !(v > 0.0 && v < 1.0)) {
        return Err(EnergyError::Domain { index, value });
    }
    let integral: f64 = z.iter().map(|&v| logit_integral(v)).sum();
    Ok(p.quadratic_form(z)? + integral / p.lambda)
}

/// The energy a compiled problem descends exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactEnergy {
    /// The quadratic form of the compiled weights is the whole energy.
    Quadratic,
    /// The domination energy on `graph`.
    Mcds { graph: Graph, cfg: EnergyConfig },
}

/// Hopfield parameters matched to a problem energy, plus what the quadratic
/// form cannot hold.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledProblem {
    params: HopfieldParams,
    residual: Polynomial,
    residual_order: usize,
    exact: ExactEnergy,
}

impl CompiledProblem {
    /// A problem whose energy is the quadratic form of `params`.
    pub fn from_params(params: HopfieldParams) -> Self {
        Self {
            params,
            residual: Polynomial::zero(),
            residual_order: 0,
            exact: ExactEnergy::Quadratic,
        }
    }

    pub fn params(&self) -> &HopfieldParams {
        &self.params
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self, EnergyError> {
        self.params = self.params.with_lambda(lambda)?;
        Ok(self)
    }

    /// Terms left over after matching: the constant, any `z_i^2` terms and
    /// all cubic monomials.
    pub fn residual(&self) -> &Polynomial {
        &self.residual
    }

    /// Highest non-constant degree among the residual terms.
    pub fn residual_order(&self) -> usize {
        self.residual_order
    }

    pub fn exact(&self) -> &ExactEnergy {
        &self.exact
    }

    pub fn graph(&self) -> Option<&Graph> {
        match &self.exact {
            ExactEnergy::Mcds { graph, .. } => Some(graph),
            ExactEnergy::Quadratic => None,
        }
    }

    /// Same weights and biases, but the exact energy is replaced by the
    /// quadratic truncation.
    pub fn truncated(&self) -> Self {
        Self::from_params(self.params.clone())
    }

    /// Problem energy at `z`.
    pub fn energy(&self, z: &[f64]) -> Result<f64, EnergyError> {
        match &self.exact {
            ExactEnergy::Quadratic => self.params.quadratic_form(z),
            ExactEnergy::Mcds { graph, cfg } => mcds_energy(graph, z, cfg),
        }
    }

    /// Exact gradient of [`CompiledProblem::energy`].
    pub fn gradient(&self, z: &[f64]) -> Result<Vec<f64>, EnergyError> {
        match &self.exact {
            ExactEnergy::Quadratic => {
                check_dim(self.k(), z.len())?;
                Ok((0..self.k())
                    .map(|i| -self.params.local_field(i, z))
                    .collect())
            }
            ExactEnergy::Mcds { graph, cfg } => mcds_energy_gradient(graph, z, cfg),
        }
    }

    /// Single component of [`CompiledProblem::gradient`]; bit-identical to
    /// the corresponding entry of the full vector.
    pub fn partial(&self, i: usize, z: &[f64]) -> f64 {
        match &self.exact {
            ExactEnergy::Quadratic => -self.params.local_field(i, z),
            ExactEnergy::Mcds { graph, cfg } => mcds_partial(graph, cfg, i, |j| z[j]),
        }
    }

    /// Quadratic form plus residual; equals [`CompiledProblem::energy`] up
    /// to rounding.
    pub fn reconstructed_energy(&self, z: &[f64]) -> Result<f64, EnergyError> {
        Ok(self.params.quadratic_form(z)? + self.residual.eval(z))
    }
}

/// Domination energy as an explicit polynomial in the outputs.
pub fn mcds_polynomial(g: &Graph, cfg: &EnergyConfig) -> Polynomial {
    let mut energy = Polynomial::zero();
    for i in 0..g.n() {
        for &j in g.neighbors(i) {
            energy.add_term(vec![i, j], 0.5 * cfg.ga);
        }
    }
    if cfg.gb != 0.0 {
        for i in 0..g.n() {
            let uncovered = Polynomial::linear(1.0, g.neighbors(i).iter().map(|&j| (j, -1.0)));
            let inactive = Polynomial::linear(1.0, [(i, -1.0)]);
            energy.add(
                &uncovered
                    .mul(&uncovered)
                    .mul(&inactive)
                    .scaled(0.5 * cfg.gb),
            );
        }
    }
    energy
}

/// Expands the domination energy and matches its monomials against
/// `-1/2 sum w_ij z_i z_j - sum b_i z_i`. Off-diagonal quadratic terms give
/// the weights, linear terms give the biases; everything else lands in the
/// residual.
pub fn compile_mcds(g: &Graph, cfg: &EnergyConfig) -> CompiledProblem {
    let k = g.n();
    let mut weights = vec![0.0; k * k];
    let mut bias = vec![0.0; k];
    let mut residual = Polynomial::zero();
    for (m, c) in mcds_polynomial(g, cfg).terms() {
        match m.as_slice() {
            [i] => bias[*i] = -c,
            [i, j] if i != j => {
                weights[i * k + j] = -c;
                weights[j * k + i] = -c;
            }
            _ => residual.add_term(m.clone(), c),
        }
    }
    let residual_order = residual.terms().map(|(m, _)| m.len()).max().unwrap_or(0);
    let params =
        HopfieldParams::new(weights, bias, DEFAULT_LAMBDA).expect("expansion is symmetric");
    CompiledProblem {
        params,
        residual,
        residual_order,
        exact: ExactEnergy::Mcds {
            graph: g.clone(),
            cfg: *cfg,
        },
    }
}
