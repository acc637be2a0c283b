use super::{evolution_coeffs, require_sorted, MomentTrajectory, QuadraticPotential};
use crate::error::{Error, Result};
use crate::io::write_csv;
use crate::mepacket::{ClassicalMEPacket, MEPacketParams};
use ode_solvers::{Dop853, OutputType, System, Vector2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::path::Path;

pub const MIN_SAMPLES: usize = 1000;

/// Samples per substream. Fixed, so results do not depend on the number of
/// worker threads.
const CHUNK: usize = 4096;

/// Classical flow the samples are carried by.
#[derive(Clone, Copy)]
pub enum Flow<'a> {
    /// Evolved exactly through the flow coefficients.
    Quadratic(QuadraticPotential<f64>),
    /// `q̇ = p/μ`, `ṗ = F(q)`, integrated by adaptive Dormand–Prince 8(5,3).
    General { mu: f64, force: &'a (dyn Fn(f64) -> f64 + Sync) },
}

impl std::fmt::Debug for Flow<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Flow::Quadratic(p) => f.debug_tuple("Quadratic").field(p).finish(),
            Flow::General { mu, .. } => f.debug_struct("General").field("mu", mu).finish_non_exhaustive(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StandardErrors {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub dq: Vec<f64>,
    pub dp: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McTrajectory {
    pub trajectory: MomentTrajectory<f64>,
    pub se: StandardErrors,
    pub n_samples: usize,
}

impl McTrajectory {
    /// Largest `|x − reference| / se` over the four curves; points with zero
    /// standard error compare exactly.
    pub fn max_z_score(&self, reference: &MomentTrajectory<f64>) -> Result<f64> {
        let t = &self.trajectory;
        if t.len() != reference.len() {
            return Err(Error::DimensionMismatch { expected: t.len(), got: reference.len() });
        }
        let mut z = 0.0_f64;
        for (a, b, s) in [
            (&t.q, &reference.q, &self.se.q),
            (&t.p, &reference.p, &self.se.p),
            (&t.dq, &reference.dq, &self.se.dq),
            (&t.dp, &reference.dp, &self.se.dp),
        ] {
            for i in 0..a.len() {
                let d = (a[i] - b[i]).abs();
                z = z.max(if s[i] > 0.0 { d / s[i] } else if d > 0.0 { f64::INFINITY } else { 0.0 });
            }
        }
        Ok(z)
    }

    /// Columns `t, Q, P, dQ, dP, seQ, seP, sedQ, sedP`.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let t = &self.trajectory;
        let rows: Vec<Vec<f64>> = (0..t.len())
            .map(|i| {
                vec![t.times[i], t.q[i], t.p[i], t.dq[i], t.dp[i], self.se.q[i], self.se.p[i], self.se.dq[i], self.se.dp[i]]
            })
            .collect();
        write_csv(path, &["t", "Q", "P", "dQ", "dP", "seQ", "seP", "sedQ", "sedP"], &rows)
    }
}

/// Count, mean and central sums of powers 2..4.
#[derive(Clone, Copy, Debug, Default)]
struct Moments4 {
    n: f64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments4 {
    fn from_slice(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        Self { n, mean, m2, m3, m4 }
    }

    /// Pairwise combination of central sums.
    fn merge(self, b: Self) -> Self {
        let a = self;
        if a.n == 0.0 {
            return b;
        }
        let n = a.n + b.n;
        let d = b.mean - a.mean;
        let (d2, na, nb) = (d * d, a.n, b.n);
        let mean = a.mean + d * nb / n;
        let m2 = a.m2 + b.m2 + d2 * na * nb / n;
        let m3 = a.m3 + b.m3 + d2 * d * na * nb * (na - nb) / (n * n) + 3.0 * d * (na * b.m2 - nb * a.m2) / n;
        let m4 = a.m4
            + b.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * b.m2 + nb * nb * a.m2) / (n * n)
            + 4.0 * d * (na * b.m3 - nb * a.m3) / n;
        Self { n, mean, m2, m3, m4 }
    }

    /// `(mean, std, se(mean), se(std))` with the unbiased variance.
    fn summary(&self) -> (f64, f64, f64, f64) {
        let n = self.n;
        let var = self.m2 / (n - 1.0);
        let sd = var.sqrt();
        let pop_var = self.m2 / n;
        let mu4 = self.m4 / n;
        let se_sd = if sd > 0.0 { ((mu4 - pop_var * pop_var).max(0.0) / n).sqrt() / (2.0 * sd) } else { 0.0 };
        (self.mean, sd, sd / n.sqrt(), se_sd)
    }
}

struct Newton<'a> {
    mu: f64,
    force: &'a (dyn Fn(f64) -> f64 + Sync),
}

impl System<f64, Vector2<f64>> for Newton<'_> {
    fn system(&self, _t: f64, y: &Vector2<f64>, dy: &mut Vector2<f64>) {
        dy[0] = y[1] / self.mu;
        dy[1] = (self.force)(y[0]);
    }
}

fn integrate(mu: f64, force: &(dyn Fn(f64) -> f64 + Sync), q: f64, p: f64, times: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(times.len());
    let mut y = Vector2::new(q, p);
    let mut t = 0.0;
    for &target in times {
        if target > t {
            let span = target - t;
            let newton = Newton { mu, force };
            let mut stepper =
                Dop853::from_param(newton, t, target, span, y, 1e-12, 1e-14, 0.9, 0.0, 0.333, 6.0, span, 0.0, 1_000_000, 1000, OutputType::Sparse);
            stepper.integrate().map_err(|e| Error::Integrator(e.to_string()))?;
            y = *stepper.y_out().last().ok_or_else(|| Error::Integrator("no output".into()))?;
            t = target;
        }
        out.push((y[0], y[1]));
    }
    Ok(out)
}

/// Sample moments of an ensemble drawn from the classical ME packet and
/// carried by `flow`. Substream `k` is ChaCha8 seeded with `seed` on stream
/// `k`; per-substream moments are merged in substream order, so output is
/// bitwise reproducible for a given seed.
pub fn mc_classical_oracle(
    params: &MEPacketParams<f64>,
    flow: &Flow<'_>,
    times: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<McTrajectory> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!("need at least {MIN_SAMPLES} samples, got {n_samples}")));
    }
    require_sorted(times)?;
    if let Flow::General { mu, .. } = flow {
        if !(*mu > 0.0) {
            return Err(Error::InvalidParameter("mass must be positive".into()));
        }
        if times.first().is_some_and(|&t| t < 0.0) {
            return Err(Error::InvalidParameter("integration runs forward from t = 0".into()));
        }
    }
    let packet = ClassicalMEPacket::new(*params)?;
    let coeffs: Vec<_> = match flow {
        Flow::Quadratic(pot) => times.iter().map(|&t| evolution_coeffs(pot, t)).collect(),
        Flow::General { .. } => Vec::new(),
    };
    let n_chunks = n_samples.div_ceil(CHUNK);
    let partial: Vec<Vec<(Moments4, Moments4)>> = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let count = CHUNK.min(n_samples - k * CHUNK);
            let pts = packet.sample(&mut rng, count);
            let mut qs = vec![vec![0.0; count]; times.len()];
            let mut ps = vec![vec![0.0; count]; times.len()];
            for (i, &(q0, p0)) in pts.iter().enumerate() {
                match flow {
                    Flow::Quadratic(_) => {
                        for (j, c) in coeffs.iter().enumerate() {
                            let (q, p) = c.apply(q0, p0);
                            qs[j][i] = q;
                            ps[j][i] = p;
                        }
                    }
                    Flow::General { mu, force } => {
                        for (j, (q, p)) in integrate(*mu, *force, q0, p0, times)?.into_iter().enumerate() {
                            qs[j][i] = q;
                            ps[j][i] = p;
                        }
                    }
                }
            }
            Ok(qs.iter().zip(&ps).map(|(q, p)| (Moments4::from_slice(q), Moments4::from_slice(p))).collect())
        })
        .collect::<Result<_>>()?;
    let mut acc = vec![(Moments4::default(), Moments4::default()); times.len()];
    for chunk in partial {
        for (a, c) in acc.iter_mut().zip(chunk) {
            *a = (a.0.merge(c.0), a.1.merge(c.1));
        }
    }
    let mut traj = MomentTrajectory::with_capacity(times.len());
    let mut se = StandardErrors { q: vec![], p: vec![], dq: vec![], dp: vec![] };
    for (&t, (mq, mp)) in times.iter().zip(&acc) {
        let (q, dq, se_q, se_dq) = mq.summary();
        let (p, dp, se_p, se_dp) = mp.summary();
        traj.push(t, q, p, dq, dp);
        se.q.push(se_q);
        se.p.push(se_p);
        se.dq.push(se_dq);
        se.dp.push(se_dp);
    }
    Ok(McTrajectory { trajectory: traj, se, n_samples })
}
