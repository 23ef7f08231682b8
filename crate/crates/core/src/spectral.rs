//! Spectral diagnostics for update matrices.
//!
//! The consensus argument for the averaging dynamics rests on structural
//! facts about the per-state update matrix: rows summing to 1, irreducibility
//! (the support digraph is strongly connected), primitivity (some power is
//! entrywise positive), and a second-eigenvalue modulus strictly below 1.
//! This module checks each of those on concrete matrices.
//!
//! Eigenvalue magnitudes are *estimated* by power iteration: repeated
//! application of the matrix (after deflating the dominant direction, for the
//! second eigenvalue) drives a probe vector into the dominant invariant
//! subspace, and a small Krylov projection turns the iterates into a modulus
//! estimate that also handles complex conjugate pairs. Estimates report their
//! residual and whether they stabilized within the iteration budget.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::matrix::SquareMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("entry ({row}, {col}) is negative ({value}); nonnegative matrix required")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("matrix is not row-stochastic (deviation {deviation}); second-eigenvalue deflation needs row sums of 1")]
    NotRowStochastic { deviation: f64 },
}

// ---------------------------------------------------------------------------
// Structural checks
// ---------------------------------------------------------------------------

/// Checks that all entries are nonnegative and every row sums to 1, both
/// within `tol`. Returns the verdict together with the worst deviation seen
/// (largest row-sum error or negative excess).
pub fn is_row_stochastic(m: &SquareMatrix, tol: f64) -> (bool, f64) {
    let mut deviation: f64 = 0.0;
    for row in m.rows() {
        let sum: f64 = row.iter().sum();
        deviation = deviation.max((sum - 1.0).abs());
        for &v in row {
            if v < 0.0 {
                deviation = deviation.max(-v);
            }
        }
    }
    (deviation <= tol, deviation)
}

/// True when the support digraph (an edge `i -> j` wherever `m[i][j] > 0`)
/// is strongly connected. A 1-by-1 matrix is trivially irreducible.
pub fn is_irreducible(m: &SquareMatrix) -> bool {
    if m.n() == 1 {
        return true;
    }
    let support = Support::from_matrix(m);
    support.reaches_all_from_zero() && support.transpose().reaches_all_from_zero()
}

/// Outcome of the primitivity scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PrimitivityCheck {
    pub primitive: bool,
    /// Smallest power at which the matrix is entrywise positive, when one
    /// exists within the scan bound.
    pub witness_power: Option<usize>,
}

/// Scans powers of the support for entrywise positivity.
///
/// Positivity of a power of a nonnegative matrix is purely structural, so the
/// scan runs on the boolean support (no float underflow). Powers up to
/// `(n−1)² + 1` are examined — past that bound no new positivity can appear —
/// and the smallest positive power is reported as a witness. Matrices arising
/// from restrained averaging updates on strongly connected graphs carry
/// positive diagonals and hit a witness at or below `n`.
pub fn is_primitive(m: &SquareMatrix) -> Result<PrimitivityCheck, SpectralError> {
    let n = m.n();
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            if v < 0.0 {
                return Err(SpectralError::NegativeEntry { row: i, col: j, value: v });
            }
        }
    }
    Ok(primitivity_scan(&Support::from_matrix(m)))
}

fn primitivity_scan(support: &Support) -> PrimitivityCheck {
    let n = support.n;
    let bound = if n == 1 { 1 } else { (n - 1) * (n - 1) + 1 };
    let mut power = support.clone();
    for k in 1..=bound {
        if power.all_ones() {
            return PrimitivityCheck { primitive: true, witness_power: Some(k) };
        }
        if k < bound {
            power = power.mul(support);
        }
    }
    PrimitivityCheck { primitive: false, witness_power: None }
}

/// Boolean support of a matrix, rows stored as bitsets.
#[derive(Clone)]
struct Support {
    n: usize,
    blocks: usize,
    rows: Vec<Vec<u64>>,
}

impl Support {
    fn from_matrix(m: &SquareMatrix) -> Self {
        let n = m.n();
        let blocks = n.div_ceil(64);
        let mut rows = vec![vec![0u64; blocks]; n];
        for (i, row) in m.rows().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > 0.0 {
                    rows[i][j / 64] |= 1 << (j % 64);
                }
            }
        }
        Self { n, blocks, rows }
    }

    fn transpose(&self) -> Self {
        let mut t =
            Self { n: self.n, blocks: self.blocks, rows: vec![vec![0u64; self.blocks]; self.n] };
        for i in 0..self.n {
            for j in self.bits(i) {
                t.rows[j][i / 64] |= 1 << (i % 64);
            }
        }
        t
    }

    fn bits(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[i].iter().enumerate().flat_map(|(b, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(b * 64 + t)
                }
            })
        })
    }

    /// Boolean matrix product: row i of the result is the union of `other`'s
    /// rows indexed by row i's bits.
    fn mul(&self, other: &Self) -> Self {
        let mut out =
            Self { n: self.n, blocks: self.blocks, rows: vec![vec![0u64; self.blocks]; self.n] };
        for i in 0..self.n {
            let acc = &mut out.rows[i];
            for j in self.bits(i) {
                for (a, &b) in acc.iter_mut().zip(&other.rows[j]) {
                    *a |= b;
                }
            }
        }
        out
    }

    fn all_ones(&self) -> bool {
        let full_mask = |b: usize| -> u64 {
            if b + 1 < self.blocks || self.n % 64 == 0 {
                u64::MAX
            } else {
                (1u64 << (self.n % 64)) - 1
            }
        };
        self.rows.iter().all(|row| row.iter().enumerate().all(|(b, &w)| w == full_mask(b)))
    }

    fn reaches_all_from_zero(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for w in self.bits(v) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }
}

// ---------------------------------------------------------------------------
// Eigenvalue magnitude estimation
// ---------------------------------------------------------------------------

/// Iteration budget and stabilization tolerance for the power-iteration
/// estimators.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerIterationOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for PowerIterationOptions {
    fn default() -> Self {
        Self { max_iterations: 10_000, tolerance: 1e-10 }
    }
}

/// A magnitude estimate together with how trustworthy it is.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EigenEstimate {
    pub value: f64,
    /// Change of the estimate over the final refinement round.
    pub residual: f64,
    /// Whether the estimate stabilized within the iteration budget. On
    /// `false` the best estimate so far is still reported.
    pub converged: bool,
    /// Matrix applications spent.
    pub iterations: usize,
}

/// Estimates the spectral radius (dominant eigenvalue magnitude) of `m`.
pub fn spectral_radius_estimate(m: &SquareMatrix, options: &PowerIterationOptions) -> EigenEstimate {
    dominant_modulus(|v, out| apply_matrix(m, v, out), m.n(), options)
}

/// Estimates `max{|λ| : λ eigenvalue of m, λ ≠ dominant}` for a
/// row-stochastic matrix.
///
/// The dominant direction of a row-stochastic matrix is the consensus vector
/// `(1,...,1)` with eigenvalue 1. Power iteration on the transpose first
/// finds the dominant *left* vector `π`; deflating to `M − 1·πᵀ` replaces the
/// dominant eigenvalue by 0 while keeping the rest of the spectrum, and the
/// dominant magnitude of the deflated operator is then estimated on the
/// subspace complementary to consensus. For matrices whose remaining spectrum
/// still touches magnitude 1 (not primitive) the estimate comes out as 1,
/// which callers surface as "no contraction".
pub fn second_eigenvalue_modulus(
    m: &SquareMatrix,
    options: &PowerIterationOptions,
) -> Result<EigenEstimate, SpectralError> {
    let (stochastic, deviation) = is_row_stochastic(m, 1e-6);
    if !stochastic {
        return Err(SpectralError::NotRowStochastic { deviation });
    }
    let n = m.n();
    if n == 1 {
        // a 1-by-1 matrix has no second eigenvalue
        return Ok(EigenEstimate { value: 0.0, residual: 0.0, converged: true, iterations: 0 });
    }

    // Dominant left vector by power iteration on the transpose, normalized to
    // total mass 1. For primitive matrices this is the unique stationary
    // weighting; otherwise the deflation below still removes the consensus
    // direction exactly, which is all the estimate needs.
    let mt = m.transpose();
    let mut pi = vec![1.0 / n as f64; n];
    let mut pi_iterations = 0;
    let mut scratch = vec![0.0; n];
    for _ in 0..options.max_iterations.max(100) {
        apply_matrix(&mt, &pi, &mut scratch);
        let mass: f64 = scratch.iter().map(|v| v.abs()).sum();
        if mass == 0.0 {
            break;
        }
        for v in scratch.iter_mut() {
            *v /= mass;
        }
        pi_iterations += 1;
        let delta: f64 = scratch.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi.copy_from_slice(&scratch);
        if delta <= 1e-15 {
            break;
        }
    }

    // Deflated operator B·v = M·v − (π·v)·1, applied without forming B.
    let mut estimate = dominant_modulus(
        |v, out| {
            apply_matrix(m, v, out);
            let mass: f64 = pi.iter().zip(v).map(|(p, x)| p * x).sum();
            for o in out.iter_mut() {
                *o -= mass;
            }
        },
        n,
        options,
    );
    estimate.iterations += pi_iterations;
    Ok(estimate)
}

fn apply_matrix(m: &SquareMatrix, v: &[f64], out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(m.rows()) {
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

/// Power iteration with a small Krylov projection.
///
/// Each round builds a short orthonormal Krylov basis from the current probe
/// vector (Arnoldi with full reorthogonalization, truncating on breakdown),
/// projects the operator onto it, and takes the largest magnitude among the
/// projected eigenvalues — which captures complex conjugate pairs that plain
/// Rayleigh quotients miss. Between rounds the probe advances by power steps
/// so successive projections sample ever more dominant directions. Converged
/// when the estimate moves less than the tolerance over two consecutive
/// rounds; for operators of rank at most the projection size, a single round
/// is already exact.
fn dominant_modulus<F>(mut apply: F, n: usize, options: &PowerIterationOptions) -> EigenEstimate
where
    F: FnMut(&[f64], &mut [f64]),
{
    if n == 1 {
        let mut out = [0.0];
        apply(&[1.0], &mut out);
        return EigenEstimate { value: out[0].abs(), residual: 0.0, converged: true, iterations: 1 };
    }

    // Deterministic, agent-indexed probe start.
    let mut v: Vec<f64> = (0..n).map(|i| ((i + 1) as f64).sin().abs() + 0.1).collect();
    normalize(&mut v);

    let dim = n.min(4);
    let mut applications = 0usize;
    let mut previous: Option<f64> = None;
    let mut best = 0.0f64;
    let mut residual = f64::INFINITY;
    let mut stable_rounds = 0usize;
    let mut scratch = vec![0.0; n];

    while applications < options.max_iterations {
        // --- Krylov round -------------------------------------------------
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim);
        let mut h = vec![vec![0.0f64; dim]; dim]; // projected operator (upper Hessenberg)
        basis.push(v.clone());
        let mut width = 0usize;
        for k in 0..dim {
            apply(&basis[k], &mut scratch);
            applications += 1;
            let mut w = scratch.clone();
            // orthogonalize twice for stability
            for _ in 0..2 {
                for (b, row) in basis.iter().enumerate() {
                    let coeff: f64 = row.iter().zip(&w).map(|(a, b)| a * b).sum();
                    h[b][k] += coeff;
                    for (wi, bi) in w.iter_mut().zip(row) {
                        *wi -= coeff * bi;
                    }
                }
            }
            width = k + 1;
            let norm = normalize(&mut w);
            if norm <= 1e-13 {
                // Krylov space closed early: projection is exact on it.
                break;
            }
            if k + 1 < dim {
                h[k + 1][k] = norm;
                basis.push(w);
            }
        }

        let projected: Vec<Vec<f64>> =
            (0..width).map(|i| (0..width).map(|j| h[i][j]).collect()).collect();
        let estimate = small_eigenvalues(&projected)
            .into_iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);

        best = estimate;
        if let Some(prev) = previous {
            residual = (estimate - prev).abs();
            if residual <= options.tolerance * estimate.abs().max(1.0) {
                stable_rounds += 1;
                if stable_rounds >= 2 {
                    return EigenEstimate {
                        value: best,
                        residual,
                        converged: true,
                        iterations: applications,
                    };
                }
            } else {
                stable_rounds = 0;
            }
        }
        previous = Some(estimate);

        // --- advance the probe by power steps ------------------------------
        for _ in 0..4 {
            if applications >= options.max_iterations {
                break;
            }
            apply(&v, &mut scratch);
            applications += 1;
            let norm = normalize(&mut scratch);
            if norm <= 1e-300 {
                // operator annihilated the probe: dominant modulus on this
                // invariant subspace is 0
                return EigenEstimate {
                    value: best,
                    residual: 0.0,
                    converged: true,
                    iterations: applications,
                };
            }
            v.copy_from_slice(&scratch);
        }
    }

    EigenEstimate {
        value: best,
        residual: if residual.is_finite() { residual } else { f64::NAN },
        converged: false,
        iterations: applications,
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// All eigenvalues of a small dense matrix (dimension ≤ 4 in practice).
///
/// The characteristic polynomial is assembled from power-sum traces via
/// Newton's identities, then its roots are found by Durand–Kerner iteration —
/// robust at these sizes and free of external solver dependencies.
fn small_eigenvalues(m: &[Vec<f64>]) -> Vec<Complex64> {
    let k = m.len();
    if k == 0 {
        return Vec::new();
    }
    if k == 1 {
        return vec![Complex64::new(m[0][0], 0.0)];
    }

    // power sums p_r = tr(M^r) for r = 1..k
    let mut power = m.to_vec();
    let mut power_sums = vec![0.0f64; k + 1];
    power_sums[1] = trace(&power);
    for r in 2..=k {
        power = mat_mul(&power, m);
        power_sums[r] = trace(&power);
    }

    // Newton's identities: e_r = (1/r) Σ_{i=1..r} (−1)^{i−1} e_{r−i} p_i
    let mut elementary = vec![0.0f64; k + 1];
    elementary[0] = 1.0;
    for r in 1..=k {
        let mut acc = 0.0;
        for i in 1..=r {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * elementary[r - i] * power_sums[i];
        }
        elementary[r] = acc / r as f64;
    }

    // char poly: λ^k − e1 λ^{k−1} + e2 λ^{k−2} − ... ; coeffs[j] multiplies λ^j
    let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
    coeffs[k] = Complex64::new(1.0, 0.0);
    for r in 1..=k {
        let sign = if r % 2 == 1 { -1.0 } else { 1.0 };
        coeffs[k - r] = Complex64::new(sign * elementary[r], 0.0);
    }

    durand_kerner(&coeffs)
}

fn trace(m: &[Vec<f64>]) -> f64 {
    m.iter().enumerate().map(|(i, row)| row[i]).sum()
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = a.len();
    let mut out = vec![vec![0.0f64; k]; k];
    for i in 0..k {
        for l in 0..k {
            let v = a[i][l];
            if v != 0.0 {
                for j in 0..k {
                    out[i][j] += v * b[l][j];
                }
            }
        }
    }
    out
}

/// Durand–Kerner simultaneous root iteration on a monic polynomial given by
/// `coeffs[j] · λ^j` with `coeffs[deg] = 1`.
fn durand_kerner(coeffs: &[Complex64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };

    // spread initial guesses on a circle avoiding real-axis symmetry traps
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|i| seed.powu(i as u32 + 1)).collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() < 1e-300 {
                continue;
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            moved = moved.max(delta.norm());
        }
        if moved < 1e-14 {
            break;
        }
    }
    roots
}

// ---------------------------------------------------------------------------
// Combined report
// ---------------------------------------------------------------------------

/// Everything the spectral checks can say about one matrix, in one pass.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixReport {
    pub n: usize,
    pub row_stochastic: bool,
    /// Worst row-sum deviation (or negative excess) found.
    pub max_deviation: f64,
    pub irreducible: bool,
    pub primitive: bool,
    pub witness_power: Option<usize>,
    /// Spectral radius estimate.
    pub rho: f64,
    /// Second eigenvalue modulus; absent when the matrix is not
    /// row-stochastic (the deflation is only meaningful there).
    pub lambda2_modulus: Option<f64>,
    pub lambda2_residual: Option<f64>,
    pub lambda2_converged: Option<bool>,
    pub warnings: Vec<String>,
}

/// Runs every check on `m`, clamping tiny negative dust (entries in
/// `[−tol, 0)`) to zero first so numerically-noisy update matrices are judged
/// by their intent.
pub fn analyze_matrix(
    m: &SquareMatrix,
    tol: f64,
    options: &PowerIterationOptions,
) -> Result<MatrixReport, SpectralError> {
    let n = m.n();
    let mut cleaned = m.clone();
    for i in 0..n {
        for j in 0..n {
            let v = cleaned.get(i, j);
            if v < 0.0 {
                if v >= -tol {
                    cleaned.set(i, j, 0.0);
                } else {
                    return Err(SpectralError::NegativeEntry { row: i, col: j, value: v });
                }
            }
        }
    }

    let (row_stochastic, max_deviation) = is_row_stochastic(&cleaned, tol.max(1e-9));
    let irreducible = is_irreducible(&cleaned);
    let prim = is_primitive(&cleaned)?;
    let rho = spectral_radius_estimate(&cleaned, options);

    let mut warnings = Vec::new();
    if !rho.converged {
        warnings.push("spectral radius estimate did not stabilize within the iteration budget".to_string());
    }

    let (lambda2_modulus, lambda2_residual, lambda2_converged) = if row_stochastic {
        let est = second_eigenvalue_modulus(&cleaned, options)?;
        if !est.converged {
            warnings.push(
                "second eigenvalue estimate did not stabilize within the iteration budget".to_string(),
            );
        }
        if !prim.primitive {
            warnings.push(
                "matrix is not primitive; repeated averaging may oscillate instead of contracting"
                    .to_string(),
            );
        }
        (Some(est.value), Some(est.residual), Some(est.converged))
    } else {
        (None, None, None)
    };

    Ok(MatrixReport {
        n,
        row_stochastic,
        max_deviation,
        irreducible,
        primitive: prim.primitive,
        witness_power: prim.witness_power,
        rho: rho.value,
        lambda2_modulus,
        lambda2_residual,
        lambda2_converged,
        warnings,
    })
}
