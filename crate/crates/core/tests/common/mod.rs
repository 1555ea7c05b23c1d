//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use rand::Rng;

/// AP by direct counting: for each relevant position, rescan the prefix.
pub fn brute_force_ap(relevance: &[bool]) -> Option<f64> {
    let total = relevance.iter().filter(|&&r| r).count();
    if total == 0 {
        return None;
    }
    let mut sum = 0.0;
    for k in 0..relevance.len() {
        if relevance[k] {
            let hits = relevance[..=k].iter().filter(|&&r| r).count();
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    Some(sum / total as f64)
}

/// Exhaustive threshold sweep using F1 = 2PR / (P + R).
/// Returns (threshold, f1, precision, recall).
pub fn brute_force_best_f1(scores: &[f64], labels: &[bool]) -> Option<(f64, f64, f64, f64)> {
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return None;
    }
    let mut candidates: Vec<f64> = scores.to_vec();
    candidates.push(f64::INFINITY);
    candidates.sort_by(|a, b| b.total_cmp(a));
    candidates.dedup();
    let mut best = (f64::INFINITY, 0.0, 0.0, 0.0);
    for &theta in &candidates {
        let mut tp = 0;
        let mut fp = 0;
        for (s, l) in scores.iter().zip(labels) {
            if *s >= theta {
                if *l {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
        }
        if tp == 0 {
            continue;
        }
        let p = tp as f64 / (tp + fp) as f64;
        let r = tp as f64 / positives as f64;
        let f1 = 2.0 * p * r / (p + r);
        // candidates descend, so only a clear improvement moves to a lower θ
        if f1 > best.1 + 1e-12 {
            best = (theta, f1, p, r);
        }
    }
    Some(best)
}

pub fn augmented(x: &[f32]) -> Vec<f64> {
    x.iter().map(|&v| f64::from(v)).chain(std::iter::once(1.0)).collect()
}

pub fn primal(w: &[f64], xs: &[Vec<f64>], y: &[f64], c: f64) -> f64 {
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = xs
        .iter()
        .zip(y)
        .map(|(x, yi)| {
            let m: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum();
            (1.0 - yi * m).max(0.0)
        })
        .sum();
    reg + c * loss
}

pub struct OracleSolution {
    pub w: Vec<f64>,
    pub primal: f64,
    /// Dual objective in maximization form; a certified lower bound on the optimum.
    pub dual_lower_bound: f64,
}

/// Accelerated projected gradient on the box-constrained dual
/// `max Σα − ½ αᵀQα, 0 ≤ α ≤ C`, run until the duality gap certifies
/// `rel_gap` relative accuracy of the primal value.
pub fn svm_dual_oracle(x: &[Vec<f32>], y: &[f64], c: f64, rel_gap: f64) -> OracleSolution {
    let n = x.len();
    let xs: Vec<Vec<f64>> = x.iter().map(|r| augmented(r)).collect();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| y[i] * y[j] * xs[i].iter().zip(&xs[j]).map(|(a, b)| a * b).sum::<f64>())
                .collect()
        })
        .collect();
    // power iteration for the Lipschitz constant
    let mut v = vec![1.0; n];
    let mut lip = 0.0;
    for _ in 0..500 {
        let qv: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q[i][j] * v[j]).sum()).collect();
        let norm = qv.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        lip = norm / v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v = qv.iter().map(|a| a / norm).collect();
    }
    let step = 1.0 / (lip * 1.05 + 1e-12);

    let w_of = |alpha: &[f64]| -> Vec<f64> {
        let d = xs[0].len();
        let mut w = vec![0.0; d];
        for i in 0..n {
            for k in 0..d {
                w[k] += alpha[i] * y[i] * xs[i][k];
            }
        }
        w
    };
    let dual_max = |alpha: &[f64], w: &[f64]| -> f64 {
        alpha.iter().sum::<f64>() - 0.5 * w.iter().map(|a| a * a).sum::<f64>()
    };

    let mut alpha = vec![0.0; n];
    let mut prev = alpha.clone();
    let mut t = 1.0f64;
    let mut best_dual = f64::NEG_INFINITY;
    let mut best = OracleSolution {
        w: w_of(&alpha),
        primal: f64::INFINITY,
        dual_lower_bound: f64::NEG_INFINITY,
    };
    for iter in 0..300_000 {
        if iter % 50 == 0 {
            let w = w_of(&alpha);
            let p = primal(&w, &xs, y, c);
            let d = dual_max(&alpha, &w);
            best_dual = best_dual.max(d);
            if p < best.primal {
                best = OracleSolution {
                    w,
                    primal: p,
                    dual_lower_bound: best_dual,
                };
            }
            best.dual_lower_bound = best_dual;
            if best.primal - best_dual <= rel_gap * best.primal.abs().max(1e-300) {
                break;
            }
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let beta = (t - 1.0) / t_next;
        let z: Vec<f64> = (0..n).map(|i| alpha[i] + beta * (alpha[i] - prev[i])).collect();
        let grad: Vec<f64> = (0..n)
            .map(|i| 1.0 - (0..n).map(|j| q[i][j] * z[j]).sum::<f64>())
            .collect();
        let next: Vec<f64> = (0..n).map(|i| (z[i] + step * grad[i]).clamp(0.0, c)).collect();
        let w_next = w_of(&next);
        let d_next = dual_max(&next, &w_next);
        let w_cur = w_of(&alpha);
        // adaptive restart when the objective gets worse
        if d_next < dual_max(&alpha, &w_cur) {
            t = 1.0;
            prev = alpha.clone();
            continue;
        }
        prev = std::mem::replace(&mut alpha, next);
        t = t_next;
    }

    // Guess the margin classes from the approximate solution and solve the
    // resulting equality-constrained problem exactly.
    for delta in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8] {
        if let Some((w, alpha, w_alpha)) = polish(&best.w, &xs, y, c, delta) {
            let p = primal(&w, &xs, y, c);
            let d = dual_max(&alpha, &w_alpha);
            if d > best.dual_lower_bound {
                best.dual_lower_bound = d;
            }
            if p < best.primal {
                best.w = w;
                best.primal = p;
            }
        }
    }
    best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// With `L` = margin < 1 − δ and `E` = |margin − 1| ≤ δ, the optimum is
/// `w = C Σ_L y x + Σ_E λ y x` with unit margins on `E`. Returns that `w`,
/// a dual point in the box and the dual point's own weight vector.
#[allow(clippy::needless_range_loop)]
fn polish(
    w0: &[f64],
    xs: &[Vec<f64>],
    y: &[f64],
    c: f64,
    delta: f64,
) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = xs.len();
    let d = w0.len();
    let margins: Vec<f64> = (0..n).map(|i| y[i] * dot(&xs[i], w0)).collect();
    let mut alpha = vec![0.0; n];
    let mut w_l = vec![0.0; d];
    let mut e = Vec::new();
    for i in 0..n {
        if (margins[i] - 1.0).abs() <= delta {
            e.push(i);
        } else if margins[i] < 1.0 {
            alpha[i] = c;
            for k in 0..d {
                w_l[k] += c * y[i] * xs[i][k];
            }
        }
    }
    let a: Vec<Vec<f64>> = e.iter().map(|&i| xs[i].iter().map(|v| y[i] * v).collect()).collect();
    let m = e.len();
    // (A Aᵀ) λ = 1 − A w_L by Gaussian elimination with full pivoting
    let mut g: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row: Vec<f64> = (0..m).map(|j| dot(&a[i], &a[j])).collect();
            row.push(1.0 - dot(&a[i], &w_l));
            row
        })
        .collect();
    let mut cols: Vec<usize> = (0..m).collect();
    let mut rank = 0;
    let scale = g.iter().flat_map(|r| r[..m].iter()).fold(0.0f64, |s, v| s.max(v.abs()));
    for r in 0..m {
        let mut piv = (r, r, 0.0);
        for i in r..m {
            for j in r..m {
                if g[i][j].abs() > piv.2 {
                    piv = (i, j, g[i][j].abs());
                }
            }
        }
        if piv.2 <= 1e-12 * scale.max(1e-300) {
            break;
        }
        g.swap(r, piv.0);
        for row in g.iter_mut() {
            row.swap(r, piv.1);
        }
        cols.swap(r, piv.1);
        for i in 0..m {
            if i != r {
                let f = g[i][r] / g[r][r];
                if f != 0.0 {
                    for j in r..=m {
                        g[i][j] -= f * g[r][j];
                    }
                }
            }
        }
        rank += 1;
    }
    // inconsistent residual rows mean the class guess is wrong
    if (rank..m).any(|i| g[i][m].abs() > 1e-9) {
        return None;
    }
    let mut lambda = vec![0.0; m];
    for r in 0..rank {
        lambda[cols[r]] = g[r][m] / g[r][r];
    }
    let mut w = w_l.clone();
    for (k, row) in a.iter().enumerate() {
        for j in 0..d {
            w[j] += lambda[k] * row[j];
        }
    }
    if lambda.iter().any(|&l| !(0.0..=c).contains(&l)) {
        // degenerate margin set: look for multipliers in the box that
        // reproduce the same w (projected gradient on ‖Aᵀλ − v‖²)
        let v: Vec<f64> = (0..d).map(|j| w[j] - w_l[j]).collect();
        let lip: f64 = a.iter().map(|r| dot(r, r)).sum::<f64>().max(1e-300);
        let mut lam: Vec<f64> = lambda.iter().map(|l| l.clamp(0.0, c)).collect();
        for _ in 0..200_000 {
            let mut resid = v.iter().map(|x| -x).collect::<Vec<f64>>();
            for (k, row) in a.iter().enumerate() {
                for j in 0..d {
                    resid[j] += lam[k] * row[j];
                }
            }
            if dot(&resid, &resid).sqrt() <= 1e-15 * (1.0 + dot(&v, &v).sqrt()) {
                break;
            }
            for (k, row) in a.iter().enumerate() {
                lam[k] = (lam[k] - dot(row, &resid) / lip).clamp(0.0, c);
            }
        }
        lambda = lam;
    }
    for (k, &i) in e.iter().enumerate() {
        alpha[i] = lambda[k];
    }
    // the lower bound must use the dual point's own w
    let mut w_alpha = vec![0.0; d];
    for i in 0..n {
        for j in 0..d {
            w_alpha[j] += alpha[i] * y[i] * xs[i][j];
        }
    }
    Some((w, alpha, w_alpha))
}

/// Separable problem: labels from a random hyperplane, points too close to
/// it are discarded.
pub fn separable_problem(rng: &mut impl Rng, n: usize, dim: usize) -> (Vec<Vec<f32>>, Vec<f64>) {
    loop {
        let raw: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let len = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len < 1e-3 {
            continue;
        }
        // unit normal, so the rejection band below always leaves room
        let normal: Vec<f64> = raw.iter().map(|v| v / len).collect();
        let offset: f64 = rng.gen_range(-0.3..0.3);
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        while xs.len() < n {
            let x: Vec<f32> = (0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
            let m: f64 = x.iter().zip(&normal).map(|(a, b)| f64::from(*a) * b).sum::<f64>() + offset;
            if m.abs() < 0.1 {
                continue;
            }
            xs.push(x);
            ys.push(m.signum());
        }
        if ys.iter().any(|&v| v > 0.0) && ys.iter().any(|&v| v < 0.0) {
            return (xs, ys);
        }
    }
}
