use super::SolveReport;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradients for a symmetric positive (semi)definite
/// operator, starting from zero. `project` is applied to every residual and
/// lets callers stay inside a subspace (the zero-mean one for Neumann
/// problems). Returns the iterate and whether the relative residual reached
/// `tol`.
pub(crate) fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    precond: impl Fn(&[f64], &mut [f64]),
    project: impl Fn(&mut [f64]),
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, SolveReport, bool) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return (x, SolveReport::default(), true);
    }
    let mut r = b.to_vec();
    project(&mut r);
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    project(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut report = SolveReport {
        iterations: 0,
        residual: dot(&r, &r).sqrt() / b_norm,
        mean_removed: 0.0,
    };
    while report.residual > tol && report.iterations < max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        project(&mut r);
        report.iterations += 1;
        report.residual = dot(&r, &r).sqrt() / b_norm;
        precond(&r, &mut z);
        project(&mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    let converged = report.residual <= tol;
    (x, report, converged)
}
