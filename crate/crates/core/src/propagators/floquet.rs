use crate::propagators::{degenerate_propagator, free_evolution};
use crate::su2::{Complex, Mat2, QubitState};

/// Eigen-decomposition of the one-period propagator of a periodically
/// kicked qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetResult {
    /// χ ∈ [0, π]; the eigenvalues are `e^{+iχ}` and `e^{−iχ}`.
    pub chi: f64,
    pub eigenvalues: [Complex; 2],
    /// Eigenvectors paired with `eigenvalues`, first nonzero component real
    /// and positive.
    pub eigenvectors: [QubitState; 2],
}

/// Kick at the start of the period, then free evolution for the period.
pub fn floquet_period_matrix(alpha: f64, gamma_t: f64) -> Mat2 {
    free_evolution(gamma_t) * degenerate_propagator(alpha)
}

pub fn floquet_eigenphases(alpha: f64, gamma_t: f64) -> FloquetResult {
    let m = floquet_period_matrix(alpha, gamma_t);
    let chi = (alpha.cos() * gamma_t.cos()).clamp(-1.0, 1.0).acos();
    let eigenvalues = [Complex::from_polar(1.0, chi), Complex::from_polar(1.0, -chi)];
    let eigenvectors = if m.m12.norm() < 1e-14 && m.m21.norm() < 1e-14 {
        // diagonal: match each eigenvalue to the closer diagonal entry
        let pick = |lam: Complex| {
            if (lam - m.m11).norm() <= (lam - m.m22).norm() {
                QubitState::ground()
            } else {
                QubitState::excited()
            }
        };
        let a = pick(eigenvalues[0]);
        let b = if (eigenvalues[0] - eigenvalues[1]).norm() < 1e-14 {
            if a == QubitState::ground() {
                QubitState::excited()
            } else {
                QubitState::ground()
            }
        } else {
            pick(eigenvalues[1])
        };
        [a, b]
    } else {
        eigenvalues.map(|lam| eigenvector(&m, lam))
    };
    FloquetResult { chi, eigenvalues, eigenvectors }
}

fn eigenvector(m: &Mat2, lam: Complex) -> QubitState {
    let a = QubitState::new(m.m12, lam - m.m11);
    let b = QubitState::new(lam - m.m22, m.m21);
    let v = if a.norm_sqr() >= b.norm_sqr() { a } else { b };
    fix_phase(v.normalized())
}

fn fix_phase(v: QubitState) -> QubitState {
    let lead = if v.a1.norm() > 1e-12 { v.a1 } else { v.a2 };
    let rot = lead.conj() / lead.norm();
    QubitState::new(v.a1 * rot, v.a2 * rot)
}
