//! The linear-algebra core on its own: a driven-damped qubit generator,
//! its stationary state, and the eigenvalues of that state.

use num_complex::Complex64;
use qheat::matrixcore::{eigh, kron, pauli, solve_nullspace_with_trace, CMatrix};

fn dissipator(op: &CMatrix, rate: f64) -> CMatrix {
    let id = CMatrix::identity(op.rows());
    let ad_a = &op.adjoint() * op;
    let term = &(&kron(op, &op.conj()) - &kron(&ad_a, &id).scale_real(0.5)) - &kron(&id, &ad_a.transpose()).scale_real(0.5);
    term.scale(Complex64::new(rate, 0.0))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let l = &dissipator(&pauli::lower(), 1.0) + &dissipator(&pauli::raise(), 0.25);
    let rho = solve_nullspace_with_trace(&l)?;
    println!("rho = {rho:?}");
    println!("trace = {}", rho.trace().re);
    println!("eigenvalues = {:?}", eigh(&rho.hermitian_part())?.eigenvalues);
    Ok(())
}
