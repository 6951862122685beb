use crate::matrix::{Element, Matrix};
use crate::problem::ProblemInstance;
use crate::spec::{Layout, Transpose};

/// Reference CPU GEMM: plain `(i, j, k)` triple loop, `k` ascending,
/// accumulating in the problem's precision.
pub fn reference_gemm<T: Element>(problem: &ProblemInstance<T>, layout: Layout) -> Matrix<T> {
    let n = problem.n;
    let a = problem.a.as_slice();
    let b = problem.b.as_slice();
    let mut c = problem.c_initial.clone();
    for i in 0..n {
        for j in 0..n {
            let mut acc = T::ZERO;
            for k in 0..n {
                let aik = match layout.trans_a {
                    Transpose::N => a[i * n + k],
                    Transpose::T => a[k * n + i],
                };
                let bkj = match layout.trans_b {
                    Transpose::N => b[k * n + j],
                    Transpose::T => b[j * n + k],
                };
                acc = acc + aik * bkj;
            }
            let cij = c.get(i, j);
            c.set(i, j, problem.alpha * acc + problem.beta * cij);
        }
    }
    c
}
