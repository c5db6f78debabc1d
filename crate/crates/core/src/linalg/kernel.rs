//! Allocation-free row-major kernels for the lattice and trajectory hot paths.

use super::matrix::{C64, ZERO};

/// `out (+)= A X A*` for `d x d` row-major slices; `tmp` holds `A X`.
#[inline]
pub fn sandwich(a: &[C64], a_adj: &[C64], x: &[C64], tmp: &mut [C64], out: &mut [C64], d: usize, accumulate: bool) {
    if d == 2 {
        sandwich2(a, a_adj, x, out, accumulate);
        return;
    }
    for i in 0..d {
        for j in 0..d {
            let mut s = ZERO;
            for k in 0..d {
                s += a[i * d + k] * x[k * d + j];
            }
            tmp[i * d + j] = s;
        }
    }
    for i in 0..d {
        for j in 0..d {
            let mut s = ZERO;
            for k in 0..d {
                s += tmp[i * d + k] * a_adj[k * d + j];
            }
            if accumulate {
                out[i * d + j] += s;
            } else {
                out[i * d + j] = s;
            }
        }
    }
}

#[inline]
fn sandwich2(a: &[C64], a_adj: &[C64], x: &[C64], out: &mut [C64], accumulate: bool) {
    let (a, b, x, o) = (&a[..4], &a_adj[..4], &x[..4], &mut out[..4]);
    let t0 = a[0] * x[0] + a[1] * x[2];
    let t1 = a[0] * x[1] + a[1] * x[3];
    let t2 = a[2] * x[0] + a[3] * x[2];
    let t3 = a[2] * x[1] + a[3] * x[3];
    let r = [
        t0 * b[0] + t1 * b[2],
        t0 * b[1] + t1 * b[3],
        t2 * b[0] + t3 * b[2],
        t2 * b[1] + t3 * b[3],
    ];
    if accumulate {
        for (o, r) in o.iter_mut().zip(r) {
            *o += r;
        }
    } else {
        o.copy_from_slice(&r);
    }
}

/// Real part of the trace of a row-major block.
#[inline]
pub fn trace_re(x: &[C64], d: usize) -> f64 {
    (0..d).map(|i| x[i * d + i].re).sum()
}

/// `Re Tr(A X)` without forming the product.
#[inline]
pub fn trace_product_re(a: &[C64], x: &[C64], d: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..d {
        for k in 0..d {
            let p = a[i * d + k] * x[k * d + i];
            s += p.re;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unrolled_two_by_two_matches_general_loop() {
        let a: Vec<C64> = (0..4).map(|k| C64::new(0.3 * k as f64 - 0.4, 0.1 * k as f64)).collect();
        let a_adj = vec![a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()];
        let x: Vec<C64> = (0..4).map(|k| C64::new(1.0 / (k + 1) as f64, -0.2 * k as f64)).collect();
        let mut fast = vec![ZERO; 4];
        sandwich2(&a, &a_adj, &x, &mut fast, false);
        let mut slow = vec![ZERO; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        slow[i * 2 + j] += a[i * 2 + k] * x[k * 2 + l] * a_adj[l * 2 + j];
                    }
                }
            }
        }
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f - s).norm() < 1e-15);
        }
    }
}
