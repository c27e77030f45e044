//! Adaptive Gauss–Kronrod (7/15) quadrature along straight complex segments.

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the odd-indexed Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point panel on `[a, b]`; returns the Kronrod value and the
/// Kronrod–Gauss difference.
fn panel<F: Fn(Complex64) -> Complex64>(f: &F, a: Complex64, b: Complex64) -> (Complex64, f64) {
    let mid = (a + b) * 0.5;
    let half = (b - a) * 0.5;
    let fc = f(mid);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(mid - dx) + f(mid + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * half, ((kron - gauss) * half).norm())
}

/// Panel budget; a segment that runs into a singularity stops here.
const MAX_PANELS: usize = 4096;

struct Panel {
    lo: Complex64,
    hi: Complex64,
    val: Complex64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err).is_eq()
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// `∫_a^b f(t) dt` along the segment from `a` to `b`, to absolute tolerance
/// `tol`. The panel with the largest error estimate is bisected until the
/// estimates sum below `tol` or the panel budget runs out.
pub fn integrate<F: Fn(Complex64) -> Complex64>(f: F, a: Complex64, b: Complex64, tol: f64) -> Complex64 {
    if a == b {
        return Complex64::new(0.0, 0.0);
    }
    let make = |lo: Complex64, hi: Complex64| {
        let (val, err) = panel(&f, lo, hi);
        Panel { lo, hi, val, err }
    };
    let first = make(a, b);
    let mut total = first.err;
    let mut heap = std::collections::BinaryHeap::from([first]);
    while total > tol && heap.len() < MAX_PANELS {
        let worst = heap.pop().expect("heap is never empty");
        let mid = (worst.lo + worst.hi) * 0.5;
        if mid == worst.lo || mid == worst.hi {
            heap.push(worst);
            break;
        }
        let (l, r) = (make(worst.lo, mid), make(mid, worst.hi));
        total += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
    }
    heap.iter().map(|p| p.val).sum()
}
