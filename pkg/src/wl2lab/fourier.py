"""Discrete Fourier analysis on the circle.

Conventions used throughout the library:

* the circle has unit circumference; a point is a fraction t in [0, 1)
  and the angle is 2*pi*t;
* the measure dm has total mass 1, so the index-0 coefficient of a
  function is its mean and quadrature uses weight 1/G per sample;
* grids have a power-of-two number of points;
* a coefficient vector of degree N stores c_n for -N <= n <= N in a
  dense array indexed by n + N.

The transform is a self-contained radix-2 implementation; nothing in
this module depends on an external FFT.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CoeffVector",
    "GridFunction",
    "WeightedNormReport",
    "dft",
    "idft",
    "pointwise_product",
    "fejer_mean",
    "weighted_norm",
    "wiener_bound",
    "rotate",
    "shift_frequencies",
    "write_coeff_csv",
    "read_coeff_csv",
]


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    g = 1
    while g < n:
        g <<= 1
    return g


# ---------------------------------------------------------------------------
# radix-2 transform
#
# Iterative radix-2 butterflies for sizes that stay cache-resident, a
# four-step (matrix) decomposition above that, and a packed half-size
# path for real input.  No normalization here; dft divides by the grid
# size so that the constant function has c_0 = 1.

_REV_CACHE: dict[int, np.ndarray] = {}
_TWIDDLE_CACHE: dict[tuple[int, int], np.ndarray] = {}
_SMALL_FFT_LIMIT = 1 << 14


def _bit_reversal(n: int) -> np.ndarray:
    idx = _REV_CACHE.get(n)
    if idx is None:
        bits = n.bit_length() - 1
        idx = np.zeros(n, dtype=np.intp)
        for b in range(bits):
            idx |= ((np.arange(n) >> b) & 1) << (bits - 1 - b)
        _REV_CACHE[n] = idx
    return idx


def _stage_twiddle(span: int, sign: int) -> np.ndarray:
    key = (span, sign)
    tw = _TWIDDLE_CACHE.get(key)
    if tw is None:
        tw = np.exp(sign * 2j * np.pi * np.arange(span) / (2 * span))
        if span <= _SMALL_FFT_LIMIT:
            _TWIDDLE_CACHE[key] = tw
    return tw


def _fft_batch(values: np.ndarray, sign: int) -> np.ndarray:
    """Radix-2 along the last axis of a (..., n) array."""
    n = values.shape[-1]
    # advanced indexing may return a non-contiguous array; the butterfly
    # stages below write through flat reshapes, which need contiguity
    out = np.ascontiguousarray(
        np.asarray(values, dtype=np.complex128)[..., _bit_reversal(n)]
    )
    if n < 2:
        return out
    scratch = np.empty(out.size // 2, dtype=np.complex128)
    span = 1
    while span < n:
        tw = _stage_twiddle(span, sign)
        blocks = out.reshape(-1, 2 * span)
        upper = scratch.reshape(blocks.shape[0], span)
        np.multiply(blocks[:, span:], tw, out=upper)
        np.subtract(blocks[:, :span], upper, out=blocks[:, span:])
        np.add(blocks[:, :span], upper, out=blocks[:, :span])
        span *= 2
    return out


def _radix2(values: np.ndarray, sign: int) -> np.ndarray:
    """Length-n transform, sign=-1 forward, +1 inverse (unnormalized)."""
    values = np.asarray(values)
    n = len(values)
    if not is_power_of_two(n):
        raise ValueError(f"transform size {n} is not a power of two")
    if n <= _SMALL_FFT_LIMIT:
        return _fft_batch(values, sign)
    # four-step: view as n1 x n2, transform columns, twiddle, transform rows
    lg = n.bit_length() - 1
    n1 = 1 << (lg // 2)
    n2 = n // n1
    a = np.ascontiguousarray(values.reshape(n2, n1).T)
    a = _fft_batch(a, sign)  # rows: index [k1, j2]
    k1 = np.arange(n1).reshape(-1, 1)
    j2 = np.arange(n2)
    a *= np.exp(sign * 2j * np.pi / n * (k1 * j2))
    a = np.ascontiguousarray(a.T)  # [j2, k1]
    a = _fft_batch(a, sign)  # [j2, j1]
    return np.ascontiguousarray(a.T).reshape(n)


def _radix2_real(values: np.ndarray, sign: int) -> np.ndarray:
    """Transform of real input via one half-size complex transform."""
    n = len(values)
    if n <= 2:
        return _radix2(values.astype(np.complex128), sign)
    packed = values[0::2] + 1j * values[1::2]
    Z = _radix2(packed, sign)
    half = n // 2
    k = np.arange(half)
    Zr = np.conj(Z[(-k) % half])
    even = 0.5 * (Z + Zr)
    odd = -0.5j * (Z - Zr) * np.exp(sign * 2j * np.pi * k / n)
    out = np.empty(n, dtype=np.complex128)
    out[:half] = even + odd
    out[half] = np.real(Z[0]) - np.imag(Z[0]) + 0j
    out[half + 1 :] = np.conj(out[1:half][::-1])
    return out


# ---------------------------------------------------------------------------
# domain types


@dataclass
class CoeffVector:
    """Two-sided coefficient array c_n, -N <= n <= N, indexed by n + N."""

    coeffs: np.ndarray
    real_valued: bool = False

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.ndim != 1 or len(self.coeffs) % 2 != 1:
            raise ValueError("coefficient array must be 1-d with odd length 2N+1")

    @property
    def degree(self) -> int:
        return (len(self.coeffs) - 1) // 2

    @classmethod
    def zeros(cls, degree: int, real_valued: bool = False) -> "CoeffVector":
        return cls(np.zeros(2 * degree + 1, dtype=np.complex128), real_valued)

    @classmethod
    def delta(cls, n: int = 0, value: complex = 1.0, degree: int | None = None) -> "CoeffVector":
        deg = abs(n) if degree is None else degree
        c = cls.zeros(deg)
        c.coeffs[n + deg] = value
        return c

    def at(self, n: int) -> complex:
        if abs(n) > self.degree:
            return 0.0 + 0.0j
        return complex(self.coeffs[n + self.degree])

    def indices(self) -> np.ndarray:
        return np.arange(-self.degree, self.degree + 1)

    def padded_to(self, degree: int) -> "CoeffVector":
        if degree < self.degree:
            raise ValueError("padding cannot shrink the degree")
        if degree == self.degree:
            return CoeffVector(self.coeffs.copy(), self.real_valued)
        pad = degree - self.degree
        return CoeffVector(np.pad(self.coeffs, (pad, pad)), self.real_valued)

    def trimmed(self, degree: int) -> "CoeffVector":
        """Drop coefficients beyond |n| = degree (hard cut, no taper)."""
        if degree >= self.degree:
            return CoeffVector(self.coeffs.copy(), self.real_valued)
        k = self.degree - degree
        return CoeffVector(self.coeffs[k:-k].copy(), self.real_valued)

    def conjugate_symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1]))))

    def enforce_real(self) -> "CoeffVector":
        """Project onto exact conjugate symmetry and flag as real-valued."""
        sym = 0.5 * (self.coeffs + np.conj(self.coeffs[::-1]))
        return CoeffVector(sym, real_valued=True)

    def l1(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def copy(self) -> "CoeffVector":
        return CoeffVector(self.coeffs.copy(), self.real_valued)


def add(a: CoeffVector, b: CoeffVector, scale: complex = 1.0) -> CoeffVector:
    """a + scale * b, padded to the larger degree."""
    deg = max(a.degree, b.degree)
    out = a.padded_to(deg)
    out.coeffs[deg - b.degree : deg + b.degree + 1] += scale * b.coeffs
    out.real_valued = a.real_valued and b.real_valued and (
        scale == np.real(scale)
    )
    return out


@dataclass
class GridFunction:
    """Samples at t_k = k/G for k = 0..G-1, G a power of two."""

    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if not is_power_of_two(len(self.samples)):
            raise ValueError(f"grid size {len(self.samples)} is not a power of two")

    @property
    def size(self) -> int:
        return len(self.samples)

    def real(self) -> np.ndarray:
        return np.real(self.samples)


@dataclass
class WeightedNormReport:
    """Weighted l2 norm plus the running partial sums that witness it."""

    value: float
    partial_sums: np.ndarray = field(repr=False)

    def as_dict(self) -> dict:
        return {"value": self.value, "partial_sums": [float(x) for x in self.partial_sums]}


# ---------------------------------------------------------------------------
# operations


def dft(g: GridFunction, degree: int | None = None) -> CoeffVector:
    """Coefficients c_n = (1/G) sum_k g(t_k) e^{-2 pi i n k / G}.

    The default degree G/2 - 1 keeps every representable mode except
    the unpaired Nyquist term.
    """
    G = g.size
    if degree is None:
        degree = G // 2 - 1
    if 2 * degree + 1 > G:
        raise ValueError(
            f"degree {degree} exceeds the Nyquist bound for grid size {G}"
            f" (need G >= 2N+1)"
        )
    if np.all(g.samples.imag == 0.0):
        full = _radix2_real(g.samples.real, -1) / G
    else:
        full = _radix2(g.samples, -1) / G
    idx = np.arange(-degree, degree + 1) % G
    return CoeffVector(full[idx])


def idft(c: CoeffVector, G: int) -> GridFunction:
    """Evaluate the polynomial on the G-point grid."""
    N = c.degree
    if G < 2 * N + 2:
        raise ValueError(f"grid size {G} undersized for degree {N} (need G >= 2N+2)")
    if not is_power_of_two(G):
        raise ValueError(f"grid size {G} is not a power of two")
    full = np.zeros(G, dtype=np.complex128)
    idx = np.arange(-N, N + 1) % G
    np.add.at(full, idx, c.coeffs)
    if G > 2 and np.array_equal(full, np.conj(full[(-np.arange(G)) % G])):
        return GridFunction(_idft_hermitian(full))
    return GridFunction(_radix2(full, +1))


def _idft_hermitian(full: np.ndarray) -> np.ndarray:
    """Inverse transform of an exactly Hermitian spectrum via half size."""
    n = len(full)
    half = n // 2
    k = np.arange(half)
    tw = np.exp(2j * np.pi * k / n)
    W = (full[:half] + full[half:]) + 1j * tw * (full[:half] - full[half:])
    z = _radix2(W, +1)
    out = np.empty(n, dtype=np.complex128)
    out[0::2] = np.real(z)
    out[1::2] = np.imag(z)
    return out


# direct convolution is used below this output-size threshold; larger
# products go through a padded transform (identical semantics, tested
# against each other)
_DIRECT_CONV_LIMIT = 1 << 22


def pointwise_product(f: CoeffVector, g: CoeffVector) -> CoeffVector:
    """Coefficients of the product function: discrete convolution of inputs."""
    n_out = 2 * (f.degree + g.degree) + 1
    if len(f.coeffs) * len(g.coeffs) <= _DIRECT_CONV_LIMIT:
        conv = np.convolve(f.coeffs, g.coeffs)
    elif _hermitian_exact(f) and _hermitian_exact(g):
        return _product_hermitian(f, g)
    else:
        size = next_power_of_two(n_out)
        fa = np.zeros(size, dtype=np.complex128)
        ga = np.zeros(size, dtype=np.complex128)
        fa[: len(f.coeffs)] = f.coeffs
        ga[: len(g.coeffs)] = g.coeffs
        conv = _radix2(_radix2(fa, -1) * _radix2(ga, -1), +1)[:n_out] / size
    out = CoeffVector(conv)
    out.real_valued = f.real_valued and g.real_valued
    return out


def _hermitian_exact(c: CoeffVector) -> bool:
    return bool(np.array_equal(c.coeffs, np.conj(c.coeffs[::-1])))


def _product_hermitian(f: CoeffVector, g: CoeffVector) -> CoeffVector:
    """Product of two real-valued polynomials via real grid evaluation.

    Both factors are evaluated on a grid past the product's Nyquist
    bound, multiplied pointwise (real arrays), and transformed back.
    All three transforms run on the packed real path.
    """
    deg_out = f.degree + g.degree
    G = next_power_of_two(2 * deg_out + 2)
    x = idft(f, G).samples.real
    y = idft(g, G).samples.real
    spec = _radix2_real(x * y, -1) / G
    idx = np.arange(-deg_out, deg_out + 1) % G
    out = CoeffVector(spec[idx])
    out.real_valued = True
    return out


def fejer_mean(f: CoeffVector, K: int) -> CoeffVector:
    """Taper c_n by max(0, 1 - |n|/(K+1)); output degree <= K."""
    if K < 0:
        raise ValueError("Fejer degree must be nonnegative")
    deg = min(f.degree, K)
    out = f.trimmed(deg)
    n = np.abs(np.arange(-deg, deg + 1))
    out.coeffs *= np.maximum(0.0, 1.0 - n / (K + 1.0))
    out.real_valued = f.real_valued
    return out


def weighted_norm(f: CoeffVector, w) -> WeightedNormReport:
    """Norm in l2(w): value^2 = sum |c_n|^2 w_{|n|}, with partial sums."""
    N = f.degree
    wv = w.values(N)
    mags = np.abs(f.coeffs) ** 2
    # per-|n| contributions: |c_{-n}|^2 + |c_n|^2 for n >= 1, |c_0|^2 at 0
    per = mags[N:].copy()
    per[1:] += mags[:N][::-1]
    partial = np.cumsum(per * wv)
    return WeightedNormReport(value=float(np.sqrt(partial[-1])), partial_sums=partial)


def wiener_bound(f: CoeffVector, w) -> float:
    """Cauchy-Schwarz bound on sum |c_n|: ||f||_{l2(w)} * (sum 1/w_{|n|})^{1/2}."""
    N = f.degree
    wv = w.values(N)
    inv_sum = 1.0 / wv[0] + 2.0 * np.sum(1.0 / wv[1:])
    return weighted_norm(f, w).value * float(np.sqrt(inv_sum))


def rotate(c: CoeffVector, a: float) -> CoeffVector:
    """Coefficients of t -> f(t - a): c_n * e^{-2 pi i n a}."""
    n = c.indices()
    out = CoeffVector(c.coeffs * np.exp(-2j * np.pi * n * a))
    return out


def shift_frequencies(c: CoeffVector, m: int) -> CoeffVector:
    """Coefficients of zeta^m * f: support moves by m, degree grows by |m|."""
    deg = c.degree + abs(m)
    out = CoeffVector.zeros(deg)
    lo = m - c.degree + deg
    out.coeffs[lo : lo + len(c.coeffs)] = c.coeffs
    return out


# ---------------------------------------------------------------------------
# interchange formats


def write_coeff_csv(path, c: CoeffVector) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "re", "im"])
        for n, z in zip(c.indices(), c.coeffs):
            writer.writerow([int(n), repr(float(np.real(z))), repr(float(np.imag(z)))])


def read_coeff_csv(path) -> CoeffVector:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["n", "re", "im"]:
            raise ValueError(f"unexpected coefficient CSV header: {header}")
        for row in reader:
            rows.append((int(row[0]), float(row[1]), float(row[2])))
    rows.sort()
    ns = [r[0] for r in rows]
    N = max(abs(ns[0]), abs(ns[-1]))
    c = CoeffVector.zeros(N)
    for n, re, im in rows:
        c.coeffs[n + N] = re + 1j * im
    return c
