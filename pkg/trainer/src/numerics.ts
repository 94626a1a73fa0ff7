/**
 * Scalar special functions used by the Dirichlet policy head.
 *
 * lgamma/digamma/trigamma cover the log-density and entropy of Dir(a) and
 * their gradients with respect to the concentration vector.
 */

// Lanczos coefficients (g = 7, n = 9), accurate to ~15 significant digits.
const LANCZOS = [
  0.99999999999980993, 676.5203681218851, -1259.1392167224028,
  771.32342877765313, -176.61502916214059, 12.507343278686905,
  -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
];

const LOG_SQRT_TWO_PI = 0.9189385332046727;

/** Natural log of the gamma function for x > 0. */
export function lgamma(x: number): number {
  if (!(x > 0)) return NaN;
  if (x < 0.5) {
    // Reflection keeps the Lanczos series in its accurate range.
    return Math.log(Math.PI / Math.sin(Math.PI * x)) - lgamma(1 - x);
  }
  const z = x - 1;
  let acc = LANCZOS[0];
  for (let i = 1; i < LANCZOS.length; i++) acc += LANCZOS[i] / (z + i);
  const t = z + 7.5;
  return LOG_SQRT_TWO_PI + (z + 0.5) * Math.log(t) - t + Math.log(acc);
}

/** Digamma psi(x) for x > 0: recurrence into the asymptotic regime. */
export function digamma(x: number): number {
  if (!(x > 0)) return NaN;
  let value = 0;
  while (x < 12) {
    value -= 1 / x;
    x += 1;
  }
  const inv = 1 / x;
  const inv2 = inv * inv;
  value += Math.log(x) - 0.5 * inv;
  value -= inv2 * (1 / 12 - inv2 * (1 / 120 - inv2 * (1 / 252 - inv2 / 240)));
  return value;
}

/** Trigamma psi'(x) for x > 0. */
export function trigamma(x: number): number {
  if (!(x > 0)) return NaN;
  let value = 0;
  while (x < 12) {
    value += 1 / (x * x);
    x += 1;
  }
  const inv = 1 / x;
  const inv2 = inv * inv;
  value +=
    inv * (1 + 0.5 * inv + inv2 * (1 / 6 - inv2 * (1 / 30 - inv2 / 42)));
  return value;
}

/** Numerically stable log(1 + exp(x)). */
export function softplus(x: number): number {
  if (x > 30) return x;
  if (x < -30) return Math.exp(x);
  return Math.log1p(Math.exp(x));
}

/** Logistic sigmoid, the derivative of softplus. */
export function sigmoid(x: number): number {
  if (x >= 0) {
    const e = Math.exp(-x);
    return 1 / (1 + e);
  }
  const e = Math.exp(x);
  return e / (1 + e);
}
