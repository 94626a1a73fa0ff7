/**
 * Minimal reverse-mode autodiff over dense 2-D tensors.
 *
 * The policy networks here are small graphs (about a hundred nodes, a few
 * thousand edges), so an op-level tape on Float64Array is fast enough and
 * keeps training bit-deterministic, which the seeded-run guarantees rely
 * on. Ops only record a backward closure when some input requires grad, so
 * pure inference (serving) allocates no tape.
 */

import { sigmoid, softplus } from './numerics.js';

export class Tensor {
  data: Float64Array;
  rows: number;
  cols: number;
  grad: Float64Array | null = null;
  requiresGrad: boolean;
  parents: Tensor[] = [];
  private backprop: (() => void) | null = null;

  constructor(data: Float64Array, rows: number, cols: number, requiresGrad = false) {
    if (data.length !== rows * cols) {
      throw new Error(`tensor data length ${data.length} != ${rows}x${cols}`);
    }
    this.data = data;
    this.rows = rows;
    this.cols = cols;
    this.requiresGrad = requiresGrad;
  }

  get size(): number {
    return this.rows * this.cols;
  }

  /** Scalar value of a 1x1 tensor. */
  item(): number {
    if (this.size !== 1) throw new Error('item() on non-scalar tensor');
    return this.data[0];
  }

  ensureGrad(): Float64Array {
    if (this.grad === null) this.grad = new Float64Array(this.size);
    return this.grad;
  }

  /** Runs reverse-mode accumulation from this scalar. */
  backward(): void {
    if (this.size !== 1) throw new Error('backward() needs a scalar loss');
    const order: Tensor[] = [];
    const seen = new Set<Tensor>();
    const stack: Array<[Tensor, number]> = [[this, 0]];
    while (stack.length > 0) {
      const top = stack[stack.length - 1];
      const [node, idx] = top;
      if (idx < node.parents.length) {
        top[1] += 1;
        const parent = node.parents[idx];
        if (!seen.has(parent)) {
          seen.add(parent);
          stack.push([parent, 0]);
        }
      } else {
        stack.pop();
        order.push(node);
      }
    }
    this.ensureGrad()[0] = 1;
    for (let i = order.length - 1; i >= 0; i--) {
      const node = order[i];
      if (node.backprop !== null && node.grad !== null) node.backprop();
    }
  }

  /** Clears grads across the subgraph rooted at this tensor. */
  zeroGradGraph(): void {
    const seen = new Set<Tensor>();
    const stack: Tensor[] = [this];
    while (stack.length > 0) {
      const node = stack.pop()!;
      if (seen.has(node)) continue;
      seen.add(node);
      if (node.grad !== null) node.grad.fill(0);
      stack.push(...node.parents);
    }
  }

  static make(
    data: Float64Array,
    rows: number,
    cols: number,
    parents: Tensor[],
    backprop: (out: Tensor) => void,
  ): Tensor {
    const needsGrad = parents.some((p) => p.requiresGrad);
    const out = new Tensor(data, rows, cols, needsGrad);
    if (needsGrad) {
      out.parents = parents;
      out.backprop = () => backprop(out);
    }
    return out;
  }
}

/** Constant (leaf) tensor; never receives gradient. */
export function constant(values: ArrayLike<number>, rows: number, cols: number): Tensor {
  return new Tensor(Float64Array.from(values), rows, cols);
}

/** Trainable leaf tensor. */
export function parameter(values: ArrayLike<number>, rows: number, cols: number): Tensor {
  const t = new Tensor(Float64Array.from(values), rows, cols, true);
  t.ensureGrad();
  return t;
}

/** Stops gradient flow: same data, detached from the tape. */
export function detach(a: Tensor): Tensor {
  return new Tensor(a.data, a.rows, a.cols);
}

function sameShape(a: Tensor, b: Tensor, op: string): void {
  if (a.rows !== b.rows || a.cols !== b.cols) {
    throw new Error(`${op}: shape ${a.rows}x${a.cols} vs ${b.rows}x${b.cols}`);
  }
}

export function add(a: Tensor, b: Tensor): Tensor {
  sameShape(a, b, 'add');
  const data = new Float64Array(a.size);
  for (let i = 0; i < data.length; i++) data[i] = a.data[i] + b.data[i];
  return Tensor.make(data, a.rows, a.cols, [a, b], (out) => {
    const g = out.grad!;
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let i = 0; i < g.length; i++) ga[i] += g[i];
    }
    if (b.requiresGrad) {
      const gb = b.ensureGrad();
      for (let i = 0; i < g.length; i++) gb[i] += g[i];
    }
  });
}

export function sub(a: Tensor, b: Tensor): Tensor {
  sameShape(a, b, 'sub');
  const data = new Float64Array(a.size);
  for (let i = 0; i < data.length; i++) data[i] = a.data[i] - b.data[i];
  return Tensor.make(data, a.rows, a.cols, [a, b], (out) => {
    const g = out.grad!;
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let i = 0; i < g.length; i++) ga[i] += g[i];
    }
    if (b.requiresGrad) {
      const gb = b.ensureGrad();
      for (let i = 0; i < g.length; i++) gb[i] -= g[i];
    }
  });
}

export function mulElem(a: Tensor, b: Tensor): Tensor {
  sameShape(a, b, 'mulElem');
  const data = new Float64Array(a.size);
  for (let i = 0; i < data.length; i++) data[i] = a.data[i] * b.data[i];
  return Tensor.make(data, a.rows, a.cols, [a, b], (out) => {
    const g = out.grad!;
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let i = 0; i < g.length; i++) ga[i] += g[i] * b.data[i];
    }
    if (b.requiresGrad) {
      const gb = b.ensureGrad();
      for (let i = 0; i < g.length; i++) gb[i] += g[i] * a.data[i];
    }
  });
}

export function scale(a: Tensor, s: number): Tensor {
  const data = new Float64Array(a.size);
  for (let i = 0; i < data.length; i++) data[i] = a.data[i] * s;
  return Tensor.make(data, a.rows, a.cols, [a], (out) => {
    const g = out.grad!;
    const ga = a.ensureGrad();
    for (let i = 0; i < g.length; i++) ga[i] += g[i] * s;
  });
}

export function addScalar(a: Tensor, c: number): Tensor {
  const data = new Float64Array(a.size);
  for (let i = 0; i < data.length; i++) data[i] = a.data[i] + c;
  return Tensor.make(data, a.rows, a.cols, [a], (out) => {
    const g = out.grad!;
    const ga = a.ensureGrad();
    for (let i = 0; i < g.length; i++) ga[i] += g[i];
  });
}

export function matmul(a: Tensor, b: Tensor): Tensor {
  if (a.cols !== b.rows) {
    throw new Error(`matmul: inner dims ${a.cols} vs ${b.rows}`);
  }
  const n = a.rows;
  const k = a.cols;
  const m = b.cols;
  const data = new Float64Array(n * m);
  for (let i = 0; i < n; i++) {
    for (let p = 0; p < k; p++) {
      const av = a.data[i * k + p];
      if (av === 0) continue;
      const bRow = p * m;
      const oRow = i * m;
      for (let j = 0; j < m; j++) data[oRow + j] += av * b.data[bRow + j];
    }
  }
  return Tensor.make(data, n, m, [a, b], (out) => {
    const g = out.grad!;
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let i = 0; i < n; i++) {
        for (let p = 0; p < k; p++) {
          let acc = 0;
          const bRow = p * m;
          const oRow = i * m;
          for (let j = 0; j < m; j++) acc += g[oRow + j] * b.data[bRow + j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (b.requiresGrad) {
      const gb = b.ensureGrad();
      for (let p = 0; p < k; p++) {
        for (let i = 0; i < n; i++) {
          const av = a.data[i * k + p];
          if (av === 0) continue;
          const oRow = i * m;
          const bRow = p * m;
          for (let j = 0; j < m; j++) gb[bRow + j] += av * g[oRow + j];
        }
      }
    }
  });
}

/** Adds a 1xm bias row to every row of an nxm tensor. */
export function addBias(a: Tensor, bias: Tensor): Tensor {
  if (bias.rows !== 1 || bias.cols !== a.cols) {
    throw new Error(`addBias: bias 1x${a.cols} expected`);
  }
  const data = new Float64Array(a.size);
  for (let i = 0; i < a.rows; i++) {
    for (let j = 0; j < a.cols; j++) {
      data[i * a.cols + j] = a.data[i * a.cols + j] + bias.data[j];
    }
  }
  return Tensor.make(data, a.rows, a.cols, [a, bias], (out) => {
    const g = out.grad!;
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let i = 0; i < g.length; i++) ga[i] += g[i];
    }
    if (bias.requiresGrad) {
      const gb = bias.ensureGrad();
      for (let i = 0; i < a.rows; i++) {
        for (let j = 0; j < a.cols; j++) gb[j] += g[i * a.cols + j];
      }
    }
  });
}

export function leakyRelu(a: Tensor, slope = 0.2): Tensor {
  const data = new Float64Array(a.size);
  for (let i = 0; i < data.length; i++) {
    const v = a.data[i];
    data[i] = v > 0 ? v : slope * v;
  }
  return Tensor.make(data, a.rows, a.cols, [a], (out) => {
    const g = out.grad!;
    const ga = a.ensureGrad();
    for (let i = 0; i < g.length; i++) {
      ga[i] += g[i] * (a.data[i] > 0 ? 1 : slope);
    }
  });
}

export function tanhT(a: Tensor): Tensor {
  const data = new Float64Array(a.size);
  for (let i = 0; i < data.length; i++) data[i] = Math.tanh(a.data[i]);
  return Tensor.make(data, a.rows, a.cols, [a], (out) => {
    const g = out.grad!;
    const ga = a.ensureGrad();
    for (let i = 0; i < g.length; i++) ga[i] += g[i] * (1 - data[i] * data[i]);
  });
}

export function softplusT(a: Tensor): Tensor {
  const data = new Float64Array(a.size);
  for (let i = 0; i < data.length; i++) data[i] = softplus(a.data[i]);
  return Tensor.make(data, a.rows, a.cols, [a], (out) => {
    const g = out.grad!;
    const ga = a.ensureGrad();
    for (let i = 0; i < g.length; i++) ga[i] += g[i] * sigmoid(a.data[i]);
  });
}

/** Selects rows of a by index; backward scatter-adds into a. */
export function gatherRows(a: Tensor, index: Int32Array): Tensor {
  const d = a.cols;
  const data = new Float64Array(index.length * d);
  for (let e = 0; e < index.length; e++) {
    const src = index[e] * d;
    data.set(a.data.subarray(src, src + d), e * d);
  }
  return Tensor.make(data, index.length, d, [a], (out) => {
    const g = out.grad!;
    const ga = a.ensureGrad();
    for (let e = 0; e < index.length; e++) {
      const dst = index[e] * d;
      const src = e * d;
      for (let j = 0; j < d; j++) ga[dst + j] += g[src + j];
    }
  });
}

/** Horizontal concatenation of tensors with equal row counts. */
export function concatCols(parts: Tensor[]): Tensor {
  const rows = parts[0].rows;
  let cols = 0;
  for (const p of parts) {
    if (p.rows !== rows) throw new Error('concatCols: row mismatch');
    cols += p.cols;
  }
  const data = new Float64Array(rows * cols);
  let offset = 0;
  for (const p of parts) {
    for (let i = 0; i < rows; i++) {
      data.set(p.data.subarray(i * p.cols, (i + 1) * p.cols), i * cols + offset);
    }
    offset += p.cols;
  }
  return Tensor.make(data, rows, cols, parts, (out) => {
    const g = out.grad!;
    let off = 0;
    for (const p of parts) {
      if (p.requiresGrad) {
        const gp = p.ensureGrad();
        for (let i = 0; i < rows; i++) {
          for (let j = 0; j < p.cols; j++) {
            gp[i * p.cols + j] += g[i * cols + off + j];
          }
        }
      }
      off += p.cols;
    }
  });
}

/**
 * Softmax of an mx1 score vector within segments. Entries sharing a segment
 * id normalize together; nothing leaks across segments, which is what
 * restricts attention to actual graph neighborhoods.
 */
export function segmentSoftmax(scores: Tensor, segment: Int32Array, nSegments: number): Tensor {
  if (scores.cols !== 1) throw new Error('segmentSoftmax: mx1 expected');
  const m = scores.rows;
  const maxes = new Float64Array(nSegments).fill(-Infinity);
  for (let e = 0; e < m; e++) {
    const s = segment[e];
    if (scores.data[e] > maxes[s]) maxes[s] = scores.data[e];
  }
  const sums = new Float64Array(nSegments);
  const data = new Float64Array(m);
  for (let e = 0; e < m; e++) {
    data[e] = Math.exp(scores.data[e] - maxes[segment[e]]);
    sums[segment[e]] += data[e];
  }
  for (let e = 0; e < m; e++) data[e] /= sums[segment[e]];
  return Tensor.make(data, m, 1, [scores], (out) => {
    const g = out.grad!;
    const gs = scores.ensureGrad();
    const inner = new Float64Array(nSegments);
    for (let e = 0; e < m; e++) inner[segment[e]] += g[e] * data[e];
    for (let e = 0; e < m; e++) {
      gs[e] += data[e] * (g[e] - inner[segment[e]]);
    }
  });
}

/** Scatter-adds mxd rows into nSegments buckets; backward is a gather. */
export function segmentSum(values: Tensor, segment: Int32Array, nSegments: number): Tensor {
  const d = values.cols;
  const data = new Float64Array(nSegments * d);
  for (let e = 0; e < values.rows; e++) {
    const dst = segment[e] * d;
    const src = e * d;
    for (let j = 0; j < d; j++) data[dst + j] += values.data[src + j];
  }
  return Tensor.make(data, nSegments, d, [values], (out) => {
    const g = out.grad!;
    const gv = values.ensureGrad();
    for (let e = 0; e < values.rows; e++) {
      const src = segment[e] * d;
      const dst = e * d;
      for (let j = 0; j < d; j++) gv[dst + j] += g[src + j];
    }
  });
}

/** Multiplies each row of an mxd tensor by the matching mx1 scale. */
export function scaleRows(values: Tensor, scales: Tensor): Tensor {
  if (scales.cols !== 1 || scales.rows !== values.rows) {
    throw new Error('scaleRows: mx1 scales expected');
  }
  const d = values.cols;
  const data = new Float64Array(values.size);
  for (let i = 0; i < values.rows; i++) {
    const s = scales.data[i];
    for (let j = 0; j < d; j++) data[i * d + j] = values.data[i * d + j] * s;
  }
  return Tensor.make(data, values.rows, d, [values, scales], (out) => {
    const g = out.grad!;
    if (values.requiresGrad) {
      const gv = values.ensureGrad();
      for (let i = 0; i < values.rows; i++) {
        const s = scales.data[i];
        for (let j = 0; j < d; j++) gv[i * d + j] += g[i * d + j] * s;
      }
    }
    if (scales.requiresGrad) {
      const gs = scales.ensureGrad();
      for (let i = 0; i < values.rows; i++) {
        let acc = 0;
        for (let j = 0; j < d; j++) acc += g[i * d + j] * values.data[i * d + j];
        gs[i] += acc;
      }
    }
  });
}

/** Column means over rows: nxd -> 1xd. */
export function meanRows(a: Tensor): Tensor {
  const d = a.cols;
  const data = new Float64Array(d);
  for (let i = 0; i < a.rows; i++) {
    for (let j = 0; j < d; j++) data[j] += a.data[i * d + j];
  }
  const inv = a.rows > 0 ? 1 / a.rows : 0;
  for (let j = 0; j < d; j++) data[j] *= inv;
  return Tensor.make(data, 1, d, [a], (out) => {
    const g = out.grad!;
    const ga = a.ensureGrad();
    for (let i = 0; i < a.rows; i++) {
      for (let j = 0; j < d; j++) ga[i * d + j] += g[j] * inv;
    }
  });
}

export function sumAll(a: Tensor): Tensor {
  let total = 0;
  for (let i = 0; i < a.size; i++) total += a.data[i];
  return Tensor.make(new Float64Array([total]), 1, 1, [a], (out) => {
    const g = out.grad![0];
    const ga = a.ensureGrad();
    for (let i = 0; i < ga.length; i++) ga[i] += g;
  });
}

export function square(a: Tensor): Tensor {
  const data = new Float64Array(a.size);
  for (let i = 0; i < data.length; i++) data[i] = a.data[i] * a.data[i];
  return Tensor.make(data, a.rows, a.cols, [a], (out) => {
    const g = out.grad!;
    const ga = a.ensureGrad();
    for (let i = 0; i < g.length; i++) ga[i] += 2 * g[i] * a.data[i];
  });
}
