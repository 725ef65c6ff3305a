/**
 * Deterministic classifier backing the adapter.
 *
 * Pretrained vision-transformer weights are not fetchable in this build
 * environment, so the adapter ships a seeded linear-softmax stand-in with the
 * same serving contract: raw pixel tensors in, normalized internally,
 * probabilities out. Every weight is derived from the model name's seed, so
 * two processes serving the same model name answer identically.
 */

export interface ModelSpec {
  name: string;
  inputShape: [number, number, number]; // H, W, C
  numClasses: number;
  seed: number;
  /** per-channel normalization applied after receiving raw pixels */
  mean: number[];
  std: number[];
}

/** splitmix32: small, seedable, reproducible across platforms */
function splitmix32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x9e3779b9) >>> 0;
    let z = state;
    z = Math.imul(z ^ (z >>> 16), 0x21f0aaad);
    z = Math.imul(z ^ (z >>> 15), 0x735a2d97);
    z = z ^ (z >>> 15);
    return (z >>> 0) / 4294967296;
  };
}

/** standard normal draws via Box-Muller over the splitmix stream */
function gaussianStream(seed: number): () => number {
  const uniform = splitmix32(seed);
  let spare: number | null = null;
  return () => {
    if (spare !== null) {
      const v = spare;
      spare = null;
      return v;
    }
    let u = 0;
    while (u === 0) u = uniform();
    const r = Math.sqrt(-2 * Math.log(u));
    const theta = 2 * Math.PI * uniform();
    spare = r * Math.sin(theta);
    return r * Math.cos(theta);
  };
}

export function softmax(logits: Float64Array): Float64Array {
  let max = -Infinity;
  for (const v of logits) if (v > max) max = v;
  const out = new Float64Array(logits.length);
  let sum = 0;
  for (let i = 0; i < logits.length; i++) {
    out[i] = Math.exp(logits[i] - max);
    sum += out[i];
  }
  for (let i = 0; i < out.length; i++) out[i] /= sum;
  return out;
}

export class SimModel {
  readonly spec: ModelSpec;
  private readonly weights: Float64Array; // [numClasses][H*W*C], row-major
  private readonly biases: Float64Array;
  private readonly pixels: number;

  constructor(spec: ModelSpec) {
    this.spec = spec;
    const [h, w, c] = spec.inputShape;
    this.pixels = h * w * c;
    const draw = gaussianStream(spec.seed);
    const scale = 1 / Math.sqrt(this.pixels);
    this.weights = new Float64Array(spec.numClasses * this.pixels);
    for (let i = 0; i < this.weights.length; i++) this.weights[i] = draw() * scale;
    this.biases = new Float64Array(spec.numClasses);
    for (let i = 0; i < spec.numClasses; i++) this.biases[i] = draw() * 0.1;
  }

  /** raw row-major H x W x C pixels -> class probabilities */
  predict(data: Float32Array): Float64Array {
    if (data.length !== this.pixels) {
      throw new Error(`expected ${this.pixels} values, got ${data.length}`);
    }
    const channels = this.spec.inputShape[2];
    const logits = new Float64Array(this.spec.numClasses);
    for (let cls = 0; cls < this.spec.numClasses; cls++) {
      const offset = cls * this.pixels;
      let acc = this.biases[cls];
      for (let p = 0; p < this.pixels; p++) {
        const ch = p % channels;
        const normalized = (data[p] - this.spec.mean[ch]) / this.spec.std[ch];
        acc += normalized * this.weights[offset + p];
      }
      logits[cls] = acc;
    }
    return softmax(logits);
  }
}

export const REGISTRY: Record<string, ModelSpec> = {
  "sim-vit-32": {
    name: "sim-vit-32",
    inputShape: [32, 32, 3],
    numClasses: 16,
    seed: 1101,
    mean: [0.5, 0.5, 0.5],
    std: [0.5, 0.5, 0.5],
  },
  "sim-deit-16": {
    name: "sim-deit-16",
    inputShape: [16, 16, 3],
    numClasses: 8,
    seed: 2205,
    mean: [0.485, 0.456, 0.406],
    std: [0.229, 0.224, 0.225],
  },
};

export function loadModel(name: string): SimModel {
  const spec = REGISTRY[name];
  if (!spec) {
    throw new Error(
      `unknown model ${JSON.stringify(name)}; available: ${Object.keys(REGISTRY).join(", ")}`
    );
  }
  return new SimModel(spec);
}
