/**
 * Request handling for the JSON prediction protocol.
 *
 * Requests:  {"op": "metadata"}                                    -> metadata
 *            {"id", "op": "predict", "shape": [H,W,C], "data_b64"} -> probs
 * Responses echo the request id. A malformed request yields an error
 * response; it never kills the serving loop.
 */

import { SimModel } from "./model.js";

export type Response = Record<string, unknown>;

function errorResponse(id: unknown, message: string): Response {
  return { id: id ?? null, error: message };
}

function decodePayload(b64: string, expected: number): Float32Array {
  const buf = Buffer.from(b64, "base64");
  if (buf.length !== expected * 4) {
    throw new Error(`payload holds ${buf.length / 4} float32 values, expected ${expected}`);
  }
  const out = new Float32Array(expected);
  for (let i = 0; i < expected; i++) out[i] = buf.readFloatLE(i * 4);
  return out;
}

export function handleRequest(model: SimModel, raw: unknown): Response {
  if (typeof raw !== "object" || raw === null) {
    return errorResponse(null, "request must be a JSON object");
  }
  const msg = raw as Record<string, unknown>;
  const id = msg.id;

  if (msg.op === "metadata") {
    return {
      id: id ?? null,
      num_classes: model.spec.numClasses,
      input_shape: model.spec.inputShape,
      model_name: model.spec.name,
    };
  }

  if (msg.op === "predict") {
    try {
      const shape = msg.shape;
      if (
        !Array.isArray(shape) ||
        shape.length !== 3 ||
        !shape.every((v) => Number.isInteger(v) && v > 0)
      ) {
        throw new Error(`shape must be [H, W, C], got ${JSON.stringify(shape)}`);
      }
      const declared = model.spec.inputShape;
      if (!declared.every((v, i) => v === shape[i])) {
        throw new Error(
          `shape ${JSON.stringify(shape)} does not match model input ${JSON.stringify(declared)}`
        );
      }
      if (typeof msg.data_b64 !== "string") {
        throw new Error("data_b64 must be a base64 string");
      }
      const data = decodePayload(msg.data_b64, shape[0] * shape[1] * shape[2]);
      for (const v of data) {
        if (!Number.isFinite(v)) throw new Error("payload contains non-finite values");
      }
      return { id: id ?? null, probs: Array.from(model.predict(data)) };
    } catch (err) {
      return errorResponse(id, err instanceof Error ? err.message : String(err));
    }
  }

  return errorResponse(id, `unknown op ${JSON.stringify(msg.op)}`);
}

export function handleLine(model: SimModel, line: string): Response | null {
  const trimmed = line.trim();
  if (trimmed === "") return null;
  let parsed: unknown;
  try {
    parsed = JSON.parse(trimmed);
  } catch {
    return errorResponse(null, "invalid JSON");
  }
  return handleRequest(model, parsed);
}
