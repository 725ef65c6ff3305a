#!/usr/bin/env node
/** CLI entry point: pick a model and serve it over stdio or HTTP. */

import { parseArgs } from "node:util";

import { loadModel, REGISTRY } from "./model.js";
import { serveHttp, serveStdio } from "./server.js";

const USAGE = `usage: adapter --model <name> (--stdio | --port <port>) [--device cpu]

models: ${Object.keys(REGISTRY).join(", ")}`;

async function main(): Promise<number> {
  let values;
  try {
    ({ values } = parseArgs({
      options: {
        model: { type: "string", default: "sim-vit-32" },
        stdio: { type: "boolean", default: false },
        port: { type: "string" },
        device: { type: "string", default: "cpu" },
        help: { type: "boolean", default: false },
      },
    }));
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    console.error(USAGE);
    return 1;
  }
  if (values.help) {
    console.log(USAGE);
    return 0;
  }
  if (values.device !== "cpu") {
    console.error(`only --device cpu is supported, got ${values.device}`);
    return 1;
  }
  if (values.stdio === Boolean(values.port)) {
    console.error("exactly one of --stdio or --port is required");
    console.error(USAGE);
    return 1;
  }

  let model;
  try {
    model = loadModel(values.model!);
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }

  if (values.stdio) {
    await serveStdio(model);
    return 0;
  }
  const port = Number(values.port);
  if (!Number.isInteger(port) || port < 1 || port > 65535) {
    console.error(`invalid port ${values.port}`);
    return 1;
  }
  serveHttp(model, port);
  console.error(`serving ${model.spec.name} on http://127.0.0.1:${port}/`);
  return 0;
}

main().then((code) => {
  if (code !== 0) process.exit(code);
});
