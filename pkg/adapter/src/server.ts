/** Serving loops: newline-delimited JSON over stdio, or HTTP POST. */

import * as http from "node:http";
import * as readline from "node:readline";

import { SimModel } from "./model.js";
import { handleLine, handleRequest } from "./protocol.js";

export function serveStdio(model: SimModel): Promise<void> {
  return new Promise((resolve) => {
    const rl = readline.createInterface({ input: process.stdin, terminal: false });
    rl.on("line", (line) => {
      const response = handleLine(model, line);
      if (response !== null) process.stdout.write(JSON.stringify(response) + "\n");
    });
    rl.on("close", resolve);
  });
}

export function serveHttp(model: SimModel, port: number): http.Server {
  const server = http.createServer((req, res) => {
    if (req.method !== "POST") {
      res.writeHead(405, { "content-type": "application/json" });
      res.end(JSON.stringify({ error: "POST required" }));
      return;
    }
    const chunks: Buffer[] = [];
    req.on("data", (chunk) => chunks.push(chunk));
    req.on("end", () => {
      let parsed: unknown;
      try {
        parsed = JSON.parse(Buffer.concat(chunks).toString("utf-8"));
      } catch {
        res.writeHead(400, { "content-type": "application/json" });
        res.end(JSON.stringify({ error: "invalid JSON" }));
        return;
      }
      const response = handleRequest(model, parsed);
      res.writeHead(200, { "content-type": "application/json" });
      res.end(JSON.stringify(response));
    });
  });
  server.listen(port);
  return server;
}
