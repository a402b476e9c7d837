/** Spawns a fixture-backed API server for the behavioral test suite. */

import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import type { TestProject } from "vitest/node";

let server: ChildProcess | null = null;
let workDir = "";

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address && typeof address === "object") {
        const port = address.port;
        probe.close(() => resolve(port));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

async function waitReady(baseUrl: string, timeoutMs = 60000): Promise<void> {
  const start = Date.now();
  while (Date.now() - start < timeoutMs) {
    try {
      const response = await fetch(`${baseUrl}/schema`);
      if (response.ok) return;
    } catch {
      // server still starting
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error(`API server at ${baseUrl} never became ready`);
}

export default async function setup(project: TestProject): Promise<() => void> {
  workDir = mkdtempSync(join(tmpdir(), "atlas-ui-"));
  const snapDir = join(workDir, "snap");

  const fixtureDir = spawnSync(
    "python3",
    ["-c", "from studyatlas.fixtures import fixture_dir; print(fixture_dir())"],
    { encoding: "utf-8" },
  ).stdout.trim();
  if (!fixtureDir) {
    throw new Error("could not locate the bundled fixture; is studyatlas installed?");
  }

  const ingest = spawnSync("python3", [
    "-m", "studyatlas.cli", "ingest",
    "--corpus", join(fixtureDir, "corpus.csv"),
    "--schema", join(fixtureDir, "schema.yaml"),
    "--abstracts", join(fixtureDir, "abstracts.csv"),
    "--bib", join(fixtureDir, "corpus.bib"),
    "--refs", join(fixtureDir, "refs"),
    "--out", snapDir,
  ], { encoding: "utf-8" });
  if (ingest.status !== 0) {
    throw new Error(`fixture ingest failed:\n${ingest.stdout}\n${ingest.stderr}`);
  }

  const port = await freePort();
  const baseUrl = `http://127.0.0.1:${port}`;
  server = spawn("python3", [
    "-m", "studyatlas.cli", "serve", "--dir", snapDir, "--host", "127.0.0.1", "--port", String(port),
  ], { stdio: ["ignore", "pipe", "pipe"] });
  await waitReady(baseUrl);

  project.provide("baseUrl", baseUrl);
  return () => {
    if (server && !server.killed) {
      server.kill("SIGTERM");
    }
    rmSync(workDir, { recursive: true, force: true });
  };
}

declare module "vitest" {
  export interface ProvidedContext {
    baseUrl: string;
  }
}
