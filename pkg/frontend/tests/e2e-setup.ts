// Spawns a real `dmnbot serve` process for the end-to-end test; provides the
// base URL (or "" when the Python package is unavailable, skipping the test).

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";
import { fileURLToPath } from "node:url";
import type { TestProject } from "vitest/node";

const PYTHON = process.env.DMNBOT_PYTHON ?? "python3";

declare module "vitest" {
  interface ProvidedContext {
    e2eBase: string;
  }
}

async function waitForServer(url: string, attempts = 100): Promise<void> {
  for (let i = 0; i < attempts; i++) {
    try {
      const response = await fetch(url);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  throw new Error(`server at ${url} did not come up`);
}

export default async function setup(project: TestProject): Promise<() => Promise<void>> {
  try {
    execFileSync(PYTHON, ["-c", "import dmnbot"], { stdio: "ignore" });
  } catch {
    project.provide("e2eBase", "");
    return async () => {};
  }

  const here = path.dirname(fileURLToPath(import.meta.url));
  const fixture = path.resolve(here, "../../src/dmnbot/fixtures/risk_category.json");
  const work = mkdtempSync(path.join(tmpdir(), "dmnbot-e2e-"));
  execFileSync(
    PYTHON,
    ["-m", "dmnbot", "compile", fixture, "--out", work, "--of-params", "ExistingCustomer"],
    { stdio: "ignore" },
  );

  const port = 8700 + Math.floor(Math.random() * 800);
  const base = `http://127.0.0.1:${port}`;
  const child: ChildProcess = spawn(
    PYTHON,
    ["-m", "dmnbot", "serve", path.join(work, "bundle"), "--port", String(port)],
    { stdio: "ignore" },
  );
  await waitForServer(`${base}/agent`);
  project.provide("e2eBase", base);

  return async () => {
    child.kill("SIGTERM");
    rmSync(work, { recursive: true, force: true });
  };
}
