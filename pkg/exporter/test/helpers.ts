import { execFileSync, spawnSync } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "compat-exporter-"));
}

/** A small 3-class dataset file in the analyzer's format. */
export function writeSampleDataset(dir: string, n = 30): string {
  const lines = [JSON.stringify({ label_set: [0, 1, 2], feature_shape: null })];
  for (let i = 0; i < n; i++) {
    lines.push(
      JSON.stringify({
        id: `s${String(i).padStart(4, "0")}`,
        x: [i * 0.1, (i % 3) - 1, 1.0],
        y: i % 3,
        groups: i % 5 === 0 ? ["slice:rare"] : null,
      }),
    );
  }
  const path = join(dir, "dataset.jsonl");
  writeFileSync(path, lines.join("\n") + "\n", "utf-8");
  return path;
}

export interface CliResult {
  status: number;
  stdout: string;
  stderr: string;
}

/** Run this package's CLI (built form). */
export function runExporter(...args: string[]): CliResult {
  const proc = spawnSync("node", [join(import.meta.dirname, "..", "dist", "cli.js"), ...args], {
    encoding: "utf-8",
  });
  return { status: proc.status ?? -1, stdout: proc.stdout, stderr: proc.stderr };
}

/** Run the analyzer (the primary tool) via its Python module entry. */
export function runAnalyzer(...args: string[]): CliResult {
  const proc = spawnSync("python3", ["-m", "backcompat", ...args], { encoding: "utf-8" });
  return { status: proc.status ?? -1, stdout: proc.stdout, stderr: proc.stderr };
}

export function analyzerAvailable(): boolean {
  try {
    execFileSync("python3", ["-c", "import backcompat"], { stdio: "ignore" });
    return true;
  } catch {
    return false;
  }
}
