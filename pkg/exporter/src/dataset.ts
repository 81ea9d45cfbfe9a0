import { readFileSync } from "node:fs";
import { DatasetInstance, LoadedDataset, UsageError } from "./types.js";

/**
 * Read the analyzer's dataset format: JSON Lines with a
 * {label_set, feature_shape} header followed by {id, x, y, groups} lines.
 */
export function readDataset(path: string): LoadedDataset {
  const text = readFileSync(path, "utf-8");
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new UsageError(`${path}: empty dataset file`);
  }
  let header: { label_set?: unknown; feature_shape?: unknown };
  try {
    header = JSON.parse(lines[0]);
  } catch (err) {
    throw new UsageError(`${path}: line 1: invalid JSON (${(err as Error).message})`);
  }
  if (!Array.isArray(header.label_set) || header.label_set.length === 0) {
    throw new UsageError(`${path}: line 1: header must carry a non-empty label_set`);
  }
  const labelSet = header.label_set.map((l) => Number(l));
  const featureShape = Array.isArray(header.feature_shape)
    ? header.feature_shape.map((v) => Number(v))
    : null;

  const instances: DatasetInstance[] = [];
  const seen = new Set<string>();
  for (let i = 1; i < lines.length; i++) {
    let obj: { id?: unknown; x?: unknown; y?: unknown; groups?: unknown };
    try {
      obj = JSON.parse(lines[i]);
    } catch (err) {
      throw new UsageError(`${path}: line ${i + 1}: invalid JSON (${(err as Error).message})`);
    }
    if (typeof obj.id === "undefined" || !Array.isArray(obj.x) || typeof obj.y === "undefined") {
      throw new UsageError(`${path}: line ${i + 1}: instance must carry id, x, and y`);
    }
    const id = String(obj.id);
    if (seen.has(id)) {
      throw new UsageError(`${path}: line ${i + 1}: duplicate example id ${id}`);
    }
    seen.add(id);
    const y = Number(obj.y);
    if (!labelSet.includes(y)) {
      throw new UsageError(`${path}: line ${i + 1}: label ${y} not in the label set`);
    }
    instances.push({
      id,
      x: (obj.x as unknown[]).map((v) => Number(v)),
      y,
      groups: Array.isArray(obj.groups) ? obj.groups.map(String) : null,
    });
  }
  return { labelSet, featureShape, instances };
}
