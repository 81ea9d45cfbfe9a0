import { writeFileSync } from "node:fs";

export interface PredictionRow {
  id: string;
  y: number;
  pred: number;
  conf: number | null;
  groups: string[] | null;
}

/**
 * Write the analyzer's prediction-log format: a {model_id, label_set}
 * header line, then one record per line.
 */
export function writePredictionLog(
  path: string,
  modelId: string,
  labelSet: number[],
  rows: PredictionRow[],
): void {
  const lines = [JSON.stringify({ model_id: modelId, label_set: labelSet })];
  for (const row of rows) {
    lines.push(
      JSON.stringify({ id: row.id, y: row.y, pred: row.pred, conf: row.conf, groups: row.groups }),
    );
  }
  writeFileSync(path, lines.join("\n") + "\n", "utf-8");
}

/**
 * Write the analyzer's epoch-eval-log format: a {dataset_id, example_ids}
 * header line, then {"epoch": k, "correct_ids": [...]} per checkpoint in
 * the order given.
 */
export function writeEpochLog(
  path: string,
  datasetId: string,
  exampleIds: string[],
  correctIdsPerEpoch: string[][],
): void {
  const lines = [JSON.stringify({ dataset_id: datasetId, example_ids: exampleIds })];
  correctIdsPerEpoch.forEach((correctIds, epoch) => {
    lines.push(JSON.stringify({ epoch, correct_ids: correctIds }));
  });
  writeFileSync(path, lines.join("\n") + "\n", "utf-8");
}
