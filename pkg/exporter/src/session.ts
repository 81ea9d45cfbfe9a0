import { ExportError, ExportSession, LoadedDataset, ModelAdapter, UsageError } from "./types.js";
import { PredictionRow, writeEpochLog, writePredictionLog } from "./logs.js";

const DEFAULT_BATCH = 64;

function labelMapFor(session: { dataset: LoadedDataset; labelMap?: Map<number, number> }): Map<number, number> {
  if (session.labelMap) {
    for (const label of session.dataset.labelSet) {
      if (!session.labelMap.has(label)) {
        throw new UsageError(`label map misses dataset label ${label}`);
      }
    }
    return session.labelMap;
  }
  return new Map(session.dataset.labelSet.map((label, index) => [label, index]));
}

interface Prediction {
  pred: number;
  conf: number;
}

async function predictAll(
  adapter: ModelAdapter,
  dataset: LoadedDataset,
  labelMap: Map<number, number>,
  batchSize: number,
): Promise<Prediction[]> {
  // probability index -> dataset label, inverted from the label map
  const indexToLabel = new Map<number, number>();
  for (const [label, index] of labelMap) indexToLabel.set(index, label);

  const out: Prediction[] = [];
  for (let start = 0; start < dataset.instances.length; start += batchSize) {
    const batch = dataset.instances.slice(start, start + batchSize);
    let probs: number[][];
    try {
      probs = await adapter.predictProba(batch.map((inst) => inst.x), start);
    } catch (err) {
      throw new ExportError(
        `model ${adapter.modelId}: prediction failed at example index ${start}: ${(err as Error).message}`,
      );
    }
    if (probs.length !== batch.length) {
      throw new ExportError(
        `model ${adapter.modelId}: got ${probs.length} rows for a batch of ${batch.length} at example index ${start}`,
      );
    }
    probs.forEach((p, j) => {
      const index = start + j;
      if (p.length !== dataset.labelSet.length || p.some((v) => !Number.isFinite(v))) {
        throw new ExportError(
          `model ${adapter.modelId}: bad probability vector at example index ${index}`,
        );
      }
      let best = 0;
      for (let k = 1; k < p.length; k++) {
        if (p[k] > p[best]) best = k;
      }
      const label = indexToLabel.get(best);
      if (typeof label === "undefined") {
        throw new ExportError(
          `model ${adapter.modelId}: argmax index ${best} has no label at example index ${index}`,
        );
      }
      out.push({ pred: label, conf: p[best] });
    });
  }
  return out;
}

export interface PredictionSummary {
  count: number;
  accuracy: number;
}

/**
 * Evaluate the session's model on its dataset and write a prediction log:
 * one record per example, argmax label, max-probability confidence, group
 * tags carried through unchanged.
 */
export async function exportPredictions(session: ExportSession): Promise<PredictionSummary> {
  const labelMap = labelMapFor(session);
  const preds = await predictAll(
    session.adapter,
    session.dataset,
    labelMap,
    session.batchSize ?? DEFAULT_BATCH,
  );
  const rows: PredictionRow[] = session.dataset.instances.map((inst, i) => ({
    id: inst.id,
    y: inst.y,
    pred: preds[i].pred,
    conf: preds[i].conf,
    groups: inst.groups,
  }));
  writePredictionLog(session.outPath, session.adapter.modelId, session.dataset.labelSet, rows);
  const correct = rows.filter((row) => row.pred === row.y).length;
  return { count: rows.length, accuracy: rows.length ? correct / rows.length : 0 };
}

export interface EpochLogSummary {
  epochs: number;
  count: number;
}

/**
 * Evaluate one checkpoint per epoch and write an epoch-eval log with the
 * ids each checkpoint predicted correctly, in checkpoint order.
 */
export async function exportEpochLog(
  session: Omit<ExportSession, "adapter">,
  checkpoints: ModelAdapter[],
  datasetId = "eval",
): Promise<EpochLogSummary> {
  if (checkpoints.length === 0) {
    throw new UsageError("epoch log export needs at least one checkpoint");
  }
  const labelMap = labelMapFor(session);
  const perEpoch: string[][] = [];
  for (let epoch = 0; epoch < checkpoints.length; epoch++) {
    let preds: Prediction[];
    try {
      preds = await predictAll(
        checkpoints[epoch],
        session.dataset,
        labelMap,
        session.batchSize ?? DEFAULT_BATCH,
      );
    } catch (err) {
      throw new ExportError(`checkpoint for epoch ${epoch}: ${(err as Error).message}`);
    }
    perEpoch.push(
      session.dataset.instances.filter((inst, i) => preds[i].pred === inst.y).map((inst) => inst.id),
    );
  }
  writeEpochLog(
    session.outPath,
    datasetId,
    session.dataset.instances.map((inst) => inst.id),
    perEpoch,
  );
  return { epochs: checkpoints.length, count: session.dataset.instances.length };
}
