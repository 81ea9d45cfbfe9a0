import { LoadedDataset, ModelAdapter, UsageError } from "./types.js";

/** Always predicts the class at `labelIndex` with probability 1. */
export function constantStub(labelCount: number, labelIndex: number, modelId = "stub-constant"): ModelAdapter {
  if (labelIndex < 0 || labelIndex >= labelCount) {
    throw new UsageError(`constant stub index ${labelIndex} outside [0, ${labelCount})`);
  }
  const row = Array.from({ length: labelCount }, (_, k) => (k === labelIndex ? 1 : 0));
  return {
    modelId,
    predictProba(batch) {
      return batch.map(() => [...row]);
    },
  };
}

/** Predicts every example's true label with probability 1. */
export function echoStub(dataset: LoadedDataset, modelId = "stub-echo"): ModelAdapter {
  const indexOf = new Map(dataset.labelSet.map((label, index) => [label, index]));
  return {
    modelId,
    predictProba(batch, startIndex) {
      return batch.map((_, j) => {
        const inst = dataset.instances[startIndex + j];
        const row = new Array(dataset.labelSet.length).fill(0);
        row[indexOf.get(inst.y)!] = 1;
        return row;
      });
    },
  };
}

/** Returns the same softmax vector for every example. */
export function fixedSoftmaxStub(probs: number[], modelId = "stub-softmax"): ModelAdapter {
  const total = probs.reduce((a, b) => a + b, 0);
  if (probs.length === 0 || Math.abs(total - 1) > 1e-9 || probs.some((p) => p < 0)) {
    throw new UsageError(`fixed softmax must be a distribution, got [${probs.join(", ")}]`);
  }
  return {
    modelId,
    predictProba(batch) {
      return batch.map(() => [...probs]);
    },
  };
}

/**
 * Checkpoints whose correctness alternates by epoch: even epochs echo the
 * true label, odd epochs cyclically shift it to the next class. Feeding
 * these to the epoch-log export yields the 1,0,1,0,... correctness pattern.
 */
export function alternatingCheckpoints(
  dataset: LoadedDataset,
  epochs: number,
  modelId = "stub-alternating",
): ModelAdapter[] {
  if (epochs < 1) {
    throw new UsageError("alternating stub needs at least one epoch");
  }
  const indexOf = new Map(dataset.labelSet.map((label, index) => [label, index]));
  const n = dataset.labelSet.length;
  return Array.from({ length: epochs }, (_, epoch) => ({
    modelId: `${modelId}-e${epoch}`,
    predictProba(batch: number[][], startIndex: number) {
      return batch.map((_, j) => {
        const inst = dataset.instances[startIndex + j];
        const trueIndex = indexOf.get(inst.y)!;
        const predicted = epoch % 2 === 0 ? trueIndex : (trueIndex + 1) % n;
        const row = new Array(n).fill(0);
        row[predicted] = 1;
        return row;
      });
    },
  }));
}

/**
 * Build an adapter from a CLI spec string:
 *   stub:echo | stub:constant:<idx> | stub:softmax:<p0,p1,...> |
 *   stub:alternating:<epoch> | tfjs:<model.json>
 */
export async function adapterFromSpec(
  spec: string,
  dataset: LoadedDataset,
  modelId?: string,
): Promise<ModelAdapter> {
  const parts = spec.split(":");
  if (parts[0] === "stub") {
    switch (parts[1]) {
      case "echo":
        return echoStub(dataset, modelId ?? "stub-echo");
      case "constant":
        return constantStub(dataset.labelSet.length, Number(parts[2] ?? 0), modelId ?? "stub-constant");
      case "softmax":
        if (!parts[2]) throw new UsageError("stub:softmax needs probabilities, e.g. stub:softmax:0.2,0.5,0.3");
        return fixedSoftmaxStub(parts[2].split(",").map(Number), modelId ?? "stub-softmax");
      case "alternating": {
        const epoch = Number(parts[2] ?? 0);
        const all = alternatingCheckpoints(dataset, epoch + 1, modelId ?? "stub-alternating");
        return all[epoch];
      }
      default:
        throw new UsageError(`unknown stub kind ${parts[1] ?? "(none)"}`);
    }
  }
  if (parts[0] === "tfjs") {
    const { tfjsAdapter } = await import("./adapters/tfjs.js");
    return tfjsAdapter(spec.slice("tfjs:".length), modelId ?? "tfjs-model");
  }
  throw new UsageError(`unknown adapter spec '${spec}'`);
}
