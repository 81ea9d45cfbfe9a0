import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { ExportError, ModelAdapter } from "../types.js";

type TF = typeof import("@tensorflow/tfjs");

/**
 * IO handler that reads a model.json plus its weight shards from disk.
 * Pure @tensorflow/tfjs ships no node file handler (that lives in
 * tfjs-node), so the exporter brings its own.
 */
function fileIOHandler(tf: TF, modelJsonPath: string): import("@tensorflow/tfjs").io.IOHandler {
  return {
    load: async () => {
      const dir = dirname(modelJsonPath);
      const modelJson = JSON.parse(readFileSync(modelJsonPath, "utf-8"));
      const weightSpecs: import("@tensorflow/tfjs").io.WeightsManifestEntry[] = [];
      const shards: Buffer[] = [];
      for (const group of modelJson.weightsManifest ?? []) {
        weightSpecs.push(...group.weights);
        for (const shard of group.paths) {
          shards.push(readFileSync(join(dir, shard)));
        }
      }
      const weightData = new Uint8Array(shards.reduce((n, b) => n + b.byteLength, 0));
      let offset = 0;
      for (const shard of shards) {
        weightData.set(shard, offset);
        offset += shard.byteLength;
      }
      return {
        modelTopology: modelJson.modelTopology,
        format: modelJson.format,
        generatedBy: modelJson.generatedBy,
        convertedBy: modelJson.convertedBy,
        weightSpecs,
        weightData: weightData.buffer,
      };
    },
  };
}

/**
 * Optional real-framework adapter: load a TensorFlow.js LayersModel from a
 * model.json path and expose its output as class probabilities.
 * @tensorflow/tfjs is an optional dependency; the import stays lazy so
 * stub-only installs work.
 */
export async function tfjsAdapter(modelPath: string, modelId: string): Promise<ModelAdapter> {
  let tf: TF;
  try {
    tf = await import("@tensorflow/tfjs");
  } catch {
    throw new ExportError(
      "the tfjs adapter needs @tensorflow/tfjs installed (npm install @tensorflow/tfjs)",
    );
  }
  let model: import("@tensorflow/tfjs").LayersModel;
  try {
    model = await tf.loadLayersModel(fileIOHandler(tf, modelPath));
  } catch (err) {
    throw new ExportError(`failed to load tfjs model from ${modelPath}: ${(err as Error).message}`);
  }
  return {
    modelId,
    predictProba(batch: number[][]) {
      return tf.tidy(() => {
        const input = tf.tensor2d(batch);
        const output = model.predict(input) as import("@tensorflow/tfjs").Tensor;
        return output.arraySync() as number[][];
      });
    },
  };
}
