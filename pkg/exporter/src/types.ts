/**
 * A model from any framework, reduced to batched class-probability
 * prediction. `startIndex` is the batch's offset into the dataset so
 * dataset-aware stubs (echo, alternating) can look up ground truth;
 * real-framework adapters ignore it.
 */
export interface ModelAdapter {
  readonly modelId: string;
  predictProba(batch: number[][], startIndex: number): Promise<number[][]> | number[][];
}

export interface DatasetInstance {
  id: string;
  x: number[];
  y: number;
  groups: string[] | null;
}

export interface LoadedDataset {
  labelSet: number[];
  featureShape: number[] | null;
  instances: DatasetInstance[];
}

export interface ExportSession {
  adapter: ModelAdapter;
  dataset: LoadedDataset;
  outPath: string;
  /** dataset label -> index into the probability vector; defaults to label-set order */
  labelMap?: Map<number, number>;
  batchSize?: number;
}

export class ExportError extends Error {}

/** User-level problems (bad files, bad arguments): CLI exit 2. */
export class UsageError extends ExportError {}
