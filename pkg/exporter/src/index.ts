export { readDataset } from "./dataset.js";
export { writeEpochLog, writePredictionLog } from "./logs.js";
export type { PredictionRow } from "./logs.js";
export { exportEpochLog, exportPredictions } from "./session.js";
export type { EpochLogSummary, PredictionSummary } from "./session.js";
export {
  adapterFromSpec,
  alternatingCheckpoints,
  constantStub,
  echoStub,
  fixedSoftmaxStub,
} from "./stubs.js";
export { ExportError, UsageError } from "./types.js";
export type { DatasetInstance, ExportSession, LoadedDataset, ModelAdapter } from "./types.js";
