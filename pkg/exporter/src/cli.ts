#!/usr/bin/env node
/**
 * compat-export: turn a model + dataset into analyzer-ready log files.
 *
 * Exit codes mirror the analyzer: 0 success, 1 internal error, 2 user
 * error. One summary line on stdout; diagnostics on stderr.
 */
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { readDataset } from "./dataset.js";
import { exportEpochLog, exportPredictions } from "./session.js";
import { adapterFromSpec, alternatingCheckpoints } from "./stubs.js";
import { ModelAdapter, UsageError } from "./types.js";

function fail(err: unknown): never {
  const message = err instanceof Error ? err.message : String(err);
  console.error(`error: ${message}`);
  process.exit(err instanceof UsageError ? 2 : 1);
}

async function checkpointsFromSpec(spec: string, dataset: ReturnType<typeof readDataset>): Promise<ModelAdapter[]> {
  // either "alternating:<epochs>" or a comma-separated list of adapter specs
  if (spec.startsWith("alternating:")) {
    return alternatingCheckpoints(dataset, Number(spec.slice("alternating:".length)));
  }
  const out: ModelAdapter[] = [];
  for (const one of spec.split(/\s*,(?=stub:|tfjs:)/)) {
    out.push(await adapterFromSpec(one, dataset));
  }
  return out;
}

await yargs(hideBin(process.argv))
  .scriptName("compat-export")
  .command(
    "export-predictions",
    "evaluate a model on a dataset and write a prediction log",
    (y) =>
      y
        .option("dataset", { type: "string", demandOption: true, describe: "dataset JSONL path" })
        .option("out", { type: "string", demandOption: true, describe: "output log path" })
        .option("adapter", {
          type: "string",
          demandOption: true,
          describe: "stub:echo | stub:constant:<idx> | stub:softmax:<p,...> | tfjs:<model.json>",
        })
        .option("model-id", { type: "string", describe: "model_id for the log header" })
        .option("batch-size", { type: "number", default: 64 }),
    async (argv) => {
      try {
        const dataset = readDataset(argv.dataset);
        const adapter = await adapterFromSpec(argv.adapter, dataset, argv.modelId);
        const summary = await exportPredictions({
          adapter,
          dataset,
          outPath: argv.out,
          batchSize: argv.batchSize,
        });
        console.log(
          `exported=${summary.count} model=${adapter.modelId} accuracy=${summary.accuracy.toFixed(4)} out=${argv.out}`,
        );
      } catch (err) {
        fail(err);
      }
    },
  )
  .command(
    "export-epoch-log",
    "evaluate per-epoch checkpoints and write an epoch eval log",
    (y) =>
      y
        .option("dataset", { type: "string", demandOption: true })
        .option("out", { type: "string", demandOption: true })
        .option("checkpoints", {
          type: "string",
          demandOption: true,
          describe: "alternating:<epochs> or comma-separated adapter specs, one per epoch",
        })
        .option("dataset-id", { type: "string", default: "eval" })
        .option("batch-size", { type: "number", default: 64 }),
    async (argv) => {
      try {
        const dataset = readDataset(argv.dataset);
        const checkpoints = await checkpointsFromSpec(argv.checkpoints, dataset);
        const summary = await exportEpochLog(
          { dataset, outPath: argv.out, batchSize: argv.batchSize },
          checkpoints,
          argv.datasetId,
        );
        console.log(`exported=${summary.count} epochs=${summary.epochs} out=${argv.out}`);
      } catch (err) {
        fail(err);
      }
    },
  )
  .demandCommand(1)
  .strict()
  .fail((msg, err) => {
    if (err) fail(err);
    console.error(`error: ${msg}`);
    process.exit(2);
  })
  .parseAsync();
